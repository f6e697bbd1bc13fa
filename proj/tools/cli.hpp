#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jjmeta::cli {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

enum class Format { csv, json };

/// One invocation: resolved inputs, output directory and the manifest.
class RunContext {
public:
    std::string subcommand;
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    std::vector<std::string> overrides;
    Format format = Format::csv;
    std::string yaml;                // config after overrides, re-emitted
    std::vector<std::string> extra;  // other arguments that shape the outputs
    std::ostream* log = nullptr;

    std::string input_hash() const;

    /// Creates out_dir and writes manifest.json with status "running".
    void begin();
    void finish(const std::string& status, const std::string& message = {});

    /// Writes a file under out_dir and lists it in the manifest. Throws IoError.
    void write(const std::string& name, const std::function<void(std::ostream&)>& body);
    void write_json(const std::string& name, const nlohmann::json& j);
    /// A table produced as CSV, stored as <stem>.csv or, with --format json,
    /// as <stem>.json holding one array per column.
    void write_table(const std::string& stem, const std::function<void(std::ostream&)>& csv);

    /// Path of a file some other writer will create, listed in the manifest.
    std::filesystem::path add_file(const std::string& name);

    const std::vector<std::string>& files() const { return files_; }

private:
    void write_manifest();

    nlohmann::json manifest_;
    std::vector<std::string> files_;
};

/// Column-wise JSON from CSV text: {"col": [v, ...], ...}, numbers parsed where possible.
nlohmann::json csv_to_json(std::string_view csv);

void cmd_dispersion(RunContext& ctx);
void cmd_modes(RunContext& ctx);
void cmd_fdtd(RunContext& ctx);
void cmd_spectrum(RunContext& ctx, const std::filesystem::path& input);
void cmd_pattern(RunContext& ctx);
void cmd_sizzle(RunContext& ctx);
void cmd_budget(RunContext& ctx, const std::string& sweep);

extern const std::vector<std::string> figure_ids;
/// Canned YAML for a figure id. Throws ConfigError for an unknown id.
std::string figure_preset(const std::string& id);
void cmd_reproduce(RunContext& ctx, const std::string& id);

/// Full command line; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace jjmeta::cli

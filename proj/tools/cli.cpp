#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "jjmeta/config.hpp"
#include "jjmeta/errors.hpp"

#ifndef JJMETA_VERSION
#define JJMETA_VERSION "unknown"
#endif

namespace jjmeta::cli {

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

std::string RunContext::input_hash() const {
    std::string key = subcommand + '\n' + (format == Format::json ? "json" : "csv") + '\n' + yaml;
    for (const auto& e : extra) key += '\n' + e;
    return hex64(fnv1a(key));
}

void RunContext::begin() {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    manifest_ = {
        {"tool", "jjmeta"},
        {"code_version", JJMETA_VERSION},
        {"subcommand", subcommand},
        {"arguments", extra},
        {"config_path", config_path.string()},
        {"output_dir", out_dir.string()},
        {"overrides", overrides},
        {"format", format == Format::json ? "json" : "csv"},
        {"input_hash", input_hash()},
        {"started_utc", utc_now()},
        {"finished_utc", nullptr},
        {"status", "running"},
        {"files", nlohmann::json::array()},
    };
    write_manifest();
}

void RunContext::finish(const std::string& status, const std::string& message) {
    if (manifest_.is_null()) return;
    manifest_["finished_utc"] = utc_now();
    manifest_["status"] = status;
    if (!message.empty()) manifest_["message"] = message;
    manifest_["files"] = files_;
    write_manifest();
}

void RunContext::write_manifest() {
    const auto path = out_dir / "manifest.json";
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << manifest_.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

void RunContext::write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = out_dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    body(os);
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
    files_.push_back(name);
    if (log) *log << "  " << path.string() << '\n';
}

std::filesystem::path RunContext::add_file(const std::string& name) {
    const auto path = out_dir / name;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    files_.push_back(name);
    if (log) *log << "  " << path.string() << '\n';
    return path;
}

void RunContext::write_json(const std::string& name, const nlohmann::json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void RunContext::write_table(const std::string& stem, const std::function<void(std::ostream&)>& csv) {
    if (format == Format::csv) {
        write(stem + ".csv", csv);
        return;
    }
    std::ostringstream ss;
    csv(ss);
    write_json(stem + ".json", csv_to_json(ss.str()));
}

nlohmann::json csv_to_json(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    std::vector<std::string> cols;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
        if (!l.empty() && l.back() == ',') out.emplace_back();
        return out;
    };
    if (std::getline(in, line)) cols = split(line);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& c : cols) out[c] = nlohmann::json::array();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::string cell = i < cells.size() ? cells[i] : std::string{};
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (!cell.empty() && end == cell.c_str() + cell.size()) {
                if (std::isfinite(v)) out[cols[i]].push_back(v);
                else out[cols[i]].push_back(nullptr);
            } else {
                out[cols[i]].push_back(cell);
            }
        }
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Space-time modulated Josephson junction line toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", JJMETA_VERSION);

    std::string config, outdir, format = "csv", sweep, input, figure;
    std::vector<std::string> overrides;
    auto common = [&](CLI::App* s) {
        s->add_option("--config,-c", config, "YAML scenario file");
        s->add_option("--out,-o", outdir, "output directory (default runs/<command>-<hash>)");
        s->add_option("--override", overrides, "dot-path override, key.path=value")->take_all();
        s->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
        return s;
    };
    common(app.add_subcommand("dispersion", "Floquet dispersion bands"));
    common(app.add_subcommand("modes", "coupled-mode energy exchange"));
    common(app.add_subcommand("fdtd", "time-domain simulation with probes and snapshots"));
    common(app.add_subcommand("spectrum", "harmonic spectrum of a probe"))
        ->add_option("--input", input, "probe CSV from an fdtd run (otherwise the scenario is run)");
    common(app.add_subcommand("pattern", "far-field pattern and beam plan"));
    common(app.add_subcommand("sizzle", "static and drive-induced ZZ map"));
    common(app.add_subcommand("budget", "thermal budget and gate fidelity report"))
        ->add_option("--sweep", sweep, "key=v1,v2,... sweeps one input");
    auto* rep = common(app.add_subcommand("reproduce", "canned figure scenarios"));
    rep->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(figure_ids));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    RunContext ctx;
    auto close = [&](const char* what) {
        try {
            ctx.finish("error", what);
        } catch (const std::exception&) {
        }
    };
    ctx.subcommand = app.get_subcommands().front()->get_name();
    ctx.overrides = overrides;
    ctx.format = format == "json" ? Format::json : Format::csv;
    ctx.log = &out;
    try {
        std::string text;
        if (ctx.subcommand == "reproduce") {
            if (!config.empty()) throw ConfigError("--config", "reproduce runs canned scenarios; use --override");
            text = figure_preset(figure);
            ctx.extra.push_back(figure);
        } else if (!config.empty()) {
            ctx.config_path = config;
            text = read_file(config);
        }
        if (!sweep.empty()) ctx.extra.push_back("sweep=" + sweep);
        if (!input.empty()) ctx.extra.push_back("input=" + input + "#" + hex64(fnv1a(read_file(input))));
        ctx.yaml = resolve_yaml(text, overrides);
        parse_config(ctx.yaml);  // scenario sections are checked before anything is written

        const std::string stem = ctx.subcommand == "reproduce" ? figure : ctx.subcommand;
        ctx.out_dir = outdir.empty() ? std::filesystem::path("runs") / (stem + "-" + ctx.input_hash().substr(0, 12))
                                     : std::filesystem::path(outdir);
        out << ctx.subcommand << (figure.empty() ? "" : " " + figure) << " -> " << ctx.out_dir.string() << '\n';
        ctx.begin();

        if (ctx.subcommand == "dispersion") cmd_dispersion(ctx);
        else if (ctx.subcommand == "modes") cmd_modes(ctx);
        else if (ctx.subcommand == "fdtd") cmd_fdtd(ctx);
        else if (ctx.subcommand == "spectrum") cmd_spectrum(ctx, input);
        else if (ctx.subcommand == "pattern") cmd_pattern(ctx);
        else if (ctx.subcommand == "sizzle") cmd_sizzle(ctx);
        else if (ctx.subcommand == "budget") cmd_budget(ctx, sweep);
        else cmd_reproduce(ctx, figure);
        ctx.finish("ok");
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        close(e.what());
        return 2;
    } catch (const PreconditionError& e) {
        err << "invalid input: " << e.what() << '\n';
        close(e.what());
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        close(e.what());
        return 3;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace jjmeta::cli

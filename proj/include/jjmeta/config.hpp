#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "jjmeta/constants.hpp"

namespace jjmeta {

/// Per-cell lattice parameters of the capacitively shunted junction line.
/// Stored per cell; use the *_per_length helpers for telegrapher quantities.
struct JunctionParams {
    double critical_current = 10e-6;        // I_c0, A
    double shunt_capacitance = 100e-15;     // C_shunt, F per cell
    double junction_capacitance = 10e-15;   // C_J, F per cell
    double cell_length = 10e-6;             // a, m
    double normal_resistance = 100.0;       // R_n, ohm
    std::size_t cells = 100;                // N_cells (N_JJ per side)

    /// Bare Josephson inductance Phi0 / (2 pi I_c0) per cell.
    double josephson_inductance() const;
    double inductance_per_length() const { return josephson_inductance() / cell_length; }
    double capacitance_per_length() const { return shunt_capacitance / cell_length; }
    double junction_capacitance_per_length() const { return junction_capacitance / cell_length; }
};

enum class DriveKind { none, phase, traveling };

/// Modulation of the junction. Two depth conventions exist and at most one
/// may be non-zero per scenario: the phase drive Δφ (critical current
/// I_c0 cos(θ + Δφ cos ω_RF t)) and the traveling drive Δ_I
/// (I_c0 [1 + Δ_I cos(k_m z - ω_m t)]).
struct ModulationParams {
    std::vector<double> theta_bias{0.0};  // one value, or one per cell
    double delta_phi = 0.0;
    double delta_i = 0.0;
    double omega_rf = hz_to_rad(2e9);
    double omega_m = hz_to_rad(2e9);
    double k_m = 0.0;                     // rad/m

    DriveKind kind() const;
    double theta_at(std::size_t cell) const;
};

enum class Boundary { mur, fixed };
enum class Stencil { conservative, literal };

struct GridSpec {
    int dimension = 1;
    std::size_t nz = 2000;
    std::size_t nx = 1;
    double dz = 0.0;   // 0 in a file means λ0/25
    double dx = 0.0;   // 0 means dz
    double dt = 0.0;   // 0 means derived from the Courant limit
    double courant = 0.0;           // explicit Courant number S, overrides dt when > 0
    double courant_margin = 0.9;
    Boundary boundary = Boundary::mur;
    Stencil stencil = Stencil::conservative;
};

struct SourceSpec {
    double carrier_omega = hz_to_rad(5e9);  // rad/s; 0 gives a baseband Gaussian pulse
    double center = 1.6e-9;       // s
    double width = 0.4e-9;        // s, Gaussian sigma
    double amplitude = 1e-3;      // rad
    std::size_t z_index = 0;     // absent in a file means nz/10
    long x_index = -1;            // 2D: -1 injects along the whole x row
    bool hard = false;
};

struct ProbeSpec {
    std::string id;
    std::size_t z_index = 0;
    std::size_t x_index = 0;
};

struct RunSpec {
    std::size_t steps = 20000;
    std::size_t snapshot_every = 0;  // 0 disables snapshots
};

struct ScenarioConfig {
    JunctionParams junction;
    ModulationParams modulation;
    GridSpec grid;
    SourceSpec source;
    std::vector<ProbeSpec> probes;
    RunSpec run;
};

/// Phase velocity 1/sqrt(L'C') of the unmodulated line, m/s.
double derived_velocity(const JunctionParams& jp);

/// Largest stable Δt of the leapfrog Laplacian stencil: Δz/v in 1D and
/// 1/(v sqrt(1/Δx² + 1/Δz²)) in 2D.
double stencil_dt_limit(int dimension, double dz, double dx, double v);

/// Parse and validate a YAML scenario. Throws ConfigError.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

/// Like load_config, applying `key.path=value` overrides before validation.
ScenarioConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// The document with overrides applied, re-emitted. Sections other than the
/// scenario ones (dispersion, modes, spectrum, pattern, sizzle, budget) pass
/// through untouched for the command that reads them.
std::string resolve_yaml(std::string_view text, const std::vector<std::string>& overrides = {});

/// Re-emit a config in file units (Hz). Round-trips through parse_config.
std::string to_yaml(const ScenarioConfig& config);

/// Throws ConfigError naming the first violated invariant.
void validate(const ScenarioConfig& config);

} // namespace jjmeta

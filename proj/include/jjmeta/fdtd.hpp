#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "jjmeta/config.hpp"

namespace jjmeta::fdtd {

struct CourantReport {
    int dimension = 1;
    double courant = 0.0;        // 1D: vΔt/Δz, 2D: vΔt/sqrt(Δx²+Δz²)
    double limit = 1.0;          // 1 in 1D, 1/sqrt(2) in 2D
    double stencil_dt = 0.0;     // largest stable Δt of the explicit Laplacian
    double dt = 0.0;
    double margin = 0.0;         // limit / courant; >= 1 passes
    double default_margin = 0.9; // applied to derived Δt
    std::string binding;         // which bound is tighter at this Δt
    bool pass = false;
    std::vector<std::string> warnings;
};

CourantReport stability_check(const GridSpec& grid, const JunctionParams& jp);

/// φ on an nz × nx grid at two time levels, z fastest: index j * nz + i.
struct FieldState {
    std::size_t nz = 0;
    std::size_t nx = 1;
    std::vector<double> prev;  // φ^{n-1}
    std::vector<double> curr;  // φ^n
    std::size_t step = 0;      // n
    double t = 0.0;            // t_n

    double at(std::size_t i, std::size_t j = 0) const { return curr[j * nz + i]; }
};

/// Mur first-order update of the z edges (and x edges in 2D) of `next`,
/// given the current level. r = (vΔt - Δ)/(vΔt + Δ) per axis.
void apply_mur_boundary(std::vector<double>& next, const std::vector<double>& curr, std::size_t nz, std::size_t nx,
                        double r_z, double r_x);

double mur_coefficient(double v, double dt, double d);

/// Source waveform g(t) = A exp(-(t - t_c)²/(2σ²)) cos(ω (t - t_c)) and its derivative.
double source_value(const SourceSpec& s, double t);
double source_rate(const SourceSpec& s, double t);

class Simulation {
public:
    /// Validates the config. Throws ConfigError.
    explicit Simulation(const ScenarioConfig& config);

    /// φ^0 and ∂φ/∂t at t = 0 (zero if empty), then φ^1 by a second-order
    /// Taylor step with ∂²φ/∂t² taken from the discrete equation.
    void initialize(const std::vector<double>& phi0 = {}, const std::vector<double>& dphi0 = {});

    /// Advance one Δt. Throws NumericalError on a non-finite value or a
    /// near-singular tridiagonal system.
    void step();

    const FieldState& state() const { return state_; }
    const ScenarioConfig& config() const { return config_; }
    double velocity() const { return v_; }

    /// Critical current of the z-link between cells i and i+1 at time t.
    double link_current(std::size_t i, double t) const;

    /// Residual of the discrete equation at interior cells for three
    /// consecutive levels, with the source excluded. Boundary entries are 0.
    std::vector<double> residual(const std::vector<double>& older, const std::vector<double>& old,
                                 const std::vector<double>& next, double t_old) const;

    /// Discrete energy between the current two levels, per unit x length in 2D.
    /// Conserved by the linearised scheme with fixed boundaries.
    double energy() const;

private:
    void forcing(const std::vector<double>& phi, double t, std::vector<double>& out, bool with_source) const;
    void solve_column(std::size_t j, const std::vector<double>& rhs_base, std::vector<double>& next) const;

    ScenarioConfig config_;
    FieldState state_;
    double v_ = 0.0;
    double alpha_ = 0.0;  // C'/Δt²
    double beta_ = 0.0;   // C_J a/(Δz²Δt²)
    double r_z_ = 0.0;
    double r_x_ = 0.0;
};

struct ProbeSeries {
    std::string id;
    std::size_t z_index = 0;
    std::size_t x_index = 0;
    std::vector<double> phi;
};

struct Snapshot {
    std::size_t step = 0;
    double t = 0.0;
    std::vector<double> phi;
};

struct FieldRecord {
    std::vector<double> t;
    std::vector<ProbeSeries> probes;
    std::vector<Snapshot> snapshots;
    CourantReport courant;
};

/// Initialise, then step to run.steps, recording every probe at every level
/// (including n = 0) and a snapshot every run.snapshot_every steps.
FieldRecord run(const ScenarioConfig& config);

/// Long format: t_s,probe_id,phi_rad
void write_probe_csv(std::ostream& os, const FieldRecord& record);

/// Text header terminated by "end\n", then nz*nx little-endian float64 values,
/// z fastest. Throws IoError.
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const GridSpec& grid);
Snapshot read_snapshot(const std::filesystem::path& path, GridSpec* grid = nullptr);

} // namespace jjmeta::fdtd

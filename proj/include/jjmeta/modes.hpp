#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jjmeta/config.hpp"

namespace jjmeta::modes {

using Diagnostics = std::vector<std::string>;

/// Harmonics ω + n·step for n in [-n_h, n_h].
struct HarmonicBasis {
    double omega = 0.0;  // rad/s
    double step = 0.0;   // rad/s
    int n_h = 1;

    int size() const { return 2 * n_h + 1; }
    int row(int n) const { return n + n_h; }
    double frequency(int n) const { return omega + n * step; }
};

/// Coupled harmonic equations V_n'' + k_n² V_n + Σ_m M_{n,m} V_m = 0 under the
/// phase drive. Couples n to n ± 2 only.
struct CouplingMatrix {
    HarmonicBasis basis;
    Eigen::VectorXd k2;        // k_n², rad²/m²
    Eigen::MatrixXcd coupling;  // M_{n,m}, zero diagonal
    double delta_l = 0.0;       // δL_{±2}, H/m

    /// diag(k_n²) + M
    Eigen::MatrixXcd operator_matrix() const;
};

/// Throws PreconditionError when n_h < 1. Appends a warning to `diag` when
/// Δφ² > 0.25 (expansion outside its small-depth regime).
CouplingMatrix assemble_coupling_matrix(const JunctionParams& jp, const ModulationParams& mod,
                                        const HarmonicBasis& basis, Diagnostics* diag = nullptr);

/// Floquet matrix of the traveling drive at wavenumber k and frequency ω.
/// Harmonic n carries (k + n k_m, ω + n ω_m). Real symmetric.
Eigen::MatrixXd floquet_matrix(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                               double omega);

struct DispersionBand {
    int index = 0;
    std::vector<double> k;      // rad/m, ascending
    std::vector<double> omega;  // rad/s
};

struct DispersionScan {
    std::vector<DispersionBand> bands;  // band b holds the b-th lowest root at each k
    Diagnostics diagnostics;            // one entry per k without roots
};

struct ScanOptions {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int samples = 2000;        // sign-scan points across the window
    double rel_tol = 1e-13;    // bisection stop
};

/// All real roots ω of det A(ω; k) = 0 inside the window, ascending.
std::vector<double> dispersion_roots(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                                     const ScanOptions& opt);

/// Requires a k grid symmetric about zero and n_h >= 3.
DispersionScan dispersion_scan(const JunctionParams& jp, const ModulationParams& mod, std::span<const double> k_grid,
                               int n_h, const ScanOptions& opt);

/// The root whose null vector is dominated by harmonic 0, nearest v|k|.
/// Returns NaN if no root qualifies.
double fundamental_branch(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                          const ScanOptions& opt);

/// max over k in the grid of |ω_f(k) − ω_f(−k)| on the fundamental branch.
double dispersion_asymmetry(const JunctionParams& jp, const ModulationParams& mod, std::span<const double> k_grid,
                            int n_h, const ScanOptions& opt);

struct EvolutionSpec {
    int n_modes = 10;
    double delta_l = 0.0;
    std::vector<std::complex<double>> initial;  // Φ_n(0), n = 1..n_modes; Φ̇_n(0) = iω_n Φ_n(0)
    double duration = 0.0;                      // s
    double dt = 0.0;                            // s; 0 picks 1/100 of the fastest period
    std::size_t record_every = 1;
};

struct ModeTrajectory {
    std::vector<double> omega;                          // ω_n, n = 1..N
    std::vector<double> t;
    std::vector<std::vector<std::complex<double>>> phi;  // [sample][mode]
    std::vector<std::vector<double>> energy;             // [sample][mode]

    std::vector<double> mode_energy(int mode) const;      // 1-based mode index
};

/// Coupled-mode equations of a fixed-end line whose length makes ω_1 = ω_m,
/// so ω_n = n ω_m. Integrated in the lab frame with RK4. Throws
/// PreconditionError for dt coarser than 40 samples per fastest period and
/// NumericalError when total energy grows more than 1e6-fold.
ModeTrajectory evolve_modes(const JunctionParams& jp, const ModulationParams& mod, const EvolutionSpec& spec);

void write_bands_csv(std::ostream& os, const DispersionScan& scan);
void write_trajectory_csv(std::ostream& os, const ModeTrajectory& traj);

} // namespace jjmeta::modes

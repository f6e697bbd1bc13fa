#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "jjmeta/config.hpp"

namespace jjmeta::sizzle {

using Diagnostics = std::vector<std::string>;

/// Levels E_k = k ω01 - α k(k-1)/2 with α > 0.
struct TransmonParams {
    double omega01 = 0.0;  // rad/s
    double alpha = 0.0;    // rad/s
    int levels = 3;
    double z = 0.0;        // m
};

/// Per-mode field operators on the product Fock space, mode 0 fastest.
struct QuantizedModeSet {
    std::vector<double> omega;        // rad/s
    std::vector<double> zero_point;   // sqrt(ħ / (2 ω_n C'_J ℓ)), Wb
    double capacitance = 0.0;         // C'_J ℓ, F
    int cutoff = 0;
    std::vector<Eigen::MatrixXd> a;   // annihilators
    std::vector<Eigen::MatrixXd> phi; // Φ_n = zpf (a + a†)
    std::vector<Eigen::MatrixXcd> q;  // C dΦ_n/dt from the Heisenberg equation
    double commutator_error = 0.0;    // worst relative error on levels below cutoff - 2

    std::size_t dimension() const { return a.empty() ? 0 : std::size_t(a.front().rows()); }
};

/// ℓ = cells * a is the quantization length. Throws PreconditionError for
/// cutoff < 6, no modes, non-positive ω or C_J, or a product space above 4096.
/// Throws NumericalError if [Φ_n, Q_m] = iħ δ_nm fails at 1e-10.
QuantizedModeSet build_quantized_modes(const JunctionParams& jp, std::span<const double> omega, int cutoff);

/// g0 = α0 / sqrt(2 ħ ω_n C_J L_J0), per cell quantities.
double coupling_g0(double alpha0, double omega_n, const JunctionParams& jp);

/// g(t) = g0 (1 + Δ_L cos ω_m t). Throws PreconditionError unless 0 <= Δ_L < 1.
std::vector<double> coupling_timeseries(double g0, double delta_l, double omega_m, std::span<const double> t);

struct SidebandTerm {
    double delta = 0.0;     // coupling factor δ_{n,k}
    double detuning = 0.0;  // Δ_{n,k}, rad/s
};

/// Σ g1 g2 δ cos(k_m (z1 - z2)) / Δ. Throws PreconditionError on a zero detuning.
double j_eff(double g1, double g2, std::span<const SidebandTerm> terms, double k_m, double z1, double z2,
             Diagnostics* diag = nullptr);

/// θ |Δ12| / J². Throws PreconditionError for J = 0.
double gate_time(double j_eff, double delta12, double theta, Diagnostics* diag = nullptr);

/// g01² α / [Δ (Δ + α)]. Throws PreconditionError at Δ = 0 or Δ = -α.
double dispersive_shift(double g01, double alpha, double delta);

/// Exact ζ = E11 - E10 - E01 + E00 of two Duffing transmons with exchange
/// J (a1† a2 + h.c.). Throws NumericalError if a dressed state overlaps its
/// bare state with probability below 0.7.
double static_zz_oracle(const TransmonParams& q1, const TransmonParams& q2, double j);

/// Second-order 2J²(α1+α2) / [(α1 - Δ)(α2 + Δ)] with Δ = ω1 - ω2.
double static_zz_perturbative(const TransmonParams& q1, const TransmonParams& q2, double j);

struct DriveParams {
    double phi0 = 0.0;  // rad
    double phi1 = 0.0;
};

/// Drive-induced ZZ term for Ω0 = Ω1 = omega and Δ_{i,d} = ω_qi - ω_d.
double modulated_zz_term(const TransmonParams& q1, const TransmonParams& q2, double j, double delta0d,
                         double omega, const DriveParams& drive);

struct ZZMap {
    std::vector<double> detuning_mhz;  // Δ_{0,d}/2π
    std::vector<double> strength_mhz;  // Ω/2π
    std::vector<double> zeta_mhz;      // detuning fastest; NaN where masked
    std::vector<unsigned char> masked;
    double static_mhz = 0.0;
    std::vector<double> pole_lines_mhz;  // Δ_{0,d}/2π where a denominator vanishes

    double at(std::size_t i, std::size_t j) const { return zeta_mhz[j * detuning_mhz.size() + i]; }
};

struct ZZMapOptions {
    double mask_steps = 1.0;  // mask cells within this many detuning steps of a pole
    DriveParams drive;
};

/// Grids in MHz (cyclic). Throws PreconditionError on empty or non-finite grids.
ZZMap zz_map(const TransmonParams& q1, const TransmonParams& q2, double j, std::span<const double> detuning_mhz,
             std::span<const double> strength_mhz, const ZZMapOptions& opt = {});

struct LeakageBound {
    double probability = 0.0;
    double envelope = 0.0;
};

/// (Ω12/α)² sin²(α t_g / 2) and (Ω12/α)². Throws PreconditionError for α <= 0.
LeakageBound leakage_bound(double omega12, double alpha, double t_g);

/// detuning_mhz,strength_mhz,zeta_mhz,masked
void write_zz_csv(std::ostream& os, const ZZMap& map);
nlohmann::json to_json(const ZZMap& map);

} // namespace jjmeta::sizzle

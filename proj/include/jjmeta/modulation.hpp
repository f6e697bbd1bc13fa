#pragma once

#include <span>
#include <string>
#include <vector>

#include "jjmeta/config.hpp"

namespace jjmeta::modulation {

using Diagnostics = std::vector<std::string>;

/// I_c0 cos(θ + Δφ cos(ω_RF t)) with no small-angle assumption. Appends a
/// warning to `diag` when the result is not positive (junction suppressed).
double critical_current(const ModulationParams& mod, double i_c0, double t, std::size_t cell = 0,
                        Diagnostics* diag = nullptr);

enum class InductancePath {
    exact,       // Φ0 / (2π I_c(t)) with the full cos(θ + Δφ cos ω t)
    simplified,  // cos θ · cos(Δφ cos ω t); requires sin θ = 0
};

/// L_J(t) per cell on the given time grid. Throws PreconditionError for the
/// simplified path with sin θ ≠ 0 and NumericalError if the denominator
/// reaches or crosses zero between samples.
std::vector<double> inductance_timeseries(const ModulationParams& mod, const JunctionParams& jp,
                                          std::span<const double> t, InductancePath path = InductancePath::exact,
                                          std::size_t cell = 0);

struct SeriesTerm {
    int harmonic = 0;     // multiple of ω_RF (always even)
    double amplitude = 0.0;
    double omega = 0.0;   // harmonic · ω_RF, rad/s
};

/// Harmonic model of the modulated inductance, L_J(t) = L_J0 (1 + δL(t)).
///
/// `denominator` holds cos(θ + Δφ cos ω_RF t) as Σ a_k cos(k ω_RF t), the
/// k = 0 term being the mean D0. `modulation` holds δL(t) = Σ b_k cos(k ω_RF t).
/// Only even k appear.
struct InductanceSeries {
    double l_j0 = 0.0;  // H per cell
    double d0 = 0.0;
    std::vector<SeriesTerm> denominator;
    std::vector<SeriesTerm> modulation;

    double denominator_at(double t) const;
    double delta_l_at(double t) const;
    double delta_l_rate_at(double t) const;  // dδL/dt
    double inductance_at(double t) const { return l_j0 * (1.0 + delta_l_at(t)); }
    /// Amplitude of the δL term at the given harmonic (0 if absent).
    double modulation_amplitude(int harmonic) const;
};

/// Taylor expansion of the denominator to order 2 or 4 in Δφ. Requires
/// |Δφ| < 1. At order 2 δL has the single term Δφ²/(4 D0) cos(2 ω_RF t).
InductanceSeries expand_taylor(double delta_phi, double theta, int order, double omega_rf, double i_c0);

/// Jacobi–Anger expansion cos(Δφ cos ωt) = J0(Δφ) + 2 Σ J_2n(Δφ) cos(2nωt),
/// truncated at n = n_max. δL keeps the first-order reciprocal terms.
InductanceSeries expand_jacobi_anger(double delta_phi, int n_max, double theta, double omega_rf, double i_c0);

struct PowerSeries {
    std::vector<double> power;  // W
    double mean = 0.0;          // trapezoidal time average, W
};

/// ½ (∂L_J/∂t) I² pointwise, with ∂L_J/∂t taken analytically from the series.
PowerSeries modulation_power(const InductanceSeries& series, std::span<const double> t,
                             std::span<const double> current);

/// Same, from sampled L_J(t) (central differences, one-sided at the ends).
PowerSeries modulation_power(std::span<const double> t, std::span<const double> inductance,
                             std::span<const double> current);

} // namespace jjmeta::modulation

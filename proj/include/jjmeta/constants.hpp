#pragma once

#include <numbers>

namespace jjmeta {

/// SI physical constants (2019 exact definitions).
namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;            // h, J s
inline constexpr double hbar = planck / two_pi;             // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);     // Phi0, Wb
inline constexpr double reduced_flux_quantum = flux_quantum / two_pi;          // phi0, Wb
inline constexpr double speed_of_light = 299792458.0;
} // namespace constants

inline constexpr double hz_to_rad(double f_hz) { return constants::two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / constants::two_pi; }

} // namespace jjmeta

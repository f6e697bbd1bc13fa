#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace jjmeta::analysis {

enum class Window { rectangular, hann };

struct Peak {
    double frequency = 0.0;  // Hz, interpolated
    double magnitude = 0.0;  // |X|, interpolated
    double level_db = 0.0;   // relative to the reference peak
    std::string label;       // fundamental, sideband+n, sideband-n or unlabeled
    int order = 0;
};

struct Spectrum {
    std::vector<double> frequency;                  // one-sided bins, Hz
    std::vector<std::complex<double>> amplitude;    // X_k of the windowed series
    std::vector<Peak> peaks;                        // ascending frequency
    double reference = 0.0;                         // carrier peak magnitude
    double parseval_error = 0.0;                    // relative

    /// 20 log10(|X_k| / reference), floored at -300 dB
    std::vector<double> magnitude_db() const;
};

struct SpectrumOptions {
    Window window = Window::hann;
    double f0 = 0.0;            // carrier, Hz; 0 uses the strongest peak as reference
    double f_mod = 0.0;         // sideband spacing, Hz; 0 disables sideband labels
    int max_order = 8;
    double label_tolerance = 0.25;  // fraction of f_mod (or of f0 without f_mod)
    double threshold_db = -80.0;    // peaks below this (relative to the largest) are dropped
};

/// Throws PreconditionError for fewer than 256 samples, mismatched lengths or
/// non-uniform t. Throws NumericalError if Parseval fails at 1e-9.
Spectrum spectrum(std::span<const double> t, std::span<const double> x, const SpectrumOptions& opt = {});

struct Lobe {
    double theta_deg = 0.0;
    double level_db = 0.0;
    double width_deg = 0.0;  // full width at -3 dB from the lobe peak
};

struct RadiationPattern {
    std::vector<double> theta_deg;
    std::vector<double> intensity_db;  // max 0 dB
    std::vector<Lobe> lobes;           // ascending angle
};

struct FarFieldOptions {
    std::size_t points = 3601;  // over [-90, 90] degrees
    double threshold_db = -13.0;
};

/// P(θ) ∝ |Σ_j f_j exp(i k0 a j sinθ)|², j centred on the aperture.
/// Throws PreconditionError for fewer than 8 elements.
RadiationPattern far_field(std::span<const std::complex<double>> aperture, double k0, double pitch,
                           const FarFieldOptions& opt = {});

struct BeamPlan {
    std::vector<double> targets_deg;  // sorted
    std::vector<std::complex<double>> excitation;
    std::vector<std::string> warnings;
};

/// Half-power beamwidth of an n-element uniform aperture steered to θ.
double beamwidth_deg(double theta_deg, double k0, double pitch, std::size_t n);

/// Equal-magnitude sum of linear-phase excitations, one per target.
/// Throws PreconditionError for |sinθ| > 1 or fewer than 8 elements.
BeamPlan beam_plan(std::span<const double> targets_deg, double k0, double pitch, std::size_t n);

/// frequency_hz,magnitude_db
void write_spectrum_csv(std::ostream& os, const Spectrum& s);
/// theta_deg,intensity_db,lobe_flag
void write_pattern_csv(std::ostream& os, const RadiationPattern& p);

nlohmann::json to_json(const Spectrum& s);
nlohmann::json to_json(const RadiationPattern& p);

} // namespace jjmeta::analysis

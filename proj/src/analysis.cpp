#include "jjmeta/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fftw3.h>

#include "jjmeta/errors.hpp"

namespace jjmeta::analysis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFloorDb = -300.0;

double to_db(double ratio) { return ratio > 0.0 ? std::max(kFloorDb, 20.0 * std::log10(ratio)) : kFloorDb; }

// vertex offset in (-0.5, 0.5) of the parabola through three equally spaced points
double vertex(double a, double b, double c) {
    const double den = a - 2.0 * b + c;
    if (den >= 0.0) return 0.0;
    return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

std::string label_for(int n) {
    if (n == 0) return "fundamental";
    return n > 0 ? "sideband+" + std::to_string(n) : "sideband" + std::to_string(n);
}

void label(Peak& p, const SpectrumOptions& opt) {
    p.label = "unlabeled";
    if (opt.f0 <= 0.0) return;
    if (opt.f_mod <= 0.0) {
        if (std::abs(p.frequency - opt.f0) <= opt.label_tolerance * opt.f0) p.label = label_for(0);
        return;
    }
    int best = 0;
    double best_err = INFINITY;
    // low orders first so folded coincidences keep the simplest label
    for (int a = 0; a <= opt.max_order; ++a)
        for (int n : {a, -a}) {
            const double err = std::abs(p.frequency - std::abs(opt.f0 + n * opt.f_mod));
            if (err < best_err - 1e-9 * opt.f_mod) {
                best_err = err;
                best = n;
            }
        }
    if (best_err <= opt.label_tolerance * opt.f_mod) {
        p.order = best;
        p.label = label_for(best);
    }
}

// |Σ w_i e^{-2πi ν i}| at fractional bin ν = f/df
double dtft(const std::vector<double>& w, double nu) {
    std::complex<double> acc{};
    const double step = -2.0 * kPi * nu / double(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * std::polar(1.0, step * double(i));
    return std::abs(acc);
}

} // namespace

std::vector<double> Spectrum::magnitude_db() const {
    std::vector<double> out(amplitude.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = to_db(std::abs(amplitude[k]) / reference);
    return out;
}

Spectrum spectrum(std::span<const double> t, std::span<const double> x, const SpectrumOptions& opt) {
    const std::size_t n = x.size();
    if (t.size() != n) throw PreconditionError("spectrum: t and x lengths differ");
    if (n < 256) throw PreconditionError("spectrum: need at least 256 samples");
    const double dt = (t[n - 1] - t[0]) / double(n - 1);
    if (!(dt > 0.0)) throw PreconditionError("spectrum: time axis must increase");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) throw PreconditionError("spectrum: non-uniform sampling");

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double taper = opt.window == Window::hann ? 0.5 - 0.5 * std::cos(2.0 * kPi * double(i) / double(n)) : 1.0;
        w[i] = taper * x[i];
    }
    const std::size_t nb = n / 2 + 1;
    std::vector<std::complex<double>> out(nb);
    {
        std::vector<double> in = w;
        fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    Spectrum s;
    s.amplitude = out;
    s.frequency.resize(nb);
    const double df = 1.0 / (double(n) * dt);
    for (std::size_t k = 0; k < nb; ++k) s.frequency[k] = double(k) * df;

    double time_sum = 0.0, freq_sum = 0.0;
    for (double v : w) time_sum += v * v;
    for (std::size_t k = 0; k < nb; ++k) {
        const bool single = k == 0 || (n % 2 == 0 && k == nb - 1);
        freq_sum += (single ? 1.0 : 2.0) * std::norm(out[k]);
    }
    freq_sum /= double(n);
    s.parseval_error = time_sum > 0.0 ? std::abs(freq_sum - time_sum) / time_sum : std::abs(freq_sum);
    if (s.parseval_error > 1e-9) throw NumericalError("spectrum: Parseval check failed");

    std::vector<double> mag(nb);
    for (std::size_t k = 0; k < nb; ++k) mag[k] = std::abs(out[k]);
    const double top = *std::max_element(mag.begin(), mag.end());
    if (top <= 0.0) {
        s.reference = 1.0;
        return s;
    }

    for (std::size_t k = 1; k + 1 < nb; ++k) {
        if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])) continue;
        if (to_db(mag[k] / top) < opt.threshold_db) continue;
        Peak p;
        const double tiny = top * 1e-300;
        const double a = std::log(mag[k - 1] + tiny), b = std::log(mag[k]), c = std::log(mag[k + 1] + tiny);
        const double nu = double(k) + vertex(a, b, c);
        p.frequency = nu * df;
        p.magnitude = dtft(w, nu);
        label(p, opt);
        s.peaks.push_back(p);
    }

    s.reference = top;
    if (opt.f0 > 0.0) {
        double best = INFINITY;
        for (const auto& p : s.peaks)
            if (p.label == "fundamental" && std::abs(p.frequency - opt.f0) < best) {
                best = std::abs(p.frequency - opt.f0);
                s.reference = p.magnitude;
            }
    } else {
        for (const auto& p : s.peaks) s.reference = std::max(s.reference, p.magnitude);
    }
    for (auto& p : s.peaks) p.level_db = to_db(p.magnitude / s.reference);
    return s;
}

RadiationPattern far_field(std::span<const std::complex<double>> aperture, double k0, double pitch,
                           const FarFieldOptions& opt) {
    const std::size_t n = aperture.size();
    if (n < 8) throw PreconditionError("far_field: aperture needs at least 8 elements");
    if (opt.points < 3) throw PreconditionError("far_field: need at least 3 angles");
    const double centre = 0.5 * double(n - 1);

    RadiationPattern p;
    p.theta_deg.resize(opt.points);
    std::vector<double> power(opt.points);
    for (std::size_t m = 0; m < opt.points; ++m) {
        const double th = -90.0 + 180.0 * double(m) / double(opt.points - 1);
        p.theta_deg[m] = th;
        const double u = k0 * pitch * std::sin(th * kPi / 180.0);
        std::complex<double> acc{};
        for (std::size_t j = 0; j < n; ++j) acc += aperture[j] * std::polar(1.0, u * (double(j) - centre));
        power[m] = std::norm(acc);
    }
    const double top = *std::max_element(power.begin(), power.end());
    p.intensity_db.resize(opt.points);
    for (std::size_t m = 0; m < opt.points; ++m)
        p.intensity_db[m] = top > 0.0 ? std::max(kFloorDb, 10.0 * std::log10(power[m] / top)) : kFloorDb;

    const auto& y = p.intensity_db;
    const double step = p.theta_deg[1] - p.theta_deg[0];
    const std::size_t last = opt.points - 1;
    for (std::size_t m = 0; m <= last; ++m) {
        const bool left = m == 0 || y[m] > y[m - 1];
        const bool right = m == last || y[m] >= y[m + 1];
        if (!left || !right || y[m] < opt.threshold_db) continue;
        Lobe lobe;
        double off = 0.0;
        if (m > 0 && m < last) off = vertex(y[m - 1], y[m], y[m + 1]);
        lobe.theta_deg = p.theta_deg[m] + off * step;
        lobe.level_db = (m > 0 && m < last) ? y[m] - 0.25 * (y[m - 1] - y[m + 1]) * off : y[m];
        const double cut = y[m] - 3.0;
        double lo = p.theta_deg.front(), hi = p.theta_deg.back();
        for (std::size_t i = m; i > 0; --i)
            if (y[i - 1] < cut) {
                lo = p.theta_deg[i - 1] + step * (cut - y[i - 1]) / (y[i] - y[i - 1]);
                break;
            }
        for (std::size_t i = m; i < last; ++i)
            if (y[i + 1] < cut) {
                hi = p.theta_deg[i] + step * (y[i] - cut) / (y[i] - y[i + 1]);
                break;
            }
        lobe.width_deg = hi - lo;
        p.lobes.push_back(lobe);
    }
    return p;
}

double beamwidth_deg(double theta_deg, double k0, double pitch, std::size_t n) {
    const double c = std::cos(theta_deg * kPi / 180.0);
    const double ds = 0.886 * 2.0 * kPi / (double(n) * k0 * pitch);
    if (c < 1e-12) return 180.0;
    return ds / c * 180.0 / kPi;
}

BeamPlan beam_plan(std::span<const double> targets_deg, double k0, double pitch, std::size_t n) {
    if (n < 8) throw PreconditionError("beam_plan: aperture needs at least 8 elements");
    if (targets_deg.empty()) throw PreconditionError("beam_plan: no targets");
    BeamPlan plan;
    plan.targets_deg.assign(targets_deg.begin(), targets_deg.end());
    std::sort(plan.targets_deg.begin(), plan.targets_deg.end());
    for (double th : plan.targets_deg)
        if (!(std::abs(th) <= 90.0))
            throw PreconditionError("beam_plan: target " + std::to_string(th) + " deg is unreachable");
    const std::size_t m = plan.targets_deg.size();
    for (std::size_t q = 1; q < m; ++q) {
        const double a = plan.targets_deg[q - 1], b = plan.targets_deg[q];
        const double bw = std::max(beamwidth_deg(a, k0, pitch, n), beamwidth_deg(b, k0, pitch, n));
        if (b - a <= bw)
            plan.warnings.push_back("targets " + std::to_string(a) + " and " + std::to_string(b) +
                                    " deg are closer than one beamwidth");
    }

    // neighbouring beams alternate sign, mirrored about the middle target
    const double centre = 0.5 * double(n - 1);
    plan.excitation.assign(n, {});
    for (std::size_t q = 0; q < m; ++q) {
        const double sign = std::min(q, m - 1 - q) % 2 == 0 ? 1.0 : -1.0;
        const double kx = k0 * std::sin(plan.targets_deg[q] * kPi / 180.0);
        for (std::size_t j = 0; j < n; ++j)
            plan.excitation[j] += sign * std::polar(1.0, -kx * pitch * (double(j) - centre));
    }
    for (auto& f : plan.excitation) f /= double(m);
    return plan;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
    const auto db = s.magnitude_db();
    os << "frequency_hz,magnitude_db\n";
    os.precision(12);
    for (std::size_t k = 0; k < db.size(); ++k) os << s.frequency[k] << ',' << db[k] << '\n';
}

void write_pattern_csv(std::ostream& os, const RadiationPattern& p) {
    std::vector<int> flag(p.theta_deg.size(), 0);
    if (p.theta_deg.size() > 1) {
        const double step = p.theta_deg[1] - p.theta_deg[0];
        for (const auto& l : p.lobes) {
            const auto m = std::size_t(std::lround((l.theta_deg - p.theta_deg.front()) / step));
            flag[std::min(m, flag.size() - 1)] = 1;
        }
    }
    os << "theta_deg,intensity_db,lobe_flag\n";
    os.precision(12);
    for (std::size_t m = 0; m < p.theta_deg.size(); ++m)
        os << p.theta_deg[m] << ',' << p.intensity_db[m] << ',' << flag[m] << '\n';
}

nlohmann::json to_json(const Spectrum& s) {
    nlohmann::json j;
    j["reference_magnitude"] = s.reference;
    j["parseval_rel_error"] = s.parseval_error;
    j["bins"] = s.frequency.size();
    j["peaks"] = nlohmann::json::array();
    for (const auto& p : s.peaks)
        j["peaks"].push_back({{"frequency_hz", p.frequency}, {"level_db", p.level_db}, {"label", p.label}});
    return j;
}

nlohmann::json to_json(const RadiationPattern& p) {
    nlohmann::json j;
    j["points"] = p.theta_deg.size();
    j["lobe_count"] = p.lobes.size();
    j["lobes"] = nlohmann::json::array();
    for (const auto& l : p.lobes)
        j["lobes"].push_back({{"theta_deg", l.theta_deg}, {"level_db", l.level_db}, {"width_deg", l.width_deg}});
    return j;
}

} // namespace jjmeta::analysis

#include "jjmeta/modulation.hpp"

#include <cmath>
#include <sstream>

#include "jjmeta/bessel.hpp"
#include "jjmeta/constants.hpp"
#include "jjmeta/errors.hpp"

namespace jjmeta::modulation {

double critical_current(const ModulationParams& mod, double i_c0, double t, std::size_t cell, Diagnostics* diag) {
    const double ic = i_c0 * std::cos(mod.theta_at(cell) + mod.delta_phi * std::cos(mod.omega_rf * t));
    if (diag && ic <= 0.0) {
        std::ostringstream os;
        os << "critical current " << ic << " A <= 0 at t = " << t << " s (junction suppressed)";
        diag->push_back(os.str());
    }
    return ic;
}

std::vector<double> inductance_timeseries(const ModulationParams& mod, const JunctionParams& jp,
                                          std::span<const double> t, InductancePath path, std::size_t cell) {
    const double theta = mod.theta_at(cell);
    if (path == InductancePath::simplified && std::abs(std::sin(theta)) > 1e-12)
        throw PreconditionError("simplified inductance path requires sin(theta) = 0");

    const double l0 = jp.josephson_inductance();
    std::vector<double> out;
    out.reserve(t.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double arg = mod.delta_phi * std::cos(mod.omega_rf * t[i]);
        const double den = path == InductancePath::exact ? std::cos(theta + arg) : std::cos(theta) * std::cos(arg);
        if (den == 0.0 || (i > 0 && (den > 0.0) != (prev > 0.0))) {
            std::ostringstream os;
            os << "inductance singularity: cos(theta + dphi cos(w t)) reaches 0 near t = " << t[i] << " s";
            throw NumericalError(os.str());
        }
        prev = den;
        out.push_back(l0 / den);
    }
    return out;
}

namespace {

double sum_cos(const std::vector<SeriesTerm>& terms, double t) {
    double s = 0.0;
    for (const auto& term : terms) s += term.amplitude * std::cos(term.omega * t);
    return s;
}

} // namespace

double InductanceSeries::denominator_at(double t) const { return sum_cos(denominator, t); }

double InductanceSeries::delta_l_at(double t) const { return sum_cos(modulation, t); }

double InductanceSeries::delta_l_rate_at(double t) const {
    double s = 0.0;
    for (const auto& term : modulation) s -= term.amplitude * term.omega * std::sin(term.omega * t);
    return s;
}

double InductanceSeries::modulation_amplitude(int harmonic) const {
    for (const auto& term : modulation)
        if (term.harmonic == harmonic) return term.amplitude;
    return 0.0;
}

InductanceSeries expand_taylor(double delta_phi, double theta, int order, double omega_rf, double i_c0) {
    if (!(std::abs(delta_phi) < 1.0)) throw PreconditionError("expand_taylor: series requires |delta_phi| < 1");
    if (order != 2 && order != 4) throw PreconditionError("expand_taylor: order must be 2 or 4");

    const double c = std::cos(theta);
    const double x2 = delta_phi * delta_phi;
    const double x4 = x2 * x2;
    // Bracket of the expanded denominator: d_mean - b cos(2wt) + q cos(4wt).
    const double d_mean = 1.0 - x2 / 4.0 + x4 / 64.0;
    const double b = order == 2 ? x2 / 4.0 : x2 / 4.0 - x4 / 48.0;
    const double q = order == 2 ? 0.0 : x4 / 192.0;

    InductanceSeries s;
    s.d0 = c * d_mean;
    s.l_j0 = constants::flux_quantum / (constants::two_pi * i_c0 * s.d0);
    s.denominator.push_back({0, c * d_mean, 0.0});
    if (b != 0.0) s.denominator.push_back({2, -c * b, 2.0 * omega_rf});
    if (q != 0.0) s.denominator.push_back({4, c * q, 4.0 * omega_rf});

    if (b == 0.0) return s;
    if (order == 2) {
        s.modulation.push_back({2, x2 / (4.0 * s.d0), 2.0 * omega_rf});
        return s;
    }
    // 1/(1 - u cos2 + r cos4) to second order in u, first in r.
    const double u = b / d_mean;
    const double r = q / d_mean;
    s.modulation.push_back({0, 0.5 * u * u / c, 0.0});
    s.modulation.push_back({2, u / c, 2.0 * omega_rf});
    s.modulation.push_back({4, (0.5 * u * u - r) / c, 4.0 * omega_rf});
    return s;
}

InductanceSeries expand_jacobi_anger(double delta_phi, int n_max, double theta, double omega_rf, double i_c0) {
    if (n_max < 0) throw PreconditionError("expand_jacobi_anger: n_max must be >= 0");
    const double c = std::cos(theta);
    const double j0 = bessel_j(0, delta_phi);

    InductanceSeries s;
    s.d0 = c * j0;
    s.l_j0 = constants::flux_quantum / (constants::two_pi * i_c0 * s.d0);
    s.denominator.push_back({0, c * j0, 0.0});
    for (int n = 1; n <= n_max; ++n) {
        const double a = 2.0 * (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(2 * n, delta_phi);
        if (a == 0.0) continue;
        const double w = 2.0 * n * omega_rf;
        s.denominator.push_back({2 * n, c * a, w});
        s.modulation.push_back({2 * n, -a / (j0 * c), w});
    }
    return s;
}

namespace {

double trapezoid_mean(std::span<const double> t, const std::vector<double>& y) {
    if (y.size() < 2) return y.empty() ? 0.0 : y.front();
    double area = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) area += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return area / (t.back() - t.front());
}

} // namespace

PowerSeries modulation_power(const InductanceSeries& series, std::span<const double> t,
                             std::span<const double> current) {
    if (t.size() != current.size()) throw PreconditionError("modulation_power: time and current grids differ");
    PowerSeries out;
    out.power.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        out.power.push_back(0.5 * series.l_j0 * series.delta_l_rate_at(t[i]) * current[i] * current[i]);
    out.mean = trapezoid_mean(t, out.power);
    return out;
}

PowerSeries modulation_power(std::span<const double> t, std::span<const double> inductance,
                             std::span<const double> current) {
    if (t.size() != current.size() || t.size() != inductance.size())
        throw PreconditionError("modulation_power: time, inductance and current grids differ");
    if (t.size() < 2) throw PreconditionError("modulation_power: need at least two samples");
    const std::size_t n = t.size();
    PowerSeries out;
    out.power.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        const double dldt = (inductance[hi] - inductance[lo]) / (t[hi] - t[lo]);
        out.power[i] = 0.5 * dldt * current[i] * current[i];
    }
    out.mean = trapezoid_mean(t, out.power);
    return out;
}

} // namespace jjmeta::modulation

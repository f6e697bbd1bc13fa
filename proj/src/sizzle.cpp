#include "jjmeta/sizzle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "jjmeta/errors.hpp"

namespace jjmeta::sizzle {

namespace {

using constants::hbar;
using constants::two_pi;

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double to_mhz(double w) { return w / two_pi / 1e6; }
double from_mhz(double f) { return f * 1e6 * two_pi; }

} // namespace

QuantizedModeSet build_quantized_modes(const JunctionParams& jp, std::span<const double> omega, int cutoff) {
    if (cutoff < 6) throw PreconditionError("build_quantized_modes: cutoff must be at least 6");
    if (omega.empty()) throw PreconditionError("build_quantized_modes: no modes");
    for (double w : omega)
        if (!(w > 0.0)) throw PreconditionError("build_quantized_modes: mode frequencies must be positive");
    if (!(jp.junction_capacitance > 0.0)) throw PreconditionError("build_quantized_modes: C_J must be positive");
    const std::size_t m = omega.size();
    double dim = std::pow(double(cutoff), double(m));
    if (dim > 4096.0) throw PreconditionError("build_quantized_modes: product space too large");

    QuantizedModeSet s;
    s.omega.assign(omega.begin(), omega.end());
    s.cutoff = cutoff;
    const double length = double(jp.cells) * jp.cell_length;
    s.capacitance = jp.junction_capacitance_per_length() * length;

    Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a1(k - 1, k) = std::sqrt(double(k));
    const auto n = Eigen::Index(dim);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < m; ++i) {
        const auto before = Eigen::Index(std::pow(double(cutoff), double(i)));
        const auto after = Eigen::Index(std::pow(double(cutoff), double(m - 1 - i)));
        Eigen::MatrixXd op = kron(Eigen::MatrixXd::Identity(after, after), kron(a1, Eigen::MatrixXd::Identity(before, before)));
        s.zero_point.push_back(std::sqrt(hbar / (2.0 * omega[i] * s.capacitance)));
        s.phi.push_back(s.zero_point.back() * (op + op.transpose()));
        h += hbar * omega[i] * op.transpose() * op;
        s.a.push_back(std::move(op));
    }
    const std::complex<double> i_over_hbar(0.0, 1.0 / hbar);
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::MatrixXd comm = h * s.phi[i] - s.phi[i] * h;
        s.q.push_back(s.capacitance * i_over_hbar * comm.cast<std::complex<double>>());
    }

    // states whose every mode sits at least two levels below the top
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index r = k;
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (r % cutoff > cutoff - 3) ok = false;
            r /= cutoff;
        }
        if (ok) keep.push_back(k);
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const Eigen::MatrixXcd c = s.phi[i].cast<std::complex<double>>() * s.q[j] - s.q[j] * s.phi[i];
            for (auto r : keep)
                for (auto col : keep) {
                    const std::complex<double> want = (i == j && r == col) ? std::complex<double>(0.0, hbar) : 0.0;
                    s.commutator_error = std::max(s.commutator_error, std::abs(c(r, col) - want) / hbar);
                }
        }
    if (!(s.commutator_error <= 1e-10))
        throw NumericalError("build_quantized_modes: canonical commutator violated (" +
                             std::to_string(s.commutator_error) + ")");
    return s;
}

double coupling_g0(double alpha0, double omega_n, const JunctionParams& jp) {
    return alpha0 / std::sqrt(2.0 * hbar * omega_n * jp.junction_capacitance * jp.josephson_inductance());
}

std::vector<double> coupling_timeseries(double g0, double delta_l, double omega_m, std::span<const double> t) {
    if (!(delta_l >= 0.0 && delta_l < 1.0)) throw PreconditionError("coupling_timeseries: need 0 <= delta_L < 1");
    std::vector<double> g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] = g0 * (1.0 + delta_l * std::cos(omega_m * t[i]));
    return g;
}

double j_eff(double g1, double g2, std::span<const SidebandTerm> terms, double k_m, double z1, double z2,
             Diagnostics* diag) {
    const double space = std::cos(k_m * (z1 - z2));
    double sum = 0.0;
    bool warned = false;
    for (const auto& term : terms) {
        if (term.detuning == 0.0) throw PreconditionError("j_eff: resonant term (zero detuning)");
        if (!warned && diag && std::max(std::abs(g1), std::abs(g2)) > 0.1 * std::abs(term.detuning)) {
            diag->push_back("j_eff: |g/Delta| > 0.1, outside the dispersive regime");
            warned = true;
        }
        sum += g1 * g2 * term.delta * space / term.detuning;
    }
    return sum;
}

double gate_time(double j, double delta12, double theta, Diagnostics* diag) {
    if (j == 0.0) throw PreconditionError("gate_time: J_eff is zero");
    if (diag && std::abs(j) > 0.1 * std::abs(delta12))
        diag->push_back("gate_time: |J_eff/Delta12| > 0.1, outside the dispersive limit");
    return theta * std::abs(delta12) / (j * j);
}

double dispersive_shift(double g01, double alpha, double delta) {
    const double scale = std::max({std::abs(alpha), std::abs(delta), 1.0});
    if (std::abs(delta) < 1e-12 * scale) throw PreconditionError("dispersive_shift: pole at Delta = 0");
    if (std::abs(delta + alpha) < 1e-12 * scale) throw PreconditionError("dispersive_shift: pole at Delta = -alpha");
    return g01 * g01 * alpha / (delta * (delta + alpha));
}

double static_zz_oracle(const TransmonParams& q1, const TransmonParams& q2, double j) {
    if (q1.levels < 3 || q2.levels < 3) throw PreconditionError("static_zz_oracle: need at least 3 levels per qubit");
    const int l1 = q1.levels, l2 = q2.levels;
    const int n = l1 * l2;
    auto idx = [l2](int a, int b) { return a * l2 + b; };
    // rotating at ω2 per excitation; exchange conserves the excitation number
    const double d = q1.omega01 - q2.omega01;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < l1; ++a)
        for (int b = 0; b < l2; ++b) {
            h(idx(a, b), idx(a, b)) = a * d - 0.5 * q1.alpha * a * (a - 1) - 0.5 * q2.alpha * b * (b - 1);
            if (a + 1 < l1 && b >= 1) {
                const double v = j * std::sqrt(double(a + 1) * double(b));
                h(idx(a + 1, b - 1), idx(a, b)) = v;
                h(idx(a, b), idx(a + 1, b - 1)) = v;
            }
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("static_zz_oracle: eigensolve failed");
    auto dressed = [&](int a, int b) {
        const int k = idx(a, b);
        Eigen::Index best = 0;
        const double p = es.eigenvectors().row(k).cwiseAbs2().maxCoeff(&best);
        if (p < 0.7)
            throw NumericalError("static_zz_oracle: level tracking ambiguous for |" + std::to_string(a) +
                                 std::to_string(b) + ">, overlap " + std::to_string(p));
        return es.eigenvalues()(best);
    };
    return dressed(1, 1) - dressed(1, 0) - dressed(0, 1) + dressed(0, 0);
}

double static_zz_perturbative(const TransmonParams& q1, const TransmonParams& q2, double j) {
    const double d = q1.omega01 - q2.omega01;
    return 2.0 * j * j * (q1.alpha + q2.alpha) / ((q1.alpha - d) * (q2.alpha + d));
}

double modulated_zz_term(const TransmonParams& q1, const TransmonParams& q2, double j, double delta0d,
                         double omega, const DriveParams& drive) {
    const double delta1d = delta0d - (q1.omega01 - q2.omega01);
    return 2.0 * j * q1.alpha * q2.alpha * omega * omega * std::cos(drive.phi0 - drive.phi1) /
           ((delta0d + q1.alpha) * (delta1d + q2.alpha) * delta0d * delta1d);
}

ZZMap zz_map(const TransmonParams& q1, const TransmonParams& q2, double j, std::span<const double> detuning_mhz,
             std::span<const double> strength_mhz, const ZZMapOptions& opt) {
    if (detuning_mhz.empty() || strength_mhz.empty()) throw PreconditionError("zz_map: empty grid");
    for (double v : detuning_mhz)
        if (!std::isfinite(v)) throw PreconditionError("zz_map: non-finite detuning");
    for (double v : strength_mhz)
        if (!std::isfinite(v)) throw PreconditionError("zz_map: non-finite strength");

    ZZMap map;
    map.detuning_mhz.assign(detuning_mhz.begin(), detuning_mhz.end());
    map.strength_mhz.assign(strength_mhz.begin(), strength_mhz.end());
    const double zeta = static_zz_oracle(q1, q2, j);
    map.static_mhz = to_mhz(zeta);

    const double shift = q1.omega01 - q2.omega01;
    map.pole_lines_mhz = {to_mhz(-q1.alpha), to_mhz(shift - q2.alpha), 0.0, to_mhz(shift)};
    std::sort(map.pole_lines_mhz.begin(), map.pole_lines_mhz.end());

    double step = 0.0;
    if (detuning_mhz.size() > 1) {
        step = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < detuning_mhz.size(); ++i)
            step = std::min(step, std::abs(detuning_mhz[i] - detuning_mhz[i - 1]));
    }
    const double tol = opt.mask_steps * step;

    const std::size_t nd = detuning_mhz.size(), ns = strength_mhz.size();
    map.zeta_mhz.resize(nd * ns);
    map.masked.assign(nd * ns, 0);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t i = 0; i < nd; ++i) {
            const std::size_t k = s * nd + i;
            bool pole = false;
            for (double line : map.pole_lines_mhz)
                if (std::abs(detuning_mhz[i] - line) < tol || detuning_mhz[i] == line) pole = true;
            if (pole) {
                map.masked[k] = 1;
                map.zeta_mhz[k] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double om = from_mhz(strength_mhz[s]);
            map.zeta_mhz[k] = om == 0.0 ? map.static_mhz
                                        : map.static_mhz + to_mhz(modulated_zz_term(q1, q2, j, from_mhz(detuning_mhz[i]),
                                                                                    om, opt.drive));
        }
    return map;
}

LeakageBound leakage_bound(double omega12, double alpha, double t_g) {
    if (!(alpha > 0.0)) throw PreconditionError("leakage_bound: alpha must be positive");
    LeakageBound b;
    b.envelope = (omega12 / alpha) * (omega12 / alpha);
    const double s = std::sin(0.5 * alpha * t_g);
    b.probability = b.envelope * s * s;
    return b;
}

void write_zz_csv(std::ostream& os, const ZZMap& map) {
    os << "detuning_mhz,strength_mhz,zeta_mhz,masked\n";
    os.precision(12);
    const std::size_t nd = map.detuning_mhz.size();
    for (std::size_t s = 0; s < map.strength_mhz.size(); ++s)
        for (std::size_t i = 0; i < nd; ++i) {
            const std::size_t k = s * nd + i;
            os << map.detuning_mhz[i] << ',' << map.strength_mhz[s] << ',';
            if (map.masked[k]) os << "nan";
            else os << map.zeta_mhz[k];
            os << ',' << int(map.masked[k]) << '\n';
        }
}

nlohmann::json to_json(const ZZMap& map) {
    nlohmann::json j;
    j["static_zeta_mhz"] = map.static_mhz;
    j["pole_lines_mhz"] = map.pole_lines_mhz;
    j["detuning_points"] = map.detuning_mhz.size();
    j["strength_points"] = map.strength_mhz.size();
    std::size_t masked = 0, lo = 0, hi = 0;
    bool any = false;
    for (std::size_t k = 0; k < map.zeta_mhz.size(); ++k) {
        if (map.masked[k]) {
            ++masked;
            continue;
        }
        if (!any || map.zeta_mhz[k] < map.zeta_mhz[lo]) lo = k;
        if (!any || map.zeta_mhz[k] > map.zeta_mhz[hi]) hi = k;
        any = true;
    }
    j["masked_cells"] = masked;
    const std::size_t nd = map.detuning_mhz.size();
    auto cell = [&](std::size_t k) {
        return nlohmann::json{{"detuning_mhz", map.detuning_mhz[k % nd]},
                              {"strength_mhz", map.strength_mhz[k / nd]},
                              {"zeta_mhz", map.zeta_mhz[k]}};
    };
    if (any) {
        j["min"] = cell(lo);
        j["max"] = cell(hi);
    }
    return j;
}

} // namespace jjmeta::sizzle

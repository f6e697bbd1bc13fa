#include "jjmeta/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "jjmeta/constants.hpp"
#include "jjmeta/errors.hpp"
#include "jjmeta/modulation.hpp"

namespace jjmeta::modes {

Eigen::MatrixXcd CouplingMatrix::operator_matrix() const {
    Eigen::MatrixXcd a = coupling;
    for (int i = 0; i < a.rows(); ++i) a(i, i) += k2(i);
    return a;
}

CouplingMatrix assemble_coupling_matrix(const JunctionParams& jp, const ModulationParams& mod,
                                        const HarmonicBasis& basis, Diagnostics* diag) {
    if (basis.n_h < 1) throw PreconditionError("assemble_coupling_matrix: basis needs n_h >= 1");
    if (diag && mod.delta_phi * mod.delta_phi > 0.25) {
        std::ostringstream os;
        os << "delta_phi^2 = " << mod.delta_phi * mod.delta_phi << " > 0.25; small-depth expansion is inaccurate";
        diag->push_back(os.str());
    }
    const double w_rf = basis.step > 0.0 ? basis.step : mod.omega_rf;
    const auto series = modulation::expand_taylor(mod.delta_phi, mod.theta_at(0), 2, w_rf, jp.critical_current);
    const double l0 = series.l_j0 / jp.cell_length;
    const double c = jp.capacitance_per_length();

    CouplingMatrix out;
    out.basis = basis;
    out.basis.step = w_rf;
    out.delta_l = 0.5 * l0 * series.modulation_amplitude(2);
    const int size = basis.size();
    out.k2.resize(size);
    out.coupling = Eigen::MatrixXcd::Zero(size, size);

    const double w = basis.omega;
    for (int n = -basis.n_h; n <= basis.n_h; ++n) {
        const double wn = w + n * w_rf;
        out.k2(basis.row(n)) = l0 * c * wn * wn;
        if (out.delta_l == 0.0) continue;
        // i(∂L/∂t)_{±2} = ±2ω_RF δL_{±2}
        if (n + 2 <= basis.n_h)
            out.coupling(basis.row(n), basis.row(n + 2)) = -c * wn * ((w + (n + 2) * w_rf) + 2.0 * w_rf) * out.delta_l;
        if (n - 2 >= -basis.n_h)
            out.coupling(basis.row(n), basis.row(n - 2)) = -c * wn * ((w + (n - 2) * w_rf) - 2.0 * w_rf) * out.delta_l;
    }
    return out;
}

Eigen::MatrixXd floquet_matrix(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                               double omega) {
    const double lc = jp.inductance_per_length() * jp.capacitance_per_length();
    const int size = 2 * n_h + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) {
        const int n = i - n_h;
        const double kn = k + n * mod.k_m;
        const double wn = omega + n * mod.omega_m;
        a(i, i) = lc * wn * wn - kn * kn;
        if (i + 1 < size) {
            const double off = -0.5 * mod.delta_i * kn * (kn + mod.k_m);
            a(i, i + 1) = off;
            a(i + 1, i) = off;
        }
    }
    return a;
}

namespace {

double scaled_det(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k, double omega,
                  double scale) {
    return (floquet_matrix(jp, mod, n_h, k, omega) * scale).partialPivLu().determinant();
}

void check_window(const ScanOptions& opt) {
    if (!(opt.omega_max > opt.omega_min) || opt.omega_min < 0.0)
        throw PreconditionError("dispersion: omega window must satisfy 0 <= min < max");
    if (opt.samples < 2) throw PreconditionError("dispersion: need at least 2 scan samples");
}

} // namespace

std::vector<double> dispersion_roots(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                                     const ScanOptions& opt) {
    check_window(opt);
    const double lc = jp.inductance_per_length() * jp.capacitance_per_length();
    const double scale = 1.0 / (lc * opt.omega_max * opt.omega_max);
    std::vector<double> roots;

    const double dw = (opt.omega_max - opt.omega_min) / opt.samples;
    double w_prev = opt.omega_min;
    double d_prev = scaled_det(jp, mod, n_h, k, w_prev, scale);
    if (d_prev == 0.0 && w_prev > 0.0) roots.push_back(w_prev);
    for (int i = 1; i <= opt.samples; ++i) {
        const double w = opt.omega_min + i * dw;
        const double d = scaled_det(jp, mod, n_h, k, w, scale);
        if (d == 0.0) {
            roots.push_back(w);
        } else if (d_prev != 0.0 && (d > 0.0) != (d_prev > 0.0)) {
            double lo = w_prev, hi = w, f_lo = d_prev;
            int iter = 0;
            while (hi - lo > opt.rel_tol * hi) {
                if (++iter > 200) throw NumericalError("dispersion: bisection did not converge");
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double f_mid = scaled_det(jp, mod, n_h, k, mid, scale);
                if (f_mid == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((f_mid > 0.0) == (f_lo > 0.0)) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        w_prev = w;
        d_prev = d;
    }
    return roots;
}

namespace {

void check_symmetric_grid(std::span<const double> k) {
    if (k.empty()) throw PreconditionError("dispersion_scan: empty k grid");
    double span = 0.0;
    for (double v : k) span = std::max(span, std::abs(v));
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i > 0 && !(k[i] > k[i - 1])) throw PreconditionError("dispersion_scan: k grid must be ascending");
        if (std::abs(k[i] + k[k.size() - 1 - i]) > 1e-12 * span)
            throw PreconditionError("dispersion_scan: k grid must be symmetric about 0");
    }
}

} // namespace

DispersionScan dispersion_scan(const JunctionParams& jp, const ModulationParams& mod, std::span<const double> k_grid,
                               int n_h, const ScanOptions& opt) {
    if (n_h < 3) throw PreconditionError("dispersion_scan: n_h must be >= 3");
    check_symmetric_grid(k_grid);
    check_window(opt);

    DispersionScan out;
    for (double k : k_grid) {
        const auto roots = dispersion_roots(jp, mod, n_h, k, opt);
        if (roots.empty()) {
            std::ostringstream os;
            os << "no root in window at k = " << k << " rad/m";
            out.diagnostics.push_back(os.str());
        }
        for (std::size_t b = 0; b < roots.size(); ++b) {
            if (b >= out.bands.size()) out.bands.push_back({static_cast<int>(b), {}, {}});
            out.bands[b].k.push_back(k);
            out.bands[b].omega.push_back(roots[b]);
        }
    }
    return out;
}

double fundamental_branch(const JunctionParams& jp, const ModulationParams& mod, int n_h, double k,
                          const ScanOptions& opt) {
    const double v = derived_velocity(jp);
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_dist = std::numeric_limits<double>::infinity();
    for (double w : dispersion_roots(jp, mod, n_h, k, opt)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(floquet_matrix(jp, mod, n_h, k, w));
        Eigen::Index nearest = 0;
        es.eigenvalues().cwiseAbs().minCoeff(&nearest);
        Eigen::Index dominant = 0;
        es.eigenvectors().col(nearest).cwiseAbs().maxCoeff(&dominant);
        if (dominant != n_h) continue;
        const double dist = std::abs(w - v * std::abs(k));
        if (dist < best_dist) {
            best_dist = dist;
            best = w;
        }
    }
    return best;
}

double dispersion_asymmetry(const JunctionParams& jp, const ModulationParams& mod, std::span<const double> k_grid,
                            int n_h, const ScanOptions& opt) {
    check_symmetric_grid(k_grid);
    double worst = 0.0;
    for (double k : k_grid) {
        if (k <= 0.0) continue;
        const double fwd = fundamental_branch(jp, mod, n_h, k, opt);
        const double bwd = fundamental_branch(jp, mod, n_h, -k, opt);
        if (std::isnan(fwd) || std::isnan(bwd)) {
            std::ostringstream os;
            os << "dispersion_asymmetry: no fundamental root at k = " << k << " rad/m";
            throw NumericalError(os.str());
        }
        worst = std::max(worst, std::abs(fwd - bwd));
    }
    return worst;
}

std::vector<double> ModeTrajectory::mode_energy(int mode) const {
    if (mode < 1 || mode > static_cast<int>(omega.size())) throw PreconditionError("mode index out of range");
    std::vector<double> e;
    e.reserve(energy.size());
    for (const auto& row : energy) e.push_back(row[mode - 1]);
    return e;
}

namespace {

using cvec = std::vector<std::complex<double>>;

struct ModeSystem {
    std::vector<double> w;      // ω_n
    std::vector<double> kappa;  // ω_1 ω_n / 2 = k_m k_n / (2 L' C')
    double depth = 0.0;
    double w_m = 0.0;

    // Φ̈ from M(t) Φ̈ = -Ω² Φ - Δ (κ_{n+1} Φ_{n+1} e^{-iω_m t} - κ_{n-1} Φ_{n-1} e^{iω_m t})
    void accel(double t, const cvec& phi, cvec& out) const {
        const std::size_t n = w.size();
        const auto up = std::polar(1.0, -w_m * t);  // couples n to n+1
        const auto dn = std::conj(up);              // couples n to n-1
        cvec rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = -w[i] * w[i] * phi[i];
            if (i + 1 < n) r -= depth * kappa[i + 1] * phi[i + 1] * up;
            if (i > 0) r += depth * kappa[i - 1] * phi[i - 1] * dn;
            rhs[i] = r;
        }
        // Thomas solve, diagonal 1, super Δ/2 e^{-iω_m t}, sub Δ/2 e^{iω_m t}
        const auto sup = 0.5 * depth * up;
        const auto sub = 0.5 * depth * dn;
        cvec cp(n);
        out.assign(n, {});
        std::complex<double> denom = 1.0;
        cp[0] = sup / denom;
        out[0] = rhs[0] / denom;
        for (std::size_t i = 1; i < n; ++i) {
            denom = 1.0 - sub * cp[i - 1];
            cp[i] = sup / denom;
            out[i] = (rhs[i] - sub * out[i - 1]) / denom;
        }
        for (std::size_t i = n - 1; i-- > 0;) out[i] -= cp[i] * out[i + 1];
    }
};

} // namespace

ModeTrajectory evolve_modes(const JunctionParams& jp, const ModulationParams& mod, const EvolutionSpec& spec) {
    const int n = spec.n_modes;
    if (n < 1) throw PreconditionError("evolve_modes: n_modes must be >= 1");
    if (static_cast<int>(spec.initial.size()) != n)
        throw PreconditionError("evolve_modes: need one initial amplitude per mode");
    if (!(mod.omega_m > 0.0)) throw PreconditionError("evolve_modes: omega_m must be positive");
    if (!(spec.duration >= 0.0)) throw PreconditionError("evolve_modes: duration must be non-negative");
    if (!(std::abs(spec.delta_l) < 1.0)) throw PreconditionError("evolve_modes: |delta_l| must be < 1");

    const double v = derived_velocity(jp);
    // ω_1 = ω_m fixes the line length: ℓ = π v / ω_m, k_m = π / ℓ
    if (mod.k_m > 0.0 && std::abs(mod.k_m * v / mod.omega_m - 1.0) > 1e-9)
        throw PreconditionError("evolve_modes: omega_m must equal the mode spacing (k_m = omega_m / v)");

    ModeSystem sys;
    sys.depth = spec.delta_l;
    sys.w_m = mod.omega_m;
    for (int i = 1; i <= n; ++i) {
        sys.w.push_back(i * mod.omega_m);
        sys.kappa.push_back(0.5 * mod.omega_m * i * mod.omega_m);
    }

    const double period = constants::two_pi / sys.w.back();
    const double dt = spec.dt > 0.0 ? spec.dt : period / 100.0;
    if (dt > period / 40.0 * (1.0 + 1e-12))
        throw PreconditionError("evolve_modes: dt must give at least 40 samples per fastest period");
    const auto steps = static_cast<std::size_t>(std::ceil(spec.duration / dt - 1e-9));
    const std::size_t stride = std::max<std::size_t>(1, spec.record_every);

    cvec phi(spec.initial.begin(), spec.initial.end());
    cvec dphi(n);
    for (int i = 0; i < n; ++i) dphi[i] = std::complex<double>(0.0, sys.w[i]) * phi[i];

    ModeTrajectory traj;
    traj.omega = sys.w;
    auto energy_of = [&](const cvec& p, const cvec& dp, std::vector<double>& e) {
        e.resize(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            e[i] = 0.5 * std::norm(dp[i]) + 0.5 * sys.w[i] * sys.w[i] * std::norm(p[i]);
            total += e[i];
        }
        return total;
    };
    std::vector<double> e;
    const double e0 = energy_of(phi, dphi, e);
    auto record = [&](double t) {
        traj.t.push_back(t);
        traj.phi.push_back(phi);
        traj.energy.push_back(e);
    };
    record(0.0);

    cvec k1p(n), k1v(n), k2p(n), k2v(n), k3p(n), k3v(n), k4p(n), k4v(n), tp(n), tv(n);
    double t = 0.0;
    for (std::size_t s = 1; s <= steps; ++s) {
        const double h = std::min(dt, spec.duration - t);
        k1p = dphi;
        sys.accel(t, phi, k1v);
        for (int i = 0; i < n; ++i) tp[i] = phi[i] + 0.5 * h * k1p[i], tv[i] = dphi[i] + 0.5 * h * k1v[i];
        k2p = tv;
        sys.accel(t + 0.5 * h, tp, k2v);
        for (int i = 0; i < n; ++i) tp[i] = phi[i] + 0.5 * h * k2p[i], tv[i] = dphi[i] + 0.5 * h * k2v[i];
        k3p = tv;
        sys.accel(t + 0.5 * h, tp, k3v);
        for (int i = 0; i < n; ++i) tp[i] = phi[i] + h * k3p[i], tv[i] = dphi[i] + h * k3v[i];
        k4p = tv;
        sys.accel(t + h, tp, k4v);
        for (int i = 0; i < n; ++i) {
            phi[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            dphi[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        t = s == steps ? spec.duration : t + h;

        const double total = energy_of(phi, dphi, e);
        if (!std::isfinite(total) || (e0 > 0.0 && total > 1e6 * e0)) {
            std::ostringstream os;
            os << "evolve_modes: instability, energy grew from " << e0 << " to " << total << " by t = " << t << " s";
            throw NumericalError(os.str());
        }
        if (s % stride == 0 || s == steps) record(t);
    }
    return traj;
}

void write_bands_csv(std::ostream& os, const DispersionScan& scan) {
    os.precision(17);
    os << "k_rad_per_m,omega_rad_per_s,band_index\n";
    for (const auto& band : scan.bands)
        for (std::size_t i = 0; i < band.k.size(); ++i) os << band.k[i] << ',' << band.omega[i] << ',' << band.index << '\n';
}

void write_trajectory_csv(std::ostream& os, const ModeTrajectory& traj) {
    os.precision(17);
    os << "t_s,mode_index,energy\n";
    for (std::size_t s = 0; s < traj.t.size(); ++s)
        for (std::size_t m = 0; m < traj.omega.size(); ++m)
            os << traj.t[s] << ',' << m + 1 << ',' << traj.energy[s][m] << '\n';
}

} // namespace jjmeta::modes

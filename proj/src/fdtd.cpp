#include "jjmeta/fdtd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "jjmeta/constants.hpp"
#include "jjmeta/errors.hpp"

namespace jjmeta::fdtd {

CourantReport stability_check(const GridSpec& g, const JunctionParams& jp) {
    CourantReport r;
    const double v = derived_velocity(jp);
    r.dimension = g.dimension;
    r.dt = g.dt;
    r.default_margin = g.courant_margin;
    r.stencil_dt = stencil_dt_limit(g.dimension, g.dz, g.dx, v);
    if (g.dimension == 1) {
        r.courant = v * g.dt / g.dz;
        r.limit = 1.0;
        r.binding = "1D: dt <= dz/v";
    } else {
        r.courant = v * g.dt / std::hypot(g.dx, g.dz);
        r.limit = 1.0 / std::sqrt(2.0);
        const double s_dt = r.limit * std::hypot(g.dx, g.dz) / v;
        r.binding = r.stencil_dt < s_dt ? "2D: explicit Laplacian, dt <= 1/(v sqrt(1/dx^2 + 1/dz^2))"
                                        : "2D: S <= 1/sqrt(2)";
    }
    r.margin = r.courant > 0.0 ? r.limit / r.courant : std::numeric_limits<double>::infinity();
    r.pass = r.courant <= r.limit * (1.0 + 1e-12);
    if (r.pass && std::abs(r.courant / r.limit - 1.0) <= 1e-9) {
        std::ostringstream os;
        os << "Courant number at the stability boundary; nonlinearity may require a stricter condition "
           << "(default margin " << r.default_margin << ")";
        r.warnings.push_back(os.str());
    }
    if (g.dimension == 2 && g.dt > r.stencil_dt * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << g.dt << " s exceeds the explicit Laplacian limit " << r.stencil_dt << " s; the run may diverge";
        r.warnings.push_back(os.str());
    }
    if (!r.pass) {
        std::ostringstream os;
        os << "CFL violated: S = " << r.courant << " > " << r.limit;
        r.warnings.push_back(os.str());
    }
    return r;
}

double mur_coefficient(double v, double dt, double d) { return (v * dt - d) / (v * dt + d); }

void apply_mur_boundary(std::vector<double>& next, const std::vector<double>& curr, std::size_t nz, std::size_t nx,
                        double r_z, double r_x) {
    for (std::size_t j = 0; j < nx; ++j) {
        const std::size_t o = j * nz;
        next[o] = curr[o + 1] + r_z * (next[o + 1] - curr[o]);
        next[o + nz - 1] = curr[o + nz - 2] + r_z * (next[o + nz - 2] - curr[o + nz - 1]);
    }
    if (nx < 3) return;
    const std::size_t last = (nx - 1) * nz, inner = (nx - 2) * nz;
    for (std::size_t i = 0; i < nz; ++i) {
        next[i] = curr[nz + i] + r_x * (next[nz + i] - curr[i]);
        next[last + i] = curr[inner + i] + r_x * (next[inner + i] - curr[last + i]);
    }
}

double source_value(const SourceSpec& s, double t) {
    const double u = t - s.center;
    return s.amplitude * std::exp(-0.5 * u * u / (s.width * s.width)) * std::cos(s.carrier_omega * u);
}

double source_rate(const SourceSpec& s, double t) {
    const double u = t - s.center;
    const double env = s.amplitude * std::exp(-0.5 * u * u / (s.width * s.width));
    return env * (-u / (s.width * s.width) * std::cos(s.carrier_omega * u) -
                  s.carrier_omega * std::sin(s.carrier_omega * u));
}

Simulation::Simulation(const ScenarioConfig& config) : config_(config) {
    validate(config_);
    const auto& g = config_.grid;
    const auto& jp = config_.junction;
    v_ = derived_velocity(jp);
    alpha_ = jp.capacitance_per_length() / (g.dt * g.dt);
    beta_ = jp.junction_capacitance * jp.cell_length / (g.dz * g.dz * g.dt * g.dt);
    r_z_ = mur_coefficient(v_, g.dt, g.dz);
    r_x_ = mur_coefficient(v_, g.dt, g.dx);
    state_.nz = g.nz;
    state_.nx = g.dimension == 1 ? 1 : g.nx;
    state_.prev.assign(state_.nz * state_.nx, 0.0);
    state_.curr.assign(state_.nz * state_.nx, 0.0);
}

namespace {

double ic_at(const ScenarioConfig& c, double z, double t) {
    const auto& m = c.modulation;
    const double i0 = c.junction.critical_current;
    switch (m.kind()) {
    case DriveKind::phase: {
        std::size_t cell = 0;
        if (m.theta_bias.size() > 1)
            cell = std::min(m.theta_bias.size() - 1, static_cast<std::size_t>(std::max(0.0, z / c.junction.cell_length)));
        return i0 * std::cos(m.theta_at(cell) + m.delta_phi * std::cos(m.omega_rf * t));
    }
    case DriveKind::traveling:
        return i0 * (1.0 + m.delta_i * std::cos(m.k_m * z - m.omega_m * t));
    case DriveKind::none:
        break;
    }
    return i0;
}

bool is_source_column(const SourceSpec& s, std::size_t j, std::size_t nx) {
    if (nx == 1) return true;
    if (j == 0 || j + 1 == nx) return false;
    return s.x_index < 0 || static_cast<std::size_t>(s.x_index) == j;
}

} // namespace

double Simulation::link_current(std::size_t i, double t) const {
    return ic_at(config_, (static_cast<double>(i) + 0.5) * config_.grid.dz, t);
}

void Simulation::forcing(const std::vector<double>& phi, double t, std::vector<double>& out, bool with_source) const {
    const auto& g = config_.grid;
    const auto& jp = config_.junction;
    const std::size_t nz = state_.nz, nx = state_.nx;
    const double phi0 = constants::reduced_flux_quantum;
    const double a = jp.cell_length;
    out.assign(nz * nx, 0.0);

    std::vector<double> link(nz - 1), cell(nz);
    for (std::size_t i = 0; i + 1 < nz; ++i) link[i] = link_current(i, t);
    for (std::size_t i = 0; i < nz; ++i) cell[i] = ic_at(config_, static_cast<double>(i) * g.dz, t);

    const bool literal = g.stencil == Stencil::literal;
    const auto& m = config_.modulation;
    const double trav = m.kind() == DriveKind::traveling ? jp.critical_current * m.delta_i * m.k_m * a / phi0 : 0.0;

    const std::size_t j0 = nx == 1 ? 0 : 1, j1 = nx == 1 ? 1 : nx - 1;
    for (std::size_t j = j0; j < j1; ++j) {
        const double* p = phi.data() + j * nz;
        double* f = out.data() + j * nz;
        for (std::size_t i = 1; i + 1 < nz; ++i) {
            double v;
            if (literal) {
                const double d = (p[i + 1] - p[i - 1]) / (2.0 * g.dz);
                const double s = std::sin(p[i]), c = std::cos(p[i]);
                const double z = static_cast<double>(i) * g.dz;
                v = -(trav * std::sin(m.k_m * z - m.omega_m * t) * s - cell[i] / phi0 * (a * c * d - a * a * s * d * d));
            } else {
                v = (link[i] * std::sin(a * (p[i + 1] - p[i]) / g.dz) - link[i - 1] * std::sin(a * (p[i] - p[i - 1]) / g.dz)) /
                    (phi0 * g.dz);
            }
            if (nx > 1) {
                const double* pl = p - nz;
                const double* pr = p + nz;
                v += cell[i] * a / phi0 * (pr[i] - 2.0 * p[i] + pl[i]) / (g.dx * g.dx);
            }
            f[i] = v;
        }
    }

    const auto& s = config_.source;
    if (!with_source || s.hard) return;
    const double inj = 2.0 * jp.capacitance_per_length() * v_ * source_rate(s, t) / g.dz;
    for (std::size_t j = j0; j < j1; ++j)
        if (is_source_column(s, j, nx)) out[j * nz + s.z_index] += inj;
}

void Simulation::solve_column(std::size_t j, const std::vector<double>& rhs_base, std::vector<double>& next) const {
    const std::size_t nz = state_.nz;
    const std::size_t o = j * nz;
    const auto& curr = state_.curr;
    const bool mur = config_.grid.boundary == Boundary::mur;
    const auto& s = config_.source;
    const bool hard = s.hard && is_source_column(s, j, state_.nx);
    const double t_next = state_.t + config_.grid.dt;

    // rows: sub x_{i-1} + diag x_i + sup x_{i+1} = rhs
    thread_local std::vector<double> cp, dp;
    cp.resize(nz);
    dp.resize(nz);
    auto row = [&](std::size_t i, double& sub, double& diag, double& sup, double& rhs) {
        if (i == 0 || i + 1 == nz) {
            const std::size_t in = i == 0 ? 1 : nz - 2;
            sub = sup = 0.0;
            diag = 1.0;
            if (mur) {
                (i == 0 ? sup : sub) = -r_z_;
                rhs = curr[o + in] - r_z_ * curr[o + i];
            } else {
                rhs = 0.0;
            }
            return;
        }
        if (hard && i == s.z_index) {
            sub = sup = 0.0;
            diag = 1.0;
            rhs = source_value(s, t_next);
            return;
        }
        sub = sup = -beta_;
        diag = alpha_ + 2.0 * beta_;
        rhs = rhs_base[o + i];
    };

    double sub, diag, sup, rhs;
    row(0, sub, diag, sup, rhs);
    cp[0] = sup / diag;
    dp[0] = rhs / diag;
    for (std::size_t i = 1; i < nz; ++i) {
        row(i, sub, diag, sup, rhs);
        const double den = diag - sub * cp[i - 1];
        if (std::abs(den) <= 1e-14 * (std::abs(diag) + std::abs(sub))) {
            std::ostringstream os;
            os << "tridiagonal system near-singular at cell " << i << ", column " << j << ", t = " << state_.t << " s";
            throw NumericalError(os.str());
        }
        cp[i] = sup / den;
        dp[i] = (rhs - sub * dp[i - 1]) / den;
    }
    next[o + nz - 1] = dp[nz - 1];
    for (std::size_t i = nz - 1; i-- > 0;) next[o + i] = dp[i] - cp[i] * next[o + i + 1];
}

namespace {

// δ²φ at interior cell i of column offset o
inline double lap(const std::vector<double>& p, std::size_t k) { return p[k + 1] - 2.0 * p[k] + p[k - 1]; }

void check_finite(const std::vector<double>& p, std::size_t nz, double t) {
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!std::isfinite(p[k])) {
            std::ostringstream os;
            os << "non-finite field at cell z=" << k % nz << ", x=" << k / nz << ", t = " << t << " s";
            throw NumericalError(os.str());
        }
    }
}

} // namespace

void Simulation::initialize(const std::vector<double>& phi0, const std::vector<double>& dphi0) {
    const std::size_t n = state_.nz * state_.nx;
    if ((!phi0.empty() && phi0.size() != n) || (!dphi0.empty() && dphi0.size() != n))
        throw PreconditionError("initialize: field size does not match the grid");
    const double dt = config_.grid.dt;
    std::vector<double> p0 = phi0.empty() ? std::vector<double>(n, 0.0) : phi0;
    std::vector<double> v0 = dphi0.empty() ? std::vector<double>(n, 0.0) : dphi0;

    // ∂²φ/∂t² from (C' - C_J a δ²/Δz²) φ_tt = F(φ^0, 0): same tridiagonal with Δt² scaled out
    std::vector<double> f;
    forcing(p0, 0.0, f, true);
    std::vector<double> acc(n, 0.0);
    const std::size_t nz = state_.nz, nx = state_.nx;
    const double al = alpha_ * dt * dt, be = beta_ * dt * dt;
    const std::size_t j0 = nx == 1 ? 0 : 1, j1 = nx == 1 ? 1 : nx - 1;
    std::vector<double> cp(nz), dp(nz);
    for (std::size_t j = j0; j < j1; ++j) {
        const std::size_t o = j * nz;
        cp[0] = 0.0;
        dp[0] = 0.0;
        for (std::size_t i = 1; i + 1 < nz; ++i) {
            const double den = al + 2.0 * be + be * cp[i - 1];
            cp[i] = -be / den;
            dp[i] = (f[o + i] + be * dp[i - 1]) / den;
        }
        acc[o + nz - 1] = 0.0;
        for (std::size_t i = nz - 1; i-- > 1;) acc[o + i] = dp[i] - cp[i] * acc[o + i + 1];
    }

    state_.prev = p0;
    state_.curr.resize(n);
    for (std::size_t k = 0; k < n; ++k) state_.curr[k] = p0[k] + dt * v0[k] + 0.5 * dt * dt * acc[k];
    const auto& s = config_.source;
    if (s.hard) {
        for (std::size_t j = j0; j < j1; ++j) {
            if (!is_source_column(s, j, nx)) continue;
            state_.prev[j * nz + s.z_index] = source_value(s, 0.0);
            state_.curr[j * nz + s.z_index] = source_value(s, dt);
        }
    }
    if (config_.grid.boundary == Boundary::fixed) {
        for (std::size_t j = 0; j < nx; ++j) state_.curr[j * nz] = state_.curr[j * nz + nz - 1] = 0.0;
        if (nx > 1)
            for (std::size_t i = 0; i < nz; ++i) state_.curr[i] = state_.curr[(nx - 1) * nz + i] = 0.0;
    }
    state_.step = 1;
    state_.t = dt;
    check_finite(state_.curr, nz, state_.t);
}

void Simulation::step() {
    const std::size_t nz = state_.nz, nx = state_.nx;
    const auto& p = state_.prev;
    const auto& c = state_.curr;
    thread_local std::vector<double> rhs, next;
    forcing(c, state_.t, rhs, true);
    const std::size_t j0 = nx == 1 ? 0 : 1, j1 = nx == 1 ? 1 : nx - 1;
    for (std::size_t j = j0; j < j1; ++j) {
        const std::size_t o = j * nz;
        for (std::size_t i = 1; i + 1 < nz; ++i) {
            const std::size_t k = o + i;
            rhs[k] += alpha_ * (2.0 * c[k] - p[k]) - 2.0 * beta_ * lap(c, k) + beta_ * lap(p, k);
        }
    }
    next.assign(nz * nx, 0.0);
    if (beta_ == 0.0) {
        // explicit update, then the boundary rule
        const auto& s = config_.source;
        for (std::size_t j = j0; j < j1; ++j) {
            const std::size_t o = j * nz;
            for (std::size_t i = 1; i + 1 < nz; ++i) next[o + i] = rhs[o + i] / alpha_;
            if (s.hard && is_source_column(s, j, nx)) next[o + s.z_index] = source_value(s, state_.t + config_.grid.dt);
        }
        if (config_.grid.boundary == Boundary::mur) apply_mur_boundary(next, c, nz, nx, r_z_, r_x_);
    } else {
        for (std::size_t j = j0; j < j1; ++j) solve_column(j, rhs, next);
        if (nx > 1 && config_.grid.boundary == Boundary::mur) {
            const std::size_t last = (nx - 1) * nz, inner = (nx - 2) * nz;
            for (std::size_t i = 0; i < nz; ++i) {
                next[i] = c[nz + i] + r_x_ * (next[nz + i] - c[i]);
                next[last + i] = c[inner + i] + r_x_ * (next[inner + i] - c[last + i]);
            }
        }
    }
    state_.prev.swap(state_.curr);
    state_.curr.swap(next);
    state_.step += 1;
    state_.t = static_cast<double>(state_.step) * config_.grid.dt;
    check_finite(state_.curr, nz, state_.t);
}

std::vector<double> Simulation::residual(const std::vector<double>& older, const std::vector<double>& old,
                                         const std::vector<double>& next, double t_old) const {
    const std::size_t nz = state_.nz, nx = state_.nx;
    std::vector<double> f;
    forcing(old, t_old, f, false);
    std::vector<double> res(nz * nx, 0.0);
    const std::size_t j0 = nx == 1 ? 0 : 1, j1 = nx == 1 ? 1 : nx - 1;
    for (std::size_t j = j0; j < j1; ++j)
        for (std::size_t i = 1; i + 1 < nz; ++i) {
            const std::size_t k = j * nz + i;
            res[k] = alpha_ * (next[k] - 2.0 * old[k] + older[k]) -
                     beta_ * (lap(next, k) - 2.0 * lap(old, k) + lap(older, k)) - f[k];
        }
    return res;
}

double Simulation::energy() const {
    const auto& g = config_.grid;
    const auto& jp = config_.junction;
    const std::size_t nz = state_.nz, nx = state_.nx;
    const double dt = g.dt;
    const double cs = jp.capacitance_per_length();
    const double cj = jp.junction_capacitance * jp.cell_length;
    const double k = jp.critical_current * jp.cell_length / constants::reduced_flux_quantum;
    const auto& a = state_.prev;  // φ^n
    const auto& b = state_.curr;  // φ^{n+1}
    double e = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
        const std::size_t o = j * nz;
        for (std::size_t i = 0; i < nz; ++i) {
            const double u = (b[o + i] - a[o + i]) / dt;
            e += 0.5 * cs * u * u;
            if (i + 1 < nz) {
                const double du = (b[o + i + 1] - a[o + i + 1] - b[o + i] + a[o + i]) / (dt * g.dz);
                e += 0.5 * cj * du * du;
                e += 0.5 * k * (b[o + i + 1] - b[o + i]) * (a[o + i + 1] - a[o + i]) / (g.dz * g.dz);
            }
            if (nx > 1 && j + 1 < nx)
                e += 0.5 * k * (b[o + nz + i] - b[o + i]) * (a[o + nz + i] - a[o + i]) / (g.dx * g.dx);
        }
    }
    return e * g.dz * constants::reduced_flux_quantum * constants::reduced_flux_quantum;
}

FieldRecord run(const ScenarioConfig& config) {
    Simulation sim(config);
    FieldRecord rec;
    rec.courant = stability_check(sim.config().grid, sim.config().junction);
    const auto& cfg = sim.config();
    for (const auto& p : cfg.probes) rec.probes.push_back({p.id, p.z_index, cfg.grid.dimension == 1 ? 0 : p.x_index, {}});
    for (auto& p : rec.probes) p.phi.reserve(cfg.run.steps + 1);
    rec.t.reserve(cfg.run.steps + 1);

    auto record = [&](const std::vector<double>& field, std::size_t n) {
        rec.t.push_back(static_cast<double>(n) * cfg.grid.dt);
        for (auto& p : rec.probes) p.phi.push_back(field[p.x_index * cfg.grid.nz + p.z_index]);
        if (cfg.run.snapshot_every > 0 && n % cfg.run.snapshot_every == 0 && n > 0)
            rec.snapshots.push_back({n, static_cast<double>(n) * cfg.grid.dt, field});
    };
    sim.initialize();
    record(sim.state().prev, 0);
    record(sim.state().curr, 1);
    while (sim.state().step < cfg.run.steps) {
        sim.step();
        record(sim.state().curr, sim.state().step);
    }
    return rec;
}

void write_probe_csv(std::ostream& os, const FieldRecord& record) {
    os.precision(17);
    os << "t_s,probe_id,phi_rad\n";
    for (std::size_t n = 0; n < record.t.size(); ++n)
        for (const auto& p : record.probes) os << record.t[n] << ',' << p.id << ',' << p.phi[n] << '\n';
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const GridSpec& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot file " + path.string());
    const std::size_t nx = grid.dimension == 1 ? 1 : grid.nx;
    if (snap.phi.size() != grid.nz * nx) throw PreconditionError("snapshot size does not match the grid");
    std::ostringstream h;
    h.precision(17);
    h << "jjmeta-snapshot 1\n"
      << "step " << snap.step << "\n"
      << "t_s " << snap.t << "\n"
      << "nz " << grid.nz << "\n"
      << "nx " << nx << "\n"
      << "dz_m " << grid.dz << "\n"
      << "dx_m " << grid.dx << "\n"
      << "dtype float64\n"
      << "byte_order little\n"
      << "layout z_fastest\n"
      << "end\n";
    const auto header = h.str();
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : snap.phi) {
        unsigned char b[8];
        std::memcpy(b, &v, 8);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
        out.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!out) throw IoError("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path, GridSpec* grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot file " + path.string());
    Snapshot snap;
    GridSpec g;
    std::string line;
    if (!std::getline(in, line) || line != "jjmeta-snapshot 1") throw IoError("not a snapshot file: " + path.string());
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "step") ls >> snap.step;
        else if (key == "t_s") ls >> snap.t;
        else if (key == "nz") ls >> g.nz;
        else if (key == "nx") ls >> g.nx;
        else if (key == "dz_m") ls >> g.dz;
        else if (key == "dx_m") ls >> g.dx;
    }
    if (line != "end") throw IoError("truncated snapshot header in " + path.string());
    g.dimension = g.nx > 1 ? 2 : 1;
    snap.phi.resize(g.nz * g.nx);
    for (auto& v : snap.phi) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
        std::memcpy(&v, b, 8);
    }
    if (!in) throw IoError("truncated snapshot data in " + path.string());
    if (grid) *grid = g;
    return snap;
}

} // namespace jjmeta::fdtd

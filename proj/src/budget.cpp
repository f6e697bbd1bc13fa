#include "jjmeta/budget.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "jjmeta/bessel.hpp"
#include "jjmeta/constants.hpp"
#include "jjmeta/errors.hpp"
#include "yaml_section.hpp"

namespace jjmeta::budget {

namespace {

using detail::Section;

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) throw PreconditionError(std::string(what) + " must be nonnegative");
}

void validate(const ThermalInputs& in) {
    for (const auto& l : in.lines) {
        require_nonnegative(l.k, "line k");
        require_nonnegative(l.area, "line area");
        require_nonnegative(l.delta_t, "line delta T");
    }
    require_nonnegative(in.array.bias_current, "bias current");
    require_nonnegative(in.array.resistance, "junction resistance");
    require_nonnegative(in.array.modulation_power, "modulation power");
    for (const auto& r : in.rf) {
        require_nonnegative(r.omega_m, "rf omega_m");
        require_nonnegative(r.capacitance, "rf capacitance");
        require_nonnegative(r.v_rf, "rf amplitude");
        if (!(r.q > 0.0)) throw PreconditionError("quality factor must be positive");
    }
    require_nonnegative(in.delivery.efficiency, "coupling efficiency");
    require_nonnegative(in.delivery.p_in, "input power");
    require_nonnegative(in.delivery.beta, "beta");
    if (!(in.delivery.path_loss > 0.0)) throw PreconditionError("path loss must be positive");
    if (!(in.p_cool > 0.0)) throw PreconditionError("cooling budget must be positive");
}

void validate(const FidelityInputs& f) {
    require_nonnegative(f.omega_s, "modulation bandwidth");
    if (!(f.delta_f_min > 0.0)) throw PreconditionError("delta_f_min must be positive");
    if (!(f.t1 > 0.0) || !(f.t2 > 0.0)) throw PreconditionError("T1 and T2 must be positive");
    require_nonnegative(f.beta, "beta");
    require_nonnegative(f.omega_r, "Rabi frequency");
    require_nonnegative(f.t_gate, "gate time");
    require_nonnegative(f.ratio, "coupling ratio");
}

Flag flag_at_least(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, value >= threshold};
}

Flag flag_above(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, value > threshold};
}

Flag flag_below(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, value < threshold};
}

} // namespace

double conduction_load(std::span<const ConductionLine> lines) {
    double q = 0.0;
    for (const auto& l : lines) {
        if (!(l.length > 0.0)) throw PreconditionError("conduction line length must be positive");
        q += l.k * l.area * l.delta_t / l.length;
    }
    return q;
}

double jj_active_power(const JunctionArray& array) {
    const double n = double(array.per_side) * double(array.per_side);
    return n * (array.bias_current * array.bias_current * array.resistance + array.modulation_power);
}

ThermalInputs default_thermal() {
    ThermalInputs in;
    RfLoss rf;
    rf.count = in.array.per_side * in.array.per_side;
    rf.omega_m = constants::two_pi * 2e9;
    rf.capacitance = 10e-15;
    rf.q = 100.0;
    // amplitude that puts the array's RF loss at 3 µW
    rf.v_rf = std::sqrt(2.0 * rf.q * 3e-6 / (double(rf.count) * rf.omega_m * rf.capacitance));
    in.rf.push_back(rf);

    in.delivery.p_in = 1e-6;
    in.delivery.beta = 1.0;
    in.delivery.order = 1;
    const double j1 = bessel_j(1, 1.0);
    in.delivery.efficiency = 0.1 / (j1 * j1);
    return in;
}

PowerBreakdown power_totals(const ThermalInputs& in) {
    validate(in);
    PowerBreakdown p;
    p.conduction = conduction_load(in.lines);
    p.p_static = jj_active_power(in.array);
    for (const auto& r : in.rf) {
        if (std::isinf(r.q)) continue;
        p.p_dynamic += double(r.count) * r.omega_m * r.capacitance * r.v_rf * r.v_rf / (2.0 * r.q);
    }
    const auto& d = in.delivery;
    const double jn = d.efficiency > 0.0 && d.p_in > 0.0 ? bessel_j(d.order, d.beta) : 0.0;
    p.p_per_qubit = d.efficiency * d.p_in * jn * jn / d.path_loss;
    p.p_qubits = double(in.n_qubit) * p.p_per_qubit;
    p.total = p.p_static + p.p_dynamic + p.p_qubits;
    p.margin = in.p_cool - p.total;
    return p;
}

std::size_t channel_count(double omega_s, double delta_f_min) {
    if (!(delta_f_min > 0.0)) throw PreconditionError("delta_f_min must be positive");
    require_nonnegative(omega_s, "modulation bandwidth");
    const double ratio = rad_to_hz(omega_s) / delta_f_min;
    return std::size_t(std::floor(ratio * (1.0 + 1e-12)));
}

std::vector<Collision> collision_guard(std::span<const double> f_hz, std::span<const double> alpha_hz, double guard_hz) {
    if (f_hz.empty()) throw PreconditionError("frequency plan is empty");
    if (f_hz.size() != alpha_hz.size()) throw PreconditionError("one anharmonicity per channel required");
    std::vector<Collision> out;
    for (std::size_t j = 0; j < f_hz.size(); ++j)
        for (std::size_t k = 0; k < f_hz.size(); ++k) {
            if (j == k) continue;
            const double m = std::abs(f_hz[j] - f_hz[k] - std::abs(alpha_hz[k]));
            if (m < guard_hz) out.push_back({j, k, m});
        }
    return out;
}

double c_nl(int order, double beta) {
    const int k = std::abs(order);
    const double j0 = bessel_j(0, beta);
    if (std::abs(j0) < 1e-12) throw PreconditionError("J0(beta) vanishes");
    const double jk = bessel_j(k, beta);
    return jk * jk / (j0 * j0) / (1.0 + beta * beta * double(k) * double(k) / 4.0);
}

double crosstalk_error(std::span<const CrosstalkTerm> terms, double omega_r) {
    double eps = 0.0;
    for (const auto& t : terms) {
        if (t.offset == 0.0) throw PreconditionError("crosstalk offset must be nonzero");
        eps += t.ratio * t.ratio * omega_r * omega_r / (t.offset * t.offset) * t.c_nl;
    }
    return eps;
}

std::vector<CrosstalkTerm> uniform_plan(std::size_t n, std::size_t j, double spacing, double ratio, double c_nl_value,
                                        double beta) {
    if (n > 0 && j >= n) throw PreconditionError("channel index outside the plan");
    std::vector<CrosstalkTerm> terms;
    for (std::size_t m = 0; m < n; ++m) {
        if (m == j) continue;
        const int d = int(m) - int(j);
        terms.push_back({ratio, double(d) * spacing, c_nl_value < 0.0 ? c_nl(d, beta) : c_nl_value});
    }
    return terms;
}

double crosstalk_total(double epsilon_single, std::size_t n_freq) {
    return n_freq == 0 ? 0.0 : double(n_freq - 1) * epsilon_single;
}

double decoherence_error(double t_g, double t1, double t2) {
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw PreconditionError("T1 and T2 must be positive");
    return t_g / 3.0 * (1.0 / t1 + 1.0 / t2);
}

GateTimes rabi_and_gatetimes(double mu, double field, double g, double delta) {
    if (!(mu > 0.0) || !(field > 0.0) || !(g > 0.0) || !(delta > 0.0))
        throw PreconditionError("dipole, field, g and detuning must be positive");
    GateTimes t;
    t.omega_r = 2.0 * mu * field / constants::hbar;
    t.rabi_hz = rad_to_hz(t.omega_r);
    t.t_pi = constants::pi / t.omega_r;
    t.t_cz = constants::pi * delta / (4.0 * g * g);
    const double gc = rad_to_hz(g), dc = rad_to_hz(delta);
    t.t_cz_cyclic = constants::pi * dc / (4.0 * gc * gc);
    auto in_band = [](double x) { return x >= 50e-9 && x <= 200e-9; };
    t.t_cz_in_band = in_band(t.t_cz);
    t.t_cz_cyclic_in_band = in_band(t.t_cz_cyclic);
    return t;
}

bool BudgetReport::all_pass() const {
    for (const auto& f : flags)
        if (!f.pass) return false;
    return true;
}

BudgetReport full_report(const ThermalInputs& thermal, const FidelityInputs& fid) {
    validate(fid);
    BudgetReport r;
    r.power = power_totals(thermal);
    r.channels = channel_count(fid.omega_s, fid.delta_f_min);
    const double head = thermal.p_cool - r.power.p_static - r.power.p_dynamic;
    if (r.power.p_per_qubit > 0.0 && head > 0.0)
        r.power_limited_qubits = std::size_t(std::floor(head / r.power.p_per_qubit * (1.0 + 1e-12)));
    if (r.channels > 0) r.spatial_segments = (thermal.n_qubit + r.channels - 1) / r.channels;

    const double cnl1 = fid.c_nl < 0.0 ? c_nl(1, fid.beta) : fid.c_nl;
    if (fid.spacing > 0.0) {
        const CrosstalkTerm one{fid.ratio, fid.spacing, cnl1};
        r.eps_nearest = crosstalk_error(std::span(&one, 1), fid.omega_r);
        if (r.channels > 1) {
            const auto terms = uniform_plan(r.channels, r.channels / 2, fid.spacing, fid.ratio, fid.c_nl, fid.beta);
            r.eps_xt = crosstalk_error(terms, fid.omega_r);
        }
    }
    r.eps_dec = decoherence_error(fid.t_gate, fid.t1, fid.t2);
    r.eps_amp = fid.eps_amp;
    r.eps_phase = fid.eps_phase;
    r.infidelity = r.eps_xt + r.eps_dec + r.eps_amp + r.eps_phase;
    r.fidelity_xt = 1.0 - r.eps_xt;
    r.fidelity = 1.0 - r.infidelity;

    r.flags.push_back(flag_below("cooling_power_w", r.power.total, thermal.p_cool));
    r.flags.push_back(flag_at_least("qubits_powered", double(r.power_limited_qubits), double(thermal.n_qubit)));
    r.flags.push_back(flag_at_least("channel_spacing_hz", fid.delta_f_min, 50e6));
    r.flags.push_back(flag_at_least("isolation_db", fid.isolation_db, 60.0));
    r.flags.push_back(flag_above("spatial_isolation_db", fid.spatial_isolation_db, 30.0));
    r.flags.push_back(flag_above("harmonic_suppression_db", fid.harmonic_suppression_db, 40.0));
    r.flags.push_back(flag_below("phase_noise_rad", fid.phase_noise_rad, 10e-3));
    r.flags.push_back(flag_at_least("gate_fidelity", r.fidelity, 0.999));

    r.metadata = {
        {"critical_current_a", 10e-6},
        {"bias_fraction_of_ic", thermal.array.bias_current / 10e-6},
        {"junctions", thermal.array.per_side * thermal.array.per_side},
        {"crosstalk_channel", r.channels / 2},
        {"decoherence_model", "(t_g/3)(1/T1 + 1/T2)"},
        {"eps_amp_phase", "inputs"},
    };
    return r;
}

void apply_yaml(std::string_view text, ThermalInputs& thermal, FidelityInputs& fid) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
    if (!root || !root.IsMap() || !root["budget"]) return;

    Section b(root["budget"], "budget",
              {"n_qubit", "p_cool_w", "junctions_per_side", "bias_current_a", "junction_resistance_ohm",
               "modulation_power_w", "lines", "rf", "delivery", "fidelity"});
    b.read("n_qubit", thermal.n_qubit);
    b.read("p_cool_w", thermal.p_cool);
    b.read("junctions_per_side", thermal.array.per_side);
    b.read("bias_current_a", thermal.array.bias_current);
    b.read("junction_resistance_ohm", thermal.array.resistance);
    b.read("modulation_power_w", thermal.array.modulation_power);

    auto list = [&](const char* key) {
        const auto node = b.get(key);
        if (!node.IsSequence()) throw ConfigError(b.path(key), "expected a list" + Section::where(node));
        return node;
    };
    if (b.has("lines")) {
        thermal.lines.clear();
        const auto node = list("lines");
        for (std::size_t i = 0; i < node.size(); ++i) {
            Section s(node[i], b.path("lines") + "[" + std::to_string(i) + "]",
                      {"k_w_per_m_k", "area_m2", "length_m", "delta_t_k"});
            ConductionLine l;
            s.read("k_w_per_m_k", l.k);
            s.read("area_m2", l.area);
            s.read("length_m", l.length);
            s.read("delta_t_k", l.delta_t);
            thermal.lines.push_back(l);
        }
    }
    if (b.has("rf")) {
        thermal.rf.clear();
        const auto node = list("rf");
        for (std::size_t i = 0; i < node.size(); ++i) {
            Section s(node[i], b.path("rf") + "[" + std::to_string(i) + "]",
                      {"modulation_frequency_hz", "junction_capacitance_f", "v_rf_v", "q", "count"});
            RfLoss r;
            double f = 0.0;
            s.read("modulation_frequency_hz", f);
            r.omega_m = hz_to_rad(f);
            s.read("junction_capacitance_f", r.capacitance);
            s.read("v_rf_v", r.v_rf);
            s.read("q", r.q);
            s.read("count", r.count);
            thermal.rf.push_back(r);
        }
    }
    Section d(b.get("delivery"), b.path("delivery"), {"efficiency", "p_in_w", "beta", "order", "path_loss"});
    d.read("efficiency", thermal.delivery.efficiency);
    d.read("p_in_w", thermal.delivery.p_in);
    d.read("beta", thermal.delivery.beta);
    d.read("order", thermal.delivery.order);
    d.read("path_loss", thermal.delivery.path_loss);

    Section f(b.get("fidelity"), b.path("fidelity"),
              {"bandwidth_hz", "delta_f_min_hz", "spacing_hz", "ratio", "c_nl", "beta", "rabi_hz", "t1_s", "t2_s",
               "t_gate_s", "eps_amp", "eps_phase", "isolation_db", "spatial_isolation_db",
               "harmonic_suppression_db", "phase_noise_rad"});
    auto read_hz = [&](const char* key, double& rad) {
        double hz = rad_to_hz(rad);
        f.read(key, hz);
        if (f.has(key)) rad = hz_to_rad(hz);
    };
    read_hz("bandwidth_hz", fid.omega_s);
    f.read("delta_f_min_hz", fid.delta_f_min);
    read_hz("spacing_hz", fid.spacing);
    f.read("ratio", fid.ratio);
    f.read("c_nl", fid.c_nl);
    f.read("beta", fid.beta);
    read_hz("rabi_hz", fid.omega_r);
    f.read("t1_s", fid.t1);
    f.read("t2_s", fid.t2);
    f.read("t_gate_s", fid.t_gate);
    f.read("eps_amp", fid.eps_amp);
    f.read("eps_phase", fid.eps_phase);
    f.read("isolation_db", fid.isolation_db);
    f.read("spatial_isolation_db", fid.spatial_isolation_db);
    f.read("harmonic_suppression_db", fid.harmonic_suppression_db);
    f.read("phase_noise_rad", fid.phase_noise_rad);
}

std::vector<SweepRow> sweep(const ThermalInputs& thermal, const FidelityInputs& fid, const std::string& key,
                            std::span<const double> values) {
    using Setter = std::function<void(ThermalInputs&, FidelityInputs&, double)>;
    static const std::map<std::string, Setter> setters{
        {"n_qubit", [](auto& t, auto&, double v) { t.n_qubit = std::size_t(v); }},
        {"p_cool", [](auto& t, auto&, double v) { t.p_cool = v; }},
        {"p_in", [](auto& t, auto&, double v) { t.delivery.p_in = v; }},
        {"v_rf", [](auto& t, auto&, double v) { for (auto& r : t.rf) r.v_rf = v; }},
        {"q", [](auto& t, auto&, double v) { for (auto& r : t.rf) r.q = v; }},
        {"bias_current", [](auto& t, auto&, double v) { t.array.bias_current = v; }},
        {"delta_f_min", [](auto&, auto& f, double v) { f.delta_f_min = v; }},
        {"spacing_hz", [](auto&, auto& f, double v) { f.spacing = hz_to_rad(v); }},
        {"ratio", [](auto&, auto& f, double v) { f.ratio = v; }},
        {"c_nl", [](auto&, auto& f, double v) { f.c_nl = v; }},
        {"omega_r_hz", [](auto&, auto& f, double v) { f.omega_r = hz_to_rad(v); }},
        {"t1", [](auto&, auto& f, double v) { f.t1 = v; }},
        {"t2", [](auto&, auto& f, double v) { f.t2 = v; }},
        {"t_gate", [](auto&, auto& f, double v) { f.t_gate = v; }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("sweep.key", "unknown sweep key '" + key + "'");
    std::vector<SweepRow> rows;
    for (double v : values) {
        auto t = thermal;
        auto f = fid;
        it->second(t, f, v);
        rows.push_back({v, full_report(t, f)});
    }
    return rows;
}

nlohmann::json to_json(const BudgetReport& r) {
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : r.flags)
        flags.push_back({{"name", f.name}, {"value", f.value}, {"threshold", f.threshold}, {"pass", f.pass}});
    return {
        {"power_w",
         {{"conduction", r.power.conduction},
          {"static", r.power.p_static},
          {"dynamic", r.power.p_dynamic},
          {"per_qubit", r.power.p_per_qubit},
          {"qubits", r.power.p_qubits},
          {"total", r.power.total},
          {"margin", r.power.margin}}},
        {"channels", r.channels},
        {"power_limited_qubits", r.power_limited_qubits},
        {"spatial_segments", r.spatial_segments},
        {"infidelity",
         {{"crosstalk_nearest", r.eps_nearest},
          {"crosstalk", r.eps_xt},
          {"decoherence", r.eps_dec},
          {"amplitude", r.eps_amp},
          {"phase", r.eps_phase},
          {"total", r.infidelity}}},
        {"fidelity_crosstalk", r.fidelity_xt},
        {"fidelity", r.fidelity},
        {"flags", flags},
        {"all_pass", r.all_pass()},
        {"metadata", r.metadata},
    };
}

void write_text(std::ostream& os, const BudgetReport& r) {
    const auto old = os.precision(8);
    os << "power (uW): static " << r.power.p_static * 1e6 << ", dynamic " << r.power.p_dynamic * 1e6 << ", qubits "
       << r.power.p_qubits * 1e6 << " (" << r.power.p_per_qubit * 1e6 << " each), total " << r.power.total * 1e6
       << ", margin " << r.power.margin * 1e6 << '\n';
    if (r.power.conduction > 0.0) os << "conduction (uW): " << r.power.conduction * 1e6 << '\n';
    os << "channels: " << r.channels << ", spatial segments: " << r.spatial_segments
       << ", power-limited qubits: " << r.power_limited_qubits << '\n';
    os << "infidelity: crosstalk " << r.eps_xt << " (nearest " << r.eps_nearest << "), decoherence " << r.eps_dec
       << ", amplitude " << r.eps_amp << ", phase " << r.eps_phase << ", total " << r.infidelity << '\n';
    os << "fidelity: " << r.fidelity << " (crosstalk only " << r.fidelity_xt << ")\n";
    for (const auto& f : r.flags)
        os << "  " << (f.pass ? "pass " : "FAIL ") << f.name << " = " << f.value << " (threshold " << f.threshold
           << ")\n";
    os.precision(old);
}

void write_sweep_csv(std::ostream& os, const std::string& key, const std::vector<SweepRow>& rows) {
    os << key << ",p_total_w,margin_w,infidelity,fidelity,all_pass\n";
    const auto old = os.precision(12);
    for (const auto& row : rows)
        os << row.value << ',' << row.report.power.total << ',' << row.report.power.margin << ','
           << row.report.infidelity << ',' << row.report.fidelity << ',' << (row.report.all_pass() ? 1 : 0) << '\n';
    os.precision(old);
}

} // namespace jjmeta::budget

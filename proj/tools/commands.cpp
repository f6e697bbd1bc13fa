#include <yaml-cpp/yaml.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cli.hpp"
#include "jjmeta/analysis.hpp"
#include "jjmeta/budget.hpp"
#include "jjmeta/config.hpp"
#include "jjmeta/constants.hpp"
#include "jjmeta/errors.hpp"
#include "jjmeta/fdtd.hpp"
#include "jjmeta/modes.hpp"
#include "jjmeta/sizzle.hpp"
#include "yaml_section.hpp"

namespace jjmeta::cli {

namespace {

using detail::Section;

YAML::Node root_of(const RunContext& ctx) {
    try {
        return YAML::Load(ctx.yaml);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
}

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

double modulation_step_hz(const ScenarioConfig& cfg) {
    return cfg.modulation.kind() == DriveKind::phase ? rad_to_hz(cfg.modulation.omega_rf)
                                                     : rad_to_hz(cfg.modulation.omega_m);
}

struct Probe {
    std::string id;
    std::vector<double> t, phi;
};

std::vector<Probe> read_probe_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t_s,probe_id,phi_rad", 0) != 0)
        throw ConfigError("--input", "expected a t_s,probe_id,phi_rad header in " + path.string());
    std::vector<Probe> probes;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto a = line.find(','), b = line.rfind(',');
        if (a == std::string::npos || a == b) throw ConfigError("--input", "malformed row " + std::to_string(row));
        const std::string id = line.substr(a + 1, b - a - 1);
        auto it = std::find_if(probes.begin(), probes.end(), [&](const Probe& p) { return p.id == id; });
        if (it == probes.end()) {
            probes.push_back({id, {}, {}});
            it = probes.end() - 1;
        }
        auto parse = [&](const std::string& cell) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw ConfigError("--input", "non-numeric value on row " + std::to_string(row));
            return v;
        };
        it->t.push_back(parse(line.substr(0, a)));
        it->phi.push_back(parse(line.substr(b + 1)));
    }
    return probes;
}

std::vector<Probe> probes_of(const fdtd::FieldRecord& rec) {
    std::vector<Probe> out;
    for (const auto& p : rec.probes) out.push_back({p.id, rec.t, p.phi});
    return out;
}

struct SpectrumSetup {
    std::string probe;
    double skip = 0.0;
    analysis::SpectrumOptions opt;
};

SpectrumSetup spectrum_setup(const YAML::Node& root, const ScenarioConfig& cfg) {
    Section s(root["spectrum"], "spectrum",
              {"probe", "f0_hz", "f_mod_hz", "window", "max_order", "label_tolerance", "threshold_db", "skip_s"});
    SpectrumSetup out;
    out.opt.f0 = rad_to_hz(cfg.source.carrier_omega);
    out.opt.f_mod = modulation_step_hz(cfg);
    std::string window = "hann";
    s.read("probe", out.probe);
    s.read("f0_hz", out.opt.f0);
    s.read("f_mod_hz", out.opt.f_mod);
    s.read("window", window);
    s.read("max_order", out.opt.max_order);
    s.read("label_tolerance", out.opt.label_tolerance);
    s.read("threshold_db", out.opt.threshold_db);
    s.read("skip_s", out.skip);
    require(window == "hann" || window == "rectangular", "spectrum.window", "must be hann or rectangular");
    out.opt.window = window == "hann" ? analysis::Window::hann : analysis::Window::rectangular;
    return out;
}

analysis::Spectrum probe_spectrum(const std::vector<Probe>& probes, const SpectrumSetup& setup, std::string* used) {
    require(!probes.empty(), "probes", "no probe recorded; add a probes list to the scenario");
    auto it = probes.begin();
    if (!setup.probe.empty()) {
        it = std::find_if(probes.begin(), probes.end(), [&](const Probe& p) { return p.id == setup.probe; });
        require(it != probes.end(), "spectrum.probe", "no probe named '" + setup.probe + "'");
    }
    std::vector<double> t, x;
    for (std::size_t i = 0; i < it->t.size(); ++i)
        if (it->t[i] >= setup.skip) {
            t.push_back(it->t[i]);
            x.push_back(it->phi[i]);
        }
    if (used) *used = it->id;
    return analysis::spectrum(t, x, setup.opt);
}

void fdtd_outputs(RunContext& ctx, const ScenarioConfig& cfg, const fdtd::FieldRecord& rec) {
    const fdtd::Simulation sim(cfg);
    const auto& g = sim.config().grid;
    ctx.write_table("probes", [&](std::ostream& os) { fdtd::write_probe_csv(os, rec); });
    for (const auto& snap : rec.snapshots) {
        std::ostringstream name;
        name << "snapshots/step_" << std::setw(7) << std::setfill('0') << snap.step << ".bin";
        fdtd::write_snapshot(ctx.add_file(name.str()), snap, g);
    }
    if (!rec.snapshots.empty()) {
        const auto& last = rec.snapshots.back();
        ctx.write_table("field", [&](std::ostream& os) {
            os << "z_index,x_index,phi_rad\n";
            os.precision(12);
            for (std::size_t j = 0; j < g.nx; ++j)
                for (std::size_t i = 0; i < g.nz; ++i) os << i << ',' << j << ',' << last.phi[j * g.nz + i] << '\n';
        });
    }
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : rec.probes) {
        double peak = 0.0;
        for (double v : p.phi) peak = std::max(peak, std::abs(v));
        probes.push_back({{"id", p.id}, {"z_index", p.z_index}, {"x_index", p.x_index}, {"peak_abs_phi_rad", peak}});
    }
    const auto& c = rec.courant;
    ctx.write_json("fdtd.json", {
                                    {"dimension", g.dimension},
                                    {"nz", g.nz},
                                    {"nx", g.nx},
                                    {"dz_m", g.dz},
                                    {"dx_m", g.dx},
                                    {"dt_s", c.dt},
                                    {"steps", cfg.run.steps},
                                    {"velocity_m_per_s", sim.velocity()},
                                    {"courant",
                                     {{"value", c.courant},
                                      {"limit", c.limit},
                                      {"margin", c.margin},
                                      {"binding", c.binding},
                                      {"warnings", c.warnings}}},
                                    {"probes", probes},
                                });
    *ctx.log << "fdtd: " << cfg.run.steps << " steps, dt " << c.dt << " s, Courant " << c.courant << '\n';
}

} // namespace

void cmd_dispersion(RunContext& ctx) {
    const auto cfg = parse_config(ctx.yaml);
    const auto root = root_of(ctx);
    Section s(root["dispersion"], "dispersion", {"n_h", "k_points", "k_span", "omega_window", "samples"});
    int n_h = 5, k_points = 200, samples = 2000;
    double k_span = 0.3, window = 0.6;
    s.read("n_h", n_h);
    s.read("k_points", k_points);
    s.read("k_span", k_span);
    s.read("omega_window", window);
    s.read("samples", samples);
    require(k_points >= 2, "dispersion.k_points", "must be at least 2");
    require(k_span > 0.0 && window > 0.0, "dispersion.k_span", "k_span and omega_window must be positive");

    const auto& jp = cfg.junction;
    const double v = derived_velocity(jp);
    const double k_ref = cfg.modulation.k_m > 0.0 ? cfg.modulation.k_m : constants::two_pi / (10.0 * jp.cell_length);
    std::vector<double> k(static_cast<std::size_t>(k_points));
    for (int i = 0; i < k_points; ++i) k[i] = k_ref * k_span * (-1.0 + 2.0 * i / (k_points - 1));
    for (std::size_t i = 0; i < k.size() / 2; ++i) k[k.size() - 1 - i] = -k[i];
    modes::ScanOptions opt;
    opt.omega_min = 1e-6 * v * k_ref;
    opt.omega_max = window * v * k_ref;
    opt.samples = samples;

    const auto scan = modes::dispersion_scan(jp, cfg.modulation, k, n_h, opt);
    const double asym = modes::dispersion_asymmetry(jp, cfg.modulation, k, n_h, opt);
    ctx.write_table("bands", [&](std::ostream& os) { modes::write_bands_csv(os, scan); });
    ctx.write_json("dispersion.json", {
                                          {"n_h", n_h},
                                          {"k_points", k_points},
                                          {"k_reference_rad_per_m", k_ref},
                                          {"velocity_m_per_s", v},
                                          {"omega_window_rad_per_s", {opt.omega_min, opt.omega_max}},
                                          {"bands", scan.bands.size()},
                                          {"asymmetry_rad_per_s", asym},
                                          {"asymmetry_relative", asym / (v * k_ref)},
                                          {"diagnostics", scan.diagnostics},
                                      });
    *ctx.log << "dispersion: " << scan.bands.size() << " bands, max |w(k) - w(-k)| = " << asym / (v * k_ref)
             << " v k_ref\n";
}

void cmd_modes(RunContext& ctx) {
    const auto cfg = parse_config(ctx.yaml);
    const auto root = root_of(ctx);
    Section s(root["modes"], "modes",
              {"n_modes", "delta_l", "periods", "dt_s", "record_every", "initial_mode", "initial_amplitude"});
    modes::EvolutionSpec spec;
    double periods = 60.0, amplitude = 1.0;
    int initial = 1;
    spec.delta_l = 0.05;
    spec.record_every = 10;
    s.read("n_modes", spec.n_modes);
    s.read("delta_l", spec.delta_l);
    s.read("periods", periods);
    s.read("dt_s", spec.dt);
    s.read("record_every", spec.record_every);
    s.read("initial_mode", initial);
    s.read("initial_amplitude", amplitude);
    require(spec.n_modes >= 1, "modes.n_modes", "must be at least 1");
    require(initial >= 1 && initial <= spec.n_modes, "modes.initial_mode", "must be within 1..n_modes");
    require(periods > 0.0, "modes.periods", "must be positive");
    require(cfg.modulation.omega_m > 0.0, "modulation.modulation_frequency_hz", "sets the fundamental; must be > 0");
    spec.initial.assign(std::size_t(spec.n_modes), {});
    spec.initial[std::size_t(initial - 1)] = amplitude;
    spec.duration = periods * constants::two_pi / cfg.modulation.omega_m;

    const auto traj = modes::evolve_modes(cfg.junction, cfg.modulation, spec);
    ctx.write_table("modes", [&](std::ostream& os) { modes::write_trajectory_csv(os, traj); });
    std::vector<double> f_hz, first, last;
    for (double w : traj.omega) f_hz.push_back(rad_to_hz(w));
    first = traj.energy.front();
    last = traj.energy.back();
    ctx.write_json("modes.json", {
                                     {"n_modes", spec.n_modes},
                                     {"delta_l", spec.delta_l},
                                     {"duration_s", spec.duration},
                                     {"samples", traj.t.size()},
                                     {"mode_frequency_hz", f_hz},
                                     {"energy_initial", first},
                                     {"energy_final", last},
                                 });
    *ctx.log << "modes: " << traj.t.size() << " samples over " << periods << " periods\n";
}

void cmd_fdtd(RunContext& ctx) {
    const auto cfg = parse_config(ctx.yaml);
    const auto report = fdtd::stability_check(cfg.grid, cfg.junction);
    if (!report.pass) {
        std::ostringstream msg;
        msg << "Courant number " << report.courant << " exceeds the limit " << report.limit << " in "
            << report.dimension << "D";
        throw ConfigError("grid", msg.str());
    }
    const auto rec = fdtd::run(cfg);
    fdtd_outputs(ctx, cfg, rec);
}

void cmd_spectrum(RunContext& ctx, const std::filesystem::path& input) {
    const auto cfg = parse_config(ctx.yaml);
    const auto root = root_of(ctx);
    const auto setup = spectrum_setup(root, cfg);
    std::vector<Probe> probes;
    if (input.empty()) {
        const auto report = fdtd::stability_check(cfg.grid, cfg.junction);
        if (!report.pass) throw ConfigError("grid", "Courant condition violated");
        probes = probes_of(fdtd::run(cfg));
    } else {
        probes = read_probe_csv(input);
    }
    std::string used;
    const auto spec = probe_spectrum(probes, setup, &used);
    ctx.write_table("spectrum", [&](std::ostream& os) { analysis::write_spectrum_csv(os, spec); });
    auto j = analysis::to_json(spec);
    j["probe"] = used;
    ctx.write_json("peaks.json", j);
    *ctx.log << "spectrum: probe " << used << ", " << spec.peaks.size() << " peaks\n";
}

void cmd_pattern(RunContext& ctx) {
    const auto root = root_of(ctx);
    Section s(root["pattern"], "pattern",
              {"elements", "k0_pitch_rad", "targets_deg", "steer_kx_over_k0", "points", "threshold_db"});
    std::size_t n = 100;
    double ka = constants::pi, steer = 0.0;
    std::vector<double> targets;
    analysis::FarFieldOptions opt;
    s.read("elements", n);
    s.read("k0_pitch_rad", ka);
    s.read("targets_deg", targets);
    s.read("steer_kx_over_k0", steer);
    s.read("points", opt.points);
    s.read("threshold_db", opt.threshold_db);
    require(n >= 2, "pattern.elements", "must be at least 2");
    require(ka > 0.0, "pattern.k0_pitch_rad", "must be positive");

    std::vector<std::complex<double>> excitation;
    std::vector<std::string> warnings;
    if (!targets.empty()) {
        auto plan = analysis::beam_plan(targets, 1.0, ka, n);
        excitation = std::move(plan.excitation);
        warnings = std::move(plan.warnings);
    } else {
        for (std::size_t j = 0; j < n; ++j) excitation.push_back(std::polar(1.0, -steer * ka * double(j)));
    }
    const auto pat = analysis::far_field(excitation, 1.0, ka, opt);
    ctx.write_table("pattern", [&](std::ostream& os) { analysis::write_pattern_csv(os, pat); });
    auto j = analysis::to_json(pat);
    j["elements"] = n;
    j["k0_pitch_rad"] = ka;
    j["targets_deg"] = targets;
    j["warnings"] = warnings;
    if (!targets.empty()) {
        std::vector<double> widths;
        for (double t : targets) widths.push_back(analysis::beamwidth_deg(t, 1.0, ka, n));
        j["target_beamwidth_deg"] = widths;
    }
    ctx.write_json("pattern.json", j);
    *ctx.log << "pattern: " << pat.lobes.size() << " lobes";
    if (!targets.empty()) *ctx.log << " for " << targets.size() << " targets";
    *ctx.log << '\n';
}

void cmd_sizzle(RunContext& ctx) {
    const auto root = root_of(ctx);
    Section s(root["sizzle"], "sizzle",
              {"q1", "q2", "coupling_hz", "detuning_mhz", "strength_mhz", "mask_steps", "phi0_rad", "phi1_rad"});
    auto qubit = [&](const char* key, double f, double alpha) {
        Section q(s.get(key), s.path(key), {"frequency_hz", "anharmonicity_hz", "levels"});
        sizzle::TransmonParams p;
        q.read("frequency_hz", f);
        q.read("anharmonicity_hz", alpha);
        q.read("levels", p.levels);
        p.omega01 = hz_to_rad(f);
        p.alpha = hz_to_rad(alpha);
        return p;
    };
    const auto q1 = qubit("q1", 5.133e9, 197e6);
    const auto q2 = qubit("q2", 5.0e9, 195e6);
    double coupling = 0.7e6;
    s.read("coupling_hz", coupling);
    auto grid = [&](const char* key, double lo, double hi, int count) {
        Section g(s.get(key), s.path(key), {"min", "max", "count"});
        g.read("min", lo);
        g.read("max", hi);
        g.read("count", count);
        require(count >= 2 && hi > lo, s.path(key), "needs count >= 2 and max > min");
        std::vector<double> out(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
        return out;
    };
    const auto det = grid("detuning_mhz", -400.0, 400.0, 100);
    const auto str = grid("strength_mhz", 0.0, 40.0, 100);
    sizzle::ZZMapOptions opt;
    s.read("mask_steps", opt.mask_steps);
    s.read("phi0_rad", opt.drive.phi0);
    s.read("phi1_rad", opt.drive.phi1);

    const double j = hz_to_rad(coupling);
    const auto map = sizzle::zz_map(q1, q2, j, det, str, opt);
    ctx.write_table("zz_map", [&](std::ostream& os) { sizzle::write_zz_csv(os, map); });
    auto js = sizzle::to_json(map);
    js["coupling_hz"] = coupling;
    js["static_zeta_perturbative_mhz"] = sizzle::static_zz_perturbative(q1, q2, j) / hz_to_rad(1e6);
    js["qubits"] = {{{"frequency_hz", rad_to_hz(q1.omega01)}, {"anharmonicity_hz", rad_to_hz(q1.alpha)}},
                    {{"frequency_hz", rad_to_hz(q2.omega01)}, {"anharmonicity_hz", rad_to_hz(q2.alpha)}}};
    ctx.write_json("zz_map.json", js);
    *ctx.log << "sizzle: static zeta " << map.static_mhz * 1e3 << " kHz, " << det.size() << " x " << str.size()
             << " map\n";
}

void cmd_budget(RunContext& ctx, const std::string& sweep) {
    auto thermal = budget::default_thermal();
    budget::FidelityInputs fid;
    budget::apply_yaml(ctx.yaml, thermal, fid);
    const auto report = budget::full_report(thermal, fid);
    ctx.write_json("budget.json", budget::to_json(report));
    ctx.write("budget.txt", [&](std::ostream& os) { budget::write_text(os, report); });
    if (!sweep.empty()) {
        const auto eq = sweep.find('=');
        require(eq != std::string::npos && eq > 0, "--sweep", "expected key=v1,v2,...");
        const std::string key = sweep.substr(0, eq);
        std::vector<double> values;
        std::stringstream ss(sweep.substr(eq + 1));
        for (std::string v; std::getline(ss, v, ',');) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(v, &used));
                if (used != v.size()) throw std::invalid_argument(v);
            } catch (const std::exception&) {
                throw ConfigError("--sweep", "not a number: '" + v + "'");
            }
        }
        require(!values.empty(), "--sweep", "no values");
        const auto rows = budget::sweep(thermal, fid, key, values);
        ctx.write_table("sweep", [&](std::ostream& os) { budget::write_sweep_csv(os, key, rows); });
    }
    *ctx.log << "budget: total " << report.power.total * 1e6 << " uW of " << thermal.p_cool * 1e6 << " uW, "
             << report.channels << " channels, fidelity " << std::setprecision(9) << report.fidelity
             << (report.all_pass() ? ", all flags pass" : ", flags FAIL") << '\n';
}

const std::vector<std::string> figure_ids{"fig2a", "fig2b", "fig2e", "fig4", "fig5", "fig3b", "table2"};

std::string figure_preset(const std::string& id) {
    const JunctionParams jp;
    std::ostringstream y;
    if (id == "fig2a") {
        const double k_m = constants::two_pi / (10.0 * jp.cell_length);
        const double omega_m = 0.25 * derived_velocity(jp) * k_m;
        y << "modulation:\n  delta_i: 0.35\n  modulation_wavenumber_rad_per_m: " << num(k_m)
          << "\n  modulation_frequency_hz: " << num(rad_to_hz(omega_m)) << "\ndispersion:\n  n_h: 5\n  k_points: 200\n";
    } else if (id == "fig2b") {
        y << "modes:\n  n_modes: 10\n  delta_l: 0.05\n  periods: 60\n  record_every: 10\n";
    } else if (id == "fig2e") {
        const double edge = std::asin(0.8) * 180.0 / constants::pi;
        y << "pattern:\n  elements: 100\n  k0_pitch_rad: " << num(constants::pi) << "\n  points: 7201\n  targets_deg: [";
        for (int q = 0; q < 40; ++q) y << (q ? ", " : "") << num(-edge + 2.0 * edge * q / 39.0);
        y << "]\n";
    } else if (id == "fig4") {
        y << "modulation:\n  delta_i: 0.2\n  modulation_frequency_hz: 1.0e9\n  modulation_wavenumber_rad_per_m: 2000\n"
             "grid:\n  dimension: 2\n  nz: 300\n  nx: 300\n"
             "source:\n  z_index: 40\n  x_index: 150\n  envelope_center_s: 1.6e-9\n  envelope_width_s: 0.4e-9\n"
             "probes:\n  - {id: axis, z_index: 250, x_index: 150}\n  - {id: side, z_index: 250, x_index: 40}\n"
             "run:\n  steps: 5000\n  snapshot_every: 1000\n";
    } else if (id == "fig5") {
        y << "modulation:\n  delta_phi_rad: 0.5\ngrid:\n  nz: 1500\n"
             "source:\n  z_index: 100\n  envelope_center_s: 6.0e-9\n  envelope_width_s: 1.0e-9\n"
             "probes:\n  - {id: out, z_index: 1200}\nrun:\n  steps: 4000\nspectrum:\n  probe: out\n";
    } else if (id == "fig3b") {
        y << "sizzle:\n  coupling_hz: 0.7e6\n";
    } else if (id == "table2") {
        y << "budget:\n  n_qubit: 45\n  p_cool_w: 20.0e-6\n";
    } else {
        throw ConfigError("figure", "unknown figure id '" + id + "'");
    }
    return y.str();
}

void cmd_reproduce(RunContext& ctx, const std::string& id) {
    if (id == "fig2a") return cmd_dispersion(ctx);
    if (id == "fig2b") return cmd_modes(ctx);
    if (id == "fig2e") return cmd_pattern(ctx);
    if (id == "fig3b") return cmd_sizzle(ctx);
    if (id == "fig4") return cmd_fdtd(ctx);
    if (id == "table2") return cmd_budget(ctx, "");
    if (id != "fig5") throw ConfigError("figure", "unknown figure id '" + id + "'");

    // one run per carrier, spectra stacked in long format
    std::ostringstream csv;
    csv << "carrier_hz,frequency_hz,magnitude_db\n";
    csv.precision(12);
    nlohmann::json peaks = nlohmann::json::array();
    for (double f0 : {4.6e9, 4.8e9, 5.0e9, 5.2e9, 5.4e9}) {
        const auto yaml = resolve_yaml(ctx.yaml, {"source.carrier_frequency_hz=" + num(f0)});
        const auto cfg = parse_config(yaml);
        auto setup = spectrum_setup(YAML::Load(yaml), cfg);
        const auto spec = probe_spectrum(probes_of(fdtd::run(cfg)), setup, nullptr);
        const auto db = spec.magnitude_db();
        for (std::size_t k = 0; k < db.size(); ++k) csv << f0 << ',' << spec.frequency[k] << ',' << db[k] << '\n';
        auto j = analysis::to_json(spec);
        j["carrier_hz"] = f0;
        peaks.push_back(j);
        *ctx.log << "fig5: carrier " << f0 * 1e-9 << " GHz, " << spec.peaks.size() << " peaks\n";
    }
    ctx.write_table("spectra", [&](std::ostream& os) { os << csv.str(); });
    ctx.write_json("peaks.json", peaks);
}

} // namespace jjmeta::cli

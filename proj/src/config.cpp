#include "jjmeta/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "jjmeta/errors.hpp"
#include "yaml_section.hpp"

namespace jjmeta {

double JunctionParams::josephson_inductance() const {
    return constants::flux_quantum / (constants::two_pi * critical_current);
}

DriveKind ModulationParams::kind() const {
    if (delta_phi > 0.0) return DriveKind::phase;
    if (delta_i > 0.0) return DriveKind::traveling;
    return DriveKind::none;
}

double ModulationParams::theta_at(std::size_t cell) const {
    if (theta_bias.empty()) return 0.0;
    if (theta_bias.size() == 1) return theta_bias.front();
    return theta_bias.at(cell);
}

double derived_velocity(const JunctionParams& jp) {
    return 1.0 / std::sqrt(jp.inductance_per_length() * jp.capacitance_per_length());
}

double stencil_dt_limit(int dimension, double dz, double dx, double v) {
    if (dimension == 1) return dz / v;
    return 1.0 / (v * std::sqrt(1.0 / (dx * dx) + 1.0 / (dz * dz)));
}

namespace {

using detail::Section;

void apply_override(YAML::Node& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(spec, "override must be key.path=value");
    const std::string path = spec.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(spec.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError(path, std::string("bad override value: ") + e.what());
    }
    // Walk with a vector of nodes: yaml-cpp's operator= on a Node rebinds.
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node child = chain.back()[parts[i]];
        if (!child || !child.IsMap()) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            child = chain.back()[parts[i]];
        }
        chain.push_back(child);
    }
    chain.back()[parts.back()] = value;
}

ScenarioConfig from_yaml(const YAML::Node& root) {
    if (!root || root.IsNull()) throw ConfigError("", "parse error: empty document");
    if (!root.IsMap()) throw ConfigError("", "parse error: top level must be a mapping");
    for (const auto& kv : root) {
        static const std::set<std::string> top{"junction", "modulation", "grid", "source", "probes", "run",
                                                "dispersion", "modes", "spectrum", "pattern", "sizzle", "budget"};
        const auto key = kv.first.as<std::string>();
        if (!top.contains(key)) throw ConfigError(key, "unknown section" + Section::where(kv.first));
    }

    ScenarioConfig cfg;

    Section j(root["junction"], "junction",
              {"critical_current_a", "shunt_capacitance_f", "junction_capacitance_f", "cell_length_m",
               "normal_resistance_ohm", "cells"});
    auto& jp = cfg.junction;
    j.read("critical_current_a", jp.critical_current);
    j.read("shunt_capacitance_f", jp.shunt_capacitance);
    j.read("junction_capacitance_f", jp.junction_capacitance);
    j.read("cell_length_m", jp.cell_length);
    j.read("normal_resistance_ohm", jp.normal_resistance);
    j.read("cells", jp.cells);

    Section m(root["modulation"], "modulation",
              {"theta_bias_rad", "delta_phi_rad", "delta_i", "rf_frequency_hz", "modulation_frequency_hz",
               "modulation_wavenumber_rad_per_m"});
    auto& mod = cfg.modulation;
    if (m.has("theta_bias_rad")) {
        const auto t = m.get("theta_bias_rad");
        try {
            mod.theta_bias = t.IsSequence() ? t.as<std::vector<double>>() : std::vector<double>{t.as<double>()};
        } catch (const YAML::Exception&) {
            throw ConfigError("modulation.theta_bias_rad", "expected a number or a list" + Section::where(t));
        }
    }
    m.read("delta_phi_rad", mod.delta_phi);
    m.read("delta_i", mod.delta_i);
    double f_rf = rad_to_hz(mod.omega_rf), f_m = rad_to_hz(mod.omega_m);
    m.read("rf_frequency_hz", f_rf);
    m.read("modulation_frequency_hz", f_m);
    mod.omega_rf = hz_to_rad(f_rf);
    mod.omega_m = hz_to_rad(f_m);
    m.read("modulation_wavenumber_rad_per_m", mod.k_m);

    Section g(root["grid"], "grid",
              {"dimension", "nz", "nx", "dz_m", "dx_m", "dt_s", "courant", "courant_margin", "boundary", "stencil"});
    auto& grid = cfg.grid;
    g.read("dimension", grid.dimension);
    g.read("nz", grid.nz);
    g.read("nx", grid.nx);
    g.read("dz_m", grid.dz);
    g.read("dx_m", grid.dx);
    g.read("dt_s", grid.dt);
    g.read("courant", grid.courant);
    g.read("courant_margin", grid.courant_margin);
    std::string boundary = "mur", stencil = "conservative";
    g.read("boundary", boundary);
    g.read("stencil", stencil);
    if (boundary == "mur") grid.boundary = Boundary::mur;
    else if (boundary == "fixed") grid.boundary = Boundary::fixed;
    else throw ConfigError("grid.boundary", "must be 'mur' or 'fixed'");
    if (stencil == "conservative") grid.stencil = Stencil::conservative;
    else if (stencil == "literal") grid.stencil = Stencil::literal;
    else throw ConfigError("grid.stencil", "must be 'conservative' or 'literal'");
    if (grid.dimension == 1 && !g.has("nx")) grid.nx = 1;
    if (grid.dimension == 2 && !g.has("nx")) grid.nx = grid.nz;

    Section s(root["source"], "source",
              {"carrier_frequency_hz", "envelope_center_s", "envelope_width_s", "amplitude_rad", "z_index", "x_index",
               "injection"});
    auto& src = cfg.source;
    double f0 = rad_to_hz(src.carrier_omega);
    s.read("carrier_frequency_hz", f0);
    src.carrier_omega = hz_to_rad(f0);
    s.read("envelope_center_s", src.center);
    s.read("envelope_width_s", src.width);
    s.read("amplitude_rad", src.amplitude);
    src.z_index = grid.nz / 10;
    s.read("z_index", src.z_index);
    s.read("x_index", src.x_index);
    std::string injection = "soft";
    s.read("injection", injection);
    if (injection == "soft") src.hard = false;
    else if (injection == "hard") src.hard = true;
    else throw ConfigError("source.injection", "must be 'soft' or 'hard'");

    if (const auto probes = root["probes"]) {
        if (!probes.IsSequence()) throw ConfigError("probes", "expected a list" + Section::where(probes));
        for (std::size_t i = 0; i < probes.size(); ++i) {
            Section p(probes[i], "probes[" + std::to_string(i) + "]", {"id", "z_index", "x_index"});
            ProbeSpec probe;
            probe.id = "p" + std::to_string(i);
            p.read("id", probe.id);
            p.read("z_index", probe.z_index);
            p.read("x_index", probe.x_index);
            cfg.probes.push_back(probe);
        }
    }

    Section r(root["run"], "run", {"steps", "snapshot_every"});
    r.read("steps", cfg.run.steps);
    r.read("snapshot_every", cfg.run.snapshot_every);

    // Resolve grid defaults from the line velocity.
    // A baseband pulse uses the 3-sigma edge of its Gaussian spectrum as f0.
    const double f_grid = src.carrier_omega > 0 ? rad_to_hz(src.carrier_omega)
                          : src.width > 0       ? 3.0 / (constants::two_pi * src.width)
                                                : 0.0;
    if (jp.critical_current > 0 && jp.shunt_capacitance > 0 && jp.cell_length > 0 && f_grid > 0) {
        const double v = derived_velocity(jp);
        if (grid.dz == 0.0) grid.dz = v / f_grid / 25.0;
    }
    if (grid.dx == 0.0) grid.dx = grid.dz;
    if (grid.dz > 0 && jp.critical_current > 0 && jp.shunt_capacitance > 0 && jp.cell_length > 0) {
        const double v = derived_velocity(jp);
        if (grid.courant > 0.0) {
            grid.dt = grid.dimension == 1 ? grid.courant * grid.dz / v
                                          : grid.courant * std::hypot(grid.dx, grid.dz) / v;
        } else if (grid.dt == 0.0) {
            double limit = stencil_dt_limit(grid.dimension, grid.dz, grid.dx, v);
            if (grid.dimension == 2)  // the S <= 1/sqrt(2) bound, also honored
                limit = std::min(limit, std::hypot(grid.dx, grid.dz) / (std::sqrt(2.0) * v));
            grid.dt = grid.courant_margin * limit;
        }
    }
    return cfg;
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

void validate(const ScenarioConfig& c) {
    const auto& jp = c.junction;
    require(finite_positive(jp.critical_current), "junction.critical_current_a", "must be positive");
    require(finite_positive(jp.shunt_capacitance), "junction.shunt_capacitance_f", "must be positive");
    require(std::isfinite(jp.junction_capacitance) && jp.junction_capacitance >= 0.0, "junction.junction_capacitance_f",
            "must be non-negative");
    require(finite_positive(jp.cell_length), "junction.cell_length_m", "must be positive");
    require(finite_positive(jp.normal_resistance), "junction.normal_resistance_ohm", "must be positive");
    require(jp.cells >= 2, "junction.cells", "must be at least 2");

    const auto& m = c.modulation;
    require(std::isfinite(m.delta_phi) && m.delta_phi >= 0.0, "modulation.delta_phi_rad", "depth out of range");
    require(std::isfinite(m.delta_i) && m.delta_i >= 0.0 && m.delta_i < 1.0, "modulation.delta_i",
            "depth out of range");
    require(!(m.delta_phi > 0.0 && m.delta_i > 0.0), "modulation",
            "exactly one depth convention (delta_phi_rad or delta_i) may be active");
    require(m.theta_bias.size() == 1 || m.theta_bias.size() == jp.cells, "modulation.theta_bias_rad",
            "needs one value or one per cell");
    for (double t : m.theta_bias) require(std::isfinite(t), "modulation.theta_bias_rad", "must be finite");
    require(std::isfinite(m.omega_rf) && m.omega_rf >= 0.0, "modulation.rf_frequency_hz", "must be non-negative");
    require(std::isfinite(m.omega_m) && m.omega_m >= 0.0, "modulation.modulation_frequency_hz",
            "must be non-negative");
    require(std::isfinite(m.k_m), "modulation.modulation_wavenumber_rad_per_m", "must be finite");

    const auto& g = c.grid;
    require(g.dimension == 1 || g.dimension == 2, "grid.dimension", "must be 1 or 2");
    require(g.nz >= 3, "grid.nz", "must be at least 3");
    require(g.dimension == 1 ? g.nx == 1 : g.nx >= 3, "grid.nx", g.dimension == 1 ? "must be 1 in 1D" : "must be >= 3");
    require(finite_positive(g.dz), "grid.dz_m", "must be positive");
    require(finite_positive(g.dx), "grid.dx_m", "must be positive");
    require(finite_positive(g.dt), "grid.dt_s", "must be positive");
    require(finite_positive(g.courant_margin) && g.courant_margin <= 1.0, "grid.courant_margin", "must be in (0, 1]");

    const double v = derived_velocity(jp);
    if (g.dimension == 1) {
        require(v * g.dt <= g.dz * (1.0 + 1e-12), "grid.dt_s", "CFL violated: v*dt > dz");
    } else {
        const double s = v * g.dt / std::hypot(g.dx, g.dz);
        require(s <= (1.0 / std::sqrt(2.0)) * (1.0 + 1e-12), "grid.courant",
                "CFL violated: S = " + std::to_string(s) + " > 1/sqrt(2)");
    }

    const auto& s = c.source;
    require(std::isfinite(s.carrier_omega) && s.carrier_omega >= 0.0, "source.carrier_frequency_hz",
            "must be non-negative");
    require(finite_positive(s.width), "source.envelope_width_s", "must be positive");
    require(std::isfinite(s.center), "source.envelope_center_s", "must be finite");
    require(std::isfinite(s.amplitude), "source.amplitude_rad", "must be finite");
    require(s.z_index >= 1 && s.z_index + 1 < g.nz, "source.z_index", "injection cell must be interior");
    if (g.dimension == 2 && s.x_index >= 0)
        require(s.x_index >= 1 && static_cast<std::size_t>(s.x_index) + 1 < g.nx, "source.x_index",
                "injection cell must be interior");

    for (std::size_t i = 0; i < c.probes.size(); ++i) {
        const auto& p = c.probes[i];
        const auto name = "probes[" + std::to_string(i) + "]";
        require(p.z_index < g.nz, name + ".z_index", "outside the grid");
        require(p.x_index < g.nx, name + ".x_index", "outside the grid");
    }
    require(c.run.steps >= 1, "run.steps", "must be at least 1");
}

namespace {

YAML::Node load_with_overrides(std::string_view text, const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", "parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!overrides.empty() && (!root || root.IsNull())) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o);
    return root;
}

} // namespace

std::string resolve_yaml(std::string_view text, const std::vector<std::string>& overrides) {
    const auto root = load_with_overrides(text, overrides);
    if (!root || root.IsNull()) return "{}\n";
    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
    const auto root = load_with_overrides(text, overrides);
    auto cfg = from_yaml(root);
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

ScenarioConfig load_config(const std::filesystem::path& path) { return load_config(path, {}); }

std::string to_yaml(const ScenarioConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
    out << YAML::BeginMap;
    out << YAML::Key << "junction" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "critical_current_a" << YAML::Value << c.junction.critical_current;
    out << YAML::Key << "shunt_capacitance_f" << YAML::Value << c.junction.shunt_capacitance;
    out << YAML::Key << "junction_capacitance_f" << YAML::Value << c.junction.junction_capacitance;
    out << YAML::Key << "cell_length_m" << YAML::Value << c.junction.cell_length;
    out << YAML::Key << "normal_resistance_ohm" << YAML::Value << c.junction.normal_resistance;
    out << YAML::Key << "cells" << YAML::Value << c.junction.cells;
    out << YAML::EndMap;

    const auto& m = c.modulation;
    out << YAML::Key << "modulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "theta_bias_rad" << YAML::Value;
    if (m.theta_bias.size() == 1) out << m.theta_bias.front();
    else out << YAML::Flow << m.theta_bias;
    out << YAML::Key << "delta_phi_rad" << YAML::Value << m.delta_phi;
    out << YAML::Key << "delta_i" << YAML::Value << m.delta_i;
    out << YAML::Key << "rf_frequency_hz" << YAML::Value << rad_to_hz(m.omega_rf);
    out << YAML::Key << "modulation_frequency_hz" << YAML::Value << rad_to_hz(m.omega_m);
    out << YAML::Key << "modulation_wavenumber_rad_per_m" << YAML::Value << m.k_m;
    out << YAML::EndMap;

    const auto& g = c.grid;
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dimension" << YAML::Value << g.dimension;
    out << YAML::Key << "nz" << YAML::Value << g.nz;
    out << YAML::Key << "nx" << YAML::Value << g.nx;
    out << YAML::Key << "dz_m" << YAML::Value << g.dz;
    out << YAML::Key << "dx_m" << YAML::Value << g.dx;
    out << YAML::Key << "dt_s" << YAML::Value << g.dt;
    out << YAML::Key << "courant_margin" << YAML::Value << g.courant_margin;
    out << YAML::Key << "boundary" << YAML::Value << (g.boundary == Boundary::mur ? "mur" : "fixed");
    out << YAML::Key << "stencil" << YAML::Value << (g.stencil == Stencil::conservative ? "conservative" : "literal");
    out << YAML::EndMap;

    const auto& s = c.source;
    out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "carrier_frequency_hz" << YAML::Value << rad_to_hz(s.carrier_omega);
    out << YAML::Key << "envelope_center_s" << YAML::Value << s.center;
    out << YAML::Key << "envelope_width_s" << YAML::Value << s.width;
    out << YAML::Key << "amplitude_rad" << YAML::Value << s.amplitude;
    out << YAML::Key << "z_index" << YAML::Value << s.z_index;
    out << YAML::Key << "x_index" << YAML::Value << s.x_index;
    out << YAML::Key << "injection" << YAML::Value << (s.hard ? "hard" : "soft");
    out << YAML::EndMap;

    out << YAML::Key << "probes" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : c.probes) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << p.id;
        out << YAML::Key << "z_index" << YAML::Value << p.z_index;
        out << YAML::Key << "x_index" << YAML::Value << p.x_index;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "steps" << YAML::Value << c.run.steps;
    out << YAML::Key << "snapshot_every" << YAML::Value << c.run.snapshot_every;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace jjmeta

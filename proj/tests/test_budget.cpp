#include "doctest.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "jjmeta/budget.hpp"
#include "jjmeta/errors.hpp"

using namespace jjmeta;
using namespace jjmeta::budget;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHbar = 6.62607015e-34 / (2.0 * kPi);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("conduction load is k A dT / L summed over lines") {
    ConductionLine l{1.0, 1e-6, 0.5, 3.0};
    CHECK(conduction_load(std::span(&l, 1)) == doctest::Approx(6e-6).epsilon(1e-14));
    std::vector<ConductionLine> two{l, l};
    CHECK(conduction_load(two) == doctest::Approx(12e-6).epsilon(1e-14));
    l.delta_t = 0.0;
    CHECK(conduction_load(std::span(&l, 1)) == 0.0);
    l.length = 0.0;
    CHECK_THROWS_AS(conduction_load(std::span(&l, 1)), PreconditionError);
}

TEST_CASE("junction array static power") {
    JunctionArray a;  // 100 x 100, 0.1 of 10 uA, 100 ohm
    CHECK(rel(jj_active_power(a), 1e-6) < 1e-12);
    const double full = jj_active_power(a);
    a.bias_current /= 2.0;
    CHECK(rel(jj_active_power(a), full / 4.0) < 1e-12);
    a.bias_current = 0.0;
    CHECK(jj_active_power(a) == 0.0);
    a.modulation_power = 1e-12;
    CHECK(rel(jj_active_power(a), 1e4 * 1e-12) < 1e-12);
}

TEST_CASE("design point powers 1 + 3 + 4.5 uW") {
    const auto in = default_thermal();
    const auto p = power_totals(in);
    CHECK(rel(p.p_static, 1e-6) < 1e-12);
    CHECK(rel(p.p_dynamic, 3e-6) < 1e-12);
    CHECK(rel(p.p_qubits, 4.5e-6) < 1e-12);
    CHECK(rel(p.total, 8.5e-6) < 1e-12);
    CHECK(p.total == p.p_static + p.p_dynamic + p.p_qubits);
    CHECK(p.margin == doctest::Approx(11.5e-6).epsilon(1e-12));

    // the per-term formulas evaluated by hand from the stored inputs
    const auto& r = in.rf.front();
    CHECK(rel(p.p_dynamic, double(r.count) * r.omega_m * r.capacitance * r.v_rf * r.v_rf / (2.0 * r.q)) < 1e-14);
    const double j1 = std::cyl_bessel_j(1.0, in.delivery.beta);
    CHECK(rel(p.p_per_qubit, in.delivery.efficiency * in.delivery.p_in * j1 * j1 / in.delivery.path_loss) < 1e-12);

    auto none = in;
    none.n_qubit = 0;
    CHECK(power_totals(none).total == p.p_static + p.p_dynamic);

    auto lossless = in;
    lossless.rf.front().q = std::numeric_limits<double>::infinity();
    CHECK(power_totals(lossless).p_dynamic == 0.0);

    auto bad = in;
    bad.p_cool = 0.0;
    CHECK_THROWS_AS(power_totals(bad), PreconditionError);
}

TEST_CASE("power terms are additive and monotone") {
    const auto in = default_thermal();
    const double base = power_totals(in).total;

    auto doubled = in;
    doubled.rf.push_back(in.rf.front());
    CHECK(rel(power_totals(doubled).p_dynamic, 2.0 * power_totals(in).p_dynamic) < 1e-14);

    for (double scale : {1.1, 2.0, 10.0}) {
        auto a = in;
        a.array.bias_current *= scale;
        CHECK(power_totals(a).total > base);
        auto b = in;
        b.rf.front().v_rf *= scale;
        CHECK(power_totals(b).total > base);
        auto c = in;
        c.delivery.p_in *= scale;
        CHECK(power_totals(c).total > base);
        auto d = in;
        d.n_qubit = std::size_t(double(in.n_qubit) * scale);
        CHECK(power_totals(d).total > base);
    }
}

TEST_CASE("channel count") {
    CHECK(channel_count(2.0 * kPi * 2e9, 50e6) == 40);
    CHECK(channel_count(2.0 * kPi * 2e9, 100e6) == 20);
    CHECK(channel_count(0.0, 50e6) == 0);
    CHECK(channel_count(2.0 * kPi * 1.99e9, 50e6) == 39);
    CHECK_THROWS_AS(channel_count(1.0, 0.0), PreconditionError);
}

TEST_CASE("collision guard") {
    const std::vector<double> alpha{197e6, 197e6};
    const std::vector<double> wide{5.3e9, 5.0e9};
    CHECK(collision_guard(wide, alpha, 80e6).empty());
    const std::vector<double> narrow{5.25e9, 5.0e9};
    const auto v = collision_guard(narrow, alpha, 80e6);
    REQUIRE(v.size() == 1);
    CHECK(v[0].j == 0);
    CHECK(v[0].k == 1);
    CHECK(v[0].margin_hz == doctest::Approx(53e6).epsilon(1e-9));

    const std::vector<double> one{5e9}, one_alpha{197e6};
    CHECK(collision_guard(one, one_alpha, 80e6).empty());
    CHECK(collision_guard(narrow, alpha, 0.0).empty());
    CHECK_THROWS_AS(collision_guard(std::span<const double>{}, std::span<const double>{}, 80e6), PreconditionError);
}

TEST_CASE("nonlinear suppression factor") {
    CHECK(c_nl(0, 0.7) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c_nl(3, 0.0) == 0.0);
    for (int k = 1; k <= 10; ++k)
        for (int i = 0; i <= 30; ++i) {
            const double beta = 0.05 * i;
            const double v = c_nl(k, beta);
            CHECK(v <= 1.0);
            const double jk = std::cyl_bessel_j(double(k), beta), j0 = std::cyl_bessel_j(0.0, beta);
            const double want = jk * jk / (j0 * j0) / (1.0 + beta * beta * k * k / 4.0);
            CHECK(v == doctest::Approx(want).epsilon(1e-10).scale(1e-300));
            CHECK(c_nl(-k, beta) == v);
        }
}

TEST_CASE("crosstalk at the quoted operating point") {
    const double omega_r = 2.0 * kPi * 50e6, spacing = 2.0 * kPi * 100e6;
    const CrosstalkTerm nearest{0.022, spacing, 5e-4};
    const double eps1 = crosstalk_error(std::span(&nearest, 1), omega_r);
    CHECK(eps1 == doctest::Approx(0.022 * 0.022 * 0.25 * 5e-4).epsilon(1e-12));
    CHECK(eps1 == doctest::Approx(6.05e-8).epsilon(1e-9));

    // channel 20 of 40 sees 20 channels below and 19 above
    double harmonic = 0.0;
    for (int d = -20; d <= 19; ++d)
        if (d != 0) harmonic += 1.0 / double(d * d);
    const auto terms = uniform_plan(40, 20, spacing, 0.022, 5e-4);
    CHECK(terms.size() == 39);
    const double eps = crosstalk_error(terms, omega_r);
    CHECK(eps == doctest::Approx(eps1 * harmonic).epsilon(1e-12));
    CHECK(std::abs((1.0 - eps) - 0.9999998) <= 1e-8);

    CHECK(crosstalk_total(1e-6, 40) == doctest::Approx(3.9e-5).epsilon(1e-12));
    CHECK(crosstalk_total(1e-5, 40) == doctest::Approx(3.9e-4).epsilon(1e-12));

    double last = std::numeric_limits<double>::infinity();
    for (double s : {50e6, 100e6, 200e6, 400e6}) {
        const double e = crosstalk_error(uniform_plan(40, 20, 2.0 * kPi * s, 0.022, 5e-4), omega_r);
        CHECK(e < last);
        last = e;
    }

    const CrosstalkTerm zero{0.022, 0.0, 5e-4};
    CHECK_THROWS_AS(crosstalk_error(std::span(&zero, 1), omega_r), PreconditionError);
    CHECK_THROWS_AS(uniform_plan(4, 4, spacing, 0.1, 1.0), PreconditionError);
}

TEST_CASE("uniform plan derives C_NL from beta when asked") {
    const auto terms = uniform_plan(5, 2, 1.0, 0.1, -1.0, 0.8);
    REQUIRE(terms.size() == 4);
    CHECK(terms[0].c_nl == doctest::Approx(c_nl(2, 0.8)));
    CHECK(terms[1].c_nl == doctest::Approx(c_nl(1, 0.8)));
    CHECK(terms[2].offset == 1.0);
    CHECK(terms[3].c_nl == doctest::Approx(c_nl(2, 0.8)));
}

TEST_CASE("decoherence error") {
    CHECK(decoherence_error(0.0, 300e-6, 300e-6) == 0.0);
    const double e = decoherence_error(25e-9, 300e-6, 300e-6);
    CHECK(e == doctest::Approx(25e-9 / 3.0 * 2.0 / 300e-6).epsilon(1e-14));
    CHECK(e == doctest::Approx(5.6e-5).epsilon(0.01));
    CHECK(e >= 0.4e-4 / 3.0);
    CHECK(decoherence_error(200e-9, 300e-6, 300e-6) <= 10e-4 * 3.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(decoherence_error(25e-9, inf, inf) == 0.0);
    CHECK_THROWS_AS(decoherence_error(25e-9, 0.0, 1.0), PreconditionError);
}

TEST_CASE("Rabi frequency and gate times") {
    const double field = 0.1;
    const double mu = kHbar * 2.0 * kPi * 10e6 / (2.0 * field);
    CHECK(mu == doctest::Approx(3.31e-26).epsilon(2e-3));

    const double g = 2.0 * kPi * 10e6, delta = 2.0 * kPi * 100e6;
    auto t = rabi_and_gatetimes(mu, field, g, delta);
    CHECK(t.rabi_hz == doctest::Approx(10e6).epsilon(1e-12));
    CHECK(t.t_pi == doctest::Approx(50e-9).epsilon(1e-12));
    t = rabi_and_gatetimes(mu, 2.0 * field, g, delta);
    CHECK(t.t_pi == doctest::Approx(25e-9).epsilon(1e-12));

    CHECK(t.t_cz == doctest::Approx(kPi * delta / (4.0 * g * g)).epsilon(1e-14));
    CHECK(t.t_cz == doctest::Approx(125e-9).epsilon(1e-12));
    CHECK(t.t_cz_in_band);
    CHECK(t.t_cz_cyclic == doctest::Approx(kPi * 100e6 / (4.0 * 1e14)).epsilon(1e-12));
    CHECK_FALSE(t.t_cz_cyclic_in_band);

    const auto t2 = rabi_and_gatetimes(mu, field, 2.0 * g, delta);
    CHECK(t2.t_cz == doctest::Approx(t.t_cz / 4.0).epsilon(1e-14));
    CHECK_THROWS_AS(rabi_and_gatetimes(0.0, field, g, delta), PreconditionError);
}

TEST_CASE("full report at the design point") {
    const auto r = full_report(default_thermal(), FidelityInputs{});
    CHECK(r.channels == 40);
    CHECK(rel(r.power.total, 8.5e-6) < 1e-12);
    CHECK(r.power.total < 20e-6);
    CHECK(r.power_limited_qubits == 160);
    CHECK(r.spatial_segments == 2);
    CHECK(r.eps_nearest == doctest::Approx(6.05e-8).epsilon(1e-9));
    CHECK(std::abs(r.fidelity_xt - 0.9999998) <= 1e-8);
    CHECK(r.infidelity == r.eps_xt + r.eps_dec + r.eps_amp + r.eps_phase);
    CHECK(r.fidelity >= 0.999);
    CHECK(r.all_pass());
    for (const auto& f : r.flags) CHECK_MESSAGE(f.pass, f.name);
    CHECK(r.metadata["critical_current_a"].get<double>() == 10e-6);

    FidelityInputs poor;
    poor.isolation_db = 50.0;
    const auto bad = full_report(default_thermal(), poor);
    CHECK_FALSE(bad.all_pass());
    int failed = 0;
    for (const auto& f : bad.flags)
        if (!f.pass) {
            ++failed;
            CHECK(f.name == "isolation_db");
        }
    CHECK(failed == 1);
}

TEST_CASE("zeroed inputs give a degenerate report") {
    ThermalInputs t;
    t.array.per_side = 0;
    t.n_qubit = 0;
    FidelityInputs f;
    f.omega_s = 0.0;
    f.ratio = 0.0;
    f.omega_r = 0.0;
    f.t_gate = 0.0;
    const auto r = full_report(t, f);
    CHECK(r.power.total == 0.0);
    CHECK(r.power.margin == t.p_cool);
    CHECK(r.channels == 0);
    CHECK(r.infidelity == 0.0);
    CHECK(r.fidelity == 1.0);
}

TEST_CASE("yaml overlay") {
    auto t = default_thermal();
    FidelityInputs f;
    apply_yaml(slurp(std::string(JJMETA_SOURCE_DIR) + "/configs/table2.yaml"), t, f);
    CHECK(rel(power_totals(t).total, 8.5e-6) < 1e-12);

    apply_yaml(R"(
budget:
  n_qubit: 40
  p_cool_w: 1.0e-5
  lines:
    - {k_w_per_m_k: 1.0, area_m2: 1.0e-6, length_m: 0.5, delta_t_k: 3.0}
  delivery: {path_loss: 2.0}
  fidelity:
    delta_f_min_hz: 100.0e6
    rabi_hz: 25.0e6
    isolation_db: 50
)",
               t, f);
    CHECK(t.n_qubit == 40);
    CHECK(t.p_cool == 1e-5);
    CHECK(t.delivery.path_loss == 2.0);
    CHECK(f.delta_f_min == 100e6);
    CHECK(f.omega_r == doctest::Approx(2.0 * kPi * 25e6));
    const auto p = power_totals(t);
    CHECK(p.conduction == doctest::Approx(6e-6));
    CHECK(rel(p.p_qubits, 40 * 0.05e-6) < 1e-12);

    CHECK_THROWS_AS(apply_yaml("budget:\n  n_qubits: 3\n", t, f), ConfigError);
    CHECK_THROWS_AS(apply_yaml("budget:\n  fidelity: {t1: 1}\n", t, f), ConfigError);
    CHECK_THROWS_AS(apply_yaml("budget:\n  rf: 3\n", t, f), ConfigError);
    CHECK_THROWS_AS(apply_yaml("budget:\n  n_qubit: many\n", t, f), ConfigError);
}

TEST_CASE("sweep, text and deterministic output") {
    const auto t = default_thermal();
    const FidelityInputs f;
    const std::vector<double> n{40, 45, 150, 161};
    const auto rows = sweep(t, f, "n_qubit", n);
    REQUIRE(rows.size() == 4);
    CHECK(rows[2].report.all_pass());
    CHECK_FALSE(rows[3].report.all_pass());
    CHECK(rows[3].report.power.total > 20e-6);
    CHECK_THROWS_AS(sweep(t, f, "nope", n), ConfigError);

    std::ostringstream csv;
    write_sweep_csv(csv, "n_qubit", rows);
    const std::string text = csv.str();
    CHECK(text.rfind("n_qubit,p_total_w,margin_w,infidelity,fidelity,all_pass\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);

    const auto a = to_json(full_report(t, f)).dump(2);
    const auto b = to_json(full_report(default_thermal(), FidelityInputs{})).dump(2);
    CHECK(a == b);
    const auto j = nlohmann::json::parse(a);
    CHECK(j["channels"] == 40);
    CHECK(j["all_pass"] == true);
    CHECK(j["power_w"]["total"].get<double>() == doctest::Approx(8.5e-6).epsilon(1e-12));

    std::ostringstream txt;
    write_text(txt, full_report(t, f));
    CHECK(txt.str().find("total 8.5") != std::string::npos);
}

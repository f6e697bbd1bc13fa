#pragma once

#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jjmeta::budget {

struct ConductionLine {
    double k = 0.0;       // W/(m K)
    double area = 0.0;    // m²
    double length = 1.0;  // m
    double delta_t = 0.0; // K
};

/// Σ k A ΔT / L. Throws PreconditionError for L <= 0.
double conduction_load(std::span<const ConductionLine> lines);

/// N_JJ² identical junctions.
struct JunctionArray {
    std::size_t per_side = 100;
    double bias_current = 1e-6;  // A per junction (0.1 I_c at I_c = 10 µA)
    double resistance = 100.0;   // R_jj, Ω
    double modulation_power = 0.0;  // W per junction
};

/// Σ_j (I_b² R + P_mod)
double jj_active_power(const JunctionArray& array);

struct RfLoss {
    double omega_m = 0.0;      // rad/s
    double capacitance = 0.0;  // C_J, F
    double v_rf = 0.0;         // V
    double q = 1.0;            // Q_mn; infinity is lossless
    std::size_t count = 1;     // identical (m, n) terms
};

struct Delivery {
    double efficiency = 0.0;  // η_coup
    double p_in = 0.0;        // W
    double beta = 0.0;
    int order = 1;            // n in J_n(β)
    double path_loss = 1.0;   // L_path, dimensionless
};

struct ThermalInputs {
    std::vector<ConductionLine> lines;
    JunctionArray array;
    std::vector<RfLoss> rf;
    Delivery delivery;
    std::size_t n_qubit = 45;
    double p_cool = 20e-6;  // W
};

/// Design point: static 1 µW, dynamic 3 µW, 0.1 µW per qubit, 45 qubits.
ThermalInputs default_thermal();

struct PowerBreakdown {
    double conduction = 0.0;
    double p_static = 0.0;
    double p_dynamic = 0.0;
    double p_per_qubit = 0.0;
    double p_qubits = 0.0;  // N_qubit P_per-qubit
    double total = 0.0;     // static + dynamic + qubits (conduction reported separately)
    double margin = 0.0;    // P_cool - total
};

PowerBreakdown power_totals(const ThermalInputs& in);

/// floor((ω_s/2π)/Δf_min). Throws PreconditionError for Δf_min <= 0.
std::size_t channel_count(double omega_s, double delta_f_min);

struct Collision {
    std::size_t j = 0, k = 0;
    double margin_hz = 0.0;  // |f_j - f_k - |α_k||
};

/// Ordered pairs with |f_j - f_k - |α_k|| < guard. Throws PreconditionError on an empty plan
/// or mismatched lengths.
std::vector<Collision> collision_guard(std::span<const double> f_hz, std::span<const double> alpha_hz, double guard_hz);

/// |J_k(β)|²/|J_0(β)|² / (1 + β² k²/4) for sideband order k = |n - j|.
double c_nl(int order, double beta);

struct CrosstalkTerm {
    double ratio = 0.0;   // g_jn / g_jj
    double offset = 0.0;  // ω_j - ω_n, rad/s
    double c_nl = 0.0;
};

/// Σ ratio² Ω_R² / offset² C_NL. Throws PreconditionError on a zero offset.
double crosstalk_error(std::span<const CrosstalkTerm> terms, double omega_r);

/// Every other channel of a uniform plan of n channels seen from channel j,
/// with one ratio and one C_NL for all (c_nl < 0 uses c_nl(|n-j|, beta)).
std::vector<CrosstalkTerm> uniform_plan(std::size_t n, std::size_t j, double spacing, double ratio, double c_nl_value,
                                        double beta = 0.0);

/// (N_freq - 1) ε_single
double crosstalk_total(double epsilon_single, std::size_t n_freq);

/// (t_g/3)(1/T1 + 1/T2). Throws PreconditionError unless T1, T2 > 0.
double decoherence_error(double t_g, double t1, double t2);

struct GateTimes {
    double omega_r = 0.0;     // 2μ|E|/ħ, rad/s
    double rabi_hz = 0.0;     // Ω_R/2π
    double t_pi = 0.0;        // π/Ω_R
    double t_cz = 0.0;        // π Δ / (4 g²), angular inputs
    double t_cz_cyclic = 0.0; // same formula with Δ/2π and g/2π
    bool t_cz_in_band = false;        // 50-200 ns
    bool t_cz_cyclic_in_band = false;
};

/// Throws PreconditionError unless all inputs are positive.
GateTimes rabi_and_gatetimes(double mu, double field, double g, double delta);

struct FidelityInputs {
    double omega_s = 2.0 * std::numbers::pi * 2e9;  // rad/s
    double delta_f_min = 50e6;  // Hz
    double spacing = 2.0 * std::numbers::pi * 100e6;  // qubit frequency spacing, rad/s
    double ratio = 0.022;
    double c_nl = 5e-4;         // < 0 derives it from beta
    double beta = 0.0;
    double omega_r = 2.0 * std::numbers::pi * 50e6;
    double t1 = 300e-6, t2 = 300e-6;
    double t_gate = 25e-9;
    double eps_amp = 0.0, eps_phase = 0.0;
    double isolation_db = 66.0;
    double spatial_isolation_db = 40.0;
    double harmonic_suppression_db = 60.0;
    double phase_noise_rad = 5e-3;
};

struct Flag {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct BudgetReport {
    PowerBreakdown power;
    std::size_t channels = 0;
    std::size_t power_limited_qubits = 0;
    std::size_t spatial_segments = 0;  // ceil(N_qubit / channels)
    double eps_nearest = 0.0;          // one neighbour at the channel spacing
    double eps_xt = 0.0;               // Σ over the other channels, centre channel
    double eps_dec = 0.0;
    double eps_amp = 0.0, eps_phase = 0.0;
    double infidelity = 0.0;
    double fidelity_xt = 0.0;          // 1 - eps_xt
    double fidelity = 0.0;
    std::vector<Flag> flags;
    nlohmann::json metadata;

    bool all_pass() const;
};

BudgetReport full_report(const ThermalInputs& thermal, const FidelityInputs& fid);

/// Overlay a YAML `budget:` section on the defaults. Throws ConfigError.
void apply_yaml(std::string_view text, ThermalInputs& thermal, FidelityInputs& fid);

struct SweepRow {
    double value = 0.0;
    BudgetReport report;
};

/// Re-run full_report with one named input replaced by each value. Keys:
/// n_qubit, p_cool, p_in, v_rf, q, bias_current, delta_f_min, spacing_hz,
/// ratio, c_nl, omega_r_hz, t1, t2, t_gate. Throws ConfigError on an unknown key.
std::vector<SweepRow> sweep(const ThermalInputs& thermal, const FidelityInputs& fid, const std::string& key,
                            std::span<const double> values);

nlohmann::json to_json(const BudgetReport& r);
void write_text(std::ostream& os, const BudgetReport& r);
/// <key>,p_total_w,margin_w,infidelity,fidelity,all_pass
void write_sweep_csv(std::ostream& os, const std::string& key, const std::vector<SweepRow>& rows);

} // namespace jjmeta::budget

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpmax/fmac.hpp"

namespace fpmax::cost {

// First-order technology constants. Delay is an alpha-power law normalized so
// that fo4_ref is the FO4 delay at 1 V with no body bias.
struct TechParams {
    double fo4_ref = 40.0;        // ps
    double vt0 = 0.35;            // V
    double alpha = 1.3;
    double gamma_bb = 0.085;      // V/V, Vt = vt0 - gamma_bb * v_bb
    double ceff_per_gate = 1.5;   // fF per gate equivalent
    double leak_per_area = 100.0; // A/mm^2/V before the exp(-Vt/n_vt) factor
    double n_vt = 0.035;          // V
    double area_per_gate = 0.8;   // um^2 per gate equivalent
    double wire_ratio = 1.2;      // wire load relative to a unit gate's input load
    double flop_area = 1.0;       // gate equivalents per register bit
    double flop_cap = 20.0;       // fF per register bit
    double sizing_fma = 1.0;      // relative device width of the fused designs
    double sizing_cma = 2.0;      // cascade designs are upsized for their shorter stages

    double vt(double v_bb) const { return vt0 - gamma_bb * v_bb; }
    void validate() const;
    std::string to_json() const;
    static TechParams from_json(const std::string& text);
    static TechParams load(const std::string& path);
    void save(const std::string& path) const;

    // Fitted fields in a fixed order (fo4_ref .. flop_cap, n_vt excluded).
    static constexpr int kFitted = 10;
    std::vector<double> fitted() const;
    void set_fitted(const std::vector<double>& x);
    static std::vector<std::string> fitted_names();
};

// Structural counts of a configuration.
struct Structure {
    int pp_rows = 0;
    int csa_levels = 0;
    int csa_count = 0;
    bool hard_multiple = false;
    double gates = 0;           // logic gate equivalents, registers excluded
    double flop_bits = 0;       // pipeline register bits
    double logic_depth = 0;     // FO4, whole datapath
    double stage_depth = 0;     // FO4 per stage including register overhead
};

Structure structure(const FmacConfig& cfg);

struct AreaDepth {
    double gates = 0;
    double area_mm2 = 0;
    double stage_depth_fo4 = 0;
};

AreaDepth gate_equivalents(const FmacConfig& cfg, const TechParams& tp);

struct OperatingPoint {
    double v_dd = 0.9;
    double v_bb = 0.0;
    double frequency = 0.0;  // GHz; 0 means run at max_frequency
};

constexpr double kVddMin = 0.4, kVddMax = 1.3, kVbbMin = 0.0, kVbbMax = 2.0;

double sizing(const FmacConfig& cfg, const TechParams& tp);
// Throws NonOperationalPoint when v_dd does not clear Vt by the switching margin.
double max_frequency(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp);
bool operational(const OperatingPoint& op, const TechParams& tp);

enum class BBPolicy { Static, Dynamic };
const char* to_string(BBPolicy p);
BBPolicy parse_bb_policy(const std::string& s);

struct UtilizationProfile {
    double activity = 1.0;
    BBPolicy policy = BBPolicy::Static;
};

struct PowerBreakdown {
    double total_w = 0;
    double leakage_w = 0;
    double dynamic_w = 0;
};

// Dynamic policy: idle cycles drop to the lowest body bias.
PowerBreakdown power(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp,
                     const UtilizationProfile& u = {});

// Same model on a precomputed structure, without range or margin checks.
double frequency_at(const Structure& s, double sizing, double v_dd, double v_bb, const TechParams& tp);
PowerBreakdown power_at(const Structure& s, double sizing, double v_dd, double v_bb, double f_ghz,
                        const TechParams& tp, const UtilizationProfile& u);

struct Metrics {
    double area_mm2 = 0;
    double freq_ghz = 0;
    double power_w = 0;
    double leak_w = 0;
    double gflops = 0;
    double gflops_per_w = 0;
    double gflops_per_mm2 = 0;
    double avg_delay_ns = 0;
};

Metrics compute_metrics(double freq_ghz, double area_mm2, double power_w, double avg_penalty = 0.0,
                        double leak_w = 0.0);

// Full evaluation of a design point.
Metrics evaluate(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp,
                 const UtilizationProfile& u = {}, double avg_penalty = 0.0);

// Lowest v_dd in range reaching frequency f at body bias v_bb.
std::optional<double> voltage_for_frequency(const FmacConfig& cfg, double f_ghz, double v_bb, const TechParams& tp);

struct EnergyPoint {
    double freq_ghz = 0;
    double v_dd = 0;
    double v_bb = 0;
    double energy_pj = 0;   // per FMAC at full activity
    double leakage_w = 0;
    double dynamic_w = 0;
};

// Minimum-energy point at frequency f over the given body-bias values.
std::optional<EnergyPoint> min_energy_point(const FmacConfig& cfg, double f_ghz, const std::vector<double>& bbs,
                                            const TechParams& tp);

struct PolicyCurvePoint {
    double gflops = 0;
    double e_full_pj = 0;
    double e_static_pj = 0;
    double e_dynamic_pj = 0;
};

// Energy per op versus delivered performance for 100% activity, and for the
// given activity under the Static and Dynamic policies. Each frequency uses
// the 100%-activity optimum on bb_grid.
std::vector<PolicyCurvePoint> bb_policy_energy(const FmacConfig& cfg, const TechParams& tp, double activity,
                                               const std::vector<double>& freqs_ghz,
                                               const std::vector<double>& bb_grid);

struct BodyBiasSummary {
    double freq_ghz = 0;
    double gain = 0;             // energy efficiency with BB over without, minus 1
    double power_reduction = 0;  // 1 - P_bb / P_nobb
    double static_ratio = 0;     // E(activity, Static) / E(100%)
    double dynamic_ratio = 0;    // E(activity, Dynamic) / E(100%)
};

// Evaluated at frequency f (same area efficiency with and without BB).
BodyBiasSummary body_bias_summary(const FmacConfig& cfg, const TechParams& tp, double f_ghz, double activity,
                                  const std::vector<double>& bb_grid);

std::vector<double> default_vdd_grid();
std::vector<double> default_vbb_grid();

// Table I operating points and measurements per preset.
struct PresetTarget {
    std::string name;
    double v_dd = 0;
    double v_bb = 0;
    double freq_ghz = 0;
    double area_mm2 = 0;
    double total_mw = 0;
    double leak_mw = 0;
};

std::vector<PresetTarget> table_targets();

}  // namespace fpmax::cost

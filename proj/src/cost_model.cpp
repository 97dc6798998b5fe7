#include "fpmax/cost_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fpmax/errors.hpp"
#include "json.hpp"

namespace fpmax::cost {

namespace {

using nlohmann::json;

constexpr double kCsaDelay = 3.0;      // FO4 per 3:2 level
constexpr double kRegOverhead = 3.0;   // FO4 per stage (setup + clk-q)
constexpr double kFullAdder = 7.0;     // GE
constexpr double kControlGates = 2500; // decode, flags, bypass muxing
constexpr double kSwitchMargin = 0.02; // V above Vt needed to switch

double lg(double n) { return std::log2(n); }
double cpa_d(double n) { return 2 * lg(n) + 2; }
double cpa_g(double n) { return n * (6 + lg(n)); }
double sh_d(double n) { return 1.5 * lg(n); }
double sh_g(double n) { return 2.5 * n * lg(n); }

struct Field {
    const char* name;
    double TechParams::*ptr;
};

const Field kFields[] = {
    {"fo4_ref", &TechParams::fo4_ref},
    {"vt0", &TechParams::vt0},
    {"alpha", &TechParams::alpha},
    {"gamma_bb", &TechParams::gamma_bb},
    {"ceff_per_gate", &TechParams::ceff_per_gate},
    {"leak_per_area", &TechParams::leak_per_area},
    {"area_per_gate", &TechParams::area_per_gate},
    {"wire_ratio", &TechParams::wire_ratio},
    {"flop_area", &TechParams::flop_area},
    {"flop_cap", &TechParams::flop_cap},
    {"n_vt", &TechParams::n_vt},
    {"sizing_fma", &TechParams::sizing_fma},
    {"sizing_cma", &TechParams::sizing_cma},
};

}  // namespace

void TechParams::validate() const {
    for (const auto& f : kFields) {
        double v = this->*f.ptr;
        if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(std::string("tech parameter ") + f.name + " must be finite and non-negative");
    }
    for (double v : {fo4_ref, vt0, alpha, gamma_bb, ceff_per_gate, leak_per_area, n_vt, area_per_gate, sizing_fma, sizing_cma})
        if (v <= 0) throw ConfigError("tech parameters fo4_ref..leak_per_area, n_vt, area_per_gate and sizing must be positive");
    if (vt(kVbbMax) <= 0) throw ConfigError("threshold voltage must stay positive over the body-bias range");
}

std::string TechParams::to_json() const {
    json j;
    for (const auto& f : kFields) j[f.name] = this->*f.ptr;
    return j.dump(2);
}

TechParams TechParams::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("tech params: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("tech params: expected a JSON object");
    TechParams tp;
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& f : kFields)
            if (it.key() == f.name) {
                if (!it->is_number()) throw ParseError("tech params: " + it.key() + " must be a number");
                tp.*f.ptr = it->get<double>();
                known = true;
            }
        if (!known) throw ParseError("tech params: unknown field " + it.key());
    }
    tp.validate();
    return tp;
}

TechParams TechParams::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open tech file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void TechParams::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json() << '\n';
}

std::vector<double> TechParams::fitted() const {
    std::vector<double> x;
    for (int i = 0; i < kFitted; ++i) x.push_back(this->*kFields[i].ptr);
    return x;
}

void TechParams::set_fitted(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != kFitted) throw ContractError("set_fitted: wrong vector length");
    for (int i = 0; i < kFitted; ++i) this->*kFields[i].ptr = x[i];
}

std::vector<std::string> TechParams::fitted_names() {
    std::vector<std::string> n;
    for (int i = 0; i < kFitted; ++i) n.push_back(kFields[i].name);
    return n;
}

Structure structure(const FmacConfig& cfg) {
    cfg.validate();
    const double p = cfg.fmt.precision();
    const double e = cfg.fmt.exp_bits;
    const int k = cfg.booth_radix_log2;
    Structure s;
    s.pp_rows = (cfg.fmt.precision() + 1 + k - 1) / k;
    const double row_w = p + k + 2;
    auto rep = mul::reduce_words(std::vector<Wide>(s.pp_rows), cfg.tree_kind, Wide::kBits).second;
    s.csa_levels = rep.csa_levels;
    s.csa_count = rep.csa_count;
    s.hard_multiple = k == 3;

    const double N = s.pp_rows;
    double ge = N * (k == 2 ? 6 : 10) + N * row_w * (k == 2 ? 3 : 4.5) + std::max(0.0, N - 2) * row_w * kFullAdder;
    if (k == 3) ge += cpa_g(p + 2);
    const double pre_d = (k == 2 ? 2 : 3) + 2 + (k == 3 ? cpa_d(p + 2) : 0);
    const double tree_d = s.csa_levels * kCsaDelay;

    // Register bits cut by a pipeline boundary t FO4 into the multiplier.
    auto live_mult = [&](double t, double extra) {
        if (t < pre_d) return 2 * p + extra;
        if (t < pre_d + tree_d) {
            auto lvl = static_cast<std::size_t>((t - pre_d) / kCsaDelay);
            return rep.live_words[std::min(lvl, rep.live_words.size() - 1)] * row_w + extra;
        }
        return 4 * p + extra;
    };

    const int S = cfg.pipeline_stages, M = cfg.mul_pipe_depth;
    double regs = 0, depth;
    if (cfg.architecture == Architecture::FMA) {
        const double W = 3 * p + 2;
        const double tail = kCsaDelay + std::max(cpa_d(W), 2 * lg(W)) + sh_d(W) + cpa_d(p);
        ge += 2 * sh_g(W) + W * kFullAdder + cpa_g(W) + W * 5 + p * 4 + (e + 2) * 40;
        const double mult_d = pre_d + tree_d;
        depth = mult_d + tail;
        for (int j = 1; j < M; ++j) regs += live_mult(j * mult_d / M, W);
        regs += 2 * W + (S - M - 1) * W;
    } else {
        const double mult_d = pre_d + tree_d + cpa_d(2 * p);
        ge += cpa_g(2 * p) + p * 4;
        const double W = p + 4;
        const double add_d = 2 * sh_d(W) + cpa_d(W) + 2 * lg(W);
        // near and far paths of the adder
        ge += 2 * W * 2.5 + 2 * sh_g(W) + cpa_g(W) + W * 5 + p * 4 + 2 * (e + 2) * 40 + (sh_g(W) + cpa_g(W) + W * 5);
        const double rnd_d = cpa_d(p) + 2;
        depth = mult_d + add_d + rnd_d;
        for (int j = 1; j < M; ++j) regs += live_mult(j * mult_d / M, p);
        regs += 2 * p + *cfg.add_pipe_depth * W + p;
    }
    regs += 3 * (p + e);
    s.gates = ge + kControlGates;
    s.flop_bits = regs;
    s.logic_depth = depth;
    s.stage_depth = depth / S + kRegOverhead;
    return s;
}

double sizing(const FmacConfig& cfg, const TechParams& tp) {
    return cfg.architecture == Architecture::CMA ? tp.sizing_cma : tp.sizing_fma;
}

AreaDepth gate_equivalents(const FmacConfig& cfg, const TechParams& tp) {
    Structure s = structure(cfg);
    AreaDepth a;
    a.gates = s.gates * sizing(cfg, tp) + s.flop_bits * tp.flop_area;
    a.area_mm2 = tp.area_per_gate * a.gates * 1e-6;
    a.stage_depth_fo4 = s.stage_depth;
    return a;
}

bool operational(const OperatingPoint& op, const TechParams& tp) { return op.v_dd > tp.vt(op.v_bb) + kSwitchMargin; }

namespace {

void check_range(const OperatingPoint& op) {
    if (!(op.v_dd >= kVddMin - 1e-9 && op.v_dd <= kVddMax + 1e-9))
        throw ContractError("v_dd " + std::to_string(op.v_dd) + " outside [0.4, 1.3] V");
    if (!(op.v_bb >= kVbbMin - 1e-9 && op.v_bb <= kVbbMax + 1e-9))
        throw ContractError("v_bb " + std::to_string(op.v_bb) + " outside [0, 2] V");
}

}  // namespace

double frequency_at(const Structure& s, double sz, double v, double bb, const TechParams& tp) {
    double vt = tp.vt(bb);
    double fo4 = tp.fo4_ref * (v / std::pow(v - vt, tp.alpha)) * std::pow(1 - tp.vt0, tp.alpha);
    double load = (1 + tp.wire_ratio / sz) / (1 + tp.wire_ratio);
    return 1000.0 / (s.stage_depth * fo4 * load);
}

PowerBreakdown power_at(const Structure& s, double sz, double v, double bb, double f, const TechParams& tp,
                         const UtilizationProfile& u) {
    double area = tp.area_per_gate * (s.gates * sz + s.flop_bits * tp.flop_area) * 1e-6;
    auto leak_at = [&](double b) { return area * tp.leak_per_area * v * std::exp(-tp.vt(b) / tp.n_vt); };
    double cap = tp.ceff_per_gate * s.gates * (sz + tp.wire_ratio) / (1 + tp.wire_ratio) + tp.flop_cap * s.flop_bits;
    PowerBreakdown p;
    p.dynamic_w = u.activity * cap * 1e-15 * v * v * f * 1e9;
    double active = leak_at(bb);
    p.leakage_w = u.policy == BBPolicy::Dynamic ? u.activity * active + (1 - u.activity) * leak_at(kVbbMin) : active;
    p.total_w = p.dynamic_w + p.leakage_w;
    return p;
}

double max_frequency(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp) {
    check_range(op);
    if (!operational(op, tp))
        throw NonOperationalPoint("v_dd " + std::to_string(op.v_dd) + " V does not clear Vt " +
                                  std::to_string(tp.vt(op.v_bb)) + " V");
    return frequency_at(structure(cfg), sizing(cfg, tp), op.v_dd, op.v_bb, tp);
}

const char* to_string(BBPolicy p) { return p == BBPolicy::Static ? "static" : "dynamic"; }

BBPolicy parse_bb_policy(const std::string& s) {
    if (s == "static" || s == "Static") return BBPolicy::Static;
    if (s == "dynamic" || s == "Dynamic") return BBPolicy::Dynamic;
    throw ConfigError("unknown bb policy '" + s + "' (expected static or dynamic)");
}

PowerBreakdown power(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp,
                     const UtilizationProfile& u) {
    if (!(u.activity > 0 && u.activity <= 1)) throw ContractError("activity must be in (0, 1]");
    double fmax = max_frequency(cfg, op, tp);
    double f = op.frequency > 0 ? op.frequency : fmax;
    if (f > fmax * (1 + 1e-12)) throw ContractError("requested frequency exceeds max_frequency at this point");
    return power_at(structure(cfg), sizing(cfg, tp), op.v_dd, op.v_bb, f, tp, u);
}

Metrics compute_metrics(double freq_ghz, double area_mm2, double power_w, double avg_penalty, double leak_w) {
    if (!(freq_ghz > 0 && area_mm2 > 0 && power_w > 0)) throw ContractError("compute_metrics needs positive inputs");
    Metrics m;
    m.freq_ghz = freq_ghz;
    m.area_mm2 = area_mm2;
    m.power_w = power_w;
    m.leak_w = leak_w;
    m.gflops = 2 * freq_ghz;
    m.gflops_per_w = m.gflops / power_w;
    m.gflops_per_mm2 = m.gflops / area_mm2;
    m.avg_delay_ns = (1 + avg_penalty) / freq_ghz;
    return m;
}

Metrics evaluate(const FmacConfig& cfg, const OperatingPoint& op, const TechParams& tp, const UtilizationProfile& u,
                 double avg_penalty) {
    double f = op.frequency > 0 ? op.frequency : max_frequency(cfg, op, tp);
    PowerBreakdown p = power(cfg, op, tp, u);
    return compute_metrics(f, gate_equivalents(cfg, tp).area_mm2, p.total_w, avg_penalty, p.leakage_w);
}

std::optional<double> voltage_for_frequency(const FmacConfig& cfg, double f_ghz, double v_bb, const TechParams& tp) {
    Structure s = structure(cfg);
    double sz = sizing(cfg, tp);
    auto reaches = [&](double v) { return operational({v, v_bb}, tp) && frequency_at(s, sz, v, v_bb, tp) >= f_ghz; };
    double lo = kVddMin, hi = kVddMax;
    if (!reaches(hi)) return std::nullopt;
    if (reaches(lo)) return lo;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (reaches(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::optional<EnergyPoint> min_energy_point(const FmacConfig& cfg, double f_ghz, const std::vector<double>& bbs,
                                            const TechParams& tp) {
    Structure s = structure(cfg);
    double sz = sizing(cfg, tp);
    std::optional<EnergyPoint> best;
    for (double bb : bbs) {
        auto v = voltage_for_frequency(cfg, f_ghz, bb, tp);
        if (!v) continue;
        PowerBreakdown p = power_at(s, sz, *v, bb, f_ghz, tp, {});
        EnergyPoint e{f_ghz, *v, bb, p.total_w / (2 * f_ghz) * 1e3, p.leakage_w, p.dynamic_w};
        if (!best || e.energy_pj < best->energy_pj) best = e;
    }
    return best;
}

namespace {

// Energy per op at activity a relative to full activity, same (v_dd, v_bb).
double activity_ratio(double dyn, double leak, double idle_leak, double a) {
    return (a * dyn + a * leak + (1 - a) * idle_leak) / (a * (dyn + leak));
}

}  // namespace

std::vector<PolicyCurvePoint> bb_policy_energy(const FmacConfig& cfg, const TechParams& tp, double activity,
                                               const std::vector<double>& freqs_ghz,
                                               const std::vector<double>& bb_grid) {
    if (!(activity > 0 && activity <= 1)) throw ContractError("activity must be in (0, 1]");
    Structure s = structure(cfg);
    double sz = sizing(cfg, tp);
    std::vector<PolicyCurvePoint> out;
    for (double f : freqs_ghz) {
        auto e = min_energy_point(cfg, f, bb_grid, tp);
        if (!e) continue;
        double idle = power_at(s, sz, e->v_dd, kVbbMin, f, tp, {}).leakage_w;
        PolicyCurvePoint pt;
        pt.gflops = 2 * f * activity;
        pt.e_full_pj = e->energy_pj;
        pt.e_static_pj = e->energy_pj * activity_ratio(e->dynamic_w, e->leakage_w, e->leakage_w, activity);
        pt.e_dynamic_pj = e->energy_pj * activity_ratio(e->dynamic_w, e->leakage_w, idle, activity);
        out.push_back(pt);
    }
    return out;
}

BodyBiasSummary body_bias_summary(const FmacConfig& cfg, const TechParams& tp, double f_ghz, double activity,
                                  const std::vector<double>& bb_grid) {
    auto with = min_energy_point(cfg, f_ghz, bb_grid, tp);
    auto without = min_energy_point(cfg, f_ghz, {kVbbMin}, tp);
    if (!with || !without) throw NonOperationalPoint("frequency " + std::to_string(f_ghz) + " GHz not reachable");
    auto curve = bb_policy_energy(cfg, tp, activity, {f_ghz}, bb_grid);
    BodyBiasSummary b;
    b.freq_ghz = f_ghz;
    b.gain = without->energy_pj / with->energy_pj - 1;
    b.power_reduction = 1 - with->energy_pj / without->energy_pj;
    b.static_ratio = curve.at(0).e_static_pj / curve[0].e_full_pj;
    b.dynamic_ratio = curve[0].e_dynamic_pj / curve[0].e_full_pj;
    return b;
}

std::vector<double> default_vdd_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 14; ++i) g.push_back(0.5 + 0.05 * i);
    return g;
}

std::vector<double> default_vbb_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(0.2 * i);
    return g;
}

std::vector<PresetTarget> table_targets() {
    return {
        {"dp-cma", 0.9, 1.2, 1.19, 0.032, 66, 8.4},
        {"dp-fma", 0.8, 1.2, 0.91, 0.024, 41, 3.8},
        {"sp-cma", 0.8, 1.2, 1.36, 0.018, 25, 3.3},
        {"sp-fma", 0.9, 1.2, 0.91, 0.0081, 17, 1.6},
    };
}

}  // namespace fpmax::cost

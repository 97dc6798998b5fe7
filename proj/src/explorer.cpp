#include "fpmax/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fpmax/assembly.hpp"
#include "fpmax/errors.hpp"
#include "fpmax/pipeline.hpp"
#include "json.hpp"

namespace fpmax::dse {

namespace {

using nlohmann::json;

const char* kColumns[] = {"config",   "v_dd",   "v_bb",   "activity",     "policy",         "freq_ghz",    "area_mm2",
                          "power_w",  "leak_w", "gflops", "gflops_per_w", "gflops_per_mm2", "avg_delay_ns"};

std::vector<double> grid(const json& j, const char* key) {
    const json& g = j[key];
    if (g.is_array()) return g.get<std::vector<double>>();
    if (g.is_object()) {
        double a = g.at("start").get<double>(), b = g.at("stop").get<double>(), s = g.at("step").get<double>();
        if (!(s > 0) || b < a) throw ParseError(std::string("space: bad range for ") + key);
        std::vector<double> out;
        int n = static_cast<int>(std::floor((b - a) / s + 1e-9));
        for (int i = 0; i <= n; ++i) out.push_back(a + s * i);
        return out;
    }
    throw ParseError(std::string("space: ") + key + " must be a list or {start, stop, step}");
}

Range range(const json& j, const char* key) {
    const json& g = j[key];
    if (g.is_number_integer()) return {g.get<int>(), g.get<int>()};
    if (g.is_array() && g.size() == 2) return {g[0].get<int>(), g[1].get<int>()};
    throw ParseError(std::string("space: ") + key + " must be an integer or [lo, hi]");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json point_json(const EvaluatedPoint& p) {
    const auto& m = p.metrics;
    return {{"config", p.config},       {"v_dd", p.op.v_dd},
            {"v_bb", p.op.v_bb},        {"activity", p.util.activity},
            {"policy", cost::to_string(p.util.policy)},
            {"freq_ghz", m.freq_ghz},   {"area_mm2", m.area_mm2},
            {"power_w", m.power_w},     {"leak_w", m.leak_w},
            {"gflops", m.gflops},       {"gflops_per_w", m.gflops_per_w},
            {"gflops_per_mm2", m.gflops_per_mm2}, {"avg_delay_ns", m.avg_delay_ns}};
}

EvaluatedPoint point_from(const std::vector<std::string>& f, int line) {
    EvaluatedPoint p;
    std::vector<double> v(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (i == 4) continue;
        try {
            std::size_t used;
            v[i] = std::stod(f[i], &used);
            if (used != f[i].size()) throw std::invalid_argument(f[i]);
        } catch (const std::exception&) {
            throw ParseError("bad number '" + f[i] + "' in column " + kColumns[i], line);
        }
    }
    p.config = f[0];
    p.op.v_dd = v[1];
    p.op.v_bb = v[2];
    p.util.activity = v[3];
    try {
        p.util.policy = cost::parse_bb_policy(f[4]);
    } catch (const Error& e) {
        throw ParseError(e.what(), line);
    }
    auto& m = p.metrics;
    m.freq_ghz = v[5];
    m.area_mm2 = v[6];
    m.power_w = v[7];
    m.leak_w = v[8];
    m.gflops = v[9];
    m.gflops_per_w = v[10];
    m.gflops_per_mm2 = v[11];
    m.avg_delay_ns = v[12];
    p.op.frequency = m.freq_ghz;
    return p;
}

std::string variant_name(const FmacConfig& c) {
    std::string n = c.fmt.name() + "-" + to_string(c.architecture) + "-b" + std::to_string(c.booth_radix_log2) + "-" +
                    mul::to_string(c.tree_kind) + "-s" + std::to_string(c.pipeline_stages) + "-m" +
                    std::to_string(c.mul_pipe_depth);
    if (c.add_pipe_depth) n += "-a" + std::to_string(*c.add_pipe_depth);
    return n;
}

}  // namespace

Objective parse_objective(const std::string& s) {
    if (s == "energy_pj") return Objective::EnergyPerOp;
    if (s == "gflops") return Objective::Gflops;
    if (s == "gflops_per_w") return Objective::GflopsPerW;
    if (s == "gflops_per_mm2") return Objective::GflopsPerMm2;
    if (s == "avg_delay_ns") return Objective::AvgDelay;
    throw ConfigError("unknown objective '" + s +
                      "' (expected energy_pj, gflops, gflops_per_w, gflops_per_mm2 or avg_delay_ns)");
}

const char* to_string(Objective o) {
    switch (o) {
        case Objective::EnergyPerOp: return "energy_pj";
        case Objective::Gflops: return "gflops";
        case Objective::GflopsPerW: return "gflops_per_w";
        case Objective::GflopsPerMm2: return "gflops_per_mm2";
        case Objective::AvgDelay: return "avg_delay_ns";
    }
    return "?";
}

Sense default_sense(Objective o) {
    return o == Objective::EnergyPerOp || o == Objective::AvgDelay ? Sense::Minimize : Sense::Maximize;
}

bool is_latency_objective(Objective o) { return o == Objective::AvgDelay; }

void SpaceSpec::validate() const {
    bool variants = !formats.empty() || !architectures.empty() || !booth_radix_log2.empty() || !tree_kinds.empty();
    if (variants && (formats.empty() || architectures.empty() || booth_radix_log2.empty() || tree_kinds.empty()))
        throw ConfigError("space: formats, architectures, booth_radix_log2 and tree_kinds must all be given for variants");
    if (presets.empty() && !variants) throw ConfigError("space: no presets and no variant lists");
    if (v_dd.empty() || v_bb.empty() || activity.empty() || policies.empty())
        throw ConfigError("space: v_dd, v_bb, activity and bb_policy grids must be non-empty");
    for (double a : activity)
        if (!(a > 0 && a <= 1)) throw ConfigError("space: activity levels must be in (0, 1]");
    if (objectives[0] == objectives[1]) throw ConfigError("space: the two objectives must differ");
    for (const auto& r : {pipeline_stages, mul_pipe_depth, add_pipe_depth})
        if (r.lo > r.hi || r.lo < 1) throw ConfigError("space: stage ranges must satisfy 1 <= lo <= hi");
    if (trace_length < 1) throw ConfigError("space: trace length must be positive");
}

SpaceSpec SpaceSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("space: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("space: expected a JSON object");
    static const char* known[] = {"presets", "formats", "architectures", "booth_radix_log2", "tree_kinds",
                                  "pipeline_stages", "mul_pipe_depth", "add_pipe_depth", "v_dd", "v_bb",
                                  "activity", "bb_policy", "objectives", "senses", "trace"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
            std::end(known))
            throw ParseError("space: unknown field " + it.key());
    SpaceSpec s;
    try {
        if (j.contains("presets")) s.presets = j["presets"].get<std::vector<std::string>>();
        if (j.contains("formats"))
            for (const auto& f : j["formats"]) s.formats.push_back(FloatFormat::from_name(f.get<std::string>()));
        if (j.contains("architectures"))
            for (const auto& a : j["architectures"]) s.architectures.push_back(parse_architecture(a.get<std::string>()));
        if (j.contains("booth_radix_log2")) s.booth_radix_log2 = j["booth_radix_log2"].get<std::vector<int>>();
        if (j.contains("tree_kinds"))
            for (const auto& t : j["tree_kinds"]) s.tree_kinds.push_back(mul::parse_tree_kind(t.get<std::string>()));
        if (j.contains("pipeline_stages")) s.pipeline_stages = range(j, "pipeline_stages");
        if (j.contains("mul_pipe_depth")) s.mul_pipe_depth = range(j, "mul_pipe_depth");
        if (j.contains("add_pipe_depth")) s.add_pipe_depth = range(j, "add_pipe_depth");
        if (j.contains("v_dd")) s.v_dd = grid(j, "v_dd");
        if (j.contains("v_bb")) s.v_bb = grid(j, "v_bb");
        if (j.contains("activity")) s.activity = j["activity"].get<std::vector<double>>();
        if (j.contains("bb_policy")) {
            s.policies.clear();
            for (const auto& p : j["bb_policy"]) s.policies.push_back(cost::parse_bb_policy(p.get<std::string>()));
        }
        if (j.contains("objectives")) {
            auto o = j["objectives"].get<std::vector<std::string>>();
            if (o.size() != 2) throw ParseError("space: objectives must name exactly two metrics");
            s.objectives = {parse_objective(o[0]), parse_objective(o[1])};
            s.senses = {default_sense(s.objectives[0]), default_sense(s.objectives[1])};
        }
        if (j.contains("senses")) {
            auto o = j["senses"].get<std::vector<std::string>>();
            if (o.size() != 2) throw ParseError("space: senses must have two entries");
            for (int i = 0; i < 2; ++i) {
                if (o[i] != "min" && o[i] != "max") throw ParseError("space: sense must be min or max");
                s.senses[i] = o[i] == "min" ? Sense::Minimize : Sense::Maximize;
            }
        }
        if (j.contains("trace")) {
            const json& t = j["trace"];
            if (t.contains("program")) s.trace_program = t["program"].get<std::string>();
            if (t.contains("length")) s.trace_length = t["length"].get<int>();
            if (t.contains("seed")) s.trace_seed = t["seed"].get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("space: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("space: ") + e.what());
    }
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open space file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::vector<FmacConfig> SpaceSpec::configs() const {
    validate();
    std::vector<FmacConfig> out;
    for (const auto& p : presets) out.push_back(FmacConfig::preset(p));
    for (const auto& f : formats)
        for (auto a : architectures)
            for (int k : booth_radix_log2)
                for (auto t : tree_kinds)
                    for (int S = pipeline_stages.lo; S <= pipeline_stages.hi; ++S)
                        for (int M = mul_pipe_depth.lo; M <= mul_pipe_depth.hi; ++M) {
                            std::vector<std::optional<int>> adds;
                            if (a == Architecture::CMA)
                                for (int A = add_pipe_depth.lo; A <= add_pipe_depth.hi; ++A) adds.push_back(A);
                            else
                                adds.push_back(std::nullopt);
                            for (auto A : adds) {
                                FmacConfig c;
                                c.fmt = f;
                                c.architecture = a;
                                c.booth_radix_log2 = k;
                                c.tree_kind = t;
                                c.pipeline_stages = S;
                                c.mul_pipe_depth = M;
                                c.add_pipe_depth = A;
                                c.bypass = FmacConfig::default_bypass(c);
                                try {
                                    c.validate();
                                } catch (const ConfigError&) {
                                    continue;
                                }
                                c.name = variant_name(c);
                                out.push_back(c);
                            }
                        }
    return out;
}

double EvaluatedPoint::energy_pj() const { return metrics.power_w / (metrics.gflops * util.activity) * 1e3; }

double EvaluatedPoint::objective(Objective o) const {
    switch (o) {
        case Objective::EnergyPerOp: return energy_pj();
        case Objective::Gflops: return metrics.gflops;
        case Objective::GflopsPerW: return metrics.gflops_per_w;
        case Objective::GflopsPerMm2: return metrics.gflops_per_mm2;
        case Objective::AvgDelay: return metrics.avg_delay_ns;
    }
    return 0;
}

bool operator==(const EvaluatedPoint& a, const EvaluatedPoint& b) {
    const auto &x = a.metrics, &y = b.metrics;
    return a.config == b.config && a.op.v_dd == b.op.v_dd && a.op.v_bb == b.op.v_bb &&
           a.util.activity == b.util.activity && a.util.policy == b.util.policy && x.freq_ghz == y.freq_ghz &&
           x.area_mm2 == y.area_mm2 && x.power_w == y.power_w && x.leak_w == y.leak_w && x.gflops == y.gflops &&
           x.gflops_per_w == y.gflops_per_w && x.gflops_per_mm2 == y.gflops_per_mm2 &&
           x.avg_delay_ns == y.avg_delay_ns;
}

Enumeration enumerate(const SpaceSpec& space, const cost::TechParams& tp) {
    std::vector<FmacConfig> cfgs = space.configs();
    bool latency = is_latency_objective(space.objectives[0]) || is_latency_objective(space.objectives[1]);
    std::optional<std::vector<pipe::Instruction>> program;
    if (latency && space.trace_program) program = pipe::load_program(*space.trace_program);
    Enumeration e;
    e.configs = static_cast<int>(cfgs.size());
    for (const auto& cfg : cfgs) {
        double penalty = 0;
        if (latency) {
            pipe::Trace t;
            if (program) t.program = *program;
            else t = pipe::synthetic_trace(space.trace_length, space.trace_seed, cfg.fmt);
            penalty = pipe::avg_latency_penalty(t, cfg);
        }
        for (double v : space.v_dd)
            for (double bb : space.v_bb)
                for (double a : space.activity)
                    for (auto pol : space.policies) {
                        cost::OperatingPoint op{v, bb, 0.0};
                        if (!cost::operational(op, tp)) {
                            ++e.skipped;
                            continue;
                        }
                        EvaluatedPoint p;
                        p.config = cfg.name;
                        p.util = {a, pol};
                        p.metrics = cost::evaluate(cfg, op, tp, p.util, penalty);
                        p.op = op;
                        p.op.frequency = p.metrics.freq_ghz;
                        e.points.push_back(p);
                    }
    }
    return e;
}

std::vector<std::size_t> pareto_indices(const std::vector<std::array<double, 2>>& pts,
                                        const std::array<Sense, 2>& senses) {
    const std::size_t n = pts.size();
    // Work in maximize-maximize form.
    auto key = [&](std::size_t i, int k) { return senses[k] == Sense::Maximize ? pts[i][k] : -pts[i][k]; };
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (key(a, 0) != key(b, 0)) return key(a, 0) > key(b, 0);
        return key(a, 1) > key(b, 1);
    });
    std::vector<std::size_t> front;
    bool have = false;
    double best_y = 0;
    for (std::size_t i : order) {
        double y = key(i, 1);
        if (!have || y > best_y) {
            front.push_back(i);
            best_y = y;
            have = true;
        }
    }
    std::sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a][0] != pts[b][0]) return pts[a][0] < pts[b][0];
        return a < b;
    });
    return front;
}

std::vector<EvaluatedPoint> pareto(const std::vector<EvaluatedPoint>& points, const std::array<Objective, 2>& obj,
                                   const std::array<Sense, 2>& senses) {
    std::vector<std::array<double, 2>> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back({p.objective(obj[0]), p.objective(obj[1])});
    std::vector<EvaluatedPoint> out;
    for (std::size_t i : pareto_indices(v, senses)) out.push_back(points[i]);
    return out;
}

void write_csv(std::ostream& out, const std::vector<EvaluatedPoint>& pts) {
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& p : pts) {
        if (p.config.find(',') != std::string::npos) throw ContractError("config name contains a comma");
        const auto& m = p.metrics;
        out << p.config;
        for (double v : {p.op.v_dd, p.op.v_bb, p.util.activity}) out << ',' << fmt_double(v);
        out << ',' << cost::to_string(p.util.policy);
        for (double v : {m.freq_ghz, m.area_mm2, m.power_w, m.leak_w, m.gflops, m.gflops_per_w, m.gflops_per_mm2,
                         m.avg_delay_ns})
            out << ',' << fmt_double(v);
        out << '\n';
    }
}

std::vector<EvaluatedPoint> read_csv(std::istream& in) {
    std::string line;
    int n = 1;
    if (!std::getline(in, line)) throw ParseError("empty CSV", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string header;
    for (std::size_t i = 0; i < std::size(kColumns); ++i) header += (i ? "," : "") + std::string(kColumns[i]);
    if (line != header) throw ParseError("unexpected CSV header", 1);
    std::vector<EvaluatedPoint> pts;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != std::size(kColumns)) throw ParseError("expected 13 CSV fields", n);
        pts.push_back(point_from(f, n));
    }
    return pts;
}

void write_json(std::ostream& out, const std::vector<EvaluatedPoint>& pts) {
    json j = json::array();
    for (const auto& p : pts) j.push_back(point_json(p));
    out << j.dump(2) << '\n';
}

std::vector<EvaluatedPoint> read_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("points: ") + e.what());
    }
    if (!j.is_array()) throw ParseError("points: expected a JSON array");
    std::vector<EvaluatedPoint> pts;
    int i = 0;
    for (const auto& o : j) {
        ++i;
        std::vector<std::string> f;
        try {
            for (const char* c : kColumns) {
                const json& v = o.at(c);
                f.push_back(v.is_string() ? v.get<std::string>() : fmt_double(v.get<double>()));
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("points: ") + e.what(), i);
        }
        pts.push_back(point_from(f, i));
    }
    return pts;
}

void emit(const std::string& path, const std::vector<EvaluatedPoint>& pts) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    bool js = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (js) write_json(out, pts);
    else write_csv(out, pts);
    if (!out) throw Error("error writing " + path);
}

}  // namespace fpmax::dse

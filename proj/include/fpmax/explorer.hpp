#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpmax/cost_model.hpp"

namespace fpmax::dse {

enum class Objective { EnergyPerOp, Gflops, GflopsPerW, GflopsPerMm2, AvgDelay };
enum class Sense { Minimize, Maximize };

Objective parse_objective(const std::string& s);
const char* to_string(Objective o);
Sense default_sense(Objective o);
bool is_latency_objective(Objective o);

struct Range {
    int lo = 0, hi = 0;  // inclusive
};

struct SpaceSpec {
    std::vector<std::string> presets;  // evaluated as-is
    // Generated variants: cartesian product of the lists below.
    std::vector<FloatFormat> formats;
    std::vector<Architecture> architectures;
    std::vector<int> booth_radix_log2;
    std::vector<mul::TreeKind> tree_kinds;
    Range pipeline_stages{4, 6};
    Range mul_pipe_depth{1, 3};
    Range add_pipe_depth{1, 3};

    std::vector<double> v_dd = cost::default_vdd_grid();
    std::vector<double> v_bb = cost::default_vbb_grid();
    std::vector<double> activity = {1.0};
    std::vector<cost::BBPolicy> policies = {cost::BBPolicy::Static};
    std::array<Objective, 2> objectives = {Objective::GflopsPerMm2, Objective::GflopsPerW};
    std::array<Sense, 2> senses = {Sense::Maximize, Sense::Maximize};

    // Penalty source for latency objectives: a program file, or the synthetic mix.
    std::optional<std::string> trace_program;
    int trace_length = 2000;
    std::uint64_t trace_seed = 1;

    void validate() const;
    static SpaceSpec from_json(const std::string& text);
    static SpaceSpec load(const std::string& path);
    // Concrete configurations, invalid combinations dropped.
    std::vector<FmacConfig> configs() const;
};

struct EvaluatedPoint {
    std::string config;
    cost::OperatingPoint op;
    cost::UtilizationProfile util;
    cost::Metrics metrics;

    // pJ per FMAC at the point's activity
    double energy_pj() const;
    double objective(Objective o) const;
    // Field-wise over the CSV columns.
    friend bool operator==(const EvaluatedPoint& a, const EvaluatedPoint& b);
};

struct Enumeration {
    std::vector<EvaluatedPoint> points;
    int skipped = 0;  // non-operational grid points
    int configs = 0;
};

Enumeration enumerate(const SpaceSpec& space, const cost::TechParams& tp);

// Indices of the non-dominated points under weak dominance. Exact duplicates
// keep their first occurrence; result ordered by the first objective
// ascending, then by index.
std::vector<std::size_t> pareto_indices(const std::vector<std::array<double, 2>>& pts,
                                        const std::array<Sense, 2>& senses);

std::vector<EvaluatedPoint> pareto(const std::vector<EvaluatedPoint>& points, const std::array<Objective, 2>& obj,
                                   const std::array<Sense, 2>& senses);

// CSV columns: config, v_dd, v_bb, activity, policy, freq_ghz, area_mm2,
// power_w, leak_w, gflops, gflops_per_w, gflops_per_mm2, avg_delay_ns.
void write_csv(std::ostream& out, const std::vector<EvaluatedPoint>& pts);
std::vector<EvaluatedPoint> read_csv(std::istream& in);
void write_json(std::ostream& out, const std::vector<EvaluatedPoint>& pts);
std::vector<EvaluatedPoint> read_json(std::istream& in);
// Chooses the format from the extension (.json or csv otherwise).
void emit(const std::string& path, const std::vector<EvaluatedPoint>& pts);

}  // namespace fpmax::dse

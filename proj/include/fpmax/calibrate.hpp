#pragma once

#include <string>
#include <vector>

#include "fpmax/cost_model.hpp"

namespace fpmax::cost {

// Best-point efficiencies of a preset over the sweep grid.
struct PeakTarget {
    std::string name;
    double gflops_per_w = 0;
    double gflops_per_mm2 = 0;
};

// Power saved by the body-bias knob at the nominal frequency.
struct ReductionTarget {
    std::string name;
    double value = 0;
};

struct CalibrationTargets {
    std::vector<PresetTarget> presets;
    std::vector<PeakTarget> peaks;
    std::vector<ReductionTarget> bb_power_reduction;
    std::vector<double> vdd_grid = default_vdd_grid();
    std::vector<double> vbb_grid = default_vbb_grid();

    static CalibrationTargets from_json(const std::string& text);
    static CalibrationTargets load(const std::string& path);
    std::string to_json() const;
};

struct Residual {
    std::string name;   // e.g. "dp-cma.freq_ghz"
    double predicted = 0;
    double target = 0;
    double relative = 0;  // predicted / target - 1
};

struct CalibrationOptions {
    TechParams initial;  // supplies n_vt, sizing and the first start point
    // Extra starts: (vt0, alpha) pairs replacing the initial values.
    std::vector<std::pair<double, double>> starts = {{0.3, 1.2}, {0.3, 1.6}, {0.4, 1.2}, {0.4, 1.6}};
    int max_iterations = 200;
    int reweight_passes = 8;
};

struct CalibrationResult {
    TechParams tech;
    std::vector<Residual> residuals;
    int iterations = 0;
    double max_abs_residual() const;
    std::string to_json() const;
};

// Relative residuals of tp against every target.
std::vector<Residual> residuals(const CalibrationTargets& t, const TechParams& tp);

// Bounded Levenberg-Marquardt fit followed by reweighted passes that pull the
// worst residuals in. Throws CalibrationError (with the residual report) when
// no start converges within max_iterations.
CalibrationResult calibrate(const CalibrationTargets& targets, const CalibrationOptions& opt = {});

}  // namespace fpmax::cost

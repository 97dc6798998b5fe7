#pragma once
#include "fpmax/calibrate.hpp"

// Calibrated parameters from the bundled targets, fitted once per binary.
inline const fpmax::cost::TechParams& calibrated_tech() {
    static const fpmax::cost::TechParams tp =
        fpmax::cost::calibrate(fpmax::cost::CalibrationTargets::load(FPMAX_DATA_DIR "/tablei.json")).tech;
    return tp;
}

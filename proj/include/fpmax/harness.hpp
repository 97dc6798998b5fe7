#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpmax/pipeline.hpp"

namespace fpmax::pipe {

struct Mismatch {
    int index = 0;
    std::uint64_t got = 0;
    std::uint64_t expected = 0;
};

struct HarnessResult {
    SimResult sim;
    bool compared = false;
    std::vector<Mismatch> mismatches;
};

// Loads program and RAM files, simulates, and compares against the expected
// RAM image when one is given.
HarnessResult run_harness(const std::string& program_path, const std::string& ram_path, const FmacConfig& cfg,
                          RoundingMode mode = RoundingMode::NearestEven,
                          const std::optional<std::string>& expected_path = std::nullopt);

std::vector<Mismatch> compare_ram(const std::vector<std::uint64_t>& got, const std::vector<std::uint64_t>& expected);

// total_cycles, avg_latency_penalty, dependent_ops and per-op stalls.
std::string stats_json(const SimResult& r);

}  // namespace fpmax::pipe

#include "fpmax/harness.hpp"

#include "fpmax/assembly.hpp"
#include "json.hpp"

namespace fpmax::pipe {

std::vector<Mismatch> compare_ram(const std::vector<std::uint64_t>& got, const std::vector<std::uint64_t>& expected) {
    std::vector<Mismatch> out;
    std::size_t n = std::max(got.size(), expected.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t g = i < got.size() ? got[i] : 0;
        std::uint64_t e = i < expected.size() ? expected[i] : 0;
        if (g != e) out.push_back({static_cast<int>(i), g, e});
    }
    return out;
}

HarnessResult run_harness(const std::string& program_path, const std::string& ram_path, const FmacConfig& cfg,
                          RoundingMode mode, const std::optional<std::string>& expected_path) {
    Trace t;
    t.program = load_program(program_path);
    t.ram = read_ram_file(ram_path, cfg.fmt);
    if (expected_path) t.expected = read_ram_file(*expected_path, cfg.fmt);
    HarnessResult r;
    r.sim = simulate(t, cfg, mode);
    if (t.expected) {
        r.compared = true;
        r.mismatches = compare_ram(r.sim.ram, *t.expected);
    }
    return r;
}

std::string stats_json(const SimResult& r) {
    nlohmann::json stalls = nlohmann::json::array();
    for (const auto& t : r.timing) stalls.push_back(t.stalls);
    nlohmann::json j{{"total_cycles", r.total_cycles},
                     {"avg_latency_penalty", r.avg_latency_penalty()},
                     {"dependent_ops", r.dependent_ops},
                     {"stalls", stalls}};
    return j.dump(2);
}

}  // namespace fpmax::pipe

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fpmax/fmac.hpp"

namespace fpmax::pipe {

enum class Opcode { Add = 0, Mul = 1, Muladd = 2, Nop = 3 };

const char* to_string(Opcode op);

constexpr int kRamWords = 64;

struct Instruction {
    Opcode op = Opcode::Nop;
    bool fwd_a = false;
    bool fwd_b = false;
    // bit 0 enables the addend bypass, bits 3:1 give the producer distance
    // (0 = most recent).
    std::uint8_t fwd_c = 0;
    std::uint8_t a_idx = 0, b_idx = 0, c_idx = 0;

    bool forwards_c() const { return fwd_c & 1; }
    int c_distance() const { return fwd_c >> 1; }
    static std::uint8_t make_fwd_c(bool enable, int distance) {
        return static_cast<std::uint8_t>((distance << 1) | (enable ? 1 : 0));
    }
    friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Layout: [25:24] opcode, [23] fwd_a, [22] fwd_b, [21:18] fwd_c,
// [17:12] a, [11:6] b, [5:0] c. Throws EncodingError on out-of-range fields.
std::uint32_t encode_instruction(const Instruction& i);
Instruction decode_instruction(std::uint32_t word);

struct Trace {
    std::vector<Instruction> program;
    std::vector<std::uint64_t> ram = std::vector<std::uint64_t>(kRamWords, 0);
    std::optional<std::vector<std::uint64_t>> expected;
};

// Timing view of an FmacConfig.
struct PipelineConfig {
    int stages = 0;
    int need_a = 1, need_b = 1, need_c = 1;
    int rounded_ready = 0;
    int unrounded_ready = 0;
    std::vector<BypassEdge> bypass;

    int need(Port p) const { return p == Port::A ? need_a : p == Port::B ? need_b : need_c; }
    static PipelineConfig from(const FmacConfig& cfg);
};

struct InstrTiming {
    std::int64_t issue = 0;
    std::int64_t complete = 0;  // cycle in which the rounded result is written
    std::int64_t stalls = 0;
    bool dependent = false;
};

struct SimResult {
    std::vector<InstrTiming> timing;
    std::vector<std::uint64_t> ram;
    std::int64_t total_cycles = 0;
    // Rounded result of each instruction (0 for Nop).
    std::vector<std::uint64_t> results;
    std::vector<ExceptionFlags> flags;
    int dependent_ops = 0;

    std::int64_t total_stalls() const;
    // Mean stall cycles over the operations that depend on an earlier result.
    double avg_latency_penalty() const;
};

struct SimOptions {
    bool compute_values = true;
};

// Cycle-accurate in-order run. Flagged operands take the designated producer's
// result through the fastest enabled bypass (or the RAM writeback); unflagged
// operands read RAM and wait for the latest earlier writer of that index.
SimResult simulate(const Trace& trace, const FmacConfig& cfg, RoundingMode mode = RoundingMode::NearestEven,
                   SimOptions opt = {});

double avg_latency_penalty(const Trace& trace, const FmacConfig& cfg);

// Same dataflow executed one instruction at a time on the reference oracles.
struct SequentialResult {
    std::vector<std::uint64_t> ram;
    std::vector<std::uint64_t> results;
    std::vector<ExceptionFlags> flags;
};
SequentialResult oracle_execute(const Trace& trace, const FloatFormat& fmt, Architecture arch,
                                RoundingMode mode = RoundingMode::NearestEven);

// Synthetic accumulate-heavy mix standing in for application traces.
struct TraceMix {
    double accumulate = 0.7;  // Muladd taking the previous result as addend
    double multiply = 0.2;    // Mul taking the previous result as multiplicand
    // remainder: independent Mul on never-written RAM words
};
Trace synthetic_trace(int length, std::uint64_t seed, const FloatFormat& fmt, TraceMix mix = {});

}  // namespace fpmax::pipe

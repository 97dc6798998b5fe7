#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fpmax/ieee.hpp"
#include "fpmax/multiplier.hpp"

namespace fpmax {

enum class Architecture { FMA, CMA };
enum class Port { A, B, C };

Architecture parse_architecture(std::string_view s);
const char* to_string(Architecture a);
Port parse_port(std::string_view s);
const char* to_string(Port p);

// A bypass from the end of producer_stage into consumer_stage of a dependent
// instruction. Stages count from 1.
struct BypassEdge {
    int producer_stage = 0;
    Port port = Port::A;
    int consumer_stage = 1;
    friend bool operator==(const BypassEdge&, const BypassEdge&) = default;
};

struct FmacConfig {
    std::string name;
    FloatFormat fmt = FloatFormat::SP();
    Architecture architecture = Architecture::FMA;
    int booth_radix_log2 = 3;
    mul::TreeKind tree_kind = mul::TreeKind::Wallace;
    int pipeline_stages = 4;
    int mul_pipe_depth = 2;
    std::optional<int> add_pipe_depth;  // CMA only
    std::vector<BypassEdge> bypass;

    // Stage in which an operand entering through port must be present.
    int operand_need_stage(Port p) const;
    int rounded_ready_stage() const { return pipeline_stages; }
    int unrounded_ready_stage() const { return pipeline_stages - 1; }

    // Throws ConfigError on inconsistent fields.
    void validate() const;
    // "dp-cma", "dp-fma", "sp-cma", "sp-fma"
    static FmacConfig preset(std::string_view name);
    static std::vector<std::string> preset_names();
    // Edges from the unrounded-ready stage to the need stage of every port.
    static std::vector<BypassEdge> default_bypass(const FmacConfig& cfg);
};

// Pre-rounding state handed to the rounder and to the bypass network.
// significand is normalized to the format precision (or zero for an exact
// zero); exponent is unbounded. NaN and infinity results travel in special.
struct UnroundedResult {
    bool negative = false;
    int exponent = 0;
    std::uint64_t significand = 0;
    bool guard = false, round = false, sticky = false;
    std::optional<std::uint64_t> special;
    ExceptionFlags special_flags;
};

RoundResult round_unrounded(const UnroundedResult& u, RoundingMode mode, const FloatFormat& fmt);
UnroundedResult exact_unrounded(std::uint64_t bits, const FloatFormat& fmt);

// A forwarded value before its rounding increment has been applied:
// (significand + increment) * 2^(exponent - frac_bits). exponent >= emin.
struct ForwardedOperand {
    bool negative = false;
    int exponent = 0;
    std::uint64_t significand = 0;
    bool increment = false;
};

using Operand = std::variant<std::uint64_t, ForwardedOperand>;

// Turns an unrounded result into what the consumer sees: the significand at
// its final alignment plus the round-up bit. An increment that would carry
// out of the significand is resolved here (exponent bumped). Specials and
// overflowing results fall back to the packed encoding.
Operand apply_forward_correction(const UnroundedResult& u, RoundingMode mode, const FloatFormat& fmt);
// Packed encoding equivalent to an operand.
std::uint64_t operand_bits(const Operand& op, const FloatFormat& fmt);

struct FmaOutput {
    std::uint64_t bits = 0;
    ExceptionFlags flags;
    UnroundedResult unrounded;
};

struct CmaOutput {
    std::uint64_t bits = 0;
    ExceptionFlags flags;
    UnroundedResult unrounded_product;
    UnroundedResult unrounded_sum;
};

FmaOutput fma_execute(const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                      RoundingMode mode = RoundingMode::NearestEven);
CmaOutput cma_execute(const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                      RoundingMode mode = RoundingMode::NearestEven);

enum class FmacOp { Add, Mul, MulAdd };

// One harness operation on either architecture. Add computes a + c, Mul a * b.
FmaOutput execute(FmacOp op, const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                  RoundingMode mode = RoundingMode::NearestEven);

}  // namespace fpmax

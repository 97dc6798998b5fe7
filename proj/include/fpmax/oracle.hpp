#pragma once

#include <cstdint>

#include "fpmax/ieee.hpp"

namespace fpmax {

// Reference semantics computed with unbounded integers and a single final
// rounding. NaN results are quiet; the payload comes from the first NaN
// operand in a, b, c order, and a signaling NaN operand raises invalid.
RoundResult oracle_fma(std::uint64_t a, std::uint64_t b, std::uint64_t c, const FloatFormat& fmt,
                       RoundingMode mode = RoundingMode::NearestEven);
RoundResult oracle_mul(std::uint64_t a, std::uint64_t b, const FloatFormat& fmt,
                       RoundingMode mode = RoundingMode::NearestEven);
RoundResult oracle_add(std::uint64_t a, std::uint64_t b, const FloatFormat& fmt,
                       RoundingMode mode = RoundingMode::NearestEven);

// round(round(a*b) + c); flags are the union of both operations.
RoundResult oracle_cascade(std::uint64_t a, std::uint64_t b, std::uint64_t c, const FloatFormat& fmt,
                           RoundingMode mode = RoundingMode::NearestEven);

}  // namespace fpmax

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fpmax/fmac.hpp"
#include "fpmax/pipeline.hpp"

namespace fpmax::testgen {

using Rng = std::mt19937_64;

// Operand mix: about 10% specials (zeros, infinities, quiet and signaling
// NaNs), 10% subnormals, 5% boundary values, the rest normals spread over
// the whole exponent range or clustered around 1.
std::uint64_t random_operand(Rng& rng, const FloatFormat& fmt);
bool is_special_or_subnormal(std::uint64_t bits, const FloatFormat& fmt);

struct Triple {
    std::uint64_t a = 0, b = 0, c = 0;
};

// Triples from random_operand; a quarter of them get an addend close to
// -(a*b) to exercise cancellation.
Triple random_triple(Rng& rng, const FloatFormat& fmt);

// Every edge a consumer could legally use: both ready stages into every
// stage up to the operand's need stage.
std::vector<BypassEdge> candidate_edges(const FmacConfig& cfg);

// Random harness program of the given length with RAW chains and
// forwarding flags that always name a valid producer.
pipe::Trace random_trace(Rng& rng, const FloatFormat& fmt, int length);

}  // namespace fpmax::testgen

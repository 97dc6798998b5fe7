#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fpmax {

struct FloatFormat {
    int exp_bits = 8;
    int frac_bits = 23;

    constexpr int bias() const { return (1 << (exp_bits - 1)) - 1; }
    constexpr int width() const { return 1 + exp_bits + frac_bits; }
    constexpr int precision() const { return frac_bits + 1; }
    constexpr int emin() const { return 1 - bias(); }
    constexpr int emax() const { return bias(); }
    constexpr std::uint64_t width_mask() const {
        return width() >= 64 ? ~0ULL : (1ULL << width()) - 1;
    }
    constexpr std::uint64_t frac_mask() const { return (1ULL << frac_bits) - 1; }
    constexpr std::uint64_t sign_bit() const { return 1ULL << (exp_bits + frac_bits); }
    constexpr std::uint64_t quiet_bit() const { return 1ULL << (frac_bits - 1); }
    constexpr int exp_field_max() const { return (1 << exp_bits) - 1; }
    // Hex digits needed to print one encoding.
    constexpr int hex_digits() const { return (width() + 3) / 4; }

    static constexpr FloatFormat SP() { return {8, 23}; }
    static constexpr FloatFormat DP() { return {11, 52}; }
    static constexpr FloatFormat TOY() { return {4, 3}; }

    // "sp", "dp", "toy" (case-insensitive); throws ConfigError otherwise.
    static FloatFormat from_name(std::string_view name);
    std::string name() const;
    void validate() const;

    friend constexpr bool operator==(const FloatFormat&, const FloatFormat&) = default;
};

enum class FloatClass { Zero, Subnormal, Normal, Infinity, QuietNaN, SignalingNaN };

const char* to_string(FloatClass c);

struct UnpackedFloat {
    bool negative = false;
    int exponent = 0;             // unbiased; emin for zero/subnormal, emax+1 for inf/NaN
    std::uint64_t significand = 0;  // hidden bit included when normal; fraction (payload) for NaN
    FloatClass cls = FloatClass::Zero;

    int sign() const { return negative ? -1 : 1; }
    bool is_nan() const { return cls == FloatClass::QuietNaN || cls == FloatClass::SignalingNaN; }
    bool is_finite() const { return cls == FloatClass::Zero || cls == FloatClass::Subnormal || cls == FloatClass::Normal; }
};

enum class RoundingMode { NearestEven, TowardZero, TowardPositive, TowardNegative };

// "rne", "rtz", "rtp", "rtn"
RoundingMode parse_rounding_mode(std::string_view s);
const char* to_string(RoundingMode m);

struct ExceptionFlags {
    bool invalid = false;
    bool overflow = false;
    bool underflow = false;
    bool inexact = false;

    // invalid|overflow|underflow|inexact from bit 3 down to bit 0.
    unsigned to_bits() const {
        return (invalid ? 8u : 0u) | (overflow ? 4u : 0u) | (underflow ? 2u : 0u) | (inexact ? 1u : 0u);
    }
    static ExceptionFlags from_bits(unsigned b) { return {bool(b & 8), bool(b & 4), bool(b & 2), bool(b & 1)}; }
    ExceptionFlags& operator|=(const ExceptionFlags& o) {
        invalid |= o.invalid;
        overflow |= o.overflow;
        underflow |= o.underflow;
        inexact |= o.inexact;
        return *this;
    }
    friend bool operator==(const ExceptionFlags&, const ExceptionFlags&) = default;
};

struct RoundResult {
    std::uint64_t bits = 0;
    ExceptionFlags flags;
    friend bool operator==(const RoundResult&, const RoundResult&) = default;
};

UnpackedFloat unpack(std::uint64_t bits, const FloatFormat& fmt);
// Throws ContractError when u violates the UnpackedFloat invariants for fmt.
std::uint64_t pack(const UnpackedFloat& u, const FloatFormat& fmt);

// Round-up decision of the low-order bits for one rounding position.
bool round_increment(RoundingMode mode, bool negative, bool lsb, bool guard, bool rest);

// significand either has bit precision-1 set (any exponent, also outside the
// normal range) or is below 2^(precision-1) with exponent == emin. A zero
// significand with clear guard/round/sticky packs as a signed zero.
RoundResult round_and_pack(bool negative, int exponent, std::uint64_t significand, bool guard,
                           bool round, bool sticky, RoundingMode mode, const FloatFormat& fmt);

// Encoding helpers.
std::uint64_t make_zero(bool negative, const FloatFormat& fmt);
std::uint64_t make_inf(bool negative, const FloatFormat& fmt);
std::uint64_t make_max_finite(bool negative, const FloatFormat& fmt);
std::uint64_t make_one(const FloatFormat& fmt);
// Positive sign, quiet bit only.
std::uint64_t default_nan(const FloatFormat& fmt);
std::uint64_t quieten(std::uint64_t nan_bits, const FloatFormat& fmt);
bool is_nan(std::uint64_t bits, const FloatFormat& fmt);
bool is_signaling_nan(std::uint64_t bits, const FloatFormat& fmt);

}  // namespace fpmax

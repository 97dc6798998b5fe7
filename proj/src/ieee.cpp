#include "fpmax/ieee.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "fpmax/errors.hpp"

namespace fpmax {

namespace {

std::string lower(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return std::tolower(c); });
    return r;
}

}  // namespace

FloatFormat FloatFormat::from_name(std::string_view name) {
    std::string n = lower(name);
    if (n == "sp") return SP();
    if (n == "dp") return DP();
    if (n == "toy") return TOY();
    throw ConfigError("unknown float format '" + std::string(name) + "' (expected sp, dp or toy)");
}

std::string FloatFormat::name() const {
    if (*this == SP()) return "sp";
    if (*this == DP()) return "dp";
    if (*this == TOY()) return "toy";
    return "e" + std::to_string(exp_bits) + "f" + std::to_string(frac_bits);
}

void FloatFormat::validate() const {
    if (exp_bits < 2 || exp_bits > 15 || frac_bits < 1 || width() > 64)
        throw ConfigError("unsupported float format e" + std::to_string(exp_bits) + "f" +
                          std::to_string(frac_bits));
}

const char* to_string(FloatClass c) {
    switch (c) {
        case FloatClass::Zero: return "zero";
        case FloatClass::Subnormal: return "subnormal";
        case FloatClass::Normal: return "normal";
        case FloatClass::Infinity: return "infinity";
        case FloatClass::QuietNaN: return "qnan";
        case FloatClass::SignalingNaN: return "snan";
    }
    return "?";
}

RoundingMode parse_rounding_mode(std::string_view s) {
    std::string n = lower(s);
    if (n == "rne") return RoundingMode::NearestEven;
    if (n == "rtz") return RoundingMode::TowardZero;
    if (n == "rtp") return RoundingMode::TowardPositive;
    if (n == "rtn") return RoundingMode::TowardNegative;
    throw ParseError("unknown rounding mode '" + std::string(s) + "'");
}

const char* to_string(RoundingMode m) {
    switch (m) {
        case RoundingMode::NearestEven: return "rne";
        case RoundingMode::TowardZero: return "rtz";
        case RoundingMode::TowardPositive: return "rtp";
        case RoundingMode::TowardNegative: return "rtn";
    }
    return "?";
}

UnpackedFloat unpack(std::uint64_t bits, const FloatFormat& fmt) {
    UnpackedFloat u;
    u.negative = (bits & fmt.sign_bit()) != 0;
    int field = static_cast<int>((bits >> fmt.frac_bits) & static_cast<std::uint64_t>(fmt.exp_field_max()));
    std::uint64_t frac = bits & fmt.frac_mask();
    if (field == fmt.exp_field_max()) {
        u.exponent = fmt.emax() + 1;
        u.significand = frac;
        if (frac == 0) u.cls = FloatClass::Infinity;
        else u.cls = (frac & fmt.quiet_bit()) ? FloatClass::QuietNaN : FloatClass::SignalingNaN;
    } else if (field == 0) {
        u.exponent = fmt.emin();
        u.significand = frac;
        u.cls = frac ? FloatClass::Subnormal : FloatClass::Zero;
    } else {
        u.exponent = field - fmt.bias();
        u.significand = frac | (1ULL << fmt.frac_bits);
        u.cls = FloatClass::Normal;
    }
    return u;
}

std::uint64_t pack(const UnpackedFloat& u, const FloatFormat& fmt) {
    auto bad = [&](const char* why) {
        throw ContractError(std::string("pack: malformed ") + to_string(u.cls) + " value: " + why);
    };
    std::uint64_t sign = u.negative ? fmt.sign_bit() : 0;
    std::uint64_t hidden = 1ULL << fmt.frac_bits;
    std::uint64_t top = static_cast<std::uint64_t>(fmt.exp_field_max()) << fmt.frac_bits;
    switch (u.cls) {
        case FloatClass::Zero:
            if (u.significand != 0) bad("non-zero significand");
            return sign;
        case FloatClass::Subnormal:
            if (u.significand == 0 || u.significand >= hidden) bad("significand out of subnormal range");
            if (u.exponent != fmt.emin()) bad("exponent must be emin");
            return sign | u.significand;
        case FloatClass::Normal:
            if (u.significand < hidden || u.significand >= 2 * hidden) bad("hidden bit missing or overflow");
            if (u.exponent < fmt.emin() || u.exponent > fmt.emax()) bad("exponent out of range");
            return sign | (static_cast<std::uint64_t>(u.exponent + fmt.bias()) << fmt.frac_bits) |
                   (u.significand & fmt.frac_mask());
        case FloatClass::Infinity:
            if (u.significand != 0) bad("non-zero significand");
            return sign | top;
        case FloatClass::QuietNaN:
            if (u.significand > fmt.frac_mask() || !(u.significand & fmt.quiet_bit())) bad("quiet bit clear");
            return sign | top | u.significand;
        case FloatClass::SignalingNaN:
            if (u.significand == 0 || u.significand > fmt.frac_mask() || (u.significand & fmt.quiet_bit()))
                bad("payload invalid for signaling NaN");
            return sign | top | u.significand;
    }
    bad("unknown class");
    return 0;
}

bool round_increment(RoundingMode mode, bool negative, bool lsb, bool guard, bool rest) {
    switch (mode) {
        case RoundingMode::NearestEven: return guard && (rest || lsb);
        case RoundingMode::TowardZero: return false;
        case RoundingMode::TowardPositive: return !negative && (guard || rest);
        case RoundingMode::TowardNegative: return negative && (guard || rest);
    }
    return false;
}

std::uint64_t make_zero(bool negative, const FloatFormat& fmt) { return negative ? fmt.sign_bit() : 0; }

std::uint64_t make_inf(bool negative, const FloatFormat& fmt) {
    return make_zero(negative, fmt) | (static_cast<std::uint64_t>(fmt.exp_field_max()) << fmt.frac_bits);
}

std::uint64_t make_max_finite(bool negative, const FloatFormat& fmt) {
    return make_zero(negative, fmt) | (static_cast<std::uint64_t>(fmt.exp_field_max() - 1) << fmt.frac_bits) |
           fmt.frac_mask();
}

std::uint64_t make_one(const FloatFormat& fmt) { return static_cast<std::uint64_t>(fmt.bias()) << fmt.frac_bits; }

std::uint64_t default_nan(const FloatFormat& fmt) { return make_inf(false, fmt) | fmt.quiet_bit(); }

std::uint64_t quieten(std::uint64_t nan_bits, const FloatFormat& fmt) { return nan_bits | fmt.quiet_bit(); }

bool is_nan(std::uint64_t bits, const FloatFormat& fmt) {
    std::uint64_t top = static_cast<std::uint64_t>(fmt.exp_field_max()) << fmt.frac_bits;
    return (bits & top) == top && (bits & fmt.frac_mask());
}

bool is_signaling_nan(std::uint64_t bits, const FloatFormat& fmt) {
    return is_nan(bits, fmt) && !(bits & fmt.quiet_bit());
}

RoundResult round_and_pack(bool negative, int exponent, std::uint64_t significand, bool guard, bool round,
                           bool sticky, RoundingMode mode, const FloatFormat& fmt) {
    const int p = fmt.precision();
    const std::uint64_t hidden = 1ULL << (p - 1);
    RoundResult out;

    if (significand == 0 && !guard && !round && !sticky) {
        out.bits = make_zero(negative, fmt);
        return out;
    }
    const bool normalized = (significand & hidden) != 0;
    if (significand >> p) throw ContractError("round_and_pack: significand wider than precision");
    if (!normalized && exponent != fmt.emin())
        throw ContractError("round_and_pack: unnormalized significand outside the subnormal range");

    bool tiny = false;
    if (normalized && exponent < fmt.emin()) {
        // Tininess after rounding: round at full precision with unbounded exponent first.
        bool inc = round_increment(mode, negative, significand & 1, guard, round || sticky);
        bool carry = inc && significand == (hidden << 1) - 1;
        tiny = !(carry && exponent + 1 >= fmt.emin());

        // Denormalize: shift sig|g|r right, collecting sticky.
        int shift = fmt.emin() - exponent;
        std::uint64_t ext = (significand << 2) | (guard ? 2u : 0u) | (round ? 1u : 0u);
        bool s = sticky;
        if (shift >= p + 2) {
            s = s || ext != 0;
            ext = 0;
        } else {
            s = s || (ext & ((1ULL << shift) - 1));
            ext >>= shift;
        }
        significand = ext >> 2;
        guard = ext & 2;
        round = ext & 1;
        sticky = s;
        exponent = fmt.emin();
    } else if (!normalized) {
        // Already aligned to the subnormal grid. With one leading zero the
        // unbounded-range rounding sees guard as its lsb and round as its guard.
        int lz = p - static_cast<int>(std::bit_width(significand));
        if (lz == 1) {
            std::uint64_t wide = (significand << 1) | (guard ? 1u : 0u);
            bool inc = round_increment(mode, negative, wide & 1, round, sticky);
            tiny = !(inc && wide == (hidden << 1) - 1);
        } else {
            tiny = true;
        }
    }

    const bool inexact = guard || round || sticky;
    bool inc = round_increment(mode, negative, significand & 1, guard, round || sticky);
    std::uint64_t sig = significand + (inc ? 1 : 0);
    if (sig >> p) {
        sig >>= 1;
        exponent += 1;
    }
    out.flags.inexact = inexact;
    out.flags.underflow = tiny && inexact;

    if (exponent > fmt.emax()) {
        out.flags.overflow = true;
        out.flags.inexact = true;
        out.flags.underflow = false;
        bool to_inf = mode == RoundingMode::NearestEven || (mode == RoundingMode::TowardPositive && !negative) ||
                      (mode == RoundingMode::TowardNegative && negative);
        out.bits = to_inf ? make_inf(negative, fmt) : make_max_finite(negative, fmt);
        return out;
    }
    std::uint64_t field = (sig & hidden) ? static_cast<std::uint64_t>(exponent + fmt.bias()) : 0;
    out.bits = make_zero(negative, fmt) | (field << fmt.frac_bits) | (sig & fmt.frac_mask());
    return out;
}

}  // namespace fpmax

#include "fpmax/oracle.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

namespace fpmax {

namespace {

using boost::multiprecision::cpp_int;

struct Exact {
    bool negative;
    cpp_int mag;  // value = mag * 2^lsb
    int lsb;
};

Exact exact_of(const UnpackedFloat& u, const FloatFormat& fmt) {
    return {u.negative, cpp_int(u.significand), u.exponent - fmt.frac_bits};
}

int bit_width(const cpp_int& v) { return v == 0 ? 0 : static_cast<int>(boost::multiprecision::msb(v)) + 1; }

// Rounds mag*2^lsb to a multiple of 2^q; returns the quotient and whether the
// discarded part was non-zero.
cpp_int round_to_quantum(const cpp_int& mag, int lsb, int q, bool negative, RoundingMode mode, bool& inexact) {
    if (lsb >= q) {
        inexact = false;
        return mag << (lsb - q);
    }
    int sh = q - lsb;
    cpp_int quo = mag >> sh;
    cpp_int rem = mag - (quo << sh);
    inexact = rem != 0;
    if (!inexact) return quo;
    bool up = false;
    switch (mode) {
        case RoundingMode::NearestEven: {
            cpp_int half = cpp_int(1) << (sh - 1);
            up = rem > half || (rem == half && (quo & 1) != 0);
            break;
        }
        case RoundingMode::TowardZero: up = false; break;
        case RoundingMode::TowardPositive: up = !negative; break;
        case RoundingMode::TowardNegative: up = negative; break;
    }
    return up ? quo + 1 : quo;
}

RoundResult round_exact(bool negative, const cpp_int& mag, int lsb, RoundingMode mode, const FloatFormat& fmt) {
    const int p = fmt.precision();
    RoundResult out;
    int e = lsb + bit_width(mag) - 1;
    int q = std::max(e - (p - 1), fmt.emin() - (p - 1));
    bool inexact = false;
    cpp_int r = round_to_quantum(mag, lsb, q, negative, mode, inexact);
    int rw = bit_width(r);
    if (rw > p) {  // carried into a new binade
        r >>= 1;
        q += 1;
        rw = p;
    }
    out.flags.inexact = inexact;

    bool tiny = false;
    if (e < fmt.emin()) {
        bool dummy = false;
        int qu = e - (p - 1);
        cpp_int ru = round_to_quantum(mag, lsb, qu, negative, mode, dummy);
        tiny = qu + bit_width(ru) - 1 < fmt.emin();
    }
    out.flags.underflow = tiny && inexact;

    if (r != 0 && q + rw - 1 > fmt.emax()) {
        out.flags = {};
        out.flags.overflow = true;
        out.flags.inexact = true;
        bool to_inf = mode == RoundingMode::NearestEven || (mode == RoundingMode::TowardPositive && !negative) ||
                      (mode == RoundingMode::TowardNegative && negative);
        out.bits = to_inf ? make_inf(negative, fmt) : make_max_finite(negative, fmt);
        return out;
    }
    std::uint64_t sig = static_cast<std::uint64_t>(r);
    std::uint64_t field = rw == p ? static_cast<std::uint64_t>(q + (p - 1) + fmt.bias()) : 0;
    out.bits = make_zero(negative, fmt) | (field << fmt.frac_bits) | (sig & fmt.frac_mask());
    return out;
}

bool valid_snan(const UnpackedFloat& u) { return u.cls == FloatClass::SignalingNaN; }

}  // namespace

RoundResult oracle_fma(std::uint64_t a, std::uint64_t b, std::uint64_t c, const FloatFormat& fmt,
                       RoundingMode mode) {
    UnpackedFloat ua = unpack(a, fmt), ub = unpack(b, fmt), uc = unpack(c, fmt);
    RoundResult out;
    if (ua.is_nan() || ub.is_nan() || uc.is_nan()) {
        out.flags.invalid = valid_snan(ua) || valid_snan(ub) || valid_snan(uc);
        std::uint64_t src = ua.is_nan() ? a : ub.is_nan() ? b : c;
        out.bits = quieten(src, fmt);
        return out;
    }
    bool sp = ua.negative != ub.negative;
    bool a_inf = ua.cls == FloatClass::Infinity, b_inf = ub.cls == FloatClass::Infinity;
    bool a_zero = ua.cls == FloatClass::Zero, b_zero = ub.cls == FloatClass::Zero;
    if ((a_inf && b_zero) || (a_zero && b_inf)) {
        out.flags.invalid = true;
        out.bits = default_nan(fmt);
        return out;
    }
    if (a_inf || b_inf) {
        if (uc.cls == FloatClass::Infinity && uc.negative != sp) {
            out.flags.invalid = true;
            out.bits = default_nan(fmt);
        } else {
            out.bits = make_inf(sp, fmt);
        }
        return out;
    }
    if (uc.cls == FloatClass::Infinity) {
        out.bits = c;
        return out;
    }

    Exact ea = exact_of(ua, fmt), eb = exact_of(ub, fmt), ec = exact_of(uc, fmt);
    cpp_int prod = ea.mag * eb.mag;
    int lp = ea.lsb + eb.lsb;
    int l = std::min(lp, ec.lsb);
    cpp_int sum = (prod << (lp - l));
    if (sp) sum = -sum;
    cpp_int addend = ec.mag << (ec.lsb - l);
    sum += uc.negative ? cpp_int(-addend) : addend;
    if (sum == 0) {
        bool neg;
        if (prod == 0 && ec.mag == 0) neg = sp == uc.negative ? sp : mode == RoundingMode::TowardNegative;
        else neg = mode == RoundingMode::TowardNegative;
        out.bits = make_zero(neg, fmt);
        return out;
    }
    bool neg = sum < 0;
    return round_exact(neg, neg ? cpp_int(-sum) : sum, l, mode, fmt);
}

RoundResult oracle_mul(std::uint64_t a, std::uint64_t b, const FloatFormat& fmt, RoundingMode mode) {
    UnpackedFloat ua = unpack(a, fmt), ub = unpack(b, fmt);
    RoundResult out;
    if (ua.is_nan() || ub.is_nan()) {
        out.flags.invalid = valid_snan(ua) || valid_snan(ub);
        out.bits = quieten(ua.is_nan() ? a : b, fmt);
        return out;
    }
    bool sp = ua.negative != ub.negative;
    bool a_inf = ua.cls == FloatClass::Infinity, b_inf = ub.cls == FloatClass::Infinity;
    bool a_zero = ua.cls == FloatClass::Zero, b_zero = ub.cls == FloatClass::Zero;
    if ((a_inf && b_zero) || (a_zero && b_inf)) {
        out.flags.invalid = true;
        out.bits = default_nan(fmt);
        return out;
    }
    if (a_inf || b_inf) {
        out.bits = make_inf(sp, fmt);
        return out;
    }
    if (a_zero || b_zero) {
        out.bits = make_zero(sp, fmt);
        return out;
    }
    Exact ea = exact_of(ua, fmt), eb = exact_of(ub, fmt);
    return round_exact(sp, ea.mag * eb.mag, ea.lsb + eb.lsb, mode, fmt);
}

RoundResult oracle_add(std::uint64_t a, std::uint64_t b, const FloatFormat& fmt, RoundingMode mode) {
    return oracle_fma(a, make_one(fmt), b, fmt, mode);
}

RoundResult oracle_cascade(std::uint64_t a, std::uint64_t b, std::uint64_t c, const FloatFormat& fmt,
                           RoundingMode mode) {
    RoundResult m = oracle_mul(a, b, fmt, mode);
    RoundResult s = oracle_add(m.bits, c, fmt, mode);
    s.flags |= m.flags;
    return s;
}

}  // namespace fpmax

#pragma once
// Independent reference for the 8-bit TOY format (1/4/3). Every TOY product
// and sum is exact in a double, so the only rounding is the final one, done
// here by plain quantum arithmetic on doubles.
#include <cmath>
#include <cstdint>

namespace toyref {

enum Mode { RNE = 0, RTZ = 1, RTP = 2, RTN = 3 };

struct Res {
    std::uint32_t bits;
    unsigned flags;  // invalid 8, overflow 4, underflow 2, inexact 1
};

constexpr int kEmin = -6, kEmax = 7;
constexpr std::uint32_t kQNaN = 0x7C;

inline bool is_nan(std::uint32_t b) { return ((b >> 3) & 15) == 15 && (b & 7); }
inline bool is_snan(std::uint32_t b) { return is_nan(b) && !(b & 4); }
inline bool is_inf(std::uint32_t b) { return (b & 0x7F) == 0x78; }
inline bool neg(std::uint32_t b) { return b & 0x80; }

inline double value(std::uint32_t b) {
    int e = (b >> 3) & 15, f = b & 7;
    double m = e == 0 ? std::ldexp(f, kEmin - 3) : std::ldexp(8 + f, e - 7 - 3);
    return neg(b) ? -m : m;
}

inline bool round_up(Mode m, bool negative, double fl, double rem) {
    if (rem == 0) return false;
    switch (m) {
        case RNE: return rem > 0.5 || (rem == 0.5 && std::fmod(fl, 2.0) != 0);
        case RTZ: return false;
        case RTP: return !negative;
        case RTN: return negative;
    }
    return false;
}

// Rounds m (> 0) to a multiple of 2^q.
inline double to_quantum(double m, int q, Mode mode, bool negative, bool& inexact) {
    double n = std::ldexp(m, -q), fl = std::floor(n), rem = n - fl;
    inexact = rem != 0;
    return std::ldexp(fl + (round_up(mode, negative, fl, rem) ? 1 : 0), q);
}

// x exact and non-zero; zero_sign used when the result rounds to zero.
inline Res round(double x, Mode mode) {
    bool n = x < 0;
    double m = std::fabs(x);
    int e = std::ilogb(m);
    bool inexact = false;
    double r = to_quantum(m, std::max(e, kEmin) - 3, mode, n, inexact);
    unsigned fl = inexact ? 1 : 0;
    if (e < kEmin && inexact) {
        bool dummy;
        if (to_quantum(m, e - 3, mode, n, dummy) < std::ldexp(1.0, kEmin)) fl |= 2;
    }
    if (r >= std::ldexp(1.0, kEmax + 1)) {
        bool inf = mode == RNE || (mode == RTP && !n) || (mode == RTN && n);
        return {(n ? 0x80u : 0u) | (inf ? 0x78u : 0x77u), 5};
    }
    std::uint32_t s = n ? 0x80 : 0;
    if (r == 0) return {s, fl};
    if (r < std::ldexp(1.0, kEmin)) return {s | static_cast<std::uint32_t>(std::ldexp(r, 3 - kEmin)), fl};
    int re = std::ilogb(r);
    std::uint32_t frac = static_cast<std::uint32_t>(std::ldexp(r, 3 - re)) - 8;
    return {s | static_cast<std::uint32_t>(re + 7) << 3 | frac, fl};
}

inline std::uint32_t quiet(std::uint32_t b) { return b | 4; }

// Sum of two exact addends with signed-zero rules.
inline Res finish(double x, bool both_zero, bool zsign_a, bool zsign_b, Mode mode) {
    if (x != 0) return round(x, mode);
    bool s = both_zero && zsign_a == zsign_b ? zsign_a : mode == RTN;
    return {s ? 0x80u : 0u, 0};
}

inline Res mul(std::uint32_t a, std::uint32_t b, Mode mode) {
    if (is_nan(a) || is_nan(b)) return {quiet(is_nan(a) ? a : b), (is_snan(a) || is_snan(b)) ? 8u : 0u};
    bool s = neg(a) != neg(b);
    bool za = (a & 0x7F) == 0, zb = (b & 0x7F) == 0;
    if ((is_inf(a) && zb) || (is_inf(b) && za)) return {kQNaN, 8};
    if (is_inf(a) || is_inf(b)) return {(s ? 0x80u : 0u) | 0x78u, 0};
    double x = value(a) * value(b);
    if (x == 0) return {s ? 0x80u : 0u, 0};
    return round(x, mode);
}

inline Res add(std::uint32_t a, std::uint32_t c, Mode mode) {
    if (is_nan(a) || is_nan(c)) return {quiet(is_nan(a) ? a : c), (is_snan(a) || is_snan(c)) ? 8u : 0u};
    if (is_inf(a) && is_inf(c) && neg(a) != neg(c)) return {kQNaN, 8};
    if (is_inf(a)) return {a, 0};
    if (is_inf(c)) return {c, 0};
    bool za = (a & 0x7F) == 0, zc = (c & 0x7F) == 0;
    return finish(value(a) + value(c), za && zc, neg(a), neg(c), mode);
}

inline Res fma(std::uint32_t a, std::uint32_t b, std::uint32_t c, Mode mode) {
    if (is_nan(a) || is_nan(b) || is_nan(c)) {
        std::uint32_t src = is_nan(a) ? a : is_nan(b) ? b : c;
        return {quiet(src), (is_snan(a) || is_snan(b) || is_snan(c)) ? 8u : 0u};
    }
    bool s = neg(a) != neg(b);
    bool za = (a & 0x7F) == 0, zb = (b & 0x7F) == 0, zc = (c & 0x7F) == 0;
    if ((is_inf(a) && zb) || (is_inf(b) && za)) return {kQNaN, 8};
    if (is_inf(a) || is_inf(b)) {
        if (is_inf(c) && neg(c) != s) return {kQNaN, 8};
        return {(s ? 0x80u : 0u) | 0x78u, 0};
    }
    if (is_inf(c)) return {c, 0};
    double p = value(a) * value(b);
    return finish(p + value(c), p == 0 && zc, s, neg(c), mode);
}

inline Res cascade(std::uint32_t a, std::uint32_t b, std::uint32_t c, Mode mode) {
    Res p = mul(a, b, mode);
    Res r = add(p.bits, c, mode);
    return {r.bits, r.flags | p.flags};
}

}  // namespace toyref

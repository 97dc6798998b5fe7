#pragma once
// SP/DP reference from the host's IEEE hardware and libm: std::fma under the
// requested rounding mode with the sticky exception flags read back. The
// host detects tininess after rounding, as the library does. NaN payloads
// are host-specific, so callers compare NaN-ness only.
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <cstring>

namespace hostref {

struct Res {
    std::uint64_t bits;
    unsigned flags;  // invalid 8, overflow 4, underflow 2, inexact 1
};

inline int fe_mode(int m) {
    switch (m) {
        case 1: return FE_TOWARDZERO;
        case 2: return FE_UPWARD;
        case 3: return FE_DOWNWARD;
        default: return FE_TONEAREST;
    }
}

inline unsigned read_flags() {
    unsigned f = 0;
    if (std::fetestexcept(FE_INVALID)) f |= 8;
    if (std::fetestexcept(FE_OVERFLOW)) f |= 4;
    if (std::fetestexcept(FE_UNDERFLOW)) f |= 2;
    if (std::fetestexcept(FE_INEXACT)) f |= 1;
    return f;
}

template <class F, class U>
F from_bits(U u) {
    F f;
    std::memcpy(&f, &u, sizeof f);
    return f;
}
template <class U, class F>
U to_bits(F f) {
    U u;
    std::memcpy(&u, &f, sizeof u);
    return u;
}

template <class F, class U>
Res fused(U a, U b, U c, int mode) {
    volatile F x = from_bits<F>(a), y = from_bits<F>(b), z = from_bits<F>(c);
    std::fesetround(fe_mode(mode));
    std::feclearexcept(FE_ALL_EXCEPT);
    volatile F r = std::fma(static_cast<F>(x), static_cast<F>(y), static_cast<F>(z));
    unsigned f = read_flags();
    std::fesetround(FE_TONEAREST);
    return {to_bits<U>(static_cast<F>(r)), f};
}

template <class F, class U>
Res cascade(U a, U b, U c, int mode) {
    volatile F x = from_bits<F>(a), y = from_bits<F>(b), z = from_bits<F>(c);
    std::fesetround(fe_mode(mode));
    std::feclearexcept(FE_ALL_EXCEPT);
    volatile F p = x * y;
    volatile F r = p + z;
    unsigned f = read_flags();
    std::fesetround(FE_TONEAREST);
    return {to_bits<U>(static_cast<F>(r)), f};
}

inline Res fma_sp(std::uint64_t a, std::uint64_t b, std::uint64_t c, int m) {
    return fused<float, std::uint32_t>(std::uint32_t(a), std::uint32_t(b), std::uint32_t(c), m);
}
inline Res fma_dp(std::uint64_t a, std::uint64_t b, std::uint64_t c, int m) { return fused<double, std::uint64_t>(a, b, c, m); }
inline Res cma_sp(std::uint64_t a, std::uint64_t b, std::uint64_t c, int m) {
    return cascade<float, std::uint32_t>(std::uint32_t(a), std::uint32_t(b), std::uint32_t(c), m);
}
inline Res cma_dp(std::uint64_t a, std::uint64_t b, std::uint64_t c, int m) { return cascade<double, std::uint64_t>(a, b, c, m); }

}  // namespace hostref

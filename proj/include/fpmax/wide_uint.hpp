#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>

namespace fpmax {

// Fixed-width unsigned integer, little-endian 64-bit limbs, arithmetic mod 2^(64*N).
template <std::size_t N>
class WideUint {
public:
    static constexpr int kBits = static_cast<int>(64 * N);

    constexpr WideUint() = default;
    constexpr WideUint(std::uint64_t v) { limb_[0] = v; }  // NOLINT: implicit on purpose

    static constexpr WideUint ones(int width) {
        WideUint r;
        for (std::size_t i = 0; i < N; ++i) {
            int lo = static_cast<int>(64 * i);
            if (width >= lo + 64) r.limb_[i] = ~0ULL;
            else if (width > lo) r.limb_[i] = (1ULL << (width - lo)) - 1;
        }
        return r;
    }
    static constexpr WideUint bit_at(int pos) {
        WideUint r;
        if (pos >= 0 && pos < kBits) r.limb_[pos / 64] = 1ULL << (pos % 64);
        return r;
    }

    constexpr std::uint64_t limb(std::size_t i) const { return limb_[i]; }
    constexpr std::uint64_t& limb(std::size_t i) { return limb_[i]; }
    constexpr std::uint64_t low64() const { return limb_[0]; }

    constexpr bool is_zero() const {
        for (auto l : limb_) if (l) return false;
        return true;
    }
    constexpr bool bit(int pos) const {
        if (pos < 0 || pos >= kBits) return false;
        return (limb_[pos / 64] >> (pos % 64)) & 1ULL;
    }
    constexpr void set_bit(int pos, bool v = true) {
        if (pos < 0 || pos >= kBits) return;
        std::uint64_t m = 1ULL << (pos % 64);
        if (v) limb_[pos / 64] |= m;
        else limb_[pos / 64] &= ~m;
    }
    // Index of the highest set bit plus one; 0 for zero.
    constexpr int bit_width() const {
        for (int i = static_cast<int>(N) - 1; i >= 0; --i)
            if (limb_[i]) return 64 * i + static_cast<int>(std::bit_width(limb_[i]));
        return 0;
    }
    // True when any bit strictly below pos is set.
    constexpr bool any_below(int pos) const {
        if (pos <= 0) return false;
        if (pos >= kBits) return !is_zero();
        for (int i = 0; i < pos / 64; ++i)
            if (limb_[i]) return true;
        int r = pos % 64;
        return r && (limb_[pos / 64] & ((1ULL << r) - 1));
    }
    constexpr WideUint masked(int width) const { return *this & ones(width); }

    friend constexpr WideUint operator+(const WideUint& a, const WideUint& b) {
        WideUint r;
        unsigned carry = 0;
        for (std::size_t i = 0; i < N; ++i) {
            std::uint64_t s = a.limb_[i] + b.limb_[i];
            unsigned c1 = s < a.limb_[i];
            std::uint64_t t = s + carry;
            unsigned c2 = t < s;
            r.limb_[i] = t;
            carry = c1 | c2;
        }
        return r;
    }
    friend constexpr WideUint operator-(const WideUint& a, const WideUint& b) {
        WideUint r;
        unsigned borrow = 0;
        for (std::size_t i = 0; i < N; ++i) {
            std::uint64_t d = a.limb_[i] - b.limb_[i];
            unsigned b1 = a.limb_[i] < b.limb_[i];
            std::uint64_t t = d - borrow;
            unsigned b2 = d < borrow;
            r.limb_[i] = t;
            borrow = b1 | b2;
        }
        return r;
    }
    friend constexpr WideUint operator&(const WideUint& a, const WideUint& b) {
        WideUint r;
        for (std::size_t i = 0; i < N; ++i) r.limb_[i] = a.limb_[i] & b.limb_[i];
        return r;
    }
    friend constexpr WideUint operator|(const WideUint& a, const WideUint& b) {
        WideUint r;
        for (std::size_t i = 0; i < N; ++i) r.limb_[i] = a.limb_[i] | b.limb_[i];
        return r;
    }
    friend constexpr WideUint operator^(const WideUint& a, const WideUint& b) {
        WideUint r;
        for (std::size_t i = 0; i < N; ++i) r.limb_[i] = a.limb_[i] ^ b.limb_[i];
        return r;
    }
    constexpr WideUint operator~() const {
        WideUint r;
        for (std::size_t i = 0; i < N; ++i) r.limb_[i] = ~limb_[i];
        return r;
    }
    constexpr WideUint operator-() const { return WideUint{} - *this; }

    friend constexpr WideUint operator<<(const WideUint& a, int s) {
        if (s <= 0) return s == 0 ? a : a >> -s;
        if (s >= kBits) return {};
        WideUint r;
        int ls = s / 64, bs = s % 64;
        for (int i = static_cast<int>(N) - 1; i >= ls; --i) {
            std::uint64_t v = a.limb_[i - ls] << bs;
            if (bs && i - ls - 1 >= 0) v |= a.limb_[i - ls - 1] >> (64 - bs);
            r.limb_[i] = v;
        }
        return r;
    }
    friend constexpr WideUint operator>>(const WideUint& a, int s) {
        if (s <= 0) return s == 0 ? a : a << -s;
        if (s >= kBits) return {};
        WideUint r;
        int ls = s / 64, bs = s % 64;
        for (int i = 0; i + ls < static_cast<int>(N); ++i) {
            std::uint64_t v = a.limb_[i + ls] >> bs;
            if (bs && i + ls + 1 < static_cast<int>(N)) v |= a.limb_[i + ls + 1] << (64 - bs);
            r.limb_[i] = v;
        }
        return r;
    }
    WideUint& operator+=(const WideUint& o) { return *this = *this + o; }
    WideUint& operator-=(const WideUint& o) { return *this = *this - o; }
    WideUint& operator|=(const WideUint& o) { return *this = *this | o; }
    WideUint& operator&=(const WideUint& o) { return *this = *this & o; }
    WideUint& operator^=(const WideUint& o) { return *this = *this ^ o; }
    WideUint& operator<<=(int s) { return *this = *this << s; }
    WideUint& operator>>=(int s) { return *this = *this >> s; }

    friend constexpr bool operator==(const WideUint& a, const WideUint& b) { return a.limb_ == b.limb_; }
    friend constexpr bool operator<(const WideUint& a, const WideUint& b) {
        for (int i = static_cast<int>(N) - 1; i >= 0; --i)
            if (a.limb_[i] != b.limb_[i]) return a.limb_[i] < b.limb_[i];
        return false;
    }

    // 64x64 -> 128 product placed at limb 0..1.
    static WideUint mul64(std::uint64_t a, std::uint64_t b) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        WideUint r;
        r.limb_[0] = static_cast<std::uint64_t>(p);
        if constexpr (N > 1) r.limb_[1] = static_cast<std::uint64_t>(p >> 64);
        return r;
    }

    std::string to_hex() const {
        static const char* dig = "0123456789abcdef";
        std::string s;
        for (int i = kBits / 4 - 1; i >= 0; --i) {
            unsigned nib = static_cast<unsigned>((limb_[i / 16] >> (4 * (i % 16))) & 0xF);
            if (s.empty() && nib == 0 && i) continue;
            s.push_back(dig[nib]);
        }
        return s;
    }

private:
    std::array<std::uint64_t, N> limb_{};
};

using Wide = WideUint<3>;

}  // namespace fpmax

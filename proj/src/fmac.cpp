#include "fpmax/fmac.hpp"

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

// Operand as seen inside a datapath. Finite values are
// (sig + inc) * 2^(exp - frac_bits); bits is only meaningful for packed inputs.
struct Term {
    enum Kind { Zero, Finite, Inf, NaN } kind = Zero;
    bool neg = false;
    int exp = 0;
    std::uint64_t sig = 0;
    bool inc = false;
    bool signaling = false;
    std::uint64_t bits = 0;
};

Term term_of(const Operand& op, const FloatFormat& fmt) {
    Term t;
    if (const auto* f = std::get_if<ForwardedOperand>(&op)) {
        t.neg = f->negative;
        t.exp = f->exponent;
        t.sig = f->significand;
        t.inc = f->increment;
        t.kind = (t.sig == 0 && !t.inc) ? Term::Zero : Term::Finite;
        return t;
    }
    t.bits = std::get<std::uint64_t>(op);
    UnpackedFloat u = unpack(t.bits, fmt);
    t.neg = u.negative;
    t.exp = u.exponent;
    t.sig = u.significand;
    switch (u.cls) {
        case FloatClass::Zero: t.kind = Term::Zero; break;
        case FloatClass::Subnormal:
        case FloatClass::Normal: t.kind = Term::Finite; break;
        case FloatClass::Infinity: t.kind = Term::Inf; break;
        case FloatClass::QuietNaN: t.kind = Term::NaN; break;
        case FloatClass::SignalingNaN:
            t.kind = Term::NaN;
            t.signaling = true;
            break;
    }
    return t;
}

// Left-justifies a significand to p bits; returns the shift applied.
int normalize_shift(std::uint64_t sig, int p) { return p - static_cast<int>(std::bit_width(sig)); }

// Significand with the pending increment folded in by the alignment-path
// incrementer, normalized to p bits.
void folded(const Term& t, int p, std::uint64_t& m, int& e) {
    m = t.sig + (t.inc ? 1 : 0);
    if (m >> p) throw ContractError("forwarded significand overflows precision");
    int sh = normalize_shift(m, p);
    m <<= sh;
    e = t.exp - sh;
}

UnroundedResult special_result(std::uint64_t bits, bool invalid) {
    UnroundedResult u;
    u.special = bits;
    u.special_flags.invalid = invalid;
    return u;
}

UnroundedResult zero_result(bool negative) {
    UnroundedResult u;
    u.negative = negative;
    return u;
}

// Normalizes an exact magnitude mag * 2^lsb into p bits plus guard, round
// and sticky.
UnroundedResult normalize_window(const Wide& mag, int lsb, bool negative, int p) {
    UnroundedResult u;
    u.negative = negative;
    if (mag.is_zero()) return u;
    int msb = mag.bit_width() - 1;
    u.exponent = lsb + msb;
    int sh = msb - (p - 1);
    if (sh <= 0) {
        u.significand = (mag << -sh).low64();
    } else {
        u.significand = (mag >> sh).low64();
        u.guard = mag.bit(sh - 1);
        u.round = mag.bit(sh - 2);
        u.sticky = mag.any_below(sh - 2);
    }
    return u;
}

UnroundedResult exact_term(const Term& t, const FloatFormat& fmt) {
    if (t.kind == Term::Zero) return zero_result(t.neg);
    std::uint64_t m;
    int e;
    folded(t, fmt.precision(), m, e);
    UnroundedResult u;
    u.negative = t.neg;
    u.exponent = e;
    u.significand = m;
    return u;
}

// Right shift that ORs every shifted-out bit into bit 0.
std::uint64_t jam_shift(std::uint64_t m, int s) {
    if (s <= 0) return m;
    if (s >= 64) return m != 0;
    return (m >> s) | ((m & ((1ULL << s) - 1)) != 0 ? 1 : 0);
}

struct ProductPair {
    mul::CarrySavePair pair;
    int lsb = 0;  // exponent of bit 0 of the pair
};

// Booth multiplier on pre-normalized significands. A pending increment on
// either input enters the tree as an extra partial-product word.
ProductPair product_pair(const Term& a, const Term& b, const FmacConfig& cfg, int width) {
    const int p = cfg.fmt.precision();
    int sa = normalize_shift(a.sig, p), sb = normalize_shift(b.sig, p);
    std::uint64_t ma = a.sig << sa, mb = b.sig << sb;
    mul::PartialProducts pp =
        mul::gen_partial_products(ma, mul::booth_encode(mb, p, cfg.booth_radix_log2), width);
    std::vector<Wide> words = mul::rows_to_words(pp.rows, width);
    if (a.inc) words.push_back(Wide(mb) << sa);
    if (b.inc) words.push_back(Wide(ma) << sb);
    if (a.inc && b.inc) words.push_back(Wide::bit_at(sa + sb));
    ProductPair out;
    out.pair = mul::reduce_value(words, cfg.tree_kind, width);
    out.lsb = (a.exp - sa - cfg.fmt.frac_bits) + (b.exp - sb - cfg.fmt.frac_bits);
    return out;
}

// Special-case logic of the multiplier; returns true when it decided the result.
bool product_specials(const Term& a, const Term& b, const FloatFormat& fmt, UnroundedResult& out) {
    bool sp = a.neg != b.neg;
    if (a.kind == Term::NaN || b.kind == Term::NaN) {
        out = special_result(quieten(a.kind == Term::NaN ? a.bits : b.bits, fmt), a.signaling || b.signaling);
        return true;
    }
    if ((a.kind == Term::Inf && b.kind == Term::Zero) || (a.kind == Term::Zero && b.kind == Term::Inf)) {
        out = special_result(default_nan(fmt), true);
        return true;
    }
    if (a.kind == Term::Inf || b.kind == Term::Inf) {
        out = special_result(make_inf(sp, fmt), false);
        return true;
    }
    if (a.kind == Term::Zero || b.kind == Term::Zero) {
        out = zero_result(sp);
        return true;
    }
    return false;
}

UnroundedResult multiplier_unit(const Term& a, const Term& b, const FmacConfig& cfg) {
    UnroundedResult out;
    if (product_specials(a, b, cfg.fmt, out)) return out;
    const int p = cfg.fmt.precision();
    const int width = 2 * p + 2;
    ProductPair pr = product_pair(a, b, cfg, width);
    return normalize_window(mul::final_add(pr.pair), pr.lsb, a.neg != b.neg, p);
}

bool zero_sum_negative(bool x_neg, bool y_neg, RoundingMode mode) {
    return x_neg == y_neg ? x_neg : mode == RoundingMode::TowardNegative;
}

// Adder unit of the cascade: far operand aligned under the near one with a
// jammed sticky, add or subtract, exact normalization.
UnroundedResult adder_unit(const Term& x, const Term& y, const FloatFormat& fmt, RoundingMode mode) {
    const int p = fmt.precision();
    if (x.kind == Term::NaN || y.kind == Term::NaN)
        return special_result(quieten(x.kind == Term::NaN ? x.bits : y.bits, fmt), x.signaling || y.signaling);
    if (x.kind == Term::Inf && y.kind == Term::Inf && x.neg != y.neg) return special_result(default_nan(fmt), true);
    if (x.kind == Term::Inf) return special_result(make_inf(x.neg, fmt), false);
    if (y.kind == Term::Inf) return special_result(make_inf(y.neg, fmt), false);
    if (x.kind == Term::Zero && y.kind == Term::Zero) return zero_result(zero_sum_negative(x.neg, y.neg, mode));
    if (x.kind == Term::Zero) return exact_term(y, fmt);
    if (y.kind == Term::Zero) return exact_term(x, fmt);

    constexpr int q = 4;
    std::uint64_t mx, my;
    int ex, ey;
    folded(x, p, mx, ex);
    folded(y, p, my, ey);
    bool x_big = ex >= ey;
    std::uint64_t mb = x_big ? mx : my, ms = x_big ? my : mx;
    bool nb = x_big ? x.neg : y.neg, ns = x_big ? y.neg : x.neg;
    int eb = x_big ? ex : ey;
    int d = x_big ? ex - ey : ey - ex;

    Wide big = Wide(mb) << q;
    int pos = q - d;
    Wide small = pos >= 0 ? Wide(ms) << pos : Wide(jam_shift(ms, -pos));
    Wide t;
    bool neg = nb;
    if (nb == ns) {
        t = big + small;
    } else if (small < big) {
        t = big - small;
    } else {
        t = small - big;
        neg = ns;
    }
    if (t.is_zero()) return zero_result(mode == RoundingMode::TowardNegative);
    return normalize_window(t, eb - fmt.frac_bits - q, neg, p);
}

// Fused datapath. When has_addend is false only the product is rounded.
UnroundedResult fused_unit(const Term& a, const Term& b, const Term& c, bool has_addend, const FmacConfig& cfg,
                           RoundingMode mode) {
    const FloatFormat& fmt = cfg.fmt;
    const int p = fmt.precision();
    const bool sp = a.neg != b.neg;
    if (has_addend) {
        if (a.kind == Term::NaN || b.kind == Term::NaN || c.kind == Term::NaN) {
            std::uint64_t src = a.kind == Term::NaN ? a.bits : b.kind == Term::NaN ? b.bits : c.bits;
            return special_result(quieten(src, fmt), a.signaling || b.signaling || c.signaling);
        }
        UnroundedResult prod;
        if (product_specials(a, b, fmt, prod)) {
            if (prod.special) {
                if (prod.special_flags.invalid) return prod;
                // Infinite product.
                if (c.kind == Term::Inf && c.neg != sp) return special_result(default_nan(fmt), true);
                return prod;
            }
            // Zero product: the result is the addend, exactly.
            if (c.kind == Term::Inf) return special_result(make_inf(c.neg, fmt), false);
            if (c.kind == Term::Zero) return zero_result(zero_sum_negative(sp, c.neg, mode));
            return exact_term(c, fmt);
        }
        if (c.kind == Term::Inf) return special_result(make_inf(c.neg, fmt), false);
    } else {
        UnroundedResult prod;
        if (product_specials(a, b, fmt, prod)) return prod;
    }

    // Window: product at offset q0, addend anywhere up to W - p, two extra
    // bits on top for the two's-complement sign.
    constexpr int q0 = 3;
    const int w = 3 * p + 2 + q0;
    const int wt = w + 2;
    ProductPair pr = product_pair(a, b, cfg, wt - q0);

    if (!has_addend || c.kind == Term::Zero)
        return normalize_window(mul::final_add(pr.pair), pr.lsb, sp, p);

    std::uint64_t mc;
    int ec;
    folded(c, p, mc, ec);
    const int lc = ec - fmt.frac_bits;
    const int delta = lc - pr.lsb;
    const bool eff_sub = sp != c.neg;

    Wide ps, pc, cw;
    int lw;
    if (delta >= 2 * p + 3) {
        // Addend entirely above the product: the product only matters as sticky.
        cw = Wide(mc) << (w - p);
        lw = lc - (w - p);
        ps = Wide(1);
    } else {
        int pos = q0 + delta;
        lw = pr.lsb - q0;
        ps = (pr.pair.sum_word << q0).masked(wt);
        pc = (pr.pair.carry_word << q0).masked(wt);
        cw = pos >= 0 ? Wide(mc) << pos : Wide(jam_shift(mc, -pos));
    }
    Wide addend = eff_sub ? (~cw).masked(wt) : cw;
    mul::CarrySavePair comb = mul::csa(ps, pc, addend, wt);
    if (eff_sub) comb.carry_word.set_bit(0);  // +1 of the two's complement, free slot in the carry word
    Wide t = mul::final_add(comb);
    bool neg = sp;
    if (t.bit(wt - 1)) {
        t = (-t).masked(wt);
        neg = !sp;
    }
    if (t.is_zero()) return zero_result(mode == RoundingMode::TowardNegative);
    return normalize_window(t, lw, neg, p);
}

}  // namespace

Architecture parse_architecture(std::string_view s) {
    std::string n = lower(s);
    if (n == "fma") return Architecture::FMA;
    if (n == "cma") return Architecture::CMA;
    throw ConfigError("unknown architecture '" + std::string(s) + "' (expected fma or cma)");
}

const char* to_string(Architecture a) { return a == Architecture::FMA ? "fma" : "cma"; }

Port parse_port(std::string_view s) {
    std::string n = lower(s);
    if (n == "a") return Port::A;
    if (n == "b") return Port::B;
    if (n == "c") return Port::C;
    throw ConfigError("unknown port '" + std::string(s) + "'");
}

const char* to_string(Port p) {
    switch (p) {
        case Port::A: return "a";
        case Port::B: return "b";
        case Port::C: return "c";
    }
    return "?";
}

int FmacConfig::operand_need_stage(Port p) const {
    if (p != Port::C || architecture == Architecture::FMA) return 1;
    return mul_pipe_depth + 1;
}

void FmacConfig::validate() const {
    fmt.validate();
    if (booth_radix_log2 != 2 && booth_radix_log2 != 3)
        throw ConfigError("booth_radix_log2 must be 2 or 3, got " + std::to_string(booth_radix_log2));
    if (pipeline_stages < 2) throw ConfigError("pipeline_stages must be at least 2");
    if (mul_pipe_depth < 1) throw ConfigError("mul_pipe_depth must be at least 1");
    if (architecture == Architecture::CMA) {
        if (!add_pipe_depth) throw ConfigError("CMA configuration requires add_pipe_depth");
        if (*add_pipe_depth < 1) throw ConfigError("add_pipe_depth must be at least 1");
        if (mul_pipe_depth + *add_pipe_depth > pipeline_stages - 1)
            throw ConfigError("mul_pipe_depth + add_pipe_depth must leave one stage for rounding");
    } else {
        if (add_pipe_depth) throw ConfigError("FMA configuration has no separate adder pipe");
        if (mul_pipe_depth > pipeline_stages - 1)
            throw ConfigError("mul_pipe_depth must leave at least one stage after the multiplier");
    }
    for (const auto& e : bypass) {
        if (e.producer_stage != unrounded_ready_stage() && e.producer_stage != rounded_ready_stage())
            throw ConfigError("bypass producer stage " + std::to_string(e.producer_stage) +
                              " carries no result (expected " + std::to_string(unrounded_ready_stage()) + " or " +
                              std::to_string(rounded_ready_stage()) + ")");
        if (e.consumer_stage < 1 || e.consumer_stage > operand_need_stage(e.port))
            throw ConfigError("bypass into port " + std::string(to_string(e.port)) + " at stage " +
                              std::to_string(e.consumer_stage) + " arrives after the operand is needed");
    }
}

std::vector<BypassEdge> FmacConfig::default_bypass(const FmacConfig& cfg) {
    std::vector<BypassEdge> edges;
    for (Port p : {Port::A, Port::B, Port::C})
        edges.push_back({cfg.unrounded_ready_stage(), p, cfg.operand_need_stage(p)});
    return edges;
}

FmacConfig FmacConfig::preset(std::string_view name) {
    std::string n = lower(name);
    FmacConfig c;
    c.name = n;
    if (n == "dp-cma") {
        c.fmt = FloatFormat::DP();
        c.architecture = Architecture::CMA;
        c.booth_radix_log2 = 3;
        c.tree_kind = mul::TreeKind::Wallace;
        c.pipeline_stages = 5;
        c.mul_pipe_depth = 2;
        c.add_pipe_depth = 2;
    } else if (n == "dp-fma") {
        c.fmt = FloatFormat::DP();
        c.architecture = Architecture::FMA;
        c.booth_radix_log2 = 3;
        c.tree_kind = mul::TreeKind::Array;
        c.pipeline_stages = 6;
        c.mul_pipe_depth = 2;
    } else if (n == "sp-cma") {
        c.fmt = FloatFormat::SP();
        c.architecture = Architecture::CMA;
        c.booth_radix_log2 = 2;
        c.tree_kind = mul::TreeKind::Wallace;
        c.pipeline_stages = 6;
        c.mul_pipe_depth = 3;
        c.add_pipe_depth = 2;
    } else if (n == "sp-fma") {
        c.fmt = FloatFormat::SP();
        c.architecture = Architecture::FMA;
        c.booth_radix_log2 = 3;
        c.tree_kind = mul::TreeKind::ZM;
        c.pipeline_stages = 4;
        c.mul_pipe_depth = 2;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected dp-cma, dp-fma, sp-cma or sp-fma)");
    }
    c.bypass = default_bypass(c);
    return c;
}

std::vector<std::string> FmacConfig::preset_names() { return {"dp-cma", "dp-fma", "sp-cma", "sp-fma"}; }

RoundResult round_unrounded(const UnroundedResult& u, RoundingMode mode, const FloatFormat& fmt) {
    if (u.special) return {*u.special, u.special_flags};
    return round_and_pack(u.negative, u.exponent, u.significand, u.guard, u.round, u.sticky, mode, fmt);
}

UnroundedResult exact_unrounded(std::uint64_t bits, const FloatFormat& fmt) {
    Term t = term_of(Operand{bits}, fmt);
    if (t.kind == Term::NaN || t.kind == Term::Inf) return special_result(bits, false);
    return exact_term(t, fmt);
}

Operand apply_forward_correction(const UnroundedResult& u, RoundingMode mode, const FloatFormat& fmt) {
    if (u.special) return Operand{*u.special};
    const int p = fmt.precision();
    if (u.significand == 0 && !u.guard && !u.round && !u.sticky)
        return ForwardedOperand{u.negative, fmt.emin(), 0, false};

    std::uint64_t sig = u.significand;
    bool g = u.guard, r = u.round, s = u.sticky;
    int e = u.exponent;
    if (e < fmt.emin()) {
        int shift = fmt.emin() - e;
        std::uint64_t ext = (sig << 2) | (g ? 2u : 0u) | (r ? 1u : 0u);
        if (shift >= p + 2) {
            s = s || ext != 0;
            ext = 0;
        } else {
            s = s || (ext & ((1ULL << shift) - 1));
            ext >>= shift;
        }
        sig = ext >> 2;
        g = ext & 2;
        r = ext & 1;
        e = fmt.emin();
    }
    bool inc = round_increment(mode, u.negative, sig & 1, g, r || s);
    auto packed = [&] { return Operand{round_unrounded(u, mode, fmt).bits}; };
    if (e > fmt.emax()) return packed();
    if (inc && std::has_single_bit(sig + 1)) {
        // The increment would change the significand's width: resolve it here.
        if ((sig + 1) >> p) {
            sig = 1ULL << (p - 1);
            e += 1;
            if (e > fmt.emax()) return packed();
        } else {
            sig += 1;
        }
        inc = false;
    }
    return ForwardedOperand{u.negative, e, sig, inc};
}

std::uint64_t operand_bits(const Operand& op, const FloatFormat& fmt) {
    if (const auto* bits = std::get_if<std::uint64_t>(&op)) return *bits;
    const auto& f = std::get<ForwardedOperand>(op);
    const int p = fmt.precision();
    std::uint64_t m = f.significand + (f.increment ? 1 : 0);
    if (m >> p) throw ContractError("operand_bits: significand overflows precision");
    if (m == 0) return make_zero(f.negative, fmt);
    std::uint64_t field = (m >> (p - 1)) ? static_cast<std::uint64_t>(f.exponent + fmt.bias()) : 0;
    return make_zero(f.negative, fmt) | (field << fmt.frac_bits) | (m & fmt.frac_mask());
}

FmaOutput fma_execute(const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                      RoundingMode mode) {
    if (cfg.architecture != Architecture::FMA) throw ConfigError("fma_execute on a CMA configuration");
    FmaOutput out;
    out.unrounded = fused_unit(term_of(a, cfg.fmt), term_of(b, cfg.fmt), term_of(c, cfg.fmt), true, cfg, mode);
    RoundResult r = round_unrounded(out.unrounded, mode, cfg.fmt);
    out.bits = r.bits;
    out.flags = r.flags;
    return out;
}

CmaOutput cma_execute(const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                      RoundingMode mode) {
    if (cfg.architecture != Architecture::CMA) throw ConfigError("cma_execute on an FMA configuration");
    CmaOutput out;
    out.unrounded_product = multiplier_unit(term_of(a, cfg.fmt), term_of(b, cfg.fmt), cfg);
    RoundResult pr = round_unrounded(out.unrounded_product, mode, cfg.fmt);
    // The adder consumes the product through the same correction path used by the bypass.
    Operand x = apply_forward_correction(out.unrounded_product, mode, cfg.fmt);
    out.unrounded_sum = adder_unit(term_of(x, cfg.fmt), term_of(c, cfg.fmt), cfg.fmt, mode);
    RoundResult sr = round_unrounded(out.unrounded_sum, mode, cfg.fmt);
    out.bits = sr.bits;
    out.flags = sr.flags;
    out.flags |= pr.flags;
    return out;
}

FmaOutput execute(FmacOp op, const Operand& a, const Operand& b, const Operand& c, const FmacConfig& cfg,
                  RoundingMode mode) {
    FmaOutput out;
    const FloatFormat& fmt = cfg.fmt;
    if (cfg.architecture == Architecture::FMA) {
        switch (op) {
            case FmacOp::MulAdd: return fma_execute(a, b, c, cfg, mode);
            case FmacOp::Add: return fma_execute(a, Operand{make_one(fmt)}, c, cfg, mode);
            case FmacOp::Mul:
                out.unrounded = fused_unit(term_of(a, fmt), term_of(b, fmt), Term{}, false, cfg, mode);
                break;
        }
    } else {
        switch (op) {
            case FmacOp::MulAdd: {
                CmaOutput r = cma_execute(a, b, c, cfg, mode);
                out.bits = r.bits;
                out.flags = r.flags;
                out.unrounded = r.unrounded_sum;
                return out;
            }
            case FmacOp::Add: out.unrounded = adder_unit(term_of(a, fmt), term_of(c, fmt), fmt, mode); break;
            case FmacOp::Mul: out.unrounded = multiplier_unit(term_of(a, fmt), term_of(b, fmt), cfg); break;
        }
    }
    RoundResult r = round_unrounded(out.unrounded, mode, fmt);
    out.bits = r.bits;
    out.flags = r.flags;
    return out;
}

}  // namespace fpmax

#include "fpmax/testgen.hpp"

#include "fpmax/oracle.hpp"

namespace fpmax::testgen {

namespace {

std::uint64_t field(const FloatFormat& fmt, bool neg, std::uint64_t e, std::uint64_t frac) {
    return (neg ? fmt.sign_bit() : 0) | (e << fmt.frac_bits) | (frac & fmt.frac_mask());
}

}  // namespace

std::uint64_t random_operand(Rng& rng, const FloatFormat& fmt) {
    const std::uint64_t emax_field = fmt.exp_field_max();
    bool neg = rng() & 1;
    std::uint64_t frac = rng() & fmt.frac_mask();
    unsigned pick = rng() % 100;
    if (pick < 10) {
        switch (pick % 5) {
            case 0: return field(fmt, neg, 0, 0);
            case 1: return field(fmt, neg, emax_field, 0);
            case 2: return field(fmt, neg, emax_field, fmt.quiet_bit() | frac);
            case 3: {
                std::uint64_t payload = frac & ~fmt.quiet_bit();
                if (payload == 0) payload = 1;
                return field(fmt, neg, emax_field, payload);
            }
            default: return field(fmt, neg, 0, 0);
        }
    }
    if (pick < 20) return field(fmt, neg, 0, frac ? frac : 1);
    if (pick < 25) {
        switch (rng() % 5) {
            case 0: return make_max_finite(neg, fmt);
            case 1: return field(fmt, neg, 1, 0);
            case 2: return field(fmt, neg, 0, fmt.frac_mask());
            case 3: return make_one(fmt) | (neg ? fmt.sign_bit() : 0);
            default: return field(fmt, neg, 1, rng());
        }
    }
    if (pick < 60) return field(fmt, neg, 1 + rng() % (emax_field - 1), frac);
    // around 1, so products and sums stay in range and cancel often
    int spread = std::min(fmt.precision() + 2, fmt.bias() - 1);
    int e = fmt.bias() + static_cast<int>(rng() % (2 * spread + 1)) - spread;
    return field(fmt, neg, static_cast<std::uint64_t>(e), frac);
}

bool is_special_or_subnormal(std::uint64_t bits, const FloatFormat& fmt) {
    std::uint64_t e = (bits >> fmt.frac_bits) & static_cast<std::uint64_t>(fmt.exp_field_max());
    return e == 0 || e == static_cast<std::uint64_t>(fmt.exp_field_max());
}

Triple random_triple(Rng& rng, const FloatFormat& fmt) {
    Triple t{random_operand(rng, fmt), random_operand(rng, fmt), random_operand(rng, fmt)};
    if (rng() % 4 == 0) {
        std::uint64_t p = oracle_mul(t.a, t.b, fmt).bits;
        std::uint64_t e = (p >> fmt.frac_bits) & static_cast<std::uint64_t>(fmt.exp_field_max());
        if (e != static_cast<std::uint64_t>(fmt.exp_field_max())) {
            std::uint64_t c = (p ^ fmt.sign_bit());
            std::uint64_t mag = c & ~fmt.sign_bit();
            int delta = static_cast<int>(rng() % 7) - 3;
            if (delta < 0 && mag < static_cast<std::uint64_t>(-delta)) delta = 0;
            mag += delta;
            if (((mag >> fmt.frac_bits) & static_cast<std::uint64_t>(fmt.exp_field_max())) ==
                static_cast<std::uint64_t>(fmt.exp_field_max()))
                mag -= 4;
            t.c = (c & fmt.sign_bit()) | mag;
        }
    }
    return t;
}

std::vector<BypassEdge> candidate_edges(const FmacConfig& cfg) {
    std::vector<BypassEdge> out;
    for (Port p : {Port::A, Port::B, Port::C})
        for (int ps : {cfg.unrounded_ready_stage(), cfg.rounded_ready_stage()})
            for (int cs = 1; cs <= cfg.operand_need_stage(p); ++cs) out.push_back({ps, p, cs});
    return out;
}

pipe::Trace random_trace(Rng& rng, const FloatFormat& fmt, int length) {
    using pipe::Instruction;
    using pipe::Opcode;
    pipe::Trace t;
    for (auto& w : t.ram) w = (rng() & 1) ? random_operand(rng, fmt) : field(fmt, rng() & 1, fmt.bias() - 1 + rng() % 3, rng());
    // A small working set of indices keeps RAW chains frequent.
    const int hot = 4 + static_cast<int>(rng() % 12);
    auto idx = [&] { return static_cast<std::uint8_t>(rng() % 4 == 0 ? rng() % pipe::kRamWords : rng() % hot); };
    for (int i = 0; i < length; ++i) {
        Instruction in;
        unsigned r = rng() % 20;
        in.op = r < 2 ? Opcode::Nop : r < 6 ? Opcode::Add : r < 10 ? Opcode::Mul : Opcode::Muladd;
        in.a_idx = idx();
        in.b_idx = idx();
        in.c_idx = idx();
        bool producer = false;
        for (int j = i - 1; j >= 0; --j)
            if (t.program[j].op != Opcode::Nop) {
                producer = true;
                break;
            }
        if (in.op != Opcode::Nop && producer) {
            in.fwd_a = rng() % 5 == 0;
            in.fwd_b = in.op != Opcode::Add && rng() % 6 == 0;
            if (in.op != Opcode::Mul && rng() % 3 == 0) {
                int d = rng() % 2 ? 0 : 1 + static_cast<int>(rng() % 7);
                if (d > 0 && (i - d < 0 || t.program[i - d].op == Opcode::Nop)) d = 0;
                in.fwd_c = Instruction::make_fwd_c(true, d);
            }
        }
        t.program.push_back(in);
    }
    return t;
}

}  // namespace fpmax::testgen

#include "fpmax/pipeline.hpp"

#include <algorithm>
#include <random>

#include "fpmax/errors.hpp"
#include "fpmax/oracle.hpp"

namespace fpmax::pipe {

namespace {

constexpr int kNone = -1;

bool reads(Opcode op, Port p) {
    switch (op) {
        case Opcode::Add: return p != Port::B;
        case Opcode::Mul: return p != Port::C;
        case Opcode::Muladd: return true;
        case Opcode::Nop: return false;
    }
    return false;
}

bool flagged(const Instruction& in, Port p) {
    return p == Port::A ? in.fwd_a : p == Port::B ? in.fwd_b : in.forwards_c();
}

int ram_index(const Instruction& in, Port p) { return p == Port::A ? in.a_idx : p == Port::B ? in.b_idx : in.c_idx; }

// Producer designated by a forwarding flag.
int flagged_producer(const std::vector<Instruction>& prog, int i, Port p) {
    int dist = p == Port::C ? prog[i].c_distance() : 0;
    if (dist == 0) {
        for (int j = i - 1; j >= 0; --j)
            if (prog[j].op != Opcode::Nop) return j;
        throw SimulationError(std::string("fwd_") + to_string(p) + " set but no earlier producer", i);
    }
    int j = i - dist;
    if (j < 0 || prog[j].op == Opcode::Nop)
        throw SimulationError("fwd_c distance " + std::to_string(dist) + " does not name a producer", i);
    return j;
}

FmacOp fmac_op(Opcode op) {
    switch (op) {
        case Opcode::Add: return FmacOp::Add;
        case Opcode::Mul: return FmacOp::Mul;
        default: return FmacOp::MulAdd;
    }
}

void check_trace(const Trace& t) {
    if (t.ram.size() != kRamWords) throw ContractError("trace RAM must hold 64 words");
    for (std::size_t i = 0; i < t.program.size(); ++i) {
        const auto& in = t.program[i];
        if (in.a_idx >= kRamWords || in.b_idx >= kRamWords || in.c_idx >= kRamWords || in.fwd_c > 15)
            throw SimulationError("field out of range", static_cast<int>(i));
    }
}

constexpr Port kPorts[] = {Port::A, Port::B, Port::C};

}  // namespace

const char* to_string(Opcode op) {
    switch (op) {
        case Opcode::Add: return "add";
        case Opcode::Mul: return "mul";
        case Opcode::Muladd: return "muladd";
        case Opcode::Nop: return "nop";
    }
    return "?";
}

std::uint32_t encode_instruction(const Instruction& i) {
    auto op = static_cast<unsigned>(i.op);
    if (op > 3) throw EncodingError("opcode out of range");
    if (i.fwd_c > 15) throw EncodingError("fwd_c does not fit in 4 bits");
    if (i.a_idx >= kRamWords || i.b_idx >= kRamWords || i.c_idx >= kRamWords)
        throw EncodingError("RAM index does not fit in 6 bits");
    return (op << 24) | (static_cast<unsigned>(i.fwd_a) << 23) | (static_cast<unsigned>(i.fwd_b) << 22) |
           (static_cast<unsigned>(i.fwd_c) << 18) | (static_cast<unsigned>(i.a_idx) << 12) |
           (static_cast<unsigned>(i.b_idx) << 6) | i.c_idx;
}

Instruction decode_instruction(std::uint32_t w) {
    if (w >> 26) throw EncodingError("instruction word wider than 26 bits");
    Instruction i;
    i.op = static_cast<Opcode>((w >> 24) & 3);
    i.fwd_a = (w >> 23) & 1;
    i.fwd_b = (w >> 22) & 1;
    i.fwd_c = (w >> 18) & 15;
    i.a_idx = (w >> 12) & 63;
    i.b_idx = (w >> 6) & 63;
    i.c_idx = w & 63;
    return i;
}

PipelineConfig PipelineConfig::from(const FmacConfig& cfg) {
    cfg.validate();
    PipelineConfig p;
    p.stages = cfg.pipeline_stages;
    p.need_a = cfg.operand_need_stage(Port::A);
    p.need_b = cfg.operand_need_stage(Port::B);
    p.need_c = cfg.operand_need_stage(Port::C);
    p.rounded_ready = cfg.rounded_ready_stage();
    p.unrounded_ready = cfg.unrounded_ready_stage();
    p.bypass = cfg.bypass;
    return p;
}

std::int64_t SimResult::total_stalls() const {
    std::int64_t s = 0;
    for (const auto& t : timing) s += t.stalls;
    return s;
}

double SimResult::avg_latency_penalty() const {
    if (dependent_ops == 0) return 0.0;
    std::int64_t s = 0;
    for (const auto& t : timing)
        if (t.dependent) s += t.stalls;
    return static_cast<double>(s) / dependent_ops;
}

SimResult simulate(const Trace& trace, const FmacConfig& cfg, RoundingMode mode, SimOptions opt) {
    check_trace(trace);
    const PipelineConfig pc = PipelineConfig::from(cfg);
    const auto& prog = trace.program;
    const int n = static_cast<int>(prog.size());
    const std::int64_t S = pc.stages;

    SimResult res;
    res.timing.resize(n);
    res.ram = trace.ram;
    res.results.assign(n, 0);
    res.flags.assign(n, {});
    std::vector<FmaOutput> outs(opt.compute_values ? n : 0);
    int last_writer[kRamWords];
    std::fill(std::begin(last_writer), std::end(last_writer), kNone);

    std::int64_t prev_issue = -1, last_complete = -1;
    for (int i = 0; i < n; ++i) {
        const Instruction& in = prog[i];
        InstrTiming& t = res.timing[i];
        std::int64_t earliest = prev_issue + 1;
        Operand ops[3] = {Operand{std::uint64_t{0}}, Operand{std::uint64_t{0}}, Operand{std::uint64_t{0}}};

        if (in.op != Opcode::Nop) {
            for (Port p : kPorts) {
                if (!reads(in.op, p)) continue;
                const int k = static_cast<int>(p);
                const std::int64_t need = pc.need(p);
                if (flagged(in, p)) {
                    int j = flagged_producer(prog, i, p);
                    std::int64_t tp = res.timing[j].issue;
                    std::int64_t ready = tp + S - need + 1;
                    int via = 0;  // 0 writeback, else producer stage of the edge
                    for (const auto& e : pc.bypass) {
                        if (e.port != p) continue;
                        std::int64_t r = tp + e.producer_stage - e.consumer_stage + 1;
                        if (r < ready || (r == ready && via == 0)) {
                            ready = r;
                            via = e.producer_stage;
                        }
                    }
                    earliest = std::max(earliest, ready);
                    t.dependent = true;
                    if (opt.compute_values) {
                        if (via == pc.unrounded_ready)
                            ops[k] = apply_forward_correction(outs[j].unrounded, mode, cfg.fmt);
                        else
                            ops[k] = Operand{res.results[j]};
                    }
                } else {
                    int idx = ram_index(in, p);
                    int w = last_writer[idx];
                    if (w != kNone) {
                        earliest = std::max(earliest, res.timing[w].issue + S - need + 1);
                        t.dependent = true;
                    }
                    ops[k] = Operand{res.ram[idx]};
                }
            }
        }

        t.issue = earliest;
        t.stalls = earliest - (prev_issue + 1);
        t.complete = earliest + S - 1;
        prev_issue = earliest;
        last_complete = std::max(last_complete, t.complete);
        if (in.op == Opcode::Nop) continue;
        if (t.dependent) ++res.dependent_ops;
        last_writer[in.c_idx] = i;
        if (opt.compute_values) {
            outs[i] = execute(fmac_op(in.op), ops[0], ops[1], ops[2], cfg, mode);
            res.results[i] = outs[i].bits;
            res.flags[i] = outs[i].flags;
            res.ram[in.c_idx] = outs[i].bits;
        }
    }
    res.total_cycles = last_complete + 1;
    return res;
}

double avg_latency_penalty(const Trace& trace, const FmacConfig& cfg) {
    return simulate(trace, cfg, RoundingMode::NearestEven, {false}).avg_latency_penalty();
}

SequentialResult oracle_execute(const Trace& trace, const FloatFormat& fmt, Architecture arch, RoundingMode mode) {
    check_trace(trace);
    const auto& prog = trace.program;
    const int n = static_cast<int>(prog.size());
    SequentialResult r;
    r.ram = trace.ram;
    r.results.assign(n, 0);
    r.flags.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const Instruction& in = prog[i];
        if (in.op == Opcode::Nop) continue;
        std::uint64_t v[3] = {0, 0, 0};
        for (Port p : kPorts) {
            if (!reads(in.op, p)) continue;
            v[static_cast<int>(p)] = flagged(in, p) ? r.results[flagged_producer(prog, i, p)] : r.ram[ram_index(in, p)];
        }
        RoundResult out;
        switch (in.op) {
            case Opcode::Add: out = oracle_add(v[0], v[2], fmt, mode); break;
            case Opcode::Mul: out = oracle_mul(v[0], v[1], fmt, mode); break;
            default:
                out = arch == Architecture::FMA ? oracle_fma(v[0], v[1], v[2], fmt, mode)
                                                : oracle_cascade(v[0], v[1], v[2], fmt, mode);
        }
        r.results[i] = out.bits;
        r.flags[i] = out.flags;
        r.ram[in.c_idx] = out.bits;
    }
    return r;
}

Trace synthetic_trace(int length, std::uint64_t seed, const FloatFormat& fmt, TraceMix mix) {
    if (length < 0) throw ContractError("synthetic_trace: negative length");
    if (mix.accumulate < 0 || mix.multiply < 0 || mix.accumulate + mix.multiply > 1)
        throw ConfigError("synthetic_trace: mix fractions must be non-negative and sum to at most 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Trace t;
    // Words 32..63 hold inputs in [0.5, 2); results land in 0..31 and are
    // only ever consumed through the bypass flags.
    for (int i = 32; i < kRamWords; ++i) {
        std::uint64_t e = static_cast<std::uint64_t>(fmt.bias() - static_cast<int>(rng() & 1));
        std::uint64_t sign = (rng() & 1) ? fmt.sign_bit() : 0;
        t.ram[i] = sign | (e << fmt.frac_bits) | (rng() & fmt.frac_mask());
    }
    auto src = [&] { return static_cast<std::uint8_t>(32 + rng() % 32); };
    auto dst = [&] { return static_cast<std::uint8_t>(rng() % 32); };
    for (int i = 0; i < length; ++i) {
        Instruction in;
        double x = u01(rng);
        in.a_idx = src();
        in.b_idx = src();
        in.c_idx = dst();
        if (i > 0 && x < mix.accumulate) {
            in.op = Opcode::Muladd;
            in.fwd_c = Instruction::make_fwd_c(true, 0);
        } else if (i > 0 && x < mix.accumulate + mix.multiply) {
            in.op = Opcode::Mul;
            in.fwd_a = true;
        } else {
            in.op = Opcode::Mul;
        }
        t.program.push_back(in);
    }
    return t;
}

}  // namespace fpmax::pipe

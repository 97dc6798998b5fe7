#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fpmax/assembly.hpp"
#include "fpmax/errors.hpp"
#include "fpmax/harness.hpp"
#include "fpmax/oracle.hpp"
#include "fpmax/pipeline.hpp"
#include "fpmax/testgen.hpp"

using namespace fpmax;
using namespace fpmax::pipe;

namespace {
namespace fs = std::filesystem;

Instruction ins(Opcode op, int a, int b, int c, bool fa = false, bool fb = false, std::uint8_t fc = 0) {
    Instruction i;
    i.op = op;
    i.a_idx = static_cast<std::uint8_t>(a);
    i.b_idx = static_cast<std::uint8_t>(b);
    i.c_idx = static_cast<std::uint8_t>(c);
    i.fwd_a = fa;
    i.fwd_b = fb;
    i.fwd_c = fc;
    return i;
}

std::uint64_t sp(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

// Muladd chain accumulating into ram[0]; the addend comes from the bypass when flagged.
Trace chain(int n, bool flagged, const FloatFormat& fmt) {
    Trace t;
    for (int i = 0; i < n; ++i)
        t.program.push_back(ins(Opcode::Muladd, 1 + i % 8, 9, 0, false, false, Instruction::make_fwd_c(flagged && i > 0, 0)));
    for (int k = 1; k <= 9; ++k) t.ram[k] = make_one(fmt) + k;
    return t;
}

FmacConfig fma5(bool bypass) {
    auto c = FmacConfig::preset("dp-fma");
    c.pipeline_stages = 5;
    c.bypass = bypass ? FmacConfig::default_bypass(c) : std::vector<BypassEdge>{};
    return c;
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / "fpmax_pipeline_test";
    fs::create_directories(d);
    return d / name;
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }
}  // namespace

TEST_CASE("codec examples") {
    CHECK(encode_instruction(ins(Opcode::Muladd, 1, 2, 3)) == 0x2001083u);
    auto z = decode_instruction(0);
    CHECK(z.op == Opcode::Add);
    CHECK_FALSE(z.fwd_a);
    CHECK_FALSE(z.fwd_b);
    CHECK(z.fwd_c == 0);
    CHECK(z.a_idx == 0);
    CHECK(z.c_idx == 0);
    auto w = ins(Opcode::Nop, 63, 0, 63, true, false, 0xF);
    CHECK(encode_instruction(w) == ((3u << 24) | (1u << 23) | (0xFu << 18) | (63u << 12) | 63u));
}

TEST_CASE("codec round trip and range errors") {
    std::mt19937 rng(3);
    for (int i = 0; i < 100000; ++i) {
        std::uint32_t w = rng() & ((1u << 26) - 1);
        auto d = decode_instruction(w);
        REQUIRE(encode_instruction(d) == w);
        REQUIRE(decode_instruction(encode_instruction(d)) == d);
    }
    CHECK_THROWS_AS(decode_instruction(1u << 26), EncodingError);
    CHECK_THROWS_AS(encode_instruction(ins(Opcode::Add, 64, 0, 0)), EncodingError);
    CHECK_THROWS_AS(encode_instruction(ins(Opcode::Add, 0, 0, 0, false, false, 16)), EncodingError);
}

TEST_CASE("assembly parsing") {
    std::istringstream in("# comment\nMULADD 1 2 3\n\nmul 4 5 6 fwd=a fwd=b # tail\nadd 7 8 9 fwd=c:3\nnop\n");
    auto p = parse_assembly(in);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == ins(Opcode::Muladd, 1, 2, 3));
    CHECK(p[1] == ins(Opcode::Mul, 4, 5, 6, true, true));
    CHECK(p[2].forwards_c());
    CHECK(p[2].c_distance() == 3);
    CHECK(p[3].op == Opcode::Nop);
    CHECK(format_instruction(p[2]) == "add 7 8 9 fwd=c:3");
    std::ostringstream out;
    write_assembly(out, p);
    std::istringstream again(out.str());
    CHECK(parse_assembly(again) == p);

    auto line_of = [](const std::string& text) {
        std::istringstream s(text);
        try {
            parse_assembly(s);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("add 1 2 3\nfoo 1 2 3\n") == 2);
    CHECK(line_of("add 1 2 64\n") == 1);
    CHECK(line_of("\n\nmul 1 2\n") == 3);
    CHECK(line_of("add 1 2 3 fwd=d\n") == 1);
    CHECK(line_of("add 1 2 3 fwd=c:8\n") == 1);
}

TEST_CASE("hex programs and RAM images") {
    std::vector<Instruction> p = {ins(Opcode::Muladd, 1, 2, 3), ins(Opcode::Add, 0, 0, 5, false, false, 1)};
    std::ostringstream out;
    write_program_hex(out, p);
    CHECK(out.str().substr(0, 9) == "02001083\n");
    std::istringstream in(out.str());
    CHECK(read_program_hex(in) == p);
    std::istringstream wide("04000000\n");
    CHECK_THROWS_AS(read_program_hex(wide), ParseError);

    std::istringstream ram("3f800000\n\n40000000\n");
    auto r = read_ram(ram, FloatFormat::SP());
    REQUIRE(r.size() == 64);
    CHECK(r[0] == 0x3f800000);
    CHECK(r[1] == 0x40000000);
    CHECK(r[2] == 0);
    std::istringstream bad("3f800000\nzz\n");
    try {
        read_ram(bad, FloatFormat::SP());
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream toowide("100000000\n");
    CHECK_THROWS_AS(read_ram(toowide, FloatFormat::SP()), ParseError);
}

TEST_CASE("empty and independent streams") {
    auto cfg = FmacConfig::preset("sp-cma");
    Trace t;
    t.ram[5] = 0x40400000;
    auto r = simulate(t, cfg);
    CHECK(r.total_cycles == 0);
    CHECK(r.ram == t.ram);
    for (const char* p : {"dp-cma", "dp-fma", "sp-cma", "sp-fma"}) {
        auto c = FmacConfig::preset(p);
        Trace s;
        const int n = 32;
        for (int i = 0; i < n; ++i) s.program.push_back(ins(Opcode::Muladd, 32 + i % 8, 40, i % 32));
        auto res = simulate(s, c);
        CHECK(res.total_cycles == n + c.pipeline_stages - 1);
        CHECK(res.avg_latency_penalty() == 0.0);
        CHECK(res.dependent_ops == 0);
    }
}

TEST_CASE("accumulation chain on dp-cma: hand schedule and bypass benefit") {
    auto with = FmacConfig::preset("dp-cma");
    auto without = with;
    without.bypass.clear();
    const auto fmt = with.fmt;
    // S = 5, addend needed in stage 3, unrounded result after stage 4:
    // bypass spacing 4 - 3 + 1 = 2, writeback spacing 5 - 3 + 1 = 3.
    auto t = chain(10, true, fmt);
    auto a = simulate(t, with), b = simulate(t, without);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.timing[i].issue == 2 * i);
        CHECK(a.timing[i].complete == 2 * i + 4);
        CHECK(b.timing[i].issue == 3 * i);
        CHECK(a.timing[i].stalls == (i ? 1 : 0));
    }
    auto t100 = chain(100, true, fmt);
    auto x = simulate(t100, with), y = simulate(t100, without);
    CHECK(x.ram == y.ram);
    CHECK(x.total_cycles == 2 * 99 + 5);
    CHECK(y.total_cycles == 3 * 99 + 5);
    CHECK(x.total_cycles < y.total_cycles);
    auto seq = oracle_execute(t100, fmt, Architecture::CMA);
    CHECK(seq.ram == x.ram);
}

TEST_CASE("latency penalty") {
    auto nob = fma5(false);
    auto t = chain(50, false, nob.fmt);
    auto r = simulate(t, nob);
    CHECK(r.avg_latency_penalty() == 4.0);
    CHECK(avg_latency_penalty(t, nob) == 4.0);
    // single chain: stalls = total - drain - N
    CHECK(r.total_stalls() == r.total_cycles - (nob.pipeline_stages - 1) - 50);
    auto cma = FmacConfig::preset("dp-cma");
    CHECK(avg_latency_penalty(chain(50, true, cma.fmt), cma) < 4.0);
    auto fwd = fma5(true);
    CHECK(avg_latency_penalty(chain(50, true, fwd.fmt), fwd) == 3.0);
}

TEST_CASE("forwarding flag errors") {
    auto cfg = FmacConfig::preset("sp-fma");
    Trace t;
    t.program.push_back(ins(Opcode::Add, 1, 2, 3, true));
    try {
        simulate(t, cfg);
        FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
        CHECK(e.index() == 0);
    }
    Trace u;
    u.program = {ins(Opcode::Mul, 1, 2, 3), ins(Opcode::Nop, 0, 0, 0),
                 ins(Opcode::Muladd, 1, 2, 3, false, false, Instruction::make_fwd_c(true, 1))};
    try {
        simulate(u, cfg);
        FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
        CHECK(e.index() == 2);
    }
    u.program[2].fwd_c = Instruction::make_fwd_c(true, 2);
    CHECK_NOTHROW(simulate(u, cfg));
}

TEST_CASE("random traces: in-order issue, oracle equality, edge monotonicity") {
    testgen::Rng rng(5);
    for (const char* p : {"dp-cma", "dp-fma", "sp-cma", "sp-fma"}) {
        auto cfg = FmacConfig::preset(p);
        auto edges = testgen::candidate_edges(cfg);
        for (int k = 0; k < 300; ++k) {
            auto t = testgen::random_trace(rng, cfg.fmt, 1 + static_cast<int>(rng() % 64));
            auto c = cfg;
            c.bypass.clear();
            for (std::size_t e = 0; e < edges.size(); ++e)
                if (rng() & 1) c.bypass.push_back(edges[e]);
            auto r = simulate(t, c);
            for (std::size_t i = 1; i < r.timing.size(); ++i) REQUIRE(r.timing[i].issue > r.timing[i - 1].issue);
            auto seq = oracle_execute(t, cfg.fmt, cfg.architecture);
            REQUIRE(seq.ram == r.ram);
            REQUIRE(seq.results == r.results);
            auto more = c;
            more.bypass = edges;
            REQUIRE(simulate(t, more, RoundingMode::NearestEven, {false}).total_cycles <= r.total_cycles);
        }
    }
}

TEST_CASE("synthetic trace mix") {
    auto fmt = FloatFormat::DP();
    auto t = synthetic_trace(10000, 1, fmt);
    CHECK(t.program.size() == 10000);
    CHECK_FALSE(t.program[0].forwards_c());
    CHECK_FALSE(t.program[0].fwd_a);
    int acc = 0, mul = 0;
    for (const auto& i : t.program) {
        if (i.op == Opcode::Muladd && i.forwards_c()) ++acc;
        if (i.op == Opcode::Mul && i.fwd_a) ++mul;
    }
    CHECK(acc == doctest::Approx(7000).epsilon(0.05));
    CHECK(mul == doctest::Approx(2000).epsilon(0.1));
    auto again = synthetic_trace(10000, 1, fmt);
    CHECK(again.program == t.program);
    CHECK(again.ram == t.ram);
    CHECK_NOTHROW(simulate(t, FmacConfig::preset("dp-cma")));
}

TEST_CASE("harness files") {
    auto cfg = FmacConfig::preset("sp-fma");
    auto ram = scratch("in.ram"), nops = scratch("nops.asm"), dot = scratch("dot.asm"), dotf = scratch("dotf.asm"),
         expect = scratch("expect.ram");
    std::vector<std::uint64_t> image(64, 0);
    for (int i = 0; i < 16; ++i) {
        image[1 + i] = sp(0.1f * (i + 1));
        image[17 + i] = sp(1.0f / (i + 3));
    }
    {
        std::ofstream o(ram);
        write_ram(o, image, cfg.fmt);
    }
    put(nops, "nop\nnop\nnop 1 2 3\n");
    auto n = run_harness(nops.string(), ram.string(), cfg);
    CHECK(n.sim.ram == image);

    std::string plain, flagged;
    for (int i = 0; i < 16; ++i) {
        plain += "muladd " + std::to_string(1 + i) + " " + std::to_string(17 + i) + " 0\n";
        flagged += "muladd " + std::to_string(1 + i) + " " + std::to_string(17 + i) + " 0" + (i ? " fwd=c" : "") + "\n";
    }
    put(dot, plain);
    put(dotf, flagged);
    // oracle evaluation of the same dot product
    std::uint64_t acc = 0;
    for (int i = 0; i < 16; ++i) acc = oracle_fma(image[1 + i], image[17 + i], acc, cfg.fmt).bits;
    auto want = image;
    want[0] = acc;
    {
        std::ofstream o(expect);
        write_ram(o, want, cfg.fmt);
    }
    auto a = run_harness(dot.string(), ram.string(), cfg, RoundingMode::NearestEven, expect.string());
    CHECK(a.compared);
    CHECK(a.mismatches.empty());
    CHECK(a.sim.ram[0] == acc);
    auto b = run_harness(dotf.string(), ram.string(), cfg, RoundingMode::NearestEven, expect.string());
    CHECK(b.mismatches.empty());
    CHECK(b.sim.ram == a.sim.ram);
    CHECK(b.sim.total_cycles < a.sim.total_cycles);

    auto m = run_harness(dot.string(), ram.string(), cfg, RoundingMode::NearestEven, ram.string());
    REQUIRE(m.mismatches.size() == 1);
    CHECK(m.mismatches[0].index == 0);
    CHECK(m.mismatches[0].got == acc);
    CHECK(m.mismatches[0].expected == 0);
    auto js = stats_json(a.sim);
    CHECK(js.find("\"total_cycles\"") != std::string::npos);
    CHECK_THROWS_AS(run_harness(scratch("missing.asm").string(), ram.string(), cfg), ParseError);
}

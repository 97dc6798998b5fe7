#include <ios>
#include <random>

#include "doctest.h"
#include "fpmax/errors.hpp"
#include "fpmax/fmac.hpp"
#include "fpmax/oracle.hpp"
#include "fpmax/testgen.hpp"
#include "support/host_ref.hpp"
#include "support/toy_ref.hpp"

using namespace fpmax;

namespace {
const FloatFormat SP = FloatFormat::SP(), DP = FloatFormat::DP(), TOY = FloatFormat::TOY();
constexpr RoundingMode kModes[] = {RoundingMode::NearestEven, RoundingMode::TowardZero, RoundingMode::TowardPositive,
                                   RoundingMode::TowardNegative};

FmacConfig with_fmt(const char* preset, FloatFormat f) {
    FmacConfig c = FmacConfig::preset(preset);
    c.fmt = f;
    return c;
}

FmaOutput run(const FmacConfig& c, std::uint64_t a, std::uint64_t b, std::uint64_t x, RoundingMode m) {
    return execute(FmacOp::MulAdd, Operand{a}, Operand{b}, Operand{x}, c, m);
}
}  // namespace

TEST_CASE("presets follow the design table") {
    auto dc = FmacConfig::preset("dp-cma");
    CHECK(dc.fmt == DP);
    CHECK(dc.architecture == Architecture::CMA);
    CHECK(dc.pipeline_stages == 5);
    CHECK(dc.mul_pipe_depth == 2);
    CHECK(dc.add_pipe_depth == 2);
    CHECK(dc.booth_radix_log2 == 3);
    CHECK(dc.tree_kind == mul::TreeKind::Wallace);
    auto df = FmacConfig::preset("dp-fma");
    CHECK(df.pipeline_stages == 6);
    CHECK_FALSE(df.add_pipe_depth.has_value());
    CHECK(df.tree_kind == mul::TreeKind::Array);
    auto sc = FmacConfig::preset("sp-cma");
    CHECK(sc.pipeline_stages == 6);
    CHECK(sc.mul_pipe_depth == 3);
    CHECK(sc.booth_radix_log2 == 2);
    auto sf = FmacConfig::preset("SP-FMA");
    CHECK(sf.pipeline_stages == 4);
    CHECK(sf.tree_kind == mul::TreeKind::ZM);
    CHECK_THROWS_AS(FmacConfig::preset("hp-fma"), ConfigError);
    for (const auto& n : FmacConfig::preset_names()) CHECK_NOTHROW(FmacConfig::preset(n).validate());
}

TEST_CASE("dp-cma bypass reaches the multiplier at stage 1 and the adder at stage 3") {
    auto c = FmacConfig::preset("dp-cma");
    CHECK(c.unrounded_ready_stage() == 4);
    CHECK(c.operand_need_stage(Port::A) == 1);
    CHECK(c.operand_need_stage(Port::C) == 3);
    bool to_mul = false, to_add = false;
    for (const auto& e : c.bypass) {
        if (e.producer_stage == 4 && e.port == Port::A && e.consumer_stage == 1) to_mul = true;
        if (e.producer_stage == 4 && e.port == Port::C && e.consumer_stage == 3) to_add = true;
    }
    CHECK(to_mul);
    CHECK(to_add);
}

TEST_CASE("configuration validation") {
    auto c = FmacConfig::preset("sp-fma");
    c.add_pipe_depth = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto d = FmacConfig::preset("dp-cma");
    d.add_pipe_depth.reset();
    CHECK_THROWS_AS(d.validate(), ConfigError);
    auto e = FmacConfig::preset("dp-cma");
    e.mul_pipe_depth = 3;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    auto f = FmacConfig::preset("sp-fma");
    f.booth_radix_log2 = 4;
    CHECK_THROWS_AS(f.validate(), ConfigError);
    auto g = FmacConfig::preset("sp-fma");
    g.bypass.push_back({2, Port::A, 1});
    CHECK_THROWS_AS(g.validate(), ConfigError);
    auto h = FmacConfig::preset("sp-fma");
    CHECK_THROWS_AS(cma_execute(std::uint64_t(0), std::uint64_t(0), std::uint64_t(0), h), ConfigError);
}

TEST_CASE("small SP examples") {
    auto f = FmacConfig::preset("sp-fma");
    // 1 + 2^-149 is not representable: rounds back to 1
    auto r = fma_execute(std::uint64_t(0x3F800000), std::uint64_t(0x3F800000), std::uint64_t(1), f);
    CHECK(r.bits == 0x3F800000);
    CHECK(r.flags.inexact);
    auto s = fma_execute(std::uint64_t(1), std::uint64_t(0x3F800000), std::uint64_t(0), f);
    CHECK(s.bits == 1);
    CHECK_FALSE(s.flags.inexact);
    CHECK_FALSE(s.flags.underflow);
    auto t = fma_execute(std::uint64_t(0x3F800000), std::uint64_t(0x3F800000), std::uint64_t(0x3F800000), f);
    CHECK(t.bits == 0x40000000);
}

TEST_CASE("TOY datapaths against the independent reference") {
    auto fma = with_fmt("sp-fma", TOY), cma = with_fmt("sp-cma", TOY);
    std::mt19937 rng(17);
    for (RoundingMode m : kModes)
        for (int i = 0; i < 250000; ++i) {
            std::uint32_t a = rng() & 255, b = rng() & 255, c = rng() & 255;
            auto rf = toyref::fma(a, b, c, toyref::Mode(int(m)));
            auto df = run(fma, a, b, c, m);
            REQUIRE(df.bits == rf.bits);
            REQUIRE(df.flags.to_bits() == rf.flags);
            auto rc = toyref::cascade(a, b, c, toyref::Mode(int(m)));
            auto dc = run(cma, a, b, c, m);
            REQUIRE(dc.bits == rc.bits);
            REQUIRE(dc.flags.to_bits() == rc.flags);
        }
}

TEST_CASE("TOY regression vectors where the cascade differs") {
    auto fma = with_fmt("sp-fma", TOY), cma = with_fmt("sp-cma", TOY);
    // min subnormal * 0.5 + min subnormal: the product alone ties to zero
    auto f = run(fma, 0x01, 0x30, 0x01, RoundingMode::NearestEven);
    auto c = run(cma, 0x01, 0x30, 0x01, RoundingMode::NearestEven);
    CHECK(f.bits == 0x02);
    CHECK(f.flags.to_bits() == 3);
    CHECK(c.bits == 0x01);
    CHECK(c.flags.to_bits() == 3);
    CHECK(f.bits == oracle_fma(0x01, 0x30, 0x01, TOY).bits);
    CHECK(c.bits == oracle_cascade(0x01, 0x30, 0x01, TOY).bits);
    // 0 * inf with a signaling addend: fused keeps the addend's payload
    auto fn = run(fma, 0x00, 0x78, 0x79, RoundingMode::NearestEven);
    auto cn = run(cma, 0x00, 0x78, 0x79, RoundingMode::NearestEven);
    CHECK(fn.bits == 0x7D);
    CHECK(cn.bits == 0x7C);
    CHECK(fn.flags.invalid);
    CHECK(cn.flags.invalid);
}

TEST_CASE("exact products make the cascade equal the fused result") {
    auto fma = FmacConfig::preset("dp-fma"), cma = FmacConfig::preset("dp-cma");
    std::mt19937_64 rng(23);
    for (int i = 0; i < 20000; ++i) {
        // 20-bit significands: the product fits in 53 bits
        std::uint64_t a = (std::uint64_t(1000 + rng() % 60) << 52) | ((rng() & 0xFFFFF) << 32);
        std::uint64_t b = (std::uint64_t(1000 + rng() % 60) << 52) | ((rng() & 0xFFFFF) << 32);
        std::uint64_t c = rng() & 0xBFFFFFFFFFFFFFFFULL;
        for (RoundingMode m : kModes) REQUIRE(run(fma, a, b, c, m).bits == run(cma, a, b, c, m).bits);
    }
}

TEST_CASE("SP and DP against the host FPU") {
    testgen::Rng rng(29);
    struct Case {
        const char* preset;
        hostref::Res (*ref)(std::uint64_t, std::uint64_t, std::uint64_t, int);
    };
    const Case cases[] = {{"sp-fma", hostref::fma_sp}, {"sp-cma", hostref::cma_sp}, {"dp-fma", hostref::fma_dp},
                          {"dp-cma", hostref::cma_dp}};
    for (const auto& k : cases) {
        auto cfg = FmacConfig::preset(k.preset);
        for (int i = 0; i < 100000; ++i) {
            auto t = testgen::random_triple(rng, cfg.fmt);
            RoundingMode m = kModes[i % 4];
            if (is_nan(t.a, cfg.fmt) || is_nan(t.b, cfg.fmt) || is_nan(t.c, cfg.fmt)) continue;
            auto want = k.ref(t.a, t.b, t.c, int(m));
            auto got = run(cfg, t.a, t.b, t.c, m);
            INFO(k.preset << " " << std::hex << t.a << " " << t.b << " " << t.c << " mode " << int(m));
            if (is_nan(want.bits, cfg.fmt)) {
                REQUIRE(is_nan(got.bits, cfg.fmt));
            } else {
                REQUIRE(got.bits == want.bits);
            }
            REQUIRE(got.flags.to_bits() == want.flags);
        }
    }
}

TEST_CASE("multiplier structure never changes results") {
    testgen::Rng rng(31);
    for (const char* p : {"sp-fma", "dp-cma"}) {
        auto base = FmacConfig::preset(p);
        for (int i = 0; i < 4000; ++i) {
            auto t = testgen::random_triple(rng, base.fmt);
            auto want = run(base, t.a, t.b, t.c, RoundingMode::NearestEven);
            for (int k : {2, 3})
                for (auto tree : {mul::TreeKind::Wallace, mul::TreeKind::Array, mul::TreeKind::ZM}) {
                    auto v = base;
                    v.booth_radix_log2 = k;
                    v.tree_kind = tree;
                    auto got = run(v, t.a, t.b, t.c, RoundingMode::NearestEven);
                    REQUIRE(got.bits == want.bits);
                    REQUIRE(got.flags == want.flags);
                }
        }
    }
}

TEST_CASE("unrounded results round to the architectural value") {
    testgen::Rng rng(37);
    auto f = FmacConfig::preset("sp-fma");
    auto c = FmacConfig::preset("sp-cma");
    for (int i = 0; i < 20000; ++i) {
        auto t = testgen::random_triple(rng, SP);
        RoundingMode m = kModes[i % 4];
        auto o = fma_execute(t.a, t.b, t.c, f, m);
        REQUIRE(round_unrounded(o.unrounded, m, SP).bits == o.bits);
        auto q = cma_execute(t.a, t.b, t.c, c, m);
        REQUIRE(round_unrounded(q.unrounded_sum, m, SP).bits == q.bits);
        REQUIRE(round_unrounded(q.unrounded_product, m, SP).bits == oracle_mul(t.a, t.b, SP, m).bits);
    }
}

TEST_CASE("forward correction") {
    SUBCASE("exact intermediate") {
        auto u = exact_unrounded(0x3FC00000, SP);
        CHECK_FALSE(u.guard);
        CHECK_FALSE(u.sticky);
        auto op = apply_forward_correction(u, RoundingMode::NearestEven, SP);
        CHECK(operand_bits(op, SP) == 0x3FC00000);
    }
    SUBCASE("all-ones significand carries out") {
        UnroundedResult u;
        u.exponent = 3;
        u.significand = 0xFFFFFF;
        u.guard = true;
        auto op = apply_forward_correction(u, RoundingMode::NearestEven, SP);
        auto packed = round_unrounded(u, RoundingMode::NearestEven, SP);
        CHECK(packed.bits == 0x41800000);
        CHECK(operand_bits(op, SP) == packed.bits);
        REQUIRE(std::holds_alternative<ForwardedOperand>(op));
        const auto& fo = std::get<ForwardedOperand>(op);
        CHECK(fo.exponent == 4);
        // consuming the forwarded form equals consuming the packed value
        auto cfg = FmacConfig::preset("sp-fma");
        for (std::uint64_t b : {0x3F800000ULL, 0xC0490FDBULL, 0x00000003ULL}) {
            auto x = fma_execute(op, std::uint64_t(b), std::uint64_t(0x3F000001), cfg);
            auto y = fma_execute(packed.bits, b, std::uint64_t(0x3F000001), cfg);
            CHECK(x.bits == y.bits);
            CHECK(x.flags == y.flags);
        }
    }
    SUBCASE("overflowing round-up falls back to the packed value") {
        UnroundedResult u;
        u.exponent = SP.emax();
        u.significand = 0xFFFFFF;
        u.guard = true;
        auto op = apply_forward_correction(u, RoundingMode::NearestEven, SP);
        CHECK(operand_bits(op, SP) == 0x7F800000);
    }
}

TEST_CASE("forwarded chains match packed chains") {
    // x_{i+1} = x_i * b + c, with x_i taken unrounded or packed
    testgen::Rng rng(41);
    for (const char* p : {"sp-fma", "sp-cma", "dp-fma", "dp-cma"}) {
        auto cfg = FmacConfig::preset(p);
        const auto& fmt = cfg.fmt;
        for (int chain = 0; chain < 2500; ++chain) {
            RoundingMode m = kModes[chain % 4];
            std::uint64_t b = testgen::random_operand(rng, fmt), c = testgen::random_operand(rng, fmt);
            std::uint64_t x = testgen::random_operand(rng, fmt);
            Operand fwd{x};
            for (int i = 0; i < 100; ++i) {
                UnroundedResult u;
                std::uint64_t packed, via;
                ExceptionFlags f1, f2;
                if (cfg.architecture == Architecture::FMA) {
                    auto r = fma_execute(x, b, c, cfg, m);
                    auto s = fma_execute(fwd, b, c, cfg, m);
                    packed = r.bits, via = s.bits, f1 = r.flags, f2 = s.flags, u = s.unrounded;
                } else {
                    auto r = cma_execute(x, b, c, cfg, m);
                    auto s = cma_execute(fwd, b, c, cfg, m);
                    packed = r.bits, via = s.bits, f1 = r.flags, f2 = s.flags, u = s.unrounded_sum;
                }
                REQUIRE(packed == via);
                REQUIRE(f1 == f2);
                x = packed;
                fwd = apply_forward_correction(u, m, fmt);
            }
        }
    }
}

TEST_CASE("standalone add and mul") {
    auto f = FmacConfig::preset("dp-fma"), c = FmacConfig::preset("dp-cma");
    testgen::Rng rng(43);
    for (int i = 0; i < 20000; ++i) {
        auto t = testgen::random_triple(rng, DP);
        RoundingMode m = kModes[i % 4];
        for (const auto& cfg : {f, c}) {
            auto add = execute(FmacOp::Add, Operand{t.a}, Operand{t.b}, Operand{t.c}, cfg, m);
            auto want = oracle_add(t.a, t.c, DP, m);
            REQUIRE(add.bits == want.bits);
            REQUIRE(add.flags == want.flags);
            auto mul = execute(FmacOp::Mul, Operand{t.a}, Operand{t.b}, Operand{t.c}, cfg, m);
            auto wm = oracle_mul(t.a, t.b, DP, m);
            REQUIRE(mul.bits == wm.bits);
            REQUIRE(mul.flags == wm.flags);
        }
    }
}

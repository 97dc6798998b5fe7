// fpmax command-line front end: check, simulate, calibrate, explore, encode.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fpmax/assembly.hpp"
#include "fpmax/calibrate.hpp"
#include "fpmax/errors.hpp"
#include "fpmax/explorer.hpp"
#include "fpmax/golden.hpp"
#include "fpmax/harness.hpp"
#include "fpmax/oracle.hpp"
#include "fpmax/testgen.hpp"

using namespace fpmax;

namespace {

constexpr int kOk = 0, kMismatch = 1, kUsage = 2;

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(v));
    return buf;
}

// Datapaths checked for a format: the SP presets carry the TOY format.
std::vector<FmacConfig> datapaths_for(const FloatFormat& fmt) {
    std::vector<FmacConfig> out;
    std::string p = fmt == FloatFormat::DP() ? "dp" : "sp";
    for (const char* arch : {"-fma", "-cma"}) {
        FmacConfig c = FmacConfig::preset(p + arch);
        c.fmt = fmt;
        out.push_back(c);
    }
    return out;
}

RoundResult reference(const FmacConfig& c, std::uint64_t a, std::uint64_t b, std::uint64_t x, RoundingMode m) {
    return c.architecture == Architecture::FMA ? oracle_fma(a, b, x, c.fmt, m) : oracle_cascade(a, b, x, c.fmt, m);
}

struct Tally {
    std::uint64_t cases = 0, bad = 0;
};

bool compare_one(const FmacConfig& c, std::uint64_t a, std::uint64_t b, std::uint64_t x, RoundingMode m, Tally& t) {
    RoundResult want = reference(c, a, b, x, m);
    FmaOutput got = execute(FmacOp::MulAdd, Operand{a}, Operand{b}, Operand{x}, c, m);
    ++t.cases;
    if (got.bits == want.bits && got.flags.to_bits() == want.flags.to_bits()) return true;
    if (t.bad++ < 5)
        std::cout << "  mismatch " << to_string(c.architecture) << " " << hex(a) << " " << hex(b) << " " << hex(x) << " "
                  << to_string(m) << ": got " << hex(got.bits) << "/" << got.flags.to_bits() << " want "
                  << hex(want.bits) << "/" << want.flags.to_bits() << "\n";
    return false;
}

int cmd_check(const std::string& fmt_name, bool exhaustive, std::uint64_t count, std::uint64_t seed,
              const std::string& mode_name, const std::string& golden) {
    bool bad = false;
    if (!golden.empty()) {
        auto vs = read_golden_file(golden);
        std::uint64_t mism = 0;
        for (const auto& v : vs) {
            RoundResult o = oracle_fma(v.a, v.b, v.c, v.fmt, v.mode);
            bool ok = o.bits == v.expected && o.flags.to_bits() == v.flags.to_bits();
            FmacConfig f = datapaths_for(v.fmt)[0];
            FmaOutput d = fma_execute(v.a, v.b, v.c, f, v.mode);
            ok = ok && d.bits == v.expected && d.flags.to_bits() == v.flags.to_bits();
            if (!ok && mism++ < 5) std::cout << "  golden mismatch: " << format_golden_line(v) << "\n";
        }
        std::cout << "golden " << golden << ": " << vs.size() << " vectors, " << mism << " mismatches\n";
        bad = bad || mism;
    }
    FloatFormat fmt = FloatFormat::from_name(fmt_name);
    if (exhaustive && !(fmt == FloatFormat::TOY())) throw ConfigError("--exhaustive is only available for --fmt toy");
    std::vector<RoundingMode> modes;
    if (mode_name == "all")
        modes = {RoundingMode::NearestEven, RoundingMode::TowardZero, RoundingMode::TowardPositive,
                 RoundingMode::TowardNegative};
    else
        modes = {parse_rounding_mode(mode_name)};
    for (const auto& c : datapaths_for(fmt))
        for (RoundingMode m : modes) {
            Tally t;
            if (exhaustive) {
                const std::uint64_t n = 1ULL << fmt.width();
                for (std::uint64_t a = 0; a < n; ++a)
                    for (std::uint64_t b = 0; b < n; ++b)
                        for (std::uint64_t x = 0; x < n; ++x) compare_one(c, a, b, x, m, t);
            } else {
                testgen::Rng rng(seed);
                for (std::uint64_t i = 0; i < count; ++i) {
                    auto tr = testgen::random_triple(rng, fmt);
                    compare_one(c, tr.a, tr.b, tr.c, m, t);
                }
            }
            std::cout << to_string(c.architecture) << " " << fmt.name() << " " << to_string(m) << ": " << t.cases
                      << " cases, " << t.bad << " mismatches\n";
            bad = bad || t.bad;
        }
    return bad ? kMismatch : kOk;
}

int cmd_simulate(const std::string& preset, const std::string& program, const std::string& ram,
                 const std::string& out, const std::string& expect, const std::string& mode_name,
                 const std::string& stats, bool no_bypass) {
    FmacConfig cfg = FmacConfig::preset(preset);
    if (no_bypass) cfg.bypass.clear();
    std::optional<std::string> exp;
    if (!expect.empty()) exp = expect;
    pipe::HarnessResult r = pipe::run_harness(program, ram, cfg, parse_rounding_mode(mode_name), exp);
    if (!out.empty()) {
        std::ofstream o(out);
        if (!o) throw Error("cannot write " + out);
        pipe::write_ram(o, r.sim.ram, cfg.fmt);
    }
    if (!stats.empty()) {
        std::ofstream o(stats);
        if (!o) throw Error("cannot write " + stats);
        o << pipe::stats_json(r.sim) << "\n";
    }
    std::cout << "total_cycles " << r.sim.total_cycles << " avg_latency_penalty " << r.sim.avg_latency_penalty()
              << "\n";
    if (r.compared) {
        for (const auto& m : r.mismatches)
            std::cout << "mismatch ram[" << m.index << "]: got " << hex(m.got) << " expected " << hex(m.expected)
                      << "\n";
        std::cout << (r.mismatches.empty() ? "output matches" : "output differs") << "\n";
        if (!r.mismatches.empty()) return kMismatch;
    }
    return kOk;
}

int cmd_calibrate(const std::string& targets, const std::string& out, const std::string& report) {
    auto t = cost::CalibrationTargets::load(targets);
    auto r = cost::calibrate(t);
    r.tech.save(out);
    if (!report.empty()) {
        std::ofstream o(report);
        if (!o) throw Error("cannot write " + report);
        o << r.to_json() << "\n";
    }
    for (const auto& x : r.residuals) std::printf("%-30s %12.5g %12.5g %+7.3f\n", x.name.c_str(), x.predicted, x.target, x.relative);
    std::printf("max |residual| %.3f\n", r.max_abs_residual());
    return kOk;
}

int cmd_explore(const std::string& space_path, const std::string& tech_path, const std::string& out,
                const std::string& frontier_path) {
    auto space = dse::SpaceSpec::load(space_path);
    auto tp = cost::TechParams::load(tech_path);
    auto e = dse::enumerate(space, tp);
    if (!out.empty()) dse::emit(out, e.points);
    auto front = dse::pareto(e.points, space.objectives, space.senses);
    if (!frontier_path.empty()) dse::emit(frontier_path, front);
    std::cout << "configs " << e.configs << " points " << e.points.size() << " skipped " << e.skipped
              << " frontier " << front.size() << "\n";
    for (int k = 0; k < 2; ++k) {
        const dse::EvaluatedPoint* best = nullptr;
        for (const auto& p : front) {
            double v = p.objective(space.objectives[k]);
            bool better = !best || (space.senses[k] == dse::Sense::Maximize ? v > best->objective(space.objectives[k])
                                                                            : v < best->objective(space.objectives[k]));
            if (better) best = &p;
        }
        if (best)
            std::printf("best %s: %.4g (%s, v_dd %.2f, v_bb %.2f, %s %.4g)\n", dse::to_string(space.objectives[k]),
                        best->objective(space.objectives[k]), best->config.c_str(), best->op.v_dd, best->op.v_bb,
                        dse::to_string(space.objectives[1 - k]), best->objective(space.objectives[1 - k]));
    }
    return kOk;
}

int cmd_encode(const std::string& asm_path, const std::string& out) {
    std::ifstream in(asm_path);
    if (!in) throw ParseError("cannot open " + asm_path);
    auto prog = pipe::parse_assembly(in);
    if (out.empty()) {
        pipe::write_program_hex(std::cout, prog);
    } else {
        std::ofstream o(out);
        if (!o) throw Error("cannot write " + out);
        pipe::write_program_hex(o, prog);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpmax: FMAC datapaths, pipeline simulator, cost model and design-space explorer"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "verify datapaths against the exact oracle");
    std::string fmt = "toy", mode = "rne", golden;
    bool exhaustive = false;
    std::uint64_t count = 100000, seed = 1;
    check->add_option("--fmt", fmt, "toy, sp or dp")->check(CLI::IsMember({"toy", "sp", "dp"}));
    check->add_flag("--exhaustive", exhaustive, "every operand triple (toy only)");
    check->add_option("--count", count, "random triples per datapath and mode");
    check->add_option("--seed", seed, "random seed");
    check->add_option("--mode", mode, "rne, rtz, rtp, rtn or all");
    check->add_option("--golden", golden, "golden-vector file to verify as well");

    auto* sim = app.add_subcommand("simulate", "run a harness program on a preset pipeline");
    std::string preset, program, ram, out, expect, stats;
    bool no_bypass = false;
    sim->add_option("--preset", preset, "dp-cma, dp-fma, sp-cma or sp-fma")->required();
    sim->add_option("--program", program, "assembly (.asm) or encoded (.hex) program")->required();
    sim->add_option("--ram", ram, "input RAM image")->required();
    sim->add_option("--out", out, "output RAM image");
    sim->add_option("--expect", expect, "expected output RAM image");
    sim->add_option("--mode", mode, "rounding mode");
    sim->add_option("--stats", stats, "timing statistics JSON");
    sim->add_flag("--no-bypass", no_bypass, "disable every bypass edge");

    auto* cal = app.add_subcommand("calibrate", "fit technology parameters to measured targets");
    std::string targets, tech_out, report;
    cal->add_option("--targets", targets, "targets JSON")->required();
    cal->add_option("--out", tech_out, "fitted tech JSON")->required();
    cal->add_option("--report", report, "residual report JSON");

    auto* exp = app.add_subcommand("explore", "enumerate a design space and extract its Pareto frontier");
    std::string space, tech, points, frontier;
    exp->add_option("--space", space, "space JSON")->required();
    exp->add_option("--tech", tech, "tech JSON")->required();
    exp->add_option("--out", points, "all points (.csv or .json)");
    exp->add_option("--pareto", frontier, "frontier points (.csv or .json)");

    auto* enc = app.add_subcommand("encode", "assemble a program into hex instruction words");
    std::string asm_path, hex_out;
    enc->add_option("--asm", asm_path, "assembly source")->required();
    enc->add_option("--out", hex_out, "hex output (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*check) return cmd_check(fmt, exhaustive, count, seed, mode, golden);
        if (*sim) return cmd_simulate(preset, program, ram, out, expect, mode, stats, no_bypass);
        if (*cal) return cmd_calibrate(targets, tech_out, report);
        if (*exp) return cmd_explore(space, tech, points, frontier);
        if (*enc) return cmd_encode(asm_path, hex_out);
    } catch (const CalibrationError& e) {
        std::cerr << "fpmax: " << e.what() << "\n";
        return kMismatch;
    } catch (const Error& e) {
        std::cerr << "fpmax: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "fpmax: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fpmax/cost_model.hpp"
#include "fpmax/explorer.hpp"

namespace {
namespace fs = std::filesystem;

const std::string kData = FPMAX_DATA_DIR;

fs::path dir() {
    auto d = fs::temp_directory_path() / "fpmax_cli_test";
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(FPMAX_BIN) + " " + args + " > " + (dir() / "last.log").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string last_log() {
    std::ifstream in(dir() / "last.log");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("check --fmt qp") == 2);
    CHECK(run_cli("check --fmt sp --exhaustive") == 2);
    CHECK(run_cli("check --mode sideways") == 2);
    CHECK(run_cli("simulate --preset sp-fma") == 2);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("check") {
    CHECK(run_cli("check --fmt toy --count 20000 --mode all") == 0);
    CHECK(last_log().find("0 mismatches") != std::string::npos);
    CHECK(run_cli("check --fmt sp --count 20000 --seed 5") == 0);
    CHECK(run_cli("check --fmt dp --count 20000 --mode rtn") == 0);
    CHECK(run_cli("check --fmt toy --count 1 --golden " + kData + "/golden/fma_vectors.txt") == 0);
    auto bad = dir() / "bad_golden.txt";
    std::ofstream(bad) << "toy 38 38 00 rne 39 0\n";
    CHECK(run_cli("check --fmt toy --count 1 --golden " + bad.string()) == 1);
    std::ofstream(bad) << "toy 38 38\n";
    CHECK(run_cli("check --fmt toy --count 1 --golden " + bad.string()) == 2);
}

TEST_CASE("simulate") {
    const std::string p = kData + "/programs/";
    auto out = dir() / "out.ram", stats = dir() / "stats.json";
    CHECK(run_cli("simulate --preset sp-cma --program " + p + "dot16.asm --ram " + p + "dot16.ram --expect " + p +
                "dot16.expected --out " + out.string() + " --stats " + stats.string()) == 0);
    CHECK(fs::exists(out));
    CHECK(fs::exists(stats));
    CHECK(run_cli("simulate --preset sp-fma --program " + p + "dot16_fwd.asm --ram " + p + "dot16.ram --expect " + p +
                "dot16.expected") == 0);
    CHECK(run_cli("simulate --preset sp-fma --program " + p + "dot16.asm --ram " + p + "dot16.ram --expect " + p +
                "dot16.ram") == 1);
    CHECK(last_log().find("mismatch ram[0]") != std::string::npos);
    auto bad = dir() / "bad.asm";
    std::ofstream(bad) << "muladd 1 2 3\nmuladd 1 2\n";
    CHECK(run_cli("simulate --preset sp-fma --program " + bad.string() + " --ram " + p + "dot16.ram") == 2);
    CHECK(last_log().find("line 2") != std::string::npos);
    auto orphan = dir() / "orphan.asm";
    std::ofstream(orphan) << "add 1 2 3 fwd=a\n";
    CHECK(run_cli("simulate --preset sp-fma --program " + orphan.string() + " --ram " + p + "dot16.ram") == 2);
    CHECK(run_cli("simulate --preset qp-fma --program " + orphan.string() + " --ram " + p + "dot16.ram") == 2);
}

TEST_CASE("encode") {
    auto src = dir() / "one.asm", hex = dir() / "one.hex";
    std::ofstream(src) << "muladd 1 2 3\n";
    CHECK(run_cli("encode --asm " + src.string() + " --out " + hex.string()) == 0);
    std::ifstream in(hex);
    std::string w;
    in >> w;
    CHECK(w == "02001083");
    // encoded programs run like their source
    const std::string p = kData + "/programs/";
    auto dot = dir() / "dot16.hex";
    CHECK(run_cli("encode --asm " + p + "dot16_fwd.asm --out " + dot.string()) == 0);
    CHECK(run_cli("simulate --preset sp-cma --program " + dot.string() + " --ram " + p + "dot16.ram --expect " + p +
                "dot16.expected") == 0);
    std::ofstream(src) << "muladd 1 2 99\n";
    CHECK(run_cli("encode --asm " + src.string()) == 2);
}

TEST_CASE("calibrate and explore") {
    auto tech = dir() / "tech.json", report = dir() / "report.json";
    CHECK(run_cli("calibrate --targets " + kData + "/tablei.json --out " + tech.string() + " --report " +
                report.string()) == 0);
    CHECK_NOTHROW(fpmax::cost::TechParams::load(tech.string()));
    CHECK(fs::exists(report));
    auto pts = dir() / "points.csv", front = dir() / "frontier.json";
    CHECK(run_cli("explore --space " + kData + "/space_sp_fma.json --tech " + tech.string() + " --out " + pts.string() +
                " --pareto " + front.string()) == 0);
    std::ifstream c(pts), j(front);
    auto all = fpmax::dse::read_csv(c);
    auto f = fpmax::dse::read_json(j);
    CHECK(all.size() == 15 * 11);
    CHECK_FALSE(f.empty());
    CHECK(f.size() < all.size());
    auto bad = dir() / "bad_space.json";
    std::ofstream(bad) << R"({"presets": ["sp-fma"], "objectives": ["gflops", "gflops"]})";
    CHECK(run_cli("explore --space " + bad.string() + " --tech " + tech.string()) == 2);
    CHECK(run_cli("calibrate --targets " + bad.string() + " --out " + tech.string()) == 2);
}

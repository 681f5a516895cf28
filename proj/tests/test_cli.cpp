#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "support.hpp"

using vdx::testing::data_path;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run vdx_run(const std::string& args) {
    std::string cmd = std::string(VDX_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fixture(const std::string& name) { return data_path("fixtures/" + name); }

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("vdx_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("explain prints the runtime conversion") {
    auto r = vdx_run("explain --left " + fixture("movies_t.csv") + " --right " + fixture("movies_t2.csv") +
                     " --format text");
    CHECK(r.code == 0);
    CHECK(r.out.find("(a2, a2 ÷ 60)") != std::string::npos);
    CHECK(r.out.find("has_NaN") != std::string::npos);
}

TEST_CASE("explain emits parseable JSON") {
    auto r = vdx_run("explain --left " + fixture("movies_t.csv") + " --right " + fixture("movies_t2.csv") + " --format json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["report_version"] == 1);
    CHECK(j["goals"].size() == 5);
    CHECK(j["partial"] == false);
    CHECK_FALSE(j.contains("seconds"));
}

TEST_CASE("a table against itself exits cleanly") {
    auto r = vdx_run("explain --left " + fixture("movies_t.csv") + " --right " + fixture("movies_t.csv") + " --format json");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["goals"].empty());
}

TEST_CASE("bad inputs exit with 1") {
    auto dir = scratch("bad");
    std::ofstream(dir / "match.json") << "{\"a1\": ";
    CHECK(vdx_run("explain --left " + fixture("movies_t.csv") + " --right " + fixture("movies_t2.csv") +
                  " --match " + (dir / "match.json").string())
              .code == 1);
    CHECK(vdx_run("explain --left /nonexistent.csv --right " + fixture("movies_t2.csv")).code == 1);
    std::ofstream(dir / "bad.cfg") << "alpha = 7\n";
    CHECK(vdx_run("explain --left " + fixture("movies_t.csv") + " --right " + fixture("movies_t2.csv") +
                  " --config " + (dir / "bad.cfg").string())
              .code == 1);
    fs::create_directories(dir / "empty");
    CHECK(vdx_run("run-bench --bench-dir " + (dir / "empty").string()).code == 1);
    CHECK(vdx_run("frobnicate").code != 0);
    fs::remove_all(dir);
}

TEST_CASE("explain writes to --out") {
    auto dir = scratch("out");
    auto r = vdx_run("explain --left " + fixture("features_t.csv") + " --right " + fixture("features_t2.csv") +
                     " --holdout-left " + fixture("features_hold_t.csv") + " --holdout-right " +
                     fixture("features_hold_t2.csv") + " --format json --out " + (dir / "r.json").string());
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(j["goals"].size() == 6);
    fs::remove_all(dir);
}

TEST_CASE("gen-bench is deterministic and run-bench reads its output") {
    auto dir = scratch("bench");
    std::string args = "gen-bench --seed-table " + data_path("seeds/flowers.csv") + " --script " +
                       data_path("scripts/control_noise.vds") + " --rng-seed 7 --out-dir ";
    REQUIRE(vdx_run(args + (dir / "a").string()).code == 0);
    REQUIRE(vdx_run(args + (dir / "b").string()).code == 0);
    for (const char* f : {"T.csv", "T2.csv", "hold_T.csv", "hold_T2.csv", "annotations.json"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    fs::remove_all(dir / "b");
    auto r = vdx_run("run-bench --bench-dir " + dir.string() + " --out " + (dir / "metrics").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "metrics" / "metrics.csv"));
    auto j = nlohmann::json::parse(slurp(dir / "metrics" / "metrics.json"));
    CHECK(j["sets"].size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("gen-seed writes a table") {
    auto dir = scratch("seed");
    CHECK(vdx_run("gen-seed --kind movies --rows 25 --rng-seed 2 --out " + (dir / "m.csv").string()).code == 0);
    auto text = slurp(dir / "m.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 26);
    fs::remove_all(dir);
}

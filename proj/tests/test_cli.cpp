#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "pmc/cli.hpp"
#include "pmc/errors.hpp"

using namespace pmc;
namespace fs = std::filesystem;

#ifndef PMC_CLI_BINARY
#define PMC_CLI_BINARY "pmc"
#endif

namespace {

const char* kSmallDisk = R"(# zero-data cmc on a small disk
[domain]
shape = disk
a = 0.5
resolution = 17

[problem]
family = cmc
c = 1.0
psi = zero
)";

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("pmc_test_cli_" + std::to_string(::getpid())) / name;
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

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

int run(const std::string& args) {
    std::string cmd = std::string(PMC_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("exit code table") {
    CHECK(exit_code(Outcome::converged) == 0);
    CHECK(exit_code(Outcome::blow_up) == 2);
    CHECK(exit_code(Outcome::newton_failure) == 3);
    CHECK(kExitConfig == 1);
    CHECK(kExitVerify == 4);
}

TEST_CASE("config parsing is strict") {
    RunConfig c = parse_config(kSmallDisk);
    CHECK(c.number("domain", "a", 0.0) == 0.5);
    CHECK(c.get("problem", "psi", "") == "zero");
    CHECK(c.integer("solver", "max_iter", 7) == 7);
    CHECK_THROWS_AS(parse_config("[domain]\nradius = 1\n"), PmcError);
    CHECK_THROWS_AS(parse_config("[nowhere]\na = 1\n"), PmcError);
    CHECK_THROWS_AS(parse_config("[domain]\nno equals sign\n"), PmcError);
    RunConfig coarse = parse_config(std::string(kSmallDisk) + "\n[metric]\nkind = euclidean\n");
    coarse.set("domain", "resolution", "9");
    CHECK_THROWS_AS(build_setup(coarse), PmcError);
    CHECK_THROWS_AS(coarse.set("domain", "bogus", "1"), PmcError);
    // Every shipped config parses and builds.
    for (const auto& entry : fs::directory_iterator(shipped_config_dir())) {
        CAPTURE(entry.path().string());
        RunConfig cfg = load_config(entry.path().string());
        CHECK_NOTHROW(build_setup(cfg));
    }
}

TEST_CASE("sweep expansion") {
    RunConfig c = parse_config(std::string(kSmallDisk) +
                               "[sweep]\nparam1 = domain.a\nvalues1 = 0.3, 0.4\nparam2 = problem.c\nvalues2 = 1, 2, 3\n");
    Sweep s = parse_sweep(c);
    auto rows = s.rows(c);
    REQUIRE(rows.size() == 6u);
    CHECK(rows[0].get("domain", "a", "") == "0.3");
    CHECK(rows[0].get("problem", "c", "") == "1");
    CHECK(rows[1].get("problem", "c", "") == "2");
    CHECK(rows[5].get("domain", "a", "") == "0.4");
    CHECK(rows[5].get("problem", "c", "") == "3");
    CHECK_THROWS_AS(parse_sweep(parse_config(std::string(kSmallDisk) + "[sweep]\nparam1 = domain.a\nvalues1 =\n")),
                    PmcError);
    CHECK_THROWS_AS(parse_sweep(parse_config(std::string(kSmallDisk) + "[sweep]\nparam1 = domain.zz\nvalues1 = 1\n")),
                    PmcError);
}

TEST_CASE("report JSON round trip") {
    RunConfig c = parse_config(kSmallDisk);
    RunResult rr = run_config(c);
    CHECK(rr.solve.outcome == Outcome::converged);
    Report r = make_report(rr.solve, c, 42, 0.125);
    r.alpha2.measured = std::numeric_limits<double>::quiet_NaN();
    std::string text = report_to_json(r);
    Report back = report_from_json(text);
    CHECK(back == r);
    CHECK(report_to_json(back) == text);
    CHECK(back.seed == 42u);
    CHECK(back.outcome == "converged");
    REQUIRE(back.monitor_max_grad.has_value());
    CHECK(*back.monitor_max_grad == 0.125);
    CHECK(back.config_echo.at("domain").at("a") == "0.5");
}

TEST_CASE("CSV output keeps 17 significant digits") {
    Field f = make_radial_field(1.0, 9, 1.0 / 3.0);
    std::string csv = field_csv(f);
    CHECK(csv.rfind("r,u\n", 0) == 0);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    TRecord rec;
    rec.t = 0.1;
    rec.sup_u = 2.0 / 3.0;
    std::string summary = summary_csv({rec});
    CHECK(count_lines(summary) == 2);
    CHECK(summary.find("0.66666666666666663") != std::string::npos);
}

TEST_CASE("solve is deterministic and writes its outputs") {
    fs::path dir = scratch("solve");
    fs::path cfg = write(dir, "small.ini", kSmallDisk);
    REQUIRE(run("solve --config " + cfg.string() + " --out " + (dir / "a").string() + " --seed 7") == 0);
    REQUIRE(run("solve --config " + cfg.string() + " --out " + (dir / "b").string() + " --seed 7") == 0);
    for (const char* name : {"report.json", "u_final.csv", "summary.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / "a" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
    Report r = report_from_json(slurp(dir / "a" / "report.json"));
    CHECK(r.seed == 7u);
    CHECK(r.outcome == "converged");

    fs::path json_only = write(dir, "json_only.ini", std::string(kSmallDisk) + "\n[output]\nformats = json\n");
    REQUIRE(run("solve --config " + json_only.string() + " --out " + (dir / "c").string()) == 0);
    CHECK(fs::exists(dir / "c" / "report.json"));
    CHECK_FALSE(fs::exists(dir / "c" / "u_final.csv"));
}

TEST_CASE("configuration errors exit with code 1") {
    fs::path dir = scratch("errors");
    fs::path unknown = write(dir, "unknown.ini", std::string(kSmallDisk) + "colour = blue\n");
    CHECK(run("solve --config " + unknown.string() + " --out " + (dir / "u").string()) == 1);
    std::string coarse_text = kSmallDisk;
    coarse_text.replace(coarse_text.find("resolution = 17"), 15, "resolution = 8");
    fs::path coarse = write(dir, "coarse.ini", coarse_text);
    CHECK(run("solve --config " + coarse.string() + " --out " + (dir / "c").string()) == 1);
    CHECK(run("solve --config " + (dir / "missing.ini").string()) == 1);
    CHECK(run("verify nosuchsuite") == 1);
    CHECK(run("frobnicate") == 1);
    fs::path empty = write(dir, "empty.ini", std::string(kSmallDisk) + "[sweep]\nparam1 = domain.a\nvalues1 =\n");
    CHECK(run("sweep --config " + empty.string() + " --out " + (dir / "e").string()) == 1);
}

TEST_CASE("sweep writes one row per parameter pair independent of threads") {
    fs::path dir = scratch("sweep");
    fs::path cfg = write(dir, "sweep.ini",
                         std::string(kSmallDisk) +
                             "[sweep]\nparam1 = domain.a\nvalues1 = 0.3, 0.4, 0.5\nparam2 = problem.c\nvalues2 = 0.5, 1, 1.5\n");
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + (dir / "one").string() + " --threads 1") == 0);
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + (dir / "three").string() + " --threads 3") == 0);
    std::string csv = slurp(dir / "one" / "sweep.csv");
    CHECK(count_lines(csv) == 10);
    CHECK(csv == slurp(dir / "three" / "sweep.csv"));
    CHECK(csv.find("converged") != std::string::npos);
}

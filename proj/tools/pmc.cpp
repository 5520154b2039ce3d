// pmc: batch front-end for solves, sweeps and verification suites.
#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "pmc/cli.hpp"

int main(int argc, char** argv) {
    pmc::configure_logging();
    CLI::App app{"Prescribed mean curvature graph solver"};
    app.require_subcommand(1);

    std::string config, out;
    std::string suite = "all";
    int threads = 1;
    std::uint64_t seed = 0;

    auto* solve = app.add_subcommand("solve", "Run continuation for one config");
    solve->add_option("--config", config, "Config file")->required();
    solve->add_option("--out", out, "Output directory (overrides output.directory)");
    solve->add_option("--seed", seed, "Seed echoed in the report");

    auto* verify = app.add_subcommand("verify", "Run an invariant suite");
    verify->add_option("suite", suite, "geometry|oracles|bounds|nonexistence|all");
    verify->add_option("--out", out, "Output directory for verify.json");
    verify->add_option("--seed", seed, "Unused; accepted for uniformity");

    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
    sweep->add_option("--config", config, "Config file with a [sweep] section")->required();
    sweep->add_option("--out", out, "Output directory (overrides output.directory)");
    sweep->add_option("--threads", threads, "Concurrent rows")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed, "Seed echoed in the rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : pmc::kExitConfig;
    }
    if (solve->parsed()) return pmc::cmd_solve(config, out, seed);
    if (verify->parsed()) return pmc::cmd_verify(suite, out);
    return pmc::cmd_sweep(config, out, threads, seed);
}

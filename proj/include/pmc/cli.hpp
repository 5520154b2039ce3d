#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmc/config.hpp"
#include "pmc/solver.hpp"
#include "pmc/verify.hpp"

namespace pmc {

// Serialised form of a solve; report.json is exactly this structure.
struct Report {
    std::string outcome;
    std::string reason;
    std::vector<TRecord> records;
    BoundCheck alpha1, alpha2, tu_beta2;
    int omega_plus_cells = 0;
    int omega_minus_cells = 0;
    double beta2 = 0.0;
    int insertions = 0;
    bool polished = false;
    std::optional<double> monitor_max_grad;
    std::uint64_t seed = 0;
    std::map<std::string, std::map<std::string, std::string>> config_echo;
};
// Field-wise equality; NaN equals NaN.
bool operator==(const Report& a, const Report& b);

Report make_report(const SolveReport& rep, const RunConfig& config, std::uint64_t seed,
                   std::optional<double> monitor_max_grad = std::nullopt);
std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);

// Exit code of cmd_solve for an outcome: 0 converged, 2 blow_up, 3 newton_failure.
int exit_code(Outcome o);
constexpr int kExitConfig = 1;
constexpr int kExitVerify = 4;

// Result of running one config end to end.
struct RunResult {
    SolveReport solve;
    RunSetup setup;
    std::optional<double> monitor_max_grad;
};
RunResult run_config(const RunConfig& config);

// CSV writers, 17 significant digits, header row.
std::string field_csv(const Field& u);
std::string summary_csv(const std::vector<TRecord>& records);
std::string verify_json(const std::string& suite, const std::vector<Check>& checks);

// Subcommands. Errors go to standard error; the return value is the exit code.
int cmd_solve(const std::string& config_path, const std::string& out_dir, std::uint64_t seed);
int cmd_verify(const std::string& suite, const std::string& out_dir);
int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads,
              std::uint64_t seed);

// Applies PMC_LOG={error|info|debug} to the default logger.
void configure_logging();

}  // namespace pmc

#pragma once

#include <string>
#include <vector>

namespace pmc {

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
    double seconds = 0.0;
};

// Suites: geometry, oracles, bounds, nonexistence, all. Throws ConfigError on
// an unknown name.
std::vector<Check> run_verify_suite(const std::string& suite);
const std::vector<std::string>& verify_suite_names();

// Acceptance criterion 1..9 as a single check (sub-checks folded into detail).
Check acceptance_criterion(int index);

// Directory of the shipped example configs.
std::string shipped_config_dir();
// Shipped configs that are expected to converge (everything except the
// counterexample and sweep files), sorted by name.
std::vector<std::string> shipped_converging_configs();

}  // namespace pmc

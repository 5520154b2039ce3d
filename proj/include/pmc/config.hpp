#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmc/solver.hpp"

namespace pmc {

// Sectioned key=value text: "[section]" headers, "key = value" lines, '#' comments.
// Every key must be known for its section; anything else is a ConfigError.
struct RunConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    bool flag(const std::string& section, const std::string& key, bool fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Known keys per section, used by the parser and the README table.
const std::map<std::string, std::vector<std::string>>& config_schema();

enum class SolveMode { continuation, newton };

// Everything a solve needs, built from a config.
struct RunSetup {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    PMCProblem problem;
    Field layout;
    Schedule schedule;
    NewtonOptions newton;
    SolveMode mode = SolveMode::continuation;
    std::optional<Vec> monitor_center;
    double monitor_radius = 0.0;
};

RunSetup build_setup(const RunConfig& config);

struct Sweep {
    std::vector<std::string> params;  // "section.key"
    std::vector<std::vector<std::string>> values;
    // Cartesian product in row-major order (last parameter fastest).
    std::vector<RunConfig> rows(const RunConfig& base) const;
};
// Reads [sweep] param1/values1 and param2/values2. Throws ConfigError on an
// empty range or a parameter outside the schema.
Sweep parse_sweep(const RunConfig& config);

}  // namespace pmc

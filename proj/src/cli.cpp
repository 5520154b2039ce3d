#include "pmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "pmc/errors.hpp"
#include "pmc/oracles.hpp"

namespace pmc {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Non-finite doubles are written as null and read back as NaN.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }
double num(const ordered_json& j) { return j.is_null() ? kNaN : j.get<double>(); }

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

ordered_json bound_json(const BoundCheck& b) {
    return ordered_json{{"applicable", b.applicable},
                        {"bound", num(b.bound)},
                        {"measured", num(b.measured)},
                        {"pass", b.pass}};
}

BoundCheck bound_from(const ordered_json& j) {
    BoundCheck b;
    b.applicable = j.at("applicable").get<bool>();
    b.bound = num(j.at("bound"));
    b.measured = num(j.at("measured"));
    b.pass = j.at("pass").get<bool>();
    return b;
}

bool same_bound(const BoundCheck& a, const BoundCheck& b) {
    return a.applicable == b.applicable && same(a.bound, b.bound) && same(a.measured, b.measured) &&
           a.pass == b.pass;
}

std::string g17(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : "nan"; }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PmcError(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    out << text;
}

fs::path output_dir(const RunConfig& config, const std::string& override_dir) {
    fs::path dir = override_dir.empty() ? fs::path(config.get("output", "directory", "out"))
                                        : fs::path(override_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw PmcError(ErrorCode::ConfigError, "cannot create '" + dir.string() + "'");
    return dir;
}

bool wants(const RunConfig& config, const std::string& format) {
    std::string formats = config.get("output", "formats", "json,csv");
    formats.erase(std::remove(formats.begin(), formats.end(), ' '), formats.end());
    return ("," + formats + ",").find("," + format + ",") != std::string::npos;
}

double sup_abs_field(const Field& u) {
    double m = 0.0;
    for (int k = 0; k < u.size(); ++k)
        if (u.is_unknown(k)) m = std::max(m, std::abs(u.values[k]));
    return m;
}

// 1 - max Phi/J for radially reducible problems, NaN otherwise.
double saturation_margin(const RunSetup& s) {
    try {
        RadialODE ode = radial_reduce(s.problem, s.domain);
        return 1.0 - flux_analysis(ode).max_ratio;
    } catch (const PmcError&) {
        return kNaN;
    }
}

}  // namespace

bool operator==(const Report& a, const Report& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const TRecord &x = a.records[i], &y = b.records[i];
        if (!(same(x.t, y.t) && same(x.sup_u, y.sup_u) && same(x.sup_grad, y.sup_grad) &&
              same(x.max_A2, y.max_A2) && x.newton_iters == y.newton_iters &&
              same(x.final_residual, y.final_residual)))
            return false;
    }
    bool mon = a.monitor_max_grad.has_value() == b.monitor_max_grad.has_value() &&
               (!a.monitor_max_grad || same(*a.monitor_max_grad, *b.monitor_max_grad));
    return a.outcome == b.outcome && a.reason == b.reason && same_bound(a.alpha1, b.alpha1) &&
           same_bound(a.alpha2, b.alpha2) && same_bound(a.tu_beta2, b.tu_beta2) &&
           a.omega_plus_cells == b.omega_plus_cells && a.omega_minus_cells == b.omega_minus_cells &&
           same(a.beta2, b.beta2) && a.insertions == b.insertions && a.polished == b.polished &&
           mon && a.seed == b.seed && a.config_echo == b.config_echo;
}

Report make_report(const SolveReport& rep, const RunConfig& config, std::uint64_t seed,
                   std::optional<double> monitor_max_grad) {
    Report r;
    r.outcome = to_string(rep.outcome);
    r.reason = rep.reason;
    r.records = rep.records;
    r.alpha1 = rep.alpha1;
    r.alpha2 = rep.alpha2;
    r.tu_beta2 = rep.tu_beta2;
    r.omega_plus_cells = rep.omega_plus_cells;
    r.omega_minus_cells = rep.omega_minus_cells;
    r.beta2 = rep.beta2;
    r.insertions = rep.insertions;
    r.polished = rep.polished;
    r.monitor_max_grad = monitor_max_grad;
    r.seed = seed;
    r.config_echo = config.sections;
    return r;
}

std::string report_to_json(const Report& r) {
    ordered_json j;
    j["outcome"] = r.outcome;
    j["reason"] = r.reason;
    ordered_json recs = ordered_json::array();
    for (const TRecord& t : r.records)
        recs.push_back(ordered_json{{"t", num(t.t)},
                                    {"sup_u", num(t.sup_u)},
                                    {"sup_grad", num(t.sup_grad)},
                                    {"max_A2", num(t.max_A2)},
                                    {"newton_iters", t.newton_iters},
                                    {"final_residual", num(t.final_residual)}});
    j["records"] = recs;
    j["bound_checks"] = ordered_json{{"alpha1", bound_json(r.alpha1)},
                                     {"alpha2", bound_json(r.alpha2)},
                                     {"tu_beta2", bound_json(r.tu_beta2)}};
    j["omega_plus_cells"] = r.omega_plus_cells;
    j["omega_minus_cells"] = r.omega_minus_cells;
    j["beta2"] = num(r.beta2);
    j["insertions"] = r.insertions;
    j["polished"] = r.polished;
    j["monitor_max_grad"] = r.monitor_max_grad ? num(*r.monitor_max_grad) : ordered_json(nullptr);
    j["seed"] = r.seed;
    ordered_json echo = ordered_json::object();
    for (const auto& [section, keys] : r.config_echo) {
        ordered_json s = ordered_json::object();
        for (const auto& [k, v] : keys) s[k] = v;
        echo[section] = s;
    }
    j["config_echo"] = echo;
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    Report r;
    r.outcome = j.at("outcome").get<std::string>();
    r.reason = j.at("reason").get<std::string>();
    for (const auto& t : j.at("records")) {
        TRecord rec;
        rec.t = num(t.at("t"));
        rec.sup_u = num(t.at("sup_u"));
        rec.sup_grad = num(t.at("sup_grad"));
        rec.max_A2 = num(t.at("max_A2"));
        rec.newton_iters = t.at("newton_iters").get<int>();
        rec.final_residual = num(t.at("final_residual"));
        r.records.push_back(rec);
    }
    const auto& bc = j.at("bound_checks");
    r.alpha1 = bound_from(bc.at("alpha1"));
    r.alpha2 = bound_from(bc.at("alpha2"));
    r.tu_beta2 = bound_from(bc.at("tu_beta2"));
    r.omega_plus_cells = j.at("omega_plus_cells").get<int>();
    r.omega_minus_cells = j.at("omega_minus_cells").get<int>();
    r.beta2 = num(j.at("beta2"));
    r.insertions = j.at("insertions").get<int>();
    r.polished = j.at("polished").get<bool>();
    if (!j.at("monitor_max_grad").is_null()) r.monitor_max_grad = j.at("monitor_max_grad").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [section, keys] : j.at("config_echo").items())
        for (const auto& [k, v] : keys.items()) r.config_echo[section][k] = v.get<std::string>();
    return r;
}

int exit_code(Outcome o) {
    switch (o) {
        case Outcome::converged: return 0;
        case Outcome::blow_up: return 2;
        case Outcome::newton_failure: return 3;
    }
    return 3;
}

RunResult run_config(const RunConfig& config) {
    RunResult res;
    res.setup = build_setup(config);
    RunSetup& s = res.setup;
    Discretization disc(s.domain, s.problem, s.layout);
    if (s.mode == SolveMode::newton) {
        SolveReport& rep = res.solve;
        rep.beta2 = beta2_bound(s.problem, s.domain);
        try {
            NewtonResult nr = newton_solve(disc, harmonic_extension(disc, disc.layout()), s.newton);
            TRecord rec;
            rec.t = s.problem.t;
            rec.sup_u = sup_abs_field(nr.u);
            auto g = disc.gradient_norm(nr.u);
            rec.sup_grad = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
            try {
                rec.max_A2 = max_second_form(disc, nr.u);
            } catch (const PmcError&) {
                rec.max_A2 = kNaN;
            }
            rec.newton_iters = nr.iterations;
            rec.final_residual = nr.residual_inf;
            rep.records.push_back(rec);
            rep.outcome = Outcome::converged;
            rep.u_final = nr.u;
        } catch (const PmcError& e) {
            rep.outcome = Outcome::newton_failure;
            rep.reason = e.what();
            rep.u_final = disc.layout();
        }
    } else {
        res.solve = continuation(disc, s.schedule);
    }
    if (s.monitor_center) {
        try {
            res.monitor_max_grad =
                gradient_monitor(disc, res.solve.u_final, *s.monitor_center, s.monitor_radius).max_grad;
        } catch (const PmcError& e) {
            spdlog::warn("gradient monitor skipped: {}", e.what());
        }
    }
    return res;
}

std::string field_csv(const Field& u) {
    std::string out = u.layout == Layout::radial ? "r,u\n" : "x,y,u\n";
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            int k = u.index(i, j);
            if (!u.active(k)) continue;
            auto p = u.point(i, j);
            if (u.layout == Layout::radial)
                out += fmt::format("{},{}\n", g17(p.x()), g17(u.values[k]));
            else
                out += fmt::format("{},{},{}\n", g17(p.x()), g17(p.y()), g17(u.values[k]));
        }
    return out;
}

std::string summary_csv(const std::vector<TRecord>& records) {
    std::string out = "t,sup_u,sup_grad,max_A2,newton_iters,final_residual\n";
    for (const TRecord& r : records)
        out += fmt::format("{},{},{},{},{},{}\n", g17(r.t), g17(r.sup_u), g17(r.sup_grad),
                           g17(r.max_A2), r.newton_iters, g17(r.final_residual));
    return out;
}

std::string verify_json(const std::string& suite, const std::vector<Check>& checks) {
    ordered_json j;
    j["suite"] = suite;
    bool all = true;
    ordered_json arr = ordered_json::array();
    for (const Check& c : checks) {
        all = all && c.pass;
        arr.push_back(ordered_json{{"name", c.name},
                                   {"pass", c.pass},
                                   {"measured", num(c.measured)},
                                   {"threshold", num(c.threshold)},
                                   {"detail", c.detail},
                                   {"seconds", num(c.seconds)}});
    }
    j["pass"] = all;
    j["checks"] = arr;
    return j.dump(2) + "\n";
}

int cmd_solve(const std::string& config_path, const std::string& out_dir, std::uint64_t seed) {
    RunConfig config;
    RunResult res;
    fs::path dir;
    try {
        config = load_config(config_path);
        dir = output_dir(config, out_dir);
        res = run_config(config);
    } catch (const PmcError& e) {
        std::cerr << "pmc solve: " << e.what() << "\n";
        return kExitConfig;
    }
    Report report = make_report(res.solve, config, seed, res.monitor_max_grad);
    try {
        if (wants(config, "json")) write_file(dir / "report.json", report_to_json(report));
        if (wants(config, "csv")) {
            write_file(dir / "u_final.csv", field_csv(res.solve.u_final));
            write_file(dir / "summary.csv", summary_csv(res.solve.records));
        }
    } catch (const PmcError& e) {
        std::cerr << "pmc solve: " << e.what() << "\n";
        return kExitConfig;
    }
    if (res.solve.outcome != Outcome::converged)
        std::cerr << "pmc solve: " << report.outcome
                  << (report.reason.empty() ? "" : " (" + report.reason + ")") << "\n";
    return exit_code(res.solve.outcome);
}

int cmd_verify(const std::string& suite, const std::string& out_dir) {
    std::vector<Check> checks;
    try {
        checks = run_verify_suite(suite);
    } catch (const PmcError& e) {
        std::cerr << "pmc verify: " << e.what() << "\n";
        return kExitConfig;
    }
    bool all = true;
    for (const Check& c : checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
    try {
        fs::path dir = out_dir.empty() ? fs::path("out") : fs::path(out_dir);
        fs::create_directories(dir);
        write_file(dir / "verify.json", verify_json(suite, checks));
    } catch (const std::exception& e) {
        std::cerr << "pmc verify: " << e.what() << "\n";
        return kExitConfig;
    }
    return all ? 0 : kExitVerify;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads,
              std::uint64_t seed) {
    RunConfig base;
    Sweep sweep;
    std::vector<RunConfig> rows;
    fs::path dir;
    try {
        base = load_config(config_path);
        sweep = parse_sweep(base);
        rows = sweep.rows(base);
        dir = output_dir(base, out_dir);
    } catch (const PmcError& e) {
        std::cerr << "pmc sweep: " << e.what() << "\n";
        return kExitConfig;
    }
    (void)seed;  // rows are deterministic; the seed is only echoed in solve reports

    struct Row {
        std::string outcome = "error";
        std::string reason;
        double sup_u = kNaN;
        double margin = kNaN;
    };
    std::vector<Row> out(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < rows.size(); r = next++) {
            try {
                RunResult res = run_config(rows[r]);
                out[r].outcome = to_string(res.solve.outcome);
                out[r].reason = res.solve.reason;
                out[r].sup_u = sup_abs_field(res.solve.u_final);
                out[r].margin = saturation_margin(res.setup);
            } catch (const std::exception& e) {
                out[r].reason = e.what();
            }
        }
    };
    int n = std::max(1, std::min<int>(threads, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::string csv = "row";
    for (const auto& p : sweep.params) csv += "," + p;
    csv += ",outcome,sup_u,saturation_margin,reason\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        csv += std::to_string(r);
        for (const auto& p : sweep.params) {
            auto dot = p.find('.');
            csv += "," + rows[r].get(p.substr(0, dot), p.substr(dot + 1), "");
        }
        std::string reason = out[r].reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        csv += fmt::format(",{},{},{},{}\n", out[r].outcome, g17(out[r].sup_u), g17(out[r].margin),
                           reason);
    }
    try {
        write_file(dir / "sweep.csv", csv);
    } catch (const PmcError& e) {
        std::cerr << "pmc sweep: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}

void configure_logging() {
    const char* env = std::getenv("PMC_LOG");
    std::string level = env ? env : "error";
    if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else spdlog::set_level(spdlog::level::err);
}

}  // namespace pmc

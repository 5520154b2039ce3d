#include "pmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& what) {
    throw PmcError(ErrorCode::ConfigError, what);
}

double to_number(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (s.empty() || end != begin + s.size() || !std::isfinite(v))
        config_error(where + ": not a finite number: '" + s + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void require_choice(const std::string& value, std::initializer_list<const char*> choices,
                    const std::string& where) {
    for (const char* c : choices)
        if (value == c) return;
    std::string msg = where + ": unknown value '" + value + "' (expected one of";
    for (const char* c : choices) msg += std::string(" ") + c;
    config_error(msg + ")");
}

Warp warp_by_name(const std::string& name) {
    if (name == "identity") return warp_identity();
    if (name == "cosh") return warp_cosh();
    if (name == "inverse") return warp_inverse();
    config_error("metric.warp: unknown warp '" + name + "'");
}

ChartMetric build_metric(const RunConfig& c) {
    std::string kind = c.get("metric", "kind", "euclidean");
    require_choice(kind, {"euclidean", "conformal_product", "spherical_warped"}, "metric.kind");
    int dim = c.integer("metric", "dim", 2);
    if (dim != 2) config_error("metric.dim: grid solves are two-dimensional");
    if (kind == "euclidean") {
        if (c.has("metric", "warp")) config_error("metric.warp: not used by the euclidean metric");
        return ChartMetric::euclidean(dim);
    }
    std::string warp = c.get("metric", "warp", kind == "conformal_product" ? "cosh" : "identity");
    if (kind == "conformal_product") return ChartMetric::conformal_product(dim, warp_by_name(warp));
    return ChartMetric::spherical_warped(dim, warp_by_name(warp));
}

DomainChart build_domain(const RunConfig& c, ChartMetric metric) {
    std::string shape = c.get("domain", "shape", "disk");
    require_choice(shape, {"disk", "annulus", "box_periodic", "polar_cap"}, "domain.shape");
    if (shape == "disk") return DomainChart::disk(std::move(metric), c.number("domain", "a", 1.0));
    if (shape == "annulus")
        return DomainChart::annulus(std::move(metric), c.number("domain", "a", 0.5),
                                    c.number("domain", "b", 1.0));
    if (shape == "box_periodic")
        return DomainChart::box_periodic(std::move(metric), c.number("domain", "L", 1.0));
    return DomainChart::polar_cap(std::move(metric), c.number("domain", "r_max", 1.0));
}

PsiFn build_psi(const RunConfig& c) {
    std::string kind = c.get("problem", "psi", "zero");
    require_choice(kind, {"zero", "const", "cap", "linear"}, "problem.psi");
    if (kind == "zero") return [](const Vec&) { return 0.0; };
    if (kind == "const") {
        double v = c.number("problem", "psi_value", 0.0);
        return [v](const Vec&) { return v; };
    }
    if (kind == "cap") {
        double R = c.number("problem", "psi_R", 2.0);
        if (!(R > 0.0)) config_error("problem.psi_R must be positive");
        // Lower cap, extended by its value at the nearest admissible radius.
        return [R](const Vec& x) { return -std::sqrt(std::max(R * R - x.squaredNorm(), 0.0)); };
    }
    double ax = c.number("problem", "psi_ax", 0.0);
    double ay = c.number("problem", "psi_ay", 0.0);
    double b = c.number("problem", "psi_value", 0.0);
    return [ax, ay, b](const Vec& x) { return b + ax * x(0) + ay * x(1); };
}

PMCProblem build_problem(const RunConfig& c, const DomainChart& domain) {
    std::string family = c.get("problem", "family", "");
    require_choice(family, {"cmc", "jang", "conformal", "custom"}, "problem.family");
    PMCProblem p;
    if (family == "cmc") {
        p = make_cmc(c.number("problem", "c", 1.0));
    } else if (family == "jang") {
        // k = k_sigma * sigma + [[k11, k12], [k12, k22]]
        double ks = c.number("problem", "k_sigma", 0.0);
        Mat k0(2, 2);
        k0 << c.number("problem", "k11", 0.0), c.number("problem", "k12", 0.0),
            c.number("problem", "k12", 0.0), c.number("problem", "k22", 0.0);
        ChartMetric m = domain.metric();
        p = make_jang(m, [m, ks, k0](const Vec& x) -> Mat { return ks * m.sigma(x) + k0; });
    } else if (family == "conformal") {
        // fconf = fx x + fy y + fr z
        double fx = c.number("problem", "fx", 0.0), fy = c.number("problem", "fy", 0.0);
        double fr = c.number("problem", "fr", 0.0);
        ConformalFactor cf;
        cf.grad_x = [fx, fy](const Vec&) {
            Vec g(2);
            g << fx, fy;
            return g;
        };
        cf.d_r = [fr](const Vec&, double) { return fr; };
        p = make_conformal_minimal(cf, 2);
    } else {
        // F = F0, phi = phi_beta z + g0 + g1 cos(2 pi x / L) cos(2 pi y / L)
        double g0 = c.number("problem", "g0", 0.0), g1 = c.number("problem", "g1", 0.0);
        double L = domain.shape() == Shape::box_periodic ? domain.a() : 1.0;
        const double w = 2.0 * 3.14159265358979323846 / L;
        p = make_linear_phi(c.number("problem", "F0", 0.0), c.number("problem", "phi_beta", 0.0),
                            [g0, g1, w](const Vec& x) {
                                return g0 + g1 * std::cos(w * x(0)) * std::cos(w * x(1));
                            });
    }
    if (domain.has_boundary()) p.psi = build_psi(c);
    else if (c.has("problem", "psi")) config_error("problem.psi: closed domains take no boundary data");
    p.t = c.number("problem", "t", 0.0);
    return p;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

const std::map<std::string, std::vector<std::string>>& config_schema() {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"metric", {"kind", "dim", "warp"}},
        {"domain", {"shape", "a", "b", "L", "r_max", "layout", "resolution"}},
        {"problem",
         {"family", "c", "beta", "n", "k", "k_sigma", "k11", "k12", "k22", "fx", "fy", "fr", "F0",
          "phi_beta", "g0", "g1", "psi", "psi_value", "psi_R", "psi_ax", "psi_ay", "t"}},
        {"solver",
         {"mode", "t0", "ratio", "t_min", "max_insertions", "converge_tol", "blow_up_factor",
          "stop_on_blow_up", "polish", "newton_tol", "max_iter", "monitor_x", "monitor_y",
          "monitor_radius"}},
        {"output", {"directory", "formats"}},
        {"sweep", {"param1", "values1", "param2", "values2"}},
    };
    return schema;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string RunConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return sections.at(section).at(key);
}

double RunConfig::number(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return to_number(get(section, key, ""), section + "." + key);
}

int RunConfig::integer(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    double v = number(section, key, 0.0);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        config_error(section + "." + key + ": not an integer");
    return static_cast<int>(v);
}

bool RunConfig::flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    config_error(section + "." + key + ": not a boolean: '" + v + "'");
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    const auto& schema = config_schema();
    auto s = schema.find(section);
    if (s == schema.end()) config_error("unknown section [" + section + "]");
    if (std::find(s->second.begin(), s->second.end(), key) == s->second.end())
        config_error("unknown key '" + key + "' in [" + section + "]");
    sections[section][key] = value;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') config_error(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!config_schema().count(section)) config_error(where + ": unknown section [" + section + "]");
            c.sections[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) config_error(where + ": expected key = value");
        if (section.empty()) config_error(where + ": key outside a section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (c.has(section, key)) config_error(where + ": duplicate key '" + key + "'");
        const auto& keys = config_schema().at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            config_error(where + ": unknown key '" + key + "' in [" + section + "]");
        c.sections[section][key] = value;
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------- setup

RunSetup build_setup(const RunConfig& c) {
    RunSetup s;
    const std::string family = c.get("problem", "family", "");
    const std::string layout = c.get("domain", "layout", "grid");
    require_choice(layout, {"grid", "radial"}, "domain.layout");
    const int res = c.integer("domain", "resolution", 65);
    if (res < 17) config_error("domain.resolution must be at least 17");

    if (family == "counterexample") {
        if (c.sections.count("metric")) config_error("[metric]: the counterexample fixes its metric");
        for (const char* key : {"shape", "a", "b", "L", "r_max"})
            if (c.has("domain", key))
                config_error(std::string("domain.") + key + ": the counterexample fixes its domain");
        Counterexample ce = counterexample_problem(c.number("problem", "beta", 1.0),
                                                   c.integer("problem", "n", 2),
                                                   c.number("problem", "k", 0.0));
        if (ce.n != 2) config_error("problem.n: grid solves are two-dimensional");
        s.domain = ce.domain;
        s.problem = ce.problem;
        s.problem.t = c.number("problem", "t", 0.0);
    } else {
        for (const char* key : {"beta", "n", "k"})
            if (c.has("problem", key))
                config_error(std::string("problem.") + key + ": only used by the counterexample");
        s.domain = build_domain(c, build_metric(c));
        s.problem = build_problem(c, s.domain);
    }

    if (layout == "radial") {
        if (s.domain.shape() != Shape::disk && s.domain.shape() != Shape::polar_cap)
            config_error("domain.layout = radial needs a disk or polar_cap");
        Vec y(2);
        y << s.domain.a(), 0.0;
        s.layout = make_radial_field(s.domain.a(), res - 1, s.problem.psi ? s.problem.psi(y) : 0.0);
    } else if (s.domain.shape() == Shape::box_periodic) {
        s.layout = make_periodic_field(s.domain.a(), res);
    } else {
        double R = s.domain.shape() == Shape::annulus ? s.domain.b() : s.domain.a();
        s.layout = make_grid_field(s.domain, 2.0 * R / (res - 1), s.problem.psi);
    }

    const std::string mode = c.get("solver", "mode", "continuation");
    require_choice(mode, {"continuation", "newton"}, "solver.mode");
    s.mode = mode == "newton" ? SolveMode::newton : SolveMode::continuation;
    s.schedule.t0 = c.number("solver", "t0", s.schedule.t0);
    s.schedule.ratio = c.number("solver", "ratio", s.schedule.ratio);
    s.schedule.t_min = c.number("solver", "t_min", s.schedule.t_min);
    s.schedule.max_insertions = c.integer("solver", "max_insertions", s.schedule.max_insertions);
    s.schedule.converge_tol = c.number("solver", "converge_tol", s.schedule.converge_tol);
    s.schedule.blow_up_factor = c.number("solver", "blow_up_factor", s.schedule.blow_up_factor);
    s.schedule.stop_on_blow_up = c.flag("solver", "stop_on_blow_up", s.schedule.stop_on_blow_up);
    s.schedule.polish_at_zero = c.flag("solver", "polish", s.schedule.polish_at_zero);
    if (!(s.schedule.t0 > 0.0 && s.schedule.t_min > 0.0 && s.schedule.t_min <= s.schedule.t0))
        config_error("solver: need 0 < t_min <= t0");
    if (!(s.schedule.ratio > 0.0 && s.schedule.ratio < 1.0)) config_error("solver.ratio must lie in (0, 1)");
    s.newton.tol = c.number("solver", "newton_tol", 0.0);
    s.newton.max_iter = c.integer("solver", "max_iter", s.newton.max_iter);
    if (c.has("solver", "monitor_radius")) {
        Vec m(2);
        m << c.number("solver", "monitor_x", 0.0), c.number("solver", "monitor_y", 0.0);
        s.monitor_center = m;
        s.monitor_radius = c.number("solver", "monitor_radius", 0.0);
    } else if (c.has("solver", "monitor_x") || c.has("solver", "monitor_y")) {
        config_error("solver.monitor_x/monitor_y need solver.monitor_radius");
    }
    const std::string formats = c.get("output", "formats", "json,csv");
    for (const auto& f : split_list(formats)) require_choice(f, {"json", "csv"}, "output.formats");
    return s;
}

// ---------------------------------------------------------------- sweeps

Sweep parse_sweep(const RunConfig& config) {
    Sweep sw;
    for (int i = 1; i <= 2; ++i) {
        const std::string pk = "param" + std::to_string(i), vk = "values" + std::to_string(i);
        if (!config.has("sweep", pk)) {
            if (config.has("sweep", vk)) config_error("sweep." + vk + " without sweep." + pk);
            continue;
        }
        std::string param = config.get("sweep", pk, "");
        auto dot = param.find('.');
        if (dot == std::string::npos) config_error("sweep." + pk + ": expected section.key");
        std::string section = param.substr(0, dot), key = param.substr(dot + 1);
        if (section == "sweep" || section == "output") config_error("sweep." + pk + ": not sweepable");
        RunConfig probe;
        probe.set(section, key, "0");  // validates against the schema
        auto values = split_list(config.get("sweep", vk, ""));
        if (values.empty()) config_error("sweep." + vk + ": empty range");
        for (const auto& v : values) to_number(v, "sweep." + vk);
        sw.params.push_back(param);
        sw.values.push_back(values);
    }
    if (sw.params.empty()) config_error("[sweep] needs param1 and values1");
    return sw;
}

std::vector<RunConfig> Sweep::rows(const RunConfig& base) const {
    std::vector<RunConfig> out;
    std::size_t total = 1;
    for (const auto& v : values) total *= v.size();
    for (std::size_t r = 0; r < total; ++r) {
        RunConfig c = base;
        c.sections.erase("sweep");
        std::size_t rem = r;
        for (std::size_t p = params.size(); p-- > 0;) {
            const auto& v = values[p];
            auto dot = params[p].find('.');
            c.sections[params[p].substr(0, dot)][params[p].substr(dot + 1)] = v[rem % v.size()];
            rem /= v.size();
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace pmc

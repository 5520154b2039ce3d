#include "pmc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>

#include <fmt/format.h>

#include "pmc/cli.hpp"
#include "pmc/errors.hpp"
#include "pmc/oracles.hpp"

#ifndef PMC_CONFIG_DIR
#define PMC_CONFIG_DIR "configs"
#endif

namespace pmc {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Check make(std::string name, bool pass, double measured, double threshold, std::string detail,
           double seconds = 0.0) {
    return Check{std::move(name), pass, measured, threshold, std::move(detail), seconds};
}

bool in_band(double r, double lo, double hi) { return r >= lo && r <= hi; }

// Field on the grid embedding of `domain` holding `fn` on every active node.
Field sampled_field(const DomainChart& domain, double h, const std::function<double(const Vec&)>& fn) {
    Field f = make_grid_field(domain, h, fn);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            int k = f.index(i, j);
            if (f.active(k)) {
                auto p = f.point(i, j);
                f.values[k] = fn(vec2(p.x(), p.y()));
            }
        }
    return f;
}

// Fully active rectangular patch [x0, x0 + w] x [y0, y0 + w] with spacing h.
Field patch(double x0, double y0, double w, double h) {
    Field f;
    f.layout = Layout::grid2d;
    f.nx = f.ny = static_cast<int>(std::lround(w / h)) + 1;
    f.h = h;
    f.x0 = x0;
    f.y0 = y0;
    f.values.assign(f.size(), 0.0);
    f.kind.assign(f.size(), NodeKind::unknown);
    return f;
}

struct Solved {
    Discretization disc;
    NewtonResult nr;
};

Solved newton_on_grid(const DomainChart& domain, const PMCProblem& problem, double h,
                      NewtonOptions opts = {}) {
    Discretization disc(domain, problem, make_grid_field(domain, h, problem.psi));
    NewtonResult nr = newton_solve(disc, harmonic_extension(disc, disc.layout()), opts);
    return {std::move(disc), std::move(nr)};
}

std::string ratios_text(const std::vector<double>& r) {
    std::string s;
    for (double v : r) s += (s.empty() ? "" : ", ") + fmt::format("{:.3f}", v);
    return s;
}

// ---------------------------------------------------------------- criterion 1

std::vector<Check> cap_convergence() {
    auto t0 = Clock::now();
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    std::vector<double> err;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        Solved s = newton_on_grid(domain, cap.problem(), h);
        double e = 0.0;
        for (int k : s.disc.unknowns()) {
            auto p = s.nr.u.point(k % s.nr.u.nx, k / s.nr.u.nx);
            e = std::max(e, std::abs(s.nr.u.values[k] - cap.u(vec2(p.x(), p.y()))));
        }
        err.push_back(e);
    }
    double secs = since(t0);
    double ratio = err[0] / err[1];
    return {make("cap_error_h64", err[1] <= 2e-3, err[1], 2e-3,
                 fmt::format("max error {:.3e} at h = 1/64 (1/32: {:.3e})", err[1], err[0])),
            make("cap_richardson", in_band(ratio, 3.5, 4.5), ratio, 3.5,
                 fmt::format("error ratio 1/32 -> 1/64 = {:.3f}, band [3.5, 4.5]", ratio)),
            make("cap_runtime", secs <= 30.0, secs, 30.0, fmt::format("{:.2f} s (limit 30 s)", secs),
                 secs)};
}

// ---------------------------------------------------------------- criterion 2

Check flux_saturation_check() {
    Counterexample ce = counterexample_problem(1.0, 2);
    FluxAnalysis fa = flux_analysis(radial_reduce(ce.problem, ce.domain));
    double r = fa.saturation_radius.value_or(std::nan(""));
    bool ok = fa.saturation_radius && std::abs(r - 2.0) <= 1e-6;
    return make("flux_saturation_radius", ok, r, 2.0,
                fmt::format("saturation radius {:.9f} (target 2 +- 1e-6)", r));
}

std::vector<Check> nonexistence() {
    auto t0 = Clock::now();
    std::vector<Check> out{flux_saturation_check()};
    Counterexample ce = counterexample_problem(1.0, 2);

    // Radial layout: gradient growth inside the saturated region.
    {
        auto t1 = Clock::now();
        Discretization disc(ce.domain, ce.problem,
                            make_radial_field(ce.k, 30000, ce.problem.psi(vec2(ce.k, 0.0))));
        Schedule s;
        s.t_min = 1e-4;
        SolveReport rep = continuation(disc, s);
        GradientMonitor gm = gradient_monitor(disc, rep.u_final, Vec::Zero(2), 2.9);
        double t_last = rep.records.empty() ? 0.0 : rep.records.back().t;
        bool ok = gm.max_grad > 1e6 && t_last <= 1e-4 * (1 + 1e-9);
        out.push_back(make("radial_gradient_growth", ok, gm.max_grad, 1e6,
                           fmt::format("max |Du| = {:.4g} at r = {:.4f}, last t = {:.1e}", gm.max_grad,
                                       gm.location.size() ? gm.location(0) : 0.0, t_last),
                           since(t1)));
    }
    // 2D grid continuation: blow-up classification with a nonempty mask.
    {
        auto t1 = Clock::now();
        Discretization disc(ce.domain, ce.problem, make_grid_field(ce.domain, ce.k / 30, ce.problem.psi));
        Schedule s;
        s.t_min = 1e-4;
        SolveReport rep = continuation(disc, s);
        int cells = rep.omega_plus_cells + rep.omega_minus_cells;
        bool ok = rep.outcome == Outcome::blow_up && cells > 0;
        double tu = 0.0;
        for (const TRecord& r : rep.records) tu = std::max(tu, r.t * r.sup_u);
        out.push_back(make("grid_blow_up", ok, cells, 1.0,
                           fmt::format("outcome {} ({}), mask cells {}, max t sup|u| = {:.4f} vs "
                                       "threshold 0.5 beta2 = {:.4f}",
                                       to_string(rep.outcome), rep.reason, cells, tu,
                                       0.5 * rep.beta2),
                           since(t1)));
    }
    double secs = since(t0);
    out.push_back(make("nonexistence_runtime", secs <= 60.0, secs, 60.0,
                       fmt::format("{:.2f} s (limit 60 s)", secs), secs));
    return out;
}

// ---------------------------------------------------------------- criterion 3

std::vector<Check> counterexample_facts() {
    std::vector<Check> out;
    const std::pair<double, int> cases[] = {{1.0, 2}, {0.5, 2}, {2.0, 2}, {1.0, 3}, {2.0, 3}};
    for (auto [beta, n] : cases) {
        Counterexample ce = counterexample_problem(beta, n);
        std::string tag = fmt::format("beta={},n={}", beta, n);
        double H_inner = ce.sphere_mean_curvature((n - 1) / beta);
        out.push_back(make("sphere_H_at_(n-1)/beta " + tag, std::abs(H_inner - beta) <= 1e-8,
                           std::abs(H_inner - beta), 1e-8,
                           fmt::format("H = {:.12f}, expected {}", H_inner, beta)));
        double H_out = ce.H_boundary_M();
        out.push_back(make("boundary_H " + tag, std::abs(H_out - (n - 1) * ce.k) <= 1e-8,
                           std::abs(H_out - (n - 1) * ce.k), 1e-8,
                           fmt::format("H = {:.12f}, expected (n-1) k = {}", H_out, (n - 1) * ce.k)));
        // Euclidean ball volume from the closed forms pi r^2 and 4 pi r^3 / 3.
        double r = n / beta;
        double exact = n == 2 ? kPi * r * r : 4.0 * kPi * r * r * r / 3.0;
        double vol = ce.volume(r);
        double rel = std::abs(vol - exact) / exact;
        out.push_back(make("volume " + tag, rel <= 1e-6, rel, 1e-6,
                           fmt::format("vol = {:.10f}, ball = {:.10f}, rel err {:.2e}", vol, exact, rel)));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 4

std::vector<Check> regularized_bounds() {
    std::vector<Check> out;
    for (const std::string& path : shipped_converging_configs()) {
        auto t0 = Clock::now();
        std::string name = std::filesystem::path(path).stem().string();
        RunConfig config = load_config(path);
        RunResult res = run_config(config);
        const SolveReport& rep = res.solve;
        double worst = -1e300;
        for (const TRecord& r : rep.records) worst = std::max(worst, r.t * r.sup_u - rep.beta2);
        bool converged = rep.outcome == Outcome::converged;
        out.push_back(make("tu_beta2 " + name, converged && worst <= 1e-8, worst, 1e-8,
                           fmt::format("outcome {}, max(t sup|u| - beta2) = {:.4e} over {} levels "
                                       "(beta2 = {:.4g})",
                                       to_string(rep.outcome), worst, rep.records.size(), rep.beta2),
                           since(t0)));
        if (!res.setup.domain.has_boundary()) {
            double excess = -1e300;
            for (const TRecord& r : rep.records) excess = std::max(excess, r.sup_u - rep.alpha2.bound);
            bool ok = rep.alpha2.applicable && excess <= 1e-8;
            out.push_back(make("alpha2 " + name, ok, excess, 1e-8,
                               fmt::format("max sup|u| - alpha2 = {:.4e} (alpha2 = {:.4g})", excess,
                                           rep.alpha2.bound)));
        }
    }
    return out;
}

// ---------------------------------------------------------------- criterion 5

std::vector<Check> comparison_battery() {
    std::vector<Check> out;
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    const double h = 1.0 / 16;
    struct Family {
        std::string name;
        PMCProblem problem;
    };
    std::vector<Family> families;
    families.push_back({"cmc", make_cmc(1.0)});
    {
        ChartMetric m = domain.metric();
        families.push_back({"jang", make_jang(m, [m](const Vec& x) -> Mat { return 0.3 * m.sigma(x); })});
    }
    families.push_back({"linear_phi", make_linear_phi(0.5, 1.0, [](const Vec& x) { return 0.2 * x(0); })});

    using Fn = std::function<double(const Vec&)>;
    struct Pair {
        int family;
        Fn low, gap;  // high = low + gap, gap >= 0
    };
    const std::vector<Pair> pairs = {
        {0, [](const Vec&) { return 0.0; }, [](const Vec&) { return 0.1; }},
        {0, [](const Vec& x) { return 0.2 * x(0); }, [](const Vec& x) { return 0.05 + 0.1 * x(0) * x(0); }},
        {0, [](const Vec& x) { return 0.1 * x(1); }, [](const Vec&) { return 0.02; }},
        {0, [](const Vec&) { return -0.1; }, [](const Vec& x) { return 0.3 * x(0) * x(0); }},
        {1, [](const Vec&) { return 0.0; }, [](const Vec&) { return 0.1; }},
        {1, [](const Vec& x) { return 0.2 * x(1); }, [](const Vec& x) { return 0.05 + 0.1 * x(1) * x(1); }},
        {1, [](const Vec& x) { return 0.1 * x(0); }, [](const Vec&) { return 0.2; }},
        {2, [](const Vec&) { return 0.0; }, [](const Vec&) { return 0.1; }},
        {2, [](const Vec& x) { return 0.3 * x(0); }, [](const Vec& x) { return 0.01 + 0.05 * x(0) * x(0); }},
        {2, [](const Vec&) { return -0.2; }, [](const Vec&) { return 0.2; }},
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Pair& pr = pairs[i];
        const Family& fam = families[pr.family];
        PMCProblem lo = fam.problem, hi = fam.problem;
        lo.psi = pr.low;
        hi.psi = [low = pr.low, gap = pr.gap](const Vec& x) { return low(x) + gap(x); };
        try {
            Solved a = newton_on_grid(domain, lo, h);
            Solved b = newton_on_grid(domain, hi, h);
            ComparisonReport cr = comparison_check(b.disc, b.nr.u, a.nr.u,
                                                   std::max(a.nr.tolerance, b.nr.tolerance));
            out.push_back(make(fmt::format("comparison {} pair {}", fam.name, i), cr.pass,
                               cr.min_difference, -cr.tol_cmp,
                               fmt::format("min(u_high - u_low) = {:.4e}, tol_cmp = {:.1e}",
                                           cr.min_difference, cr.tol_cmp)));
        } catch (const PmcError& e) {
            out.push_back(make(fmt::format("comparison {} pair {}", fam.name, i), false, 0.0, 0.0, e.what()));
        }
    }
    // Same data from two initial guesses.
    for (const Family& fam : families) {
        PMCProblem p = fam.problem;
        p.psi = [](const Vec& x) { return 0.1 * x(0) - 0.05; };
        try {
            Discretization disc(domain, p, make_grid_field(domain, h, p.psi));
            NewtonOptions opts;
            opts.tol = 1e-12;
            Field init_a = harmonic_extension(disc, disc.layout());
            Field init_b = disc.layout();
            for (int k : disc.unknowns()) {
                auto q = init_b.point(k % init_b.nx, k / init_b.nx);
                init_b.values[k] = 0.3 * std::cos(3.0 * q.x()) * std::sin(2.0 * q.y()) + 0.2;
            }
            NewtonResult ra = newton_solve(disc, init_a, opts);
            NewtonResult rb = newton_solve(disc, init_b, opts);
            double diff = 0.0;
            for (int k : disc.unknowns()) diff = std::max(diff, std::abs(ra.u.values[k] - rb.u.values[k]));
            out.push_back(make("rerun " + fam.name, diff <= 1e-8, diff, 1e-8,
                               fmt::format("max |u_a - u_b| = {:.3e}", diff)));
        } catch (const PmcError& e) {
            out.push_back(make("rerun " + fam.name, false, 0.0, 1e-8, e.what()));
        }
    }
    return out;
}

// ---------------------------------------------------------------- criterion 6

std::vector<Check> theta_identity() {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    std::vector<double> res;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        Field u = sampled_field(domain, h, [&](const Vec& x) { return cap.u(x); });
        Field r = theta_identity_residual(domain.metric(), u, [&](const Vec&) { return cap.f; });
        double m = 0.0;
        for (int j = 0; j < r.ny; ++j)
            for (int i = 0; i < r.nx; ++i) {
                int k = r.index(i, j);
                if (r.is_unknown(k) && r.point(i, j).norm() <= 0.5 + 1e-12)
                    m = std::max(m, std::abs(r.values[k]));
            }
        res.push_back(m);
    }
    std::vector<Check> out;
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < res.size(); ++i) ratios.push_back(res[i] / res[i + 1]);
    bool ok = std::all_of(ratios.begin(), ratios.end(), [](double r) { return in_band(r, 3.5, 4.5); });
    double worst = *std::min_element(ratios.begin(), ratios.end());
    out.push_back(make("theta_identity_richardson", ok, worst, 3.5,
                       fmt::format("residuals {:.3e} {:.3e} {:.3e} {:.3e}; ratios {} (band [3.5, 4.5])",
                                   res[0], res[1], res[2], res[3], ratios_text(ratios))));
    return out;
}

// ---------------------------------------------------------------- criterion 7

std::vector<Check> q_field_checks() {
    std::vector<Check> out;
    struct Case {
        std::string name;
        DomainChart domain;
        PMCProblem problem;
        std::vector<double> hs;
    };
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    PMCProblem small = make_cmc(1.0);
    small.psi = [](const Vec&) { return 0.0; };
    std::vector<Case> cases = {
        {"cap", DomainChart::disk(ChartMetric::euclidean(2), 1.0), cap.problem(), {1.0 / 16, 1.0 / 32, 1.0 / 64}},
        {"cmc_disk_0.5", DomainChart::disk(ChartMetric::euclidean(2), 0.5), small, {1.0 / 32, 1.0 / 64, 1.0 / 128}},
    };
    for (const Case& c : cases) {
        std::vector<double> C;
        double sup = 0.0;
        for (double h : c.hs) {
            Solved s = newton_on_grid(c.domain, c.problem, h);
            QField q = q_field(s.disc, s.nr.u, [](const Vec&) { return 1.0; }, s.nr.tolerance,
                               0.2 * c.domain.a());
            sup = std::max(sup, q.sup_norm);
            C.push_back(q.div_residual_inf / (h * h));
        }
        std::vector<double> ratios;
        for (std::size_t i = 0; i + 1 < C.size(); ++i) ratios.push_back(C[i + 1] / C[i]);
        // O(h^2) means C must not grow; a shrinking C is faster convergence.
        bool stable = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r <= 1.25; });
        out.push_back(make("q_sup_norm " + c.name, sup < 1.0, sup, 1.0,
                           fmt::format("sup <Q, Q> = {:.6f}, margin {:.6f}", sup, 1.0 - sup)));
        out.push_back(make("q_div_constant " + c.name, stable,
                           *std::max_element(ratios.begin(), ratios.end()), 1.25,
                           fmt::format("C = |div Q - f|/h^2 = {:.4f} {:.4f} {:.4f}; ratios {} (growth limit 1.25)",
                                       C[0], C[1], C[2], ratios_text(ratios))));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 8

std::vector<Check> barrier_containment() {
    std::vector<Check> out;
    struct Case {
        std::string name;
        DomainChart domain;
        PMCProblem problem;
        double ext;  // constant boundary extension
        double h;
    };
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    PMCProblem small = make_cmc(1.0);
    small.psi = [](const Vec&) { return 0.0; };
    std::vector<Case> cases = {
        {"cap", DomainChart::disk(ChartMetric::euclidean(2), 1.0), cap.problem(), -std::sqrt(3.0), 1.0 / 64},
        {"cmc_disk_0.5", DomainChart::disk(ChartMetric::euclidean(2), 0.5), small, 0.0, 1.0 / 128},
    };
    for (const Case& c : cases) {
        try {
            BoundaryExtension ext;
            ext.value = [v = c.ext](const Vec&) { return v; };
            ext.grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
            ext.hess = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
            // Height bound: both graphs lie inside a sphere of radius n / c = 2.
            BarrierConstants bc = barrier_constants(2.0, ext, c.problem, c.domain);
            Solved s = newton_on_grid(c.domain, c.problem, c.h);
            BarrierReport br = barrier_check(s.disc, s.nr.u, ext.value, bc.kappa, bc.nu, bc.d0);
            out.push_back(make("barrier " + c.name, br.pass, br.worst_violation, 0.0,
                               fmt::format("kappa {:.4g}, nu {:.4g}, d0 {:.4g}, {} collar nodes, worst "
                                           "violation {:.3e}",
                                           bc.kappa, bc.nu, bc.d0, br.checked_nodes, br.worst_violation)));
        } catch (const PmcError& e) {
            out.push_back(make("barrier " + c.name, false, 0.0, 0.0, e.what()));
        }
    }
    return out;
}

// ---------------------------------------------------------------- criterion 9

std::vector<Check> slice_formula() {
    std::vector<Check> out;
    double worst = 0.0;
    std::string detail;
    for (int n : {2, 3}) {
        ChartMetric metric = ChartMetric::conformal_product(n + 1, warp_cosh());
        for (double t : {0.25, 0.5, 1.0}) {
            DomainChart slab = DomainChart::half_space(metric, t);
            Vec y = Vec::Zero(n + 1);
            y(0) = 0.3;
            y(n) = t;
            double Hs = slice_mean_curvature(metric.warp(), n, t);
            double Hb = boundary_mean_curvature(slab, metric, y);
            worst = std::max(worst, std::abs(Hs - Hb));
            detail += fmt::format("{}n={} t={}: {:.10f} vs {:.10f}", detail.empty() ? "" : "; ", n, t, Hs, Hb);
        }
    }
    out.push_back(make("slice_mean_curvature", worst <= 1e-6, worst, 1e-6, detail));
    return out;
}

// ---------------------------------------------------------------- geometry extras

// Richardson ratios of a nodal error on a sequence of patches.
Check divergence_rate(const std::string& name, const ChartMetric& metric, double x0, double y0,
                      double w, const std::function<Vec(const Vec&)>& W,
                      const std::function<double(const Vec&)>& exact) {
    std::vector<double> err;
    for (double h : {w / 8, w / 16, w / 32}) {
        Field f = patch(x0, y0, w, h);
        std::vector<double> Wx(f.size()), Wy(f.size());
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                auto p = f.point(i, j);
                Vec v = W(vec2(p.x(), p.y()));
                Wx[f.index(i, j)] = v(0);
                Wy[f.index(i, j)] = v(1);
            }
        // Compare on the coarse interior nodes, which every grid shares.
        int step = static_cast<int>(std::lround(w / 8 / h));
        double e = 0.0;
        for (int j = step; j < f.ny - step; j += step)
            for (int i = step; i < f.nx - step; i += step) {
                auto p = f.point(i, j);
                e = std::max(e, std::abs(covariant_divergence(metric, f, Wx, Wy, i, j) - exact(vec2(p.x(), p.y()))));
            }
        err.push_back(e);
    }
    std::vector<double> ratios = {err[0] / err[1], err[1] / err[2]};
    bool ok = in_band(ratios[0], 3.5, 4.5) && in_band(ratios[1], 3.5, 4.5);
    return make("div_richardson " + name, ok, std::min(ratios[0], ratios[1]), 3.5,
                fmt::format("errors {:.3e} {:.3e} {:.3e}; ratios {}", err[0], err[1], err[2],
                            ratios_text(ratios)));
}

std::vector<Check> geometry_extras() {
    std::vector<Check> out;
    // Euclidean: div(Du/omega) of the cap equals n / R = 1.
    {
        CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
        auto W = [&](const Vec& x) -> Vec { return cap.grad(x) / std::sqrt(1.0 + cap.grad(x).squaredNorm()); };
        out.push_back(divergence_rate("euclidean cap", ChartMetric::euclidean(2), -0.5, -0.5, 1.0, W,
                                      [](const Vec&) { return 1.0; }));
    }
    // Conformal phi(y)^2 (dx^2 + dy^2): div W = (phi^-2) d_i(phi^2 W^i) for W = (x^2, y^2).
    {
        auto W = [](const Vec& x) { return vec2(x(0) * x(0), x(1) * x(1)); };
        out.push_back(divergence_rate("conformal cosh", ChartMetric::conformal_product(2, warp_cosh()),
                                      -0.5, 0.2, 1.0, W, [](const Vec& x) {
                                          return 2 * x(0) + 2 * x(1) + 2 * x(1) * x(1) * std::tanh(x(1));
                                      }));
        out.push_back(divergence_rate("conformal inverse", ChartMetric::conformal_product(2, warp_inverse()),
                                      -0.5, 1.0, 1.0, W, [](const Vec& x) { return 2 * x(0); }));
    }
    // Warped h(r)^2 dtheta^2 + dr^2 in the pole chart: div(r d_r) = 1 + r h'/h.
    {
        Warp hw = warp_counterexample(1.0, 2, 3.0);
        auto W = [](const Vec& x) { return Vec(x); };
        out.push_back(divergence_rate("spherical_warped bridge", ChartMetric::spherical_warped(2, hw), 2.2,
                                      -0.3, 0.6, W, [hw](const Vec& x) {
                                          double r = x.norm();
                                          return 1.0 + r * hw.df(r) / hw.f(r);
                                      }));
    }
    // Hyperbolic half plane: Ric = -sigma.
    {
        ChartMetric hyp = ChartMetric::conformal_product(2, warp_inverse());
        Vec x = vec2(0.3, 1.7);
        double e = (hyp.ricci(x) + hyp.sigma(x)).cwiseAbs().maxCoeff();
        out.push_back(make("ricci hyperbolic", e <= 1e-6, e, 1e-6, fmt::format("|Ric + sigma| = {:.3e}", e)));
    }
    // Cap graph: H = 1 and |A|^2 = 2 / R^2 at the centre.
    {
        CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
        DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
        Field u = sampled_field(domain, 1.0 / 64, [&](const Vec& x) { return cap.u(x); });
        int c = u.nx / 2;
        GraphGeometry gg = graph_geometry(domain.metric(), u, c, c);
        double e = std::max(std::abs(gg.H - 1.0), std::abs(gg.A2 - 0.5));
        out.push_back(make("cap second form", e <= 1e-3, e, 1e-3,
                           fmt::format("H = {:.6f}, |A|^2 = {:.6f}", gg.H, gg.A2)));
    }
    return out;
}

// Hypothesis checks on the shipped boundary problems.
std::vector<Check> hypothesis_checks() {
    std::vector<Check> out;
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart disk = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    SerrinReport sr = serrin_condition_check(cap.problem(), disk, 64);
    out.push_back(make("serrin cap", sr.holds, sr.worst_margin, 0.0,
                       fmt::format("worst margin H - |f| = {:.6f}", sr.worst_margin)));
    Counterexample ce = counterexample_problem(1.0, 2);
    SerrinReport sc = serrin_condition_check(ce.problem, ce.domain, 64);
    out.push_back(make("serrin counterexample", sc.holds, sc.worst_margin, 0.0,
                       fmt::format("worst margin = {:.6f} (H = (n-1) k = {})", sc.worst_margin, ce.k)));
    double beta2 = beta2_bound(cap.problem(), disk);
    out.push_back(make("beta2 cmc", std::abs(beta2 - 1.0) <= 1e-12, beta2, 1.0,
                       fmt::format("beta2 = {:.12f} for |F| = 1", beta2)));
    return out;
}

const std::vector<std::string> kSuites = {"geometry", "oracles", "bounds", "nonexistence", "all"};

}  // namespace

const std::vector<std::string>& verify_suite_names() { return kSuites; }

std::string shipped_config_dir() { return PMC_CONFIG_DIR; }

std::vector<std::string> shipped_converging_configs() {
    std::vector<std::string> out;
    namespace fs = std::filesystem;
    for (const auto& e : fs::directory_iterator(shipped_config_dir())) {
        std::string stem = e.path().stem().string();
        if (e.path().extension() != ".ini") continue;
        if (stem.rfind("counterexample", 0) == 0 || stem.rfind("sweep", 0) == 0) continue;
        out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Check> run_verify_suite(const std::string& suite) {
    if (std::find(kSuites.begin(), kSuites.end(), suite) == kSuites.end())
        throw PmcError(ErrorCode::ConfigError, "unknown verify suite '" + suite + "'");
    std::vector<Check> out;
    auto add = [&](std::vector<Check> v) {
        for (auto& c : v) out.push_back(std::move(c));
    };
    auto timed = [&](const std::function<std::vector<Check>()>& f) {
        auto t0 = Clock::now();
        auto v = f();
        double s = since(t0);
        for (auto& c : v)
            if (c.seconds == 0.0) c.seconds = s / v.size();
        add(std::move(v));
    };
    const bool all = suite == "all";
    if (all || suite == "geometry") {
        timed(geometry_extras);
        timed(counterexample_facts);
        timed(slice_formula);
    }
    if (all || suite == "oracles") {
        timed(cap_convergence);
        timed([] { return std::vector<Check>{flux_saturation_check()}; });
        timed(theta_identity);
        timed(q_field_checks);
        timed(barrier_containment);
    }
    if (all || suite == "bounds") {
        timed(hypothesis_checks);
        timed(regularized_bounds);
        timed(comparison_battery);
    }
    if (all || suite == "nonexistence") timed(nonexistence);
    return out;
}

Check acceptance_criterion(int index) {
    static const std::vector<std::pair<std::string, std::function<std::vector<Check>()>>> table = {
        {"spherical-cap convergence", cap_convergence},
        {"nonexistence reproduction", nonexistence},
        {"counterexample geometry facts", counterexample_facts},
        {"regularized a-priori bounds", regularized_bounds},
        {"comparison and uniqueness battery", comparison_battery},
        {"theta identity oracle", theta_identity},
        {"Q-field equivalence", q_field_checks},
        {"barrier containment", barrier_containment},
        {"slice mean curvature formula", slice_formula},
    };
    if (index < 1 || index > static_cast<int>(table.size()))
        throw PmcError(ErrorCode::InvalidArgument, "criterion index out of range");
    const auto& [title, fn] = table[index - 1];
    auto t0 = Clock::now();
    Check c;
    c.name = fmt::format("criterion {}: {}", index, title);
    std::vector<Check> subs;
    try {
        subs = fn();
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("error: ") + e.what();
        c.seconds = since(t0);
        return c;
    }
    c.pass = !subs.empty();
    for (const Check& s : subs) {
        c.pass = c.pass && s.pass;
        c.detail += (c.detail.empty() ? "" : " | ") + std::string(s.pass ? "" : "[FAIL] ") + s.name +
                    ": " + s.detail;
    }
    c.seconds = since(t0);
    return c;
}

}  // namespace pmc

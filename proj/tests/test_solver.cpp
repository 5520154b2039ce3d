#include <cmath>

#include "doctest.h"
#include "pmc/errors.hpp"
#include "pmc/oracles.hpp"
#include "pmc/solver.hpp"

using namespace pmc;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const PmcError& e) {
        return e.code();
    }
    FAIL("no PmcError thrown");
    return ErrorCode::InvalidArgument;
}

Discretization grid_disc(const DomainChart& domain, const PMCProblem& p, double h) {
    return Discretization(domain, p, make_grid_field(domain, h, p.psi));
}

double max_error(const Discretization& disc, const Field& u, const CapOracle& cap) {
    double e = 0.0;
    for (int k : disc.unknowns()) {
        auto p = u.point(k % u.nx, k / u.nx);
        e = std::max(e, std::abs(u.values[k] - cap.u(v2(p.x(), p.y()))));
    }
    return e;
}

}  // namespace

TEST_CASE("newton recovers the spherical cap") {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    double prev = 0.0;
    for (double h : {1.0 / 16, 1.0 / 32}) {
        Discretization disc = grid_disc(domain, cap.problem(), h);
        NewtonResult nr = newton_solve(disc, harmonic_extension(disc, disc.layout()));
        CHECK(nr.residual_inf <= nr.tolerance);
        CHECK(nr.iterations <= 20);
        double e = max_error(disc, nr.u, cap);
        CHECK(e < 1e-3);
        if (prev > 0.0) CHECK(prev / e > 1.8);
        prev = e;
    }
}

TEST_CASE("newton tolerance follows the data scale") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 0.5);
    PMCProblem p = make_cmc(4.0);
    p.psi = [](const Vec&) { return 0.0; };
    Discretization disc = grid_disc(domain, p, 1.0 / 16);
    CHECK(disc.data_scale() == doctest::Approx(4.0));
    CHECK(newton_tolerance(disc) == doctest::Approx(5e-10));
}

TEST_CASE("newton reports a stall when the iteration budget is exhausted") {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Discretization disc = grid_disc(domain, cap.problem(), 1.0 / 16);
    NewtonOptions opts;
    opts.max_iter = 1;
    CHECK(code_of([&] { newton_solve(disc, harmonic_extension(disc, disc.layout()), opts); }) ==
          ErrorCode::NewtonStall);
}

TEST_CASE("continuation converges with empty blow-up sets on a small disk") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 0.5);
    PMCProblem p = make_cmc(1.0);
    p.psi = [](const Vec&) { return 0.0; };
    Discretization disc = grid_disc(domain, p, 1.0 / 16);
    SolveReport rep = continuation(disc);
    CHECK(rep.outcome == Outcome::converged);
    CHECK(rep.omega_plus_cells == 0);
    CHECK(rep.omega_minus_cells == 0);
    CHECK(rep.polished);
    REQUIRE(rep.records.size() >= 2);
    for (std::size_t i = 1; i < rep.records.size(); ++i) CHECK(rep.records[i].t < rep.records[i - 1].t);
    for (const TRecord& r : rep.records) CHECK(r.t * r.sup_u <= rep.beta2 + 1e-8);
    CHECK(rep.tu_beta2.pass);
    CHECK(std::string(to_string(rep.outcome)) == "converged");
}

TEST_CASE("blow-up sets need two levels and use both thresholds") {
    CHECK(code_of([] { detect_blow_up_sets({}, 1.0); }) == ErrorCode::InsufficientHistory);
    Field f = make_periodic_field(1.0, 9);
    LevelState a{0.1, f}, b{0.05, f};
    // Thresholds 0.5 / t: 5 at t = 0.1 and 10 at t = 0.05.
    a.u.values[0] = 6;
    b.u.values[0] = 11;
    a.u.values[1] = 6;
    b.u.values[1] = 9;
    a.u.values[2] = -6;
    b.u.values[2] = -12;
    BlowUpSets s = detect_blow_up_sets({a, b}, 1.0, 0.5);
    CHECK(s.plus_count == 1);
    CHECK(s.plus[0] == 1);
    CHECK(s.plus[1] == 0);
    CHECK(s.minus_count == 1);
    CHECK(s.minus[2] == 1);
}

TEST_CASE("comparison principle on ordered boundary data") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 0.5);
    PMCProblem hi = make_cmc(0.0), lo = make_cmc(0.0);
    hi.t = lo.t = 0.01;
    hi.psi = [](const Vec&) { return 1.0; };
    lo.psi = [](const Vec&) { return 0.0; };
    Discretization dh = grid_disc(domain, hi, 1.0 / 16);
    Discretization dl = grid_disc(domain, lo, 1.0 / 16);
    NewtonResult uh = newton_solve(dh, harmonic_extension(dh, dh.layout()));
    NewtonResult ul = newton_solve(dl, harmonic_extension(dl, dl.layout()));
    ComparisonReport cr = comparison_check(dh, uh.u, ul.u, uh.tolerance);
    CHECK(cr.pass);
    CHECK(cr.min_difference > 0.5);
    CHECK(cr.tol_cmp == doctest::Approx(10.0 * uh.tolerance / 0.01));

    // Identical data: the difference is zero up to tol_cmp.
    ComparisonReport same = comparison_check(dh, uh.u, uh.u, uh.tolerance);
    CHECK(same.pass);
    CHECK(same.min_difference == 0.0);

    // A perturbed field is not a solution.
    Field bad = uh.u;
    bad.values[dh.unknowns()[dh.num_unknowns() / 2]] += 0.1;
    CHECK(code_of([&] { comparison_check(dh, bad, ul.u, uh.tolerance); }) == ErrorCode::NotSolutions);
}

TEST_CASE("barrier and monitor argument validation") {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Discretization disc = grid_disc(domain, cap.problem(), 1.0 / 16);
    Field u = disc.layout();
    CHECK(code_of([&] { barrier_check(disc, u, cap.psi(), 1.0, 1.0, 1.0 / 32); }) == ErrorCode::CollarEmpty);
    // A huge barrier always contains the exact cap.
    NewtonResult nr = newton_solve(disc, harmonic_extension(disc, u));
    BarrierReport br = barrier_check(disc, nr.u, cap.psi(), 1e6, 1.0, 0.25);
    CHECK(br.pass);
    CHECK(br.checked_nodes > 0);

    CHECK(code_of([&] { gradient_monitor(disc, nr.u, v2(0.9, 0.0), 0.3); }) == ErrorCode::BallOutsideDomain);
    GradientMonitor gm = gradient_monitor(disc, nr.u, v2(0.0, 0.0), 0.5);
    // |Du| of the cap at |x| <= 0.5 is at most 0.5 / sqrt(3.75).
    CHECK(gm.max_grad <= 0.5 / std::sqrt(3.75) + 1e-2);
    CHECK(gm.max_grad > 0.2);
}

TEST_CASE("a priori bounds") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    PMCProblem cmc = make_cmc(1.0);
    cmc.psi = [](const Vec&) { return 0.0; };
    CHECK(beta2_bound(cmc, domain) == doctest::Approx(1.0));
    CHECK(code_of([&] { apriori_bounds(cmc, domain); }) == ErrorCode::ZeroBeta);

    PMCProblem lin = make_linear_phi(1.0, 2.0, [](const Vec& x) { return 0.5 * x(0); });
    lin.psi = [](const Vec& x) { return x(1); };
    AprioriBounds ab = apriori_bounds(lin, domain);
    CHECK(ab.has_alpha1);
    // Sampled sup of (|F| + |phi(x, 0)|) / beta + 1 approaches 1 + 1.5 / 2 from below.
    CHECK(ab.alpha2 == doctest::Approx(1.75).epsilon(1e-3));
    CHECK(ab.alpha1 >= ab.alpha2);
    CHECK(ab.beta2 >= 1.0);
}

TEST_CASE("second fundamental form of a plane vanishes") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    PMCProblem p = make_cmc(0.0);
    p.psi = [](const Vec& x) { return 0.3 * x(0) - 0.2 * x(1); };
    Discretization disc = grid_disc(domain, p, 1.0 / 16);
    Field u = disc.layout();
    for (int k : disc.unknowns()) {
        auto q = u.point(k % u.nx, k / u.nx);
        u.values[k] = p.psi(v2(q.x(), q.y()));
    }
    CHECK(max_second_form(disc, u) < 1e-20);
    auto mask = monitored_mask(disc);
    int monitored = 0;
    for (auto m : mask) monitored += m;
    CHECK(monitored > 0);
    CHECK(monitored < disc.num_unknowns());
}

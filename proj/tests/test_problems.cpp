#include <cmath>

#include "doctest.h"
#include "pmc/discretization.hpp"
#include "pmc/errors.hpp"
#include "pmc/oracles.hpp"
#include "pmc/problems.hpp"

using namespace pmc;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

std::vector<Vec> probe_slopes() {
    return {v2(0, 0), v2(0.3, -0.4), v2(-0.9, 0.1), v2(0.5, 0.5)};
}

}  // namespace

TEST_CASE("cmc family") {
    PMCProblem p0 = make_cmc(0.0);
    for (const Vec& X : probe_slopes()) CHECK(p0.F(v2(0.1, 0.2), X, 0.7) == 0.0);
    PMCProblem p = make_cmc(1.5);
    CHECK(p.family == "cmc");
    for (const Vec& X : probe_slopes()) {
        CHECK(std::abs(p.F(v2(0.3, 0.1), X, 0.4)) == 1.5);
        CHECK(p.f(v2(0.3, 0.1), X) == p.F(v2(0.3, 0.1), X, 0.0));
        CHECK(p.phi(v2(0.3, 0.1), 2.0, X, 0.4) == 0.0);
    }
    CHECK(p.needs_continuation());
    p.t = 0.1;
    CHECK_FALSE(p.needs_continuation());
}

TEST_CASE("jang family") {
    ChartMetric e = ChartMetric::euclidean(2);
    PMCProblem zero = make_jang(e, [](const Vec&) { return Mat(Mat::Zero(2, 2)); });
    for (const Vec& X : probe_slopes()) CHECK(zero.F(v2(0.2, 0.2), X, 0.5) == 0.0);

    SUBCASE("k = sigma gives n - |X|^2") {
        for (const ChartMetric& m : {e, ChartMetric::conformal_product(2, warp_cosh())}) {
            PMCProblem p = make_jang(m, [m](const Vec& x) -> Mat { return m.sigma(x); });
            for (const Vec& X : probe_slopes()) {
                Vec x = v2(0.2, 0.7);
                CHECK(p.F(x, X, 0.3) == doctest::Approx(2.0 - X.dot(m.sigma(x) * X)).epsilon(1e-13));
            }
        }
    }
    SUBCASE("k = diag(1, -1)") {
        PMCProblem p = make_jang(e, [](const Vec&) {
            Mat k = Mat::Zero(2, 2);
            k(0, 0) = 1;
            k(1, 1) = -1;
            return k;
        });
        for (const Vec& X : probe_slopes())
            CHECK(p.F(v2(0, 0), X, 1.0) == doctest::Approx(-X(0) * X(0) + X(1) * X(1)));
    }
}

TEST_CASE("conformal family") {
    auto factor = [](Vec gx, double dr) {
        ConformalFactor c;
        c.grad_x = [gx](const Vec&) { return gx; };
        c.d_r = [dr](const Vec&, double) { return dr; };
        return c;
    };
    PMCProblem cst = make_conformal_minimal(factor(v2(0, 0), 0.0), 2);
    PMCProblem translator = make_conformal_minimal(factor(v2(0, 0), 1.0), 2);
    PMCProblem tilt = make_conformal_minimal(factor(v2(1, 0), 0.0), 2);
    for (const Vec& X : probe_slopes()) {
        CHECK(cst.F(v2(0.1, 0.1), X, 0.5) == 0.0);
        CHECK(cst.phi(v2(0.1, 0.1), 0.3, X, 0.5) == 0.0);
        CHECK(translator.F(v2(0.1, 0.1), X, 0.5) == 0.0);
        CHECK(translator.phi(v2(0.1, 0.1), -4.0, X, 0.5) == 2.0);
        CHECK(tilt.F(v2(0.1, 0.1), X, 0.5) == doctest::Approx(-2.0 * X(0)));
    }
}

TEST_CASE("linear phi family") {
    PMCProblem p = make_linear_phi(0.5, 2.0, [](const Vec& x) { return x(0); });
    CHECK(p.dphi_dz_lower_bound == 2.0);
    CHECK(p.phi(v2(0.3, 0), 1.5, v2(0, 0), 1.0) == doctest::Approx(3.3));
    CHECK_FALSE(p.needs_continuation());
    CHECK_THROWS_AS(make_linear_phi(0.0, -1.0, [](const Vec&) { return 0.0; }), PmcError);
}

TEST_CASE("serrin condition on Euclidean disks with |f| = 1") {
    PMCProblem p = make_cmc(1.0);
    auto margin = [&](double a, int samples) {
        return serrin_condition_check(p, DomainChart::disk(ChartMetric::euclidean(2), a), samples);
    };
    SerrinReport r1 = margin(1.0, 32);
    CHECK(r1.holds);
    CHECK(r1.worst_margin == doctest::Approx(0.0));
    CHECK(margin(0.5, 32).worst_margin == doctest::Approx(1.0));
    SerrinReport r2 = margin(2.0, 32);
    CHECK_FALSE(r2.holds);
    CHECK(r2.worst_margin == doctest::Approx(-0.5));
    // Refinement invariance on an analytic domain.
    CHECK(std::abs(margin(0.7, 32).worst_margin - margin(0.7, 64).worst_margin) < 1e-8);
    CHECK_THROWS_AS(serrin_condition_check(p, DomainChart::box_periodic(ChartMetric::euclidean(2), 1.0), 8),
                    PmcError);
}

TEST_CASE("sufficient existence condition") {
    PMCProblem p = make_cmc(1.0);
    NcfReport small = ncf_sufficient_check(p, DomainChart::disk(ChartMetric::euclidean(2), 0.5));
    CHECK(small.satisfied);
    CHECK(small.branch == "2a");
    CHECK(small.mu == doctest::Approx(1.0));
    NcfReport unit = ncf_sufficient_check(p, DomainChart::disk(ChartMetric::euclidean(2), 1.0));
    CHECK_FALSE(unit.satisfied);
    CHECK_FALSE(unit.condition1);
    Counterexample ce = counterexample_problem(1.0, 2);
    CHECK_FALSE(ncf_sufficient_check(ce.problem, ce.domain).satisfied);
}

TEST_CASE("counterexample geometry") {
    for (auto [beta, n] : {std::pair{1.0, 2}, {2.0, 3}, {0.5, 2}}) {
        Counterexample ce = counterexample_problem(beta, n);
        CHECK(ce.k > std::max(beta, n / beta));
        CHECK(ce.H_boundary_M() == doctest::Approx((n - 1) * ce.k).epsilon(1e-10));
        CHECK(ce.H_boundary_M() > beta);
        CHECK(ce.sphere_mean_curvature((n - 1) / beta) == doctest::Approx(beta).epsilon(1e-10));
        double r = n / beta;
        double ball = n == 2 ? kPi * r * r : 4.0 * kPi * r * r * r / 3.0;
        CHECK(ce.volume(r) == doctest::Approx(ball).epsilon(1e-8));
        CHECK(ce.euclidean_ball_volume(r) == doctest::Approx(ball).epsilon(1e-12));
        // The warp is positive and smooth across the bridge.
        const Warp& h = ce.metric.warp();
        for (double s = 0.05; s < ce.k; s += 0.01) CHECK(h.f(s) > 0.0);
        for (double s : {n / beta, ce.k}) {
            double e = 1e-6;
            CHECK(h.df(s) == doctest::Approx((h.f(s + e) - h.f(s - e)) / (2 * e)).epsilon(1e-6));
        }
    }
    // Flux saturation radius n / beta for beta = 2, n = 3.
    Counterexample ce = counterexample_problem(2.0, 3);
    FluxAnalysis fa = flux_analysis(radial_reduce(ce.problem, ce.domain));
    REQUIRE(fa.saturation_radius.has_value());
    CHECK(*fa.saturation_radius == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("domain chart invariants") {
    Counterexample ce = counterexample_problem(1.0, 2);
    std::vector<DomainChart> domains = {
        DomainChart::disk(ChartMetric::euclidean(2), 0.8),
        DomainChart::annulus(ChartMetric::euclidean(2), 0.3, 1.0),
        DomainChart::disk(ChartMetric::conformal_product(2, warp_cosh()), 0.7),
        ce.domain,
    };
    for (const DomainChart& d : domains) {
        for (const Vec& y : d.boundary_samples(24)) {
            CHECK(std::abs(d.d(y)) < 1e-12);
            Vec g = d.gamma(y);
            CHECK(g.dot(d.metric().sigma(y) * g) == doctest::Approx(1.0).epsilon(1e-8));
        }
        for (const Vec& x : d.interior_samples(24, 3)) {
            CHECK(d.d(x) >= 0.0);
            CHECK(d.inside(x) == (d.d(x) > 0.0));
            if (d.d(x) < d.collar()) CHECK(d.grad_d(x).norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(d.interior_samples(16, 5).front() == d.interior_samples(16, 5).front());
    }
    DomainChart torus = DomainChart::box_periodic(ChartMetric::euclidean(2), 1.0);
    CHECK_FALSE(torus.has_boundary());
    CHECK_THROWS_AS(torus.boundary_samples(4), PmcError);
    CHECK_THROWS_AS(torus.H_boundary(v2(0, 0)), PmcError);
}

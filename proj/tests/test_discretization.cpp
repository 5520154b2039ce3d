#include <cmath>
#include <set>

#include "doctest.h"
#include "pmc/discretization.hpp"
#include "pmc/errors.hpp"
#include "pmc/oracles.hpp"

using namespace pmc;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

// Grid field holding the exact cap on every active node.
Field cap_field(const DomainChart& domain, const CapOracle& cap, double h) {
    Field f = make_grid_field(domain, h, cap.psi());
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            int k = f.index(i, j);
            if (!f.active(k)) continue;
            auto p = f.point(i, j);
            f.values[k] = cap.u(v2(p.x(), p.y()));
        }
    return f;
}

// max |residual| over unknowns at distance >= dmin from the boundary.
double interior_truncation(double h, double dmin) {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Field u = cap_field(domain, cap, h);
    Discretization disc(domain, cap.problem(), u);
    Field r = assemble_residual(disc, u);
    double worst = 0.0;
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            int k = u.index(i, j);
            auto p = u.point(i, j);
            if (u.is_unknown(k) && domain.d(v2(p.x(), p.y())) >= dmin) worst = std::max(worst, std::abs(r.values[k]));
        }
    return worst;
}

}  // namespace

TEST_CASE("grid layout classifies nodes by the distance function") {
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Field f = make_grid_field(domain, 1.0 / 8, [](const Vec&) { return 3.0; });
    int unknowns = 0, dirichlet = 0;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            int k = f.index(i, j);
            auto p = f.point(i, j);
            double d = domain.d(v2(p.x(), p.y()));
            if (f.kind[k] == NodeKind::unknown) {
                ++unknowns;
                CHECK(d > 0.0);
            } else if (f.kind[k] == NodeKind::dirichlet) {
                ++dirichlet;
                CHECK(d <= 0.0);
                CHECK(f.values[k] == 3.0);
            }
        }
    CHECK(unknowns > 0);
    CHECK(dirichlet > 0);
    // Every unknown has its four neighbours active.
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            if (f.is_unknown(f.index(i, j)))
                for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                    CHECK(f.active(f.node(i + di, j + dj)));
}

TEST_CASE("periodic and radial layouts") {
    Field p = make_periodic_field(1.0, 16);
    CHECK(p.size() == 256);
    CHECK(p.unknowns().size() == 256u);
    CHECK(p.node(-1, 0) == p.index(15, 0));
    CHECK(p.node(16, 17) == p.index(0, 1));

    Field r = make_radial_field(2.0, 10, -1.5);
    CHECK(r.nx == 11);
    CHECK(r.kind.back() == NodeKind::dirichlet);
    CHECK(r.values.back() == -1.5);
    CHECK(r.point(0, 0).x() == doctest::Approx(0.1));
    CHECK(r.point(10, 0).x() == doctest::Approx(2.0));
}

TEST_CASE("residual vanishes on constants for zero data") {
    DomainChart domain = DomainChart::disk(ChartMetric::conformal_product(2, warp_cosh()), 0.8);
    PMCProblem p = make_cmc(0.0);
    p.psi = [](const Vec&) { return 0.7; };
    Field u = make_grid_field(domain, 1.0 / 16, p.psi);
    for (int k : u.unknowns()) u.values[k] = 0.7;
    Discretization disc(domain, p, u);
    CHECK(disc.residual(u).lpNorm<Eigen::Infinity>() < 1e-13);
    // The zeroth-order term adds t u / omega.
    disc.set_t(0.5);
    Eigen::VectorXd r = disc.residual(u);
    for (int i = 0; i < r.size(); ++i) CHECK(r(i) == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("interior truncation error of the cap is second order") {
    double e1 = interior_truncation(1.0 / 16, 0.25);
    double e2 = interior_truncation(1.0 / 32, 0.25);
    double e3 = interior_truncation(1.0 / 64, 0.25);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
    CHECK(e2 / e3 >= 3.5);
    CHECK(e2 / e3 <= 4.5);
}

TEST_CASE("column colouring separates every row") {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Discretization disc(domain, cap.problem(), make_grid_field(domain, 1.0 / 16, cap.psi()));
    REQUIRE(disc.coloring().size() == static_cast<size_t>(disc.num_unknowns()));
    for (const auto& row : disc.dependencies()) {
        std::set<int> seen;
        for (int c : row) CHECK(seen.insert(disc.coloring()[c]).second);
    }
    CHECK(disc.num_colors() <= 25);
}

TEST_CASE("jacobian matches directional differences of the residual") {
    auto check = [](const DomainChart& domain, const PMCProblem& problem, Field u) {
        Discretization disc(domain, problem, u);
        int n = disc.num_unknowns();
        for (int idx = 0; idx < n; ++idx) u.values[disc.unknowns()[idx]] += 0.1 * std::sin(0.7 * idx);
        ResidualSystem sys = disc.jacobian(u);
        CHECK((sys.residual - disc.residual(u)).lpNorm<Eigen::Infinity>() == 0.0);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = std::cos(1.3 * i);
        double eps = 1e-6;
        Field up = u, um = u;
        disc.scatter(disc.gather(u) + eps * v, up);
        disc.scatter(disc.gather(u) - eps * v, um);
        Eigen::VectorXd fd = (disc.residual(up) - disc.residual(um)) / (2 * eps);
        Eigen::VectorXd jv = sys.jacobian * v;
        CHECK((fd - jv).lpNorm<Eigen::Infinity>() <= 1e-5 * (1.0 + fd.lpNorm<Eigen::Infinity>()));
    };
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart disk = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    check(disk, cap.problem(), make_grid_field(disk, 1.0 / 16, cap.psi()));

    PMCProblem phi = make_linear_phi(0.5, 1.0, [](const Vec& x) { return 0.2 * x(0); });
    DomainChart warped = DomainChart::disk(ChartMetric::conformal_product(2, warp_cosh()), 0.8);
    phi.psi = [](const Vec& x) { return 0.1 * x(1); };
    check(warped, phi, make_grid_field(warped, 1.0 / 16, phi.psi));

    DomainChart torus = DomainChart::box_periodic(ChartMetric::euclidean(2), 1.0);
    PMCProblem tp = make_linear_phi(0.0, 1.0, [](const Vec& x) { return std::cos(2 * 3.141592653589793 * x(0)); });
    check(torus, tp, make_periodic_field(1.0, 16));
}

TEST_CASE("zeroth-order diagonal is monotone for t > 0") {
    PMCProblem p = make_cmc(1.0);
    p.t = 0.2;
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 0.5);
    p.psi = [](const Vec&) { return 0.0; };
    Discretization disc(domain, p, make_grid_field(domain, 1.0 / 16, p.psi));
    ResidualSystem sys = disc.jacobian(disc.layout());
    CHECK(sys.diag_monotone);
    CHECK(sys.zeroth_order_diag.minCoeff() >= 0.2 - 1e-12);
}

TEST_CASE("non-finite fields are rejected") {
    CapOracle cap = spherical_cap_oracle(2.0, 1.0, 2);
    DomainChart domain = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    Field u = make_grid_field(domain, 1.0 / 16, cap.psi());
    Discretization disc(domain, cap.problem(), u);
    u.values[u.unknowns().front()] = std::nan("");
    CHECK_THROWS_AS(disc.residual(u), PmcError);
    try {
        disc.residual(u);
    } catch (const PmcError& e) {
        CHECK(e.code() == ErrorCode::DivergedField);
    }
}

TEST_CASE("radial reduction") {
    Counterexample ce = counterexample_problem(1.0, 2);
    RadialODE ode = radial_reduce(ce.problem, ce.domain);
    CHECK(ode.n == 2);
    CHECK(ode.r_max == doctest::Approx(ce.k));
    // Euclidean cmc(1) on disk(a): Phi(r) = r^2 / 2 relative to J = r.
    RadialODE flat = radial_reduce(make_cmc(1.0), DomainChart::disk(ChartMetric::euclidean(2), 1.0));
    for (double r : {0.2, 0.5, 0.9}) CHECK(flat.Phi(r) / flat.J(r) == doctest::Approx(r / 2).epsilon(1e-8));

    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const PmcError& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    DomainChart disk = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    PMCProblem phi = make_linear_phi(0.0, 1.0, [](const Vec&) { return 0.0; });
    CHECK(code_of([&] { radial_reduce(phi, disk); }) == ErrorCode::NotRadial);
    PMCProblem tilt = make_jang(ChartMetric::euclidean(2), [](const Vec&) {
        Mat k = Mat::Zero(2, 2);
        k(0, 0) = 1;
        return k;
    });
    CHECK(code_of([&] { radial_reduce(tilt, disk); }) == ErrorCode::NotRadial);
    DomainChart torus = DomainChart::box_periodic(ChartMetric::euclidean(2), 1.0);
    CHECK(code_of([&] { radial_reduce(make_cmc(1.0), torus); }) == ErrorCode::NotRadial);
}

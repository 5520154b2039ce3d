#include <cmath>
#include <functional>

#include "doctest.h"
#include "pmc/errors.hpp"
#include "pmc/problems.hpp"

using namespace pmc;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

// Fully active square patch centred at (cx, cy) with (2 m + 1)^2 nodes.
Field patch(double cx, double cy, double h, int m) {
    Field f;
    f.layout = Layout::grid2d;
    f.nx = f.ny = 2 * m + 1;
    f.h = h;
    f.x0 = cx - m * h;
    f.y0 = cy - m * h;
    f.values.assign(f.size(), 0.0);
    f.kind.assign(f.size(), NodeKind::unknown);
    return f;
}

Field sample(Field f, const std::function<double(double, double)>& fn) {
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            auto p = f.point(i, j);
            f.values[f.index(i, j)] = fn(p.x(), p.y());
        }
    return f;
}

double divergence_of(const ChartMetric& m, const Field& f,
                     const std::function<Vec(double, double)>& W) {
    std::vector<double> Wx(f.size()), Wy(f.size());
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) {
            auto p = f.point(i, j);
            Vec w = W(p.x(), p.y());
            Wx[f.index(i, j)] = w(0);
            Wy[f.index(i, j)] = w(1);
        }
    return covariant_divergence(m, f, Wx, Wy, f.nx / 2, f.ny / 2);
}

std::vector<ChartMetric> analytic_metrics() {
    return {ChartMetric::euclidean(2), ChartMetric::conformal_product(2, warp_cosh()),
            ChartMetric::conformal_product(2, warp_inverse()),
            ChartMetric::spherical_warped(2, warp_counterexample(1.0, 2, 3.0))};
}

}  // namespace

TEST_CASE("covariant divergence of linear Euclidean fields is exact") {
    ChartMetric e = ChartMetric::euclidean(2);
    Field f = patch(0.3, -0.2, 0.1, 3);
    CHECK(divergence_of(e, f, [](double x, double y) { return v2(x, y); }) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(divergence_of(e, f, [](double x, double y) { return v2(x / 2, y / 2); }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(divergence_of(e, f, [](double, double) { return v2(0.7, -1.3); })) < 1e-12);
}

TEST_CASE("covariant divergence converges at second order in a conformal metric") {
    // sigma = cosh(y)^2 I, W = (x^2, y^2): div W = 2x + 2y + 2 y^2 tanh y.
    ChartMetric m = ChartMetric::conformal_product(2, warp_cosh());
    auto exact = [](double x, double y) { return 2 * x + 2 * y + 2 * y * y * std::tanh(y); };
    double err[3];
    int idx = 0;
    for (double h : {0.1, 0.05, 0.025}) {
        Field f = patch(0.2, 0.6, h, 2);
        err[idx++] = std::abs(divergence_of(m, f, [](double x, double y) { return v2(x * x, y * y); }) -
                              exact(0.2, 0.6));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("graph geometry of constant, planar and cap graphs") {
    SUBCASE("constant graph in every analytic metric") {
        for (const ChartMetric& m : analytic_metrics()) {
            Field u = sample(patch(2.5, 1.2, 0.05, 3), [](double, double) { return 5.0; });
            GraphGeometry g = graph_geometry(m, u, 3, 3);
            CHECK(g.theta == 1.0);
            CHECK(g.A2 == doctest::Approx(0.0));
            CHECK(g.H == doctest::Approx(0.0));
        }
    }
    SUBCASE("plane u = 3 x1") {
        Field u = sample(patch(0.1, 0.4, 0.05, 3), [](double x, double) { return 3 * x; });
        GraphGeometry g = graph_geometry(ChartMetric::euclidean(2), u, 3, 3);
        CHECK(g.theta == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
        CHECK(std::abs(g.A2) < 1e-10);
        CHECK(std::abs(g.H) < 1e-10);
    }
    SUBCASE("lower cap of radius 2 at the centre") {
        Field u = sample(patch(0.0, 0.0, 1.0 / 128, 3),
                         [](double x, double y) { return -std::sqrt(4.0 - x * x - y * y); });
        GraphGeometry g = graph_geometry(ChartMetric::euclidean(2), u, 3, 3);
        CHECK(g.theta == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.A2 == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(g.H == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("graph geometry invariants on a wavy graph") {
    auto wave = [](double x, double y) { return 0.4 * std::sin(2 * x) * std::cos(3 * y) + x * y; };
    for (const ChartMetric& m : analytic_metrics()) {
        Field u = sample(patch(2.4, 0.9, 0.02, 4), wave);
        for (int j = 1; j < u.ny - 1; ++j)
            for (int i = 1; i < u.nx - 1; ++i) {
                GraphGeometry g = graph_geometry(m, u, i, j);
                CHECK(g.theta > 0.0);
                CHECK(g.theta <= 1.0);
                CHECK(g.theta * g.omega == doctest::Approx(1.0).epsilon(1e-15));
                CHECK(g.A2 >= 0.0);
                CHECK(Eigen::SelfAdjointEigenSolver<Mat>(g.g).eigenvalues().minCoeff() > 0.0);
                CHECK((g.g * g.g_inv - Mat::Identity(2, 2)).norm() < 1e-10);
            }
        // H shares the divergence path with covariant_divergence of Du/omega.
        std::vector<double> Wx(u.size()), Wy(u.size());
        for (int k = 0; k < u.size(); ++k) {
            int i = k % u.nx, j = k / u.nx;
            auto p = u.point(i, j);
            Vec x = v2(p.x(), p.y());
            auto g2 = grid_gradient(u, i, j);
            Vec Du = v2(g2.x(), g2.y());
            Vec w = m.sigma(x).inverse() * Du;
            double om = std::sqrt(1 + Du.dot(w));
            Wx[k] = w(0) / om;
            Wy[k] = w(1) / om;
        }
        CHECK(graph_geometry(m, u, 4, 4).H == doctest::Approx(covariant_divergence(m, u, Wx, Wy, 4, 4)).epsilon(1e-10));
    }
}

TEST_CASE("metric derivatives agree with finite differences") {
    for (const ChartMetric& m : analytic_metrics()) {
        Vec x = v2(2.3, 0.7);
        auto ds = m.dsigma(x);
        auto G = m.christoffel(x);
        Mat si = m.sigma(x).inverse();
        const double e = 1e-5;
        for (int k = 0; k < 2; ++k) {
            Vec p = x, q = x;
            p(k) += e;
            q(k) -= e;
            Mat fd = (m.sigma(p) - m.sigma(q)) / (2 * e);
            CHECK((fd - ds[k]).cwiseAbs().maxCoeff() < 1e-7 * (1.0 + ds[k].cwiseAbs().maxCoeff()));
        }
        // Gamma^k_ij = 1/2 s^kl (d_i s_jl + d_j s_il - d_l s_ij)
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double v = 0.0;
                    for (int l = 0; l < 2; ++l)
                        v += 0.5 * si(k, l) * (ds[i](j, l) + ds[j](i, l) - ds[l](i, j));
                    CHECK(G[k](i, j) == doctest::Approx(v).epsilon(1e-10));
                }
        Mat s = m.sigma(x);
        CHECK((s - s.transpose()).norm() == 0.0);
        CHECK(m.min_eigenvalue(x) > 0.0);
        CHECK(m.sqrt_det(x) == doctest::Approx(std::sqrt(s.determinant())));
    }
}

TEST_CASE("slice mean curvature") {
    Warp c = warp_cosh();
    CHECK(slice_mean_curvature(c, 2, 0.0) == 0.0);
    CHECK(slice_mean_curvature(c, 3, 1.0) == doctest::Approx(3 * std::sinh(1.0) / std::pow(std::cosh(1.0), 2)).epsilon(1e-14));
    for (double t : {-1.5, -0.3, 0.3, 1.5}) {
        double H = slice_mean_curvature(c, 2, t);
        CHECK((t > 0 ? H > 0 : H < 0));
    }
    CHECK_THROWS_AS(slice_mean_curvature(warp_inverse(), 2, -1.0), PmcError);
    // h(r) = r: sphere of radius (n-1)/beta has H = beta.
    Counterexample ce = counterexample_problem(1.0, 2);
    CHECK(ce.sphere_mean_curvature(1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary mean curvature") {
    DomainChart d05 = DomainChart::disk(ChartMetric::euclidean(2), 0.5);
    CHECK(boundary_mean_curvature(d05, d05.metric(), v2(0.5, 0.0)) == doctest::Approx(2.0));
    CHECK(boundary_mean_curvature_numeric(d05, d05.metric(), v2(0.3, 0.4)) == doctest::Approx(2.0).epsilon(1e-6));
    DomainChart ball = DomainChart::disk(ChartMetric::euclidean(3), 1.0);
    Vec y = Vec::Zero(3);
    y(2) = 1.0;
    CHECK(boundary_mean_curvature(ball, ball.metric(), y) == doctest::Approx(2.0));
    CHECK(boundary_mean_curvature_numeric(ball, ball.metric(), y) == doctest::Approx(2.0).epsilon(1e-6));
    DomainChart half = DomainChart::half_space(ChartMetric::euclidean(2), 0.0);
    CHECK(boundary_mean_curvature_numeric(half, half.metric(), v2(0.4, 0.0)) == doctest::Approx(0.0));
    // Warped slice in 3D: n phi' / phi^2 with n = 2.
    ChartMetric cp = ChartMetric::conformal_product(3, warp_cosh());
    DomainChart slab = DomainChart::half_space(cp, 0.5);
    Vec z = Vec::Zero(3);
    z(2) = 0.5;
    CHECK(boundary_mean_curvature(slab, cp, z) ==
          doctest::Approx(2 * std::sinh(0.5) / std::pow(std::cosh(0.5), 2)).epsilon(1e-8));
}

TEST_CASE("ricci minimum estimates") {
    DomainChart disk = DomainChart::disk(ChartMetric::euclidean(2), 1.0);
    CHECK(ricci_min_estimate(disk.metric(), disk, 16) == doctest::Approx(0.0));
    ChartMetric sw = ChartMetric::spherical_warped(2, warp_identity());
    DomainChart cap = DomainChart::polar_cap(sw, 1.0);
    CHECK(std::abs(ricci_min_estimate(sw, cap, 16)) < 1e-8);
    ChartMetric hyp = ChartMetric::conformal_product(2, warp_inverse());
    DomainChart upper = DomainChart::half_space(hyp, 2.0);
    CHECK(ricci_min_estimate(hyp, upper, 16) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(ricci_min_estimate(hyp, upper, 16, 7) == ricci_min_estimate(hyp, upper, 16, 7));
}

TEST_CASE("grid-sampled metric") {
    Field lay = patch(0.0, 0.0, 0.1, 5);
    std::vector<Eigen::Matrix2d> nodes;
    ChartMetric ref = ChartMetric::conformal_product(2, warp_cosh());
    for (int k = 0; k < lay.size(); ++k) {
        auto p = lay.point(k % lay.nx, k / lay.nx);
        nodes.push_back(ref.sigma(v2(p.x(), p.y())));
    }
    ChartMetric gs = ChartMetric::grid_sampled(lay, nodes);
    Vec x = v2(0.1, 0.2);
    CHECK((gs.sigma(x) - ref.sigma(x)).norm() < 1e-12);
    CHECK(gs.min_eigenvalue(x) > 0.0);
    CHECK_THROWS_AS(gs.ricci(x), PmcError);
    DomainChart d = DomainChart::disk(gs, 0.3);
    CHECK_THROWS_AS(ricci_min_estimate(gs, d, 4), PmcError);
}

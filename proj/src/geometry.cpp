#include "pmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmc/errors.hpp"
#include "pmc/problems.hpp"

namespace pmc {

const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
        case ErrorCode::NonpositiveWarp: return "NonpositiveWarp";
        case ErrorCode::CollarTooThin: return "CollarTooThin";
        case ErrorCode::UnsupportedMetricKind: return "UnsupportedMetricKind";
        case ErrorCode::NoBoundary: return "NoBoundary";
        case ErrorCode::NotRadial: return "NotRadial";
        case ErrorCode::DivergedField: return "DivergedField";
        case ErrorCode::NewtonStall: return "NewtonStall";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::NotSolutions: return "NotSolutions";
        case ErrorCode::CollarEmpty: return "CollarEmpty";
        case ErrorCode::BallOutsideDomain: return "BallOutsideDomain";
        case ErrorCode::ZeroBeta: return "ZeroBeta";
        case ErrorCode::HypothesisFailed: return "HypothesisFailed";
        case ErrorCode::NotASolution: return "NotASolution";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

const char* to_string(MetricKind k) {
    switch (k) {
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::conformal_product: return "conformal_product";
        case MetricKind::spherical_warped: return "spherical_warped";
        case MetricKind::grid_sampled: return "grid_sampled";
    }
    return "unknown";
}

// ---------------------------------------------------------------- warps

Warp warp_identity() {
    return {"identity", [](double r) { return r; }, [](double) { return 1.0; },
            [](double) { return 0.0; }};
}

Warp warp_cosh() {
    return {"cosh", [](double r) { return std::cosh(r); }, [](double r) { return std::sinh(r); },
            [](double r) { return std::cosh(r); }};
}

Warp warp_inverse() {
    return {"inverse", [](double r) { return 1.0 / r; }, [](double r) { return -1.0 / (r * r); },
            [](double r) { return 2.0 / (r * r * r); }};
}

namespace {

// Quintic smoothstep and its first two derivatives on [0, 1].
struct Smooth {
    double s, ds, d2s;
};

Smooth smoothstep(double tau) {
    tau = std::clamp(tau, 0.0, 1.0);
    double t2 = tau * tau;
    double t3 = t2 * tau;
    return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * tau + t2),
            60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2)};
}

// log h, (log h)', (log h)'' for the counterexample warp.
struct LogWarp {
    double L, dL, d2L;
};

LogWarp counterexample_log(double r, double a, double k) {
    if (r <= a) return {std::log(r), 1.0 / r, -1.0 / (r * r)};
    if (r >= k) return {k * r, k, 0.0};
    double w = k - a;
    Smooth s = smoothstep((r - a) / w);
    double ds = s.ds / w;
    double d2s = s.d2s / (w * w);
    double l = std::log(r), dl = 1.0 / r, d2l = -1.0 / (r * r);
    double m = k * r, dm = k;
    double L = (1.0 - s.s) * l + s.s * m;
    double dL = (1.0 - s.s) * dl + s.s * dm + ds * (m - l);
    double d2L = (1.0 - s.s) * d2l + 2.0 * ds * (dm - dl) + d2s * (m - l);
    return {L, dL, d2L};
}

}  // namespace

Warp warp_counterexample(double beta, int n, double k) {
    if (!(beta > 0.0) || n < 2) throw PmcError(ErrorCode::InvalidArgument, "beta > 0, n >= 2");
    double a = n / beta;
    if (!(k > std::max(beta, a))) throw PmcError(ErrorCode::InvalidArgument, "k > max(beta, n/beta)");
    Warp w;
    w.name = "counterexample";
    w.f = [a, k](double r) {
        if (r <= a) return r;
        return std::exp(counterexample_log(r, a, k).L);
    };
    w.df = [a, k](double r) {
        if (r <= a) return 1.0;
        LogWarp lw = counterexample_log(r, a, k);
        return std::exp(lw.L) * lw.dL;
    };
    w.d2f = [a, k](double r) {
        if (r <= a) return 0.0;
        LogWarp lw = counterexample_log(r, a, k);
        return std::exp(lw.L) * (lw.d2L + lw.dL * lw.dL);
    };
    return w;
}

// ---------------------------------------------------------------- metric

ChartMetric ChartMetric::euclidean(int n) {
    if (n < 2) throw PmcError(ErrorCode::InvalidArgument, "dim >= 2");
    ChartMetric m;
    m.n_ = n;
    m.kind_ = MetricKind::euclidean;
    return m;
}

ChartMetric ChartMetric::conformal_product(int n, Warp phi) {
    if (n < 2) throw PmcError(ErrorCode::InvalidArgument, "dim >= 2");
    ChartMetric m;
    m.n_ = n;
    m.kind_ = MetricKind::conformal_product;
    m.warp_ = std::move(phi);
    return m;
}

ChartMetric ChartMetric::spherical_warped(int n, Warp h) {
    if (n < 2) throw PmcError(ErrorCode::InvalidArgument, "dim >= 2");
    ChartMetric m;
    m.n_ = n;
    m.kind_ = MetricKind::spherical_warped;
    m.warp_ = std::move(h);
    return m;
}

ChartMetric ChartMetric::grid_sampled(const Field& layout, std::vector<Eigen::Matrix2d> nodes) {
    if (layout.layout == Layout::radial || static_cast<int>(nodes.size()) != layout.size())
        throw PmcError(ErrorCode::InvalidArgument, "grid_sampled needs one tensor per 2D node");
    for (const auto& s : nodes) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
        if (!(es.eigenvalues()(0) > 0.0))
            throw PmcError(ErrorCode::InvalidArgument, "sampled metric not positive definite");
    }
    ChartMetric m;
    m.n_ = 2;
    m.kind_ = MetricKind::grid_sampled;
    m.sampled_ = std::make_shared<Sampled>(Sampled{layout, std::move(nodes)});
    return m;
}

namespace {

constexpr double kPoleRadius = 1e-10;

}  // namespace

Mat ChartMetric::sigma(const Vec& x) const {
    const int n = n_;
    switch (kind_) {
        case MetricKind::euclidean: return Mat::Identity(n, n);
        case MetricKind::conformal_product: {
            double p = warp_.f(x(n - 1));
            return Mat::Identity(n, n) * (p * p);
        }
        case MetricKind::spherical_warped: {
            double r = x.norm();
            if (r < kPoleRadius) {
                double d = warp_.df(0.0);
                return Mat::Identity(n, n) * (d * d);
            }
            Vec e = x / r;
            Mat P = e * e.transpose();
            double q = warp_.f(r) / r;
            return P + (q * q) * (Mat::Identity(n, n) - P);
        }
        case MetricKind::grid_sampled: {
            const Field& g = sampled_->layout;
            double fx = std::clamp((x(0) - g.x0) / g.h, 0.0, g.nx - 1.000001);
            double fy = std::clamp((x(1) - g.y0) / g.h, 0.0, g.ny - 1.000001);
            int i = static_cast<int>(fx), j = static_cast<int>(fy);
            double tx = fx - i, ty = fy - j;
            const auto& N = sampled_->nodes;
            Eigen::Matrix2d s = (1 - tx) * (1 - ty) * N[g.index(i, j)] +
                                tx * (1 - ty) * N[g.index(i + 1, j)] +
                                (1 - tx) * ty * N[g.index(i, j + 1)] + tx * ty * N[g.index(i + 1, j + 1)];
            return s;
        }
    }
    return Mat::Identity(n, n);
}

std::vector<Mat> ChartMetric::dsigma(const Vec& x) const {
    const int n = n_;
    std::vector<Mat> d(n, Mat::Zero(n, n));
    switch (kind_) {
        case MetricKind::euclidean: break;
        case MetricKind::conformal_product: {
            double r = x(n - 1);
            d[n - 1] = Mat::Identity(n, n) * (2.0 * warp_.f(r) * warp_.df(r));
            break;
        }
        case MetricKind::spherical_warped: {
            double r = x.norm();
            if (r < kPoleRadius) break;
            double h = warp_.f(r), hp = warp_.df(r);
            double q = h / r;
            double lam = q * q;
            double dlam = 2.0 * q * (hp * r - h) / (r * r);
            Vec e = x / r;
            Mat P = e * e.transpose();
            Mat I = Mat::Identity(n, n);
            for (int k = 0; k < n; ++k) {
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        double dP = ((i == k ? x(j) : 0.0) + (j == k ? x(i) : 0.0)) / (r * r) -
                                    2.0 * x(i) * x(j) * x(k) / (r * r * r * r);
                        d[k](i, j) = (1.0 - lam) * dP + dlam * e(k) * (I(i, j) - P(i, j));
                    }
                }
            }
            break;
        }
        case MetricKind::grid_sampled: {
            double hs = sampled_->layout.h;
            for (int k = 0; k < n; ++k) {
                Vec xp = x, xm = x;
                xp(k) += hs;
                xm(k) -= hs;
                d[k] = (sigma(xp) - sigma(xm)) / (2.0 * hs);
            }
            break;
        }
    }
    return d;
}

std::vector<Mat> ChartMetric::christoffel(const Vec& x) const {
    const int n = n_;
    Mat inv = sigma(x).inverse();
    std::vector<Mat> ds = dsigma(x);
    std::vector<Mat> G(n, Mat::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += inv(k, l) * (ds[i](l, j) + ds[j](l, i) - ds[l](i, j));
                G[k](i, j) = 0.5 * s;
            }
    return G;
}

Mat ChartMetric::ricci(const Vec& x) const {
    if (!analytic())
        throw PmcError(ErrorCode::UnsupportedMetricKind, "Ricci needs an analytic metric");
    const int n = n_;
    const double eps = 1e-3;
    std::vector<Mat> G = christoffel(x);
    // dG[i][a](b, c) = d_i Gamma^a_bc by a fourth-order central difference.
    std::vector<std::vector<Mat>> dG(n);
    for (int i = 0; i < n; ++i) {
        auto at = [&](double s) {
            Vec y = x;
            y(i) += s;
            return christoffel(y);
        };
        auto p1 = at(eps), m1 = at(-eps), p2 = at(2 * eps), m2 = at(-2 * eps);
        dG[i].resize(n);
        for (int a = 0; a < n; ++a)
            dG[i][a] = (8.0 * (p1[a] - m1[a]) - (p2[a] - m2[a])) / (12.0 * eps);
    }
    Mat R = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += dG[i][i](j, k) - dG[k][i](i, j);
                for (int p = 0; p < n; ++p) s += G[i](i, p) * G[p](j, k) - G[i](k, p) * G[p](i, j);
            }
            R(j, k) = s;
        }
    return 0.5 * (R + R.transpose());
}

double ChartMetric::sqrt_det(const Vec& x) const { return std::sqrt(sigma(x).determinant()); }

double ChartMetric::min_eigenvalue(const Vec& x) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma(x));
    return es.eigenvalues()(0);
}

// ---------------------------------------------------------------- grid operators

namespace {

Vec as_vec(const Eigen::Vector2d& p) {
    Vec v(2);
    v << p(0), p(1);
    return v;
}

void require_2d(const ChartMetric& metric, const Field& layout) {
    if (layout.layout == Layout::radial || metric.dim() != 2)
        throw PmcError(ErrorCode::InvalidArgument, "grid operators need a 2D grid and metric");
}

double divergence_impl(const ChartMetric& metric, const Field& layout,
                       const std::function<double(int)>& wx, const std::function<double(int)>& wy,
                       int i, int j) {
    auto sd = [&](int k) {
        int ii = k % layout.nx, jj = k / layout.nx;
        return metric.sqrt_det(as_vec(layout.point(ii, jj)));
    };
    auto fx = [&](int k) { return sd(k) * wx(k); };
    auto fy = [&](int k) { return sd(k) * wy(k); };
    double dx = grid_diff(layout, fx, i, j, 0);
    double dy = grid_diff(layout, fy, i, j, 1);
    return (dx + dy) / metric.sqrt_det(as_vec(layout.point(i, j)));
}

double grid_diff2(const Field& layout, const std::function<double(int)>& v, int i, int j,
                  int axis) {
    int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
    int c = layout.node(i, j);
    if (!layout.active(c)) throw PmcError(ErrorCode::StencilOutOfDomain, "inactive centre node");
    int p1 = layout.node(i + di, j + dj), m1 = layout.node(i - di, j - dj);
    double h2 = layout.h * layout.h;
    if (layout.active(p1) && layout.active(m1)) return (v(p1) - 2.0 * v(c) + v(m1)) / h2;
    int p2 = layout.node(i + 2 * di, j + 2 * dj), p3 = layout.node(i + 3 * di, j + 3 * dj);
    if (layout.active(p1) && layout.active(p2) && layout.active(p3))
        return (2.0 * v(c) - 5.0 * v(p1) + 4.0 * v(p2) - v(p3)) / h2;
    int m2 = layout.node(i - 2 * di, j - 2 * dj), m3 = layout.node(i - 3 * di, j - 3 * dj);
    if (layout.active(m1) && layout.active(m2) && layout.active(m3))
        return (2.0 * v(c) - 5.0 * v(m1) + 4.0 * v(m2) - v(m3)) / h2;
    throw PmcError(ErrorCode::StencilOutOfDomain, "no second-difference stencil");
}

}  // namespace

double grid_diff(const Field& layout, const std::function<double(int)>& v, int i, int j,
                 int axis) {
    int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
    int c = layout.node(i, j);
    if (!layout.active(c)) throw PmcError(ErrorCode::StencilOutOfDomain, "inactive centre node");
    int p1 = layout.node(i + di, j + dj), m1 = layout.node(i - di, j - dj);
    double h = layout.h;
    if (layout.active(p1) && layout.active(m1)) return (v(p1) - v(m1)) / (2.0 * h);
    int p2 = layout.node(i + 2 * di, j + 2 * dj);
    if (layout.active(p1) && layout.active(p2)) return (-3.0 * v(c) + 4.0 * v(p1) - v(p2)) / (2.0 * h);
    int m2 = layout.node(i - 2 * di, j - 2 * dj);
    if (layout.active(m1) && layout.active(m2)) return (3.0 * v(c) - 4.0 * v(m1) + v(m2)) / (2.0 * h);
    throw PmcError(ErrorCode::StencilOutOfDomain, "no first-difference stencil");
}

double covariant_divergence(const ChartMetric& metric, const Field& layout,
                            const std::vector<double>& Wx, const std::vector<double>& Wy, int i,
                            int j) {
    require_2d(metric, layout);
    return divergence_impl(
        metric, layout, [&](int k) { return Wx[k]; }, [&](int k) { return Wy[k]; }, i, j);
}

Eigen::Vector2d grid_gradient(const Field& u, int i, int j) {
    auto v = [&](int k) { return u.values[k]; };
    return {grid_diff(u, v, i, j, 0), grid_diff(u, v, i, j, 1)};
}

GraphGeometry graph_geometry(const ChartMetric& metric, const Field& u, int i, int j) {
    require_2d(metric, u);
    const int c = u.node(i, j);
    if (!u.active(c)) throw PmcError(ErrorCode::StencilOutOfDomain, "inactive node");
    Vec x = as_vec(u.point(i, j));
    Mat s = metric.sigma(x);
    Mat sinv = s.inverse();
    Eigen::Vector2d g2 = grid_gradient(u, i, j);
    Vec Du = as_vec(g2);
    Vec up = sinv * Du;
    double omega = std::sqrt(1.0 + Du.dot(up));

    GraphGeometry out;
    out.omega = omega;
    out.theta = 1.0 / omega;
    out.normal = Vec(3);
    out.normal << -up(0) / omega, -up(1) / omega, 1.0 / omega;
    out.g = s + Du * Du.transpose();
    out.g_inv = sinv - up * up.transpose() / (omega * omega);

    auto v = [&](int k) { return u.values[k]; };
    Mat hess(2, 2);
    hess(0, 0) = grid_diff2(u, v, i, j, 0);
    hess(1, 1) = grid_diff2(u, v, i, j, 1);
    auto dx_at = [&](int k) { return grid_diff(u, v, k % u.nx, k / u.nx, 0); };
    hess(0, 1) = hess(1, 0) = grid_diff(u, dx_at, i, j, 1);
    std::vector<Mat> G = metric.christoffel(x);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) hess(a, b) -= G[0](a, b) * Du(0) + G[1](a, b) * Du(1);
    Mat V = out.g_inv * hess / omega;
    out.A2 = (V * V).trace();

    // Flux Du/omega at neighbouring nodes, then the shared divergence path.
    auto flux = [&](int k, int comp) {
        int ii = k % u.nx, jj = k / u.nx;
        Vec y = as_vec(u.point(ii, jj));
        Mat si = metric.sigma(y).inverse();
        Vec d = as_vec(grid_gradient(u, ii, jj));
        Vec w = si * d;
        return w(comp) / std::sqrt(1.0 + d.dot(w));
    };
    out.H = divergence_impl(
        metric, u, [&](int k) { return flux(k, 0); }, [&](int k) { return flux(k, 1); }, i, j);
    return out;
}

double slice_mean_curvature(const Warp& phi, int n, double t) {
    double p = phi.f(t);
    if (!(p > 0.0)) throw PmcError(ErrorCode::NonpositiveWarp, "phi(t) <= 0");
    return n * phi.df(t) / (p * p);
}

double boundary_mean_curvature_numeric(const DomainChart& domain, const ChartMetric& metric,
                                       const Vec& y) {
    const int n = metric.dim();
    const double eps = 1e-3;
    auto normal_density = [&](const Vec& x) {
        Mat si = metric.sigma(x).inverse();
        Vec gd = domain.grad_d(x);
        Vec nu = -(si * gd) / std::sqrt(gd.dot(si * gd));
        return Vec(metric.sqrt_det(x) * nu);
    };
    double div = 0.0;
    for (int i = 0; i < n; ++i) {
        auto at = [&](double s) {
            Vec x = y;
            x(i) += s;
            if (std::abs(domain.d(x)) >= domain.collar())
                throw PmcError(ErrorCode::CollarTooThin, "stencil leaves the collar of d");
            return normal_density(x)(i);
        };
        div += (8.0 * (at(eps) - at(-eps)) - (at(2 * eps) - at(-2 * eps))) / (12.0 * eps);
    }
    return div / metric.sqrt_det(y);
}

double boundary_mean_curvature(const DomainChart& domain, const ChartMetric& metric, const Vec& y) {
    if (!domain.has_boundary()) throw PmcError(ErrorCode::NoBoundary, "closed domain");
    if (metric.kind() == domain.metric().kind()) {
        if (auto h = domain.analytic_boundary_H(y)) return *h;
    }
    return boundary_mean_curvature_numeric(domain, metric, y);
}

double ricci_min_estimate(const ChartMetric& metric, const DomainChart& domain, int samples,
                          std::uint64_t seed) {
    if (!metric.analytic())
        throw PmcError(ErrorCode::UnsupportedMetricKind, "Ricci unsupported for grid_sampled");
    if (samples < 1) throw PmcError(ErrorCode::InvalidArgument, "samples >= 1");
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x : domain.interior_samples(samples, seed)) {
        Mat R = metric.ricci(x);
        for (const Vec& e : metric_unit_directions(metric.sigma(x), 16))
            best = std::min(best, e.dot(R * e));
    }
    return best;
}

}  // namespace pmc

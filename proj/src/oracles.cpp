#include "pmc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmc/errors.hpp"
#include "pmc/quadrature.hpp"

namespace pmc {

namespace {

constexpr double kTolGeom = 1e-8;

Vec vec2(const Eigen::Vector2d& p) {
    Vec v(2);
    v << p(0), p(1);
    return v;
}

}  // namespace

// ---------------------------------------------------------------- spherical cap

double CapOracle::u(const Vec& x) const { return -std::sqrt(R * R - x.squaredNorm()); }

Vec CapOracle::grad(const Vec& x) const { return x / std::sqrt(R * R - x.squaredNorm()); }

PsiFn CapOracle::psi() const {
    double RR = R;
    return [RR](const Vec& x) { return -std::sqrt(RR * RR - x.squaredNorm()); };
}

PMCProblem CapOracle::problem() const {
    PMCProblem p = make_cmc(f);
    p.psi = psi();
    return p;
}

CapOracle spherical_cap_oracle(double R, double a, int n) {
    if (!(a > 0.0 && a < R)) throw PmcError(ErrorCode::InvalidArgument, "cap needs 0 < a < R");
    if (n < 2) throw PmcError(ErrorCode::InvalidArgument, "n >= 2");
    return {R, a, n, n / R};
}

// ---------------------------------------------------------------- flux analysis

FluxAnalysis flux_analysis(const RadialODE& ode) {
    FluxAnalysis out;
    RadialODE o = ode;
    out.ratio = [o](double r) {
        if (r <= 0.0) return 0.0;
        return o.Phi(r) / o.J(r);
    };
    const double target = 1.0 - 1e-12;
    const int scan = 4000;
    double prev = 0.0;
    for (int s = 1; s <= scan; ++s) {
        double r = ode.r_max * s / scan;
        double q = out.ratio(r);
        out.max_ratio = std::max(out.max_ratio, std::abs(q));
        if (!out.saturation_radius && std::abs(q) >= target) {
            double lo = prev, hi = r;
            while (hi - lo > 1e-10) {
                double mid = 0.5 * (lo + hi);
                (std::abs(out.ratio(mid)) >= target ? hi : lo) = mid;
            }
            out.saturation_radius = hi;
        }
        prev = r;
    }
    if (!out.saturation_radius && out.max_ratio <= 0.9) {
        auto ratio = out.ratio;
        out.u_exact = [ratio](double r) {
            return adaptive_simpson(
                [&](double s) {
                    double q = ratio(s);
                    return q / std::sqrt(1.0 - q * q);
                },
                0.0, r, 1e-12);
        };
    }
    return out;
}

// ---------------------------------------------------------------- barrier constants

BarrierConstants barrier_constants_from(double C2, double C3, double C4, double d0_max) {
    if (!(C2 >= 1.0) || !(d0_max > 0.0))
        throw PmcError(ErrorCode::InvalidArgument, "barrier constants need C2 >= 1, d0_max > 0");
    BarrierConstants b;
    b.C2 = C2;
    b.C3 = C3;
    b.C4 = C4;
    b.nu = std::max(1.0, C3);
    b.d0 = std::min(d0_max, 1.0 / (2.0 * C2 * b.nu));
    b.kappa = std::max(C2 * b.nu / (1.0 - C2 * b.nu * b.d0), std::expm1(C4 * b.nu) / b.d0);
    return b;
}

BarrierConstants barrier_constants(double c0, const BoundaryExtension& varphi,
                                   const PMCProblem& problem, const DomainChart& domain,
                                   int samples) {
    SerrinReport serrin = serrin_condition_check(problem, domain, samples);
    if (serrin.worst_margin < -kTolGeom)
        throw PmcError(ErrorCode::HypothesisFailed, "boundary inequality fails");
    const ChartMetric& metric = domain.metric();
    const int n = domain.dim();
    const double eps = 1e-4;

    auto grad = [&](const Vec& x) -> Vec {
        if (varphi.grad) return varphi.grad(x);
        Vec g(n);
        for (int i = 0; i < n; ++i) {
            Vec p = x, m = x;
            p(i) += eps;
            m(i) -= eps;
            g(i) = (varphi.value(p) - varphi.value(m)) / (2.0 * eps);
        }
        return g;
    };
    auto hess = [&](const Vec& x) -> Mat {
        if (varphi.hess) return varphi.hess(x);
        Mat H(n, n);
        for (int i = 0; i < n; ++i) {
            Vec p = x, m = x;
            p(i) += eps;
            m(i) -= eps;
            H.col(i) = (grad(p) - grad(m)) / (2.0 * eps);
        }
        return 0.5 * (H + H.transpose());
    };
    // Laplace-Beltrami of d by central differences of sqrt(det s) s^{-1} Dd.
    auto lap_d = [&](const Vec& x) {
        double div = 0.0;
        for (int i = 0; i < n; ++i) {
            auto comp = [&](double s) {
                Vec y = x;
                y(i) += s;
                Mat si = metric.sigma(y).inverse();
                return metric.sqrt_det(y) * (si * domain.grad_d(y))(i);
            };
            div += (comp(eps) - comp(-eps)) / (2.0 * eps);
        }
        return div / metric.sqrt_det(x);
    };

    // Collar lattice: boundary samples pushed inward along the normal.
    const double d0_max = 0.5 * std::min(domain.collar(), 1.0);
    double sup_grad = 0.0, sup_hess = 0.0, sup_dlap = 0.0, mu = 0.0, sup_phi = 0.0;
    for (const Vec& y : domain.boundary_samples(samples)) {
        Vec inward = domain.grad_d(y);
        for (int l = 0; l <= 8; ++l) {
            Vec x = y + (d0_max * l / 8.0) * inward;
            double d = domain.d(x);
            Mat si = metric.sigma(x).inverse();
            Vec g = grad(x);
            sup_grad = std::max(sup_grad, std::sqrt(g.dot(si * g)));
            sup_hess = std::max(sup_hess, hess(x).cwiseAbs().maxCoeff());
            if (d > 0.0) sup_dlap = std::max(sup_dlap, d * std::abs(lap_d(x)));
            sup_phi = std::max(sup_phi, std::abs(varphi.value(x)));
            for (const Vec& e : metric_unit_directions(metric.sigma(x), 8)) {
                mu = std::max({mu, std::abs(problem.f(x, e)), std::abs(problem.f(x, Vec(-e)))});
            }
        }
    }
    if (!(c0 > sup_phi))
        throw PmcError(ErrorCode::InvalidArgument, "c0 must exceed sup |varphi|");
    double C2 = std::max(1.0, 10.0 * sup_grad);
    double C3 = 10.0 * (sup_dlap + (sup_hess + mu) / C2);
    double C4 = c0 + sup_phi;
    return barrier_constants_from(C2, C3, C4, d0_max);
}

// ---------------------------------------------------------------- Theta identity

namespace {

struct ThetaTerms {
    Field mask;  // active where the identity terms are available
    std::vector<double> theta, lap_theta, A2, ric, grad_H;
};

ThetaTerms theta_terms(const ChartMetric& metric, const Field& u,
                       const std::function<double(const Vec&)>& H) {
    if (u.layout == Layout::radial || metric.dim() != 2)
        throw PmcError(ErrorCode::InvalidArgument, "theta identity needs a 2D grid");
    const int m = u.size();
    ThetaTerms T;
    T.theta.assign(m, 0.0);
    T.lap_theta.assign(m, 0.0);
    T.A2.assign(m, 0.0);
    T.ric.assign(m, 0.0);
    T.grad_H.assign(m, 0.0);
    T.mask = u;
    std::fill(T.mask.values.begin(), T.mask.values.end(), 0.0);

    // A node qualifies when its 5x5 box is active, so every difference is centred.
    auto full = [&](int i, int j, int w) {
        for (int dj = -w; dj <= w; ++dj)
            for (int di = -w; di <= w; ++di)
                if (!u.active(u.node(i + di, j + dj))) return false;
        return true;
    };
    std::vector<double> sqrt_g(m, 0.0);
    std::vector<Mat> g_inv(m);
    std::vector<Vec> Du(m);
    std::vector<std::uint8_t> level1(m, 0);
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            int k = u.index(i, j);
            if (!full(i, j, 1)) continue;
            level1[k] = 1;
            GraphGeometry gg = graph_geometry(metric, u, i, j);
            T.theta[k] = gg.theta;
            T.A2[k] = gg.A2;
            sqrt_g[k] = std::sqrt(gg.g.determinant());
            g_inv[k] = gg.g_inv;
            Du[k] = vec2(grid_gradient(u, i, j));
            if (metric.kind() != MetricKind::euclidean) {
                Vec nb = gg.normal.head(2);
                T.ric[k] = nb.dot(metric.ricci(vec2(u.point(i, j))) * nb);
            }
        }
    Field lay1 = u;
    for (int k = 0; k < m; ++k) lay1.kind[k] = level1[k] ? NodeKind::unknown : NodeKind::inactive;
    auto th = [&](int k) { return T.theta[k]; };
    std::vector<double> Wx(m, 0.0), Wy(m, 0.0);
    std::vector<std::uint8_t> level2(m, 0);
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            int k = u.index(i, j);
            if (!full(i, j, 2)) continue;
            level2[k] = 1;
            Vec dth(2);
            dth << grid_diff(lay1, th, i, j, 0), grid_diff(lay1, th, i, j, 1);
            Vec w = sqrt_g[k] * (g_inv[k] * dth);
            Wx[k] = w(0);
            Wy[k] = w(1);
        }
    Field lay2 = u;
    for (int k = 0; k < m; ++k) lay2.kind[k] = level2[k] ? NodeKind::unknown : NodeKind::inactive;
    const double eps = 1e-5;
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i) {
            int k = u.index(i, j);
            bool ok = level2[k];
            for (int dj = -1; dj <= 1 && ok; ++dj)
                for (int di = -1; di <= 1 && ok; ++di) ok = lay2.active(lay2.node(i + di, j + dj));
            if (!ok) continue;
            double dx = grid_diff(lay2, [&](int q) { return Wx[q]; }, i, j, 0);
            double dy = grid_diff(lay2, [&](int q) { return Wy[q]; }, i, j, 1);
            T.lap_theta[k] = (dx + dy) / sqrt_g[k];
            if (H) {
                Vec x = vec2(u.point(i, j));
                Vec dH(2);
                for (int a = 0; a < 2; ++a) {
                    Vec p = x, q = x;
                    p(a) += eps;
                    q(a) -= eps;
                    dH(a) = (H(p) - H(q)) / (2.0 * eps);
                }
                T.grad_H[k] = dH.dot(g_inv[k] * Du[k]);
            }
            T.mask.values[k] = 1.0;
        }
    for (int k = 0; k < m; ++k) T.mask.kind[k] = T.mask.values[k] != 0.0 ? NodeKind::unknown : NodeKind::inactive;
    return T;
}

}  // namespace

Field theta_identity_residual(const ChartMetric& metric, const Field& u,
                              const std::function<double(const Vec&)>& H) {
    ThetaTerms T = theta_terms(metric, u, H);
    Field out = T.mask;
    for (int k = 0; k < out.size(); ++k) {
        if (out.kind[k] != NodeKind::unknown) {
            out.values[k] = 0.0;
            continue;
        }
        out.values[k] = T.lap_theta[k] + (T.A2[k] + T.ric[k]) * T.theta[k] - T.grad_H[k];
    }
    return out;
}

double empirical_c1(const ChartMetric& metric, const Field& u, double beta,
                    const std::vector<std::uint8_t>& mask) {
    ThetaTerms T = theta_terms(metric, u, {});
    double c1 = 0.0;
    for (int k = 0; k < u.size(); ++k) {
        if (T.mask.kind[k] != NodeKind::unknown || (k < static_cast<int>(mask.size()) && !mask[k]))
            continue;
        c1 = std::max(c1, (T.lap_theta[k] + beta * T.A2[k] * T.theta[k]) / T.theta[k]);
    }
    return c1;
}

// ---------------------------------------------------------------- Q field

QField q_field(const Discretization& disc, const Field& u,
               const std::function<double(const Vec&)>& f, double solve_tol, double d_min) {
    if (u.layout == Layout::radial)
        throw PmcError(ErrorCode::InvalidArgument, "q_field needs a 2D grid");
    Eigen::VectorXd R = disc.residual(u);
    if (R.size() && R.lpNorm<Eigen::Infinity>() > solve_tol)
        throw PmcError(ErrorCode::NotASolution, "field does not solve the problem");
    const ChartMetric& metric = disc.metric();
    const int m = u.size();
    QField q;
    q.Qx.assign(m, 0.0);
    q.Qy.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
        if (!u.active(k)) continue;
        int i = k % u.nx, j = k / u.nx;
        Vec x = vec2(u.point(i, j));
        Vec Du = vec2(grid_gradient(u, i, j));
        Mat s = metric.sigma(x);
        Vec w = s.inverse() * Du;
        double omega = std::sqrt(1.0 + Du.dot(w));
        q.Qx[k] = w(0) / omega;
        q.Qy[k] = w(1) / omega;
        if (u.is_unknown(k)) {
            Vec Q(2);
            Q << q.Qx[k], q.Qy[k];
            q.sup_norm = std::max(q.sup_norm, Q.dot(s * Q));
        }
    }
    q.div_residual = u;
    std::fill(q.div_residual.values.begin(), q.div_residual.values.end(), 0.0);
    for (int k = 0; k < m; ++k) {
        q.div_residual.kind[k] = NodeKind::inactive;
        if (!u.is_unknown(k)) continue;
        int i = k % u.nx, j = k / u.nx;
        bool ok = true;
        for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
            ok = ok && u.active(u.node(i + di, j + dj));
        if (!ok) continue;
        Vec x = vec2(u.point(i, j));
        double r = covariant_divergence(metric, u, q.Qx, q.Qy, i, j) - f(x);
        q.div_residual.values[k] = r;
        q.div_residual.kind[k] = NodeKind::unknown;
        double depth = disc.domain().has_boundary() ? disc.domain().d(x)
                                                     : std::numeric_limits<double>::infinity();
        if (depth >= d_min) q.div_residual_inf = std::max(q.div_residual_inf, std::abs(r));
    }
    return q;
}

}  // namespace pmc

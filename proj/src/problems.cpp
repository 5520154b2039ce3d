#include "pmc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pmc/errors.hpp"
#include "pmc/quadrature.hpp"

namespace pmc {

namespace {

constexpr double kTolGeom = 1e-8;
constexpr double kPi = 3.14159265358979323846;

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

// Deterministic unit vectors in R^n: circle, Fibonacci sphere, or seeded Gaussians.
std::vector<Vec> euclidean_directions(int n, int m, bool half) {
    std::vector<Vec> out;
    if (n == 2) {
        double span = half ? kPi : 2.0 * kPi;
        for (int k = 0; k < m; ++k) {
            double a = span * (k + 0.5) / m;
            Vec e(2);
            e << std::cos(a), std::sin(a);
            out.push_back(e);
        }
    } else if (n == 3) {
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        int count = half ? m : 2 * m;
        for (int k = 0; k < count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / count;
            double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec e(3);
            e << rr * std::cos(golden * k), rr * std::sin(golden * k), z;
            out.push_back(e);
        }
    } else {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> g;
        for (int k = 0; k < 4 * m; ++k) {
            Vec e(n);
            for (int i = 0; i < n; ++i) e(i) = g(rng);
            out.push_back(e / e.norm());
        }
    }
    return out;
}

}  // namespace

const char* to_string(Shape s) {
    switch (s) {
        case Shape::disk: return "disk";
        case Shape::annulus: return "annulus";
        case Shape::box_periodic: return "box_periodic";
        case Shape::polar_cap: return "polar_cap";
        case Shape::half_space: return "half_space";
    }
    return "unknown";
}

std::vector<Vec> metric_unit_directions(const Mat& sigma, int m) {
    Eigen::LLT<Mat> llt(sigma);
    Mat Lt = llt.matrixU();  // L^T
    std::vector<Vec> out;
    for (const Vec& w : euclidean_directions(static_cast<int>(sigma.rows()), m, true))
        out.push_back(Lt.triangularView<Eigen::Upper>().solve(w));
    return out;
}

// ---------------------------------------------------------------- DomainChart

DomainChart DomainChart::disk(ChartMetric metric, double a) {
    if (!(a > 0.0)) throw PmcError(ErrorCode::InvalidArgument, "disk radius > 0");
    DomainChart d;
    d.shape_ = Shape::disk;
    d.metric_ = std::move(metric);
    d.a_ = a;
    return d;
}

DomainChart DomainChart::annulus(ChartMetric metric, double a, double b) {
    if (!(a > 0.0 && b > a)) throw PmcError(ErrorCode::InvalidArgument, "0 < a < b");
    DomainChart d;
    d.shape_ = Shape::annulus;
    d.metric_ = std::move(metric);
    d.a_ = a;
    d.b_ = b;
    return d;
}

DomainChart DomainChart::box_periodic(ChartMetric metric, double L) {
    if (!(L > 0.0)) throw PmcError(ErrorCode::InvalidArgument, "L > 0");
    DomainChart d;
    d.shape_ = Shape::box_periodic;
    d.metric_ = std::move(metric);
    d.a_ = L;
    return d;
}

DomainChart DomainChart::polar_cap(ChartMetric metric, double r_max) {
    if (metric.kind() != MetricKind::spherical_warped)
        throw PmcError(ErrorCode::InvalidArgument, "polar_cap needs a spherical_warped metric");
    if (!(r_max > 0.0)) throw PmcError(ErrorCode::InvalidArgument, "r_max > 0");
    DomainChart d;
    d.shape_ = Shape::polar_cap;
    d.metric_ = std::move(metric);
    d.a_ = r_max;
    return d;
}

DomainChart DomainChart::half_space(ChartMetric metric, double offset) {
    DomainChart d;
    d.shape_ = Shape::half_space;
    d.metric_ = std::move(metric);
    d.a_ = offset;
    return d;
}

void DomainChart::require_boundary(const char* what) const {
    if (!has_boundary()) throw PmcError(ErrorCode::NoBoundary, what);
}

bool DomainChart::inside(const Vec& x) const {
    if (shape_ == Shape::box_periodic) {
        for (int i = 0; i < x.size(); ++i)
            if (x(i) < 0.0 || x(i) >= a_) return false;
        return true;
    }
    return d(x) > 0.0;
}

double DomainChart::d(const Vec& x) const {
    switch (shape_) {
        case Shape::disk:
        case Shape::polar_cap: return a_ - x.norm();
        case Shape::annulus: {
            double r = x.norm();
            return std::min(r - a_, b_ - r);
        }
        case Shape::half_space: return a_ - x(x.size() - 1);
        case Shape::box_periodic: break;
    }
    throw PmcError(ErrorCode::NoBoundary, "d on a closed domain");
}

Vec DomainChart::grad_d(const Vec& x) const {
    const int n = static_cast<int>(x.size());
    switch (shape_) {
        case Shape::disk:
        case Shape::polar_cap: {
            double r = x.norm();
            if (r == 0.0) return Vec::Zero(n);
            return -x / r;
        }
        case Shape::annulus: {
            double r = x.norm();
            if (r == 0.0) return Vec::Zero(n);
            return (r - a_ < b_ - r) ? Vec(x / r) : Vec(-x / r);
        }
        case Shape::half_space: {
            Vec g = Vec::Zero(n);
            g(n - 1) = -1.0;
            return g;
        }
        case Shape::box_periodic: break;
    }
    throw PmcError(ErrorCode::NoBoundary, "grad_d on a closed domain");
}

double DomainChart::collar() const {
    switch (shape_) {
        case Shape::disk:
        case Shape::polar_cap: return a_;
        case Shape::annulus: return 0.5 * (b_ - a_);
        case Shape::half_space: return std::numeric_limits<double>::infinity();
        case Shape::box_periodic: break;
    }
    throw PmcError(ErrorCode::NoBoundary, "collar on a closed domain");
}

Vec DomainChart::gamma(const Vec& y) const {
    require_boundary("gamma on a closed domain");
    Mat si = metric_.sigma(y).inverse();
    Vec gd = grad_d(y);
    return -(si * gd) / std::sqrt(gd.dot(si * gd));
}

Vec DomainChart::project(const Vec& x) const {
    require_boundary("project on a closed domain");
    if (shape_ == Shape::half_space) {
        Vec y = x;
        y(y.size() - 1) = a_;
        return y;
    }
    double r = x.norm();
    Vec e = Vec::Zero(x.size());
    e(0) = 1.0;
    if (r > 0.0) e = x / r;
    if (shape_ == Shape::annulus) return e * ((r - a_ < b_ - r) ? a_ : b_);
    return e * a_;
}

std::optional<double> DomainChart::analytic_boundary_H(const Vec& y) const {
    require_boundary("H on a closed domain");
    const int n = dim();
    switch (shape_) {
        case Shape::disk:
            if (metric_.kind() == MetricKind::euclidean) return (n - 1) / a_;
            break;
        case Shape::annulus:
            if (metric_.kind() == MetricKind::euclidean) {
                double r = y.norm();
                return (r - a_ < b_ - r) ? -(n - 1) / a_ : (n - 1) / b_;
            }
            break;
        case Shape::polar_cap: {
            double r = y.norm();
            return (n - 1) * metric_.warp().df(r) / metric_.warp().f(r);
        }
        case Shape::half_space:
            if (metric_.kind() == MetricKind::euclidean) return 0.0;
            break;
        case Shape::box_periodic: break;
    }
    return std::nullopt;
}

double DomainChart::H_boundary(const Vec& y) const { return boundary_mean_curvature(*this, metric_, y); }

std::vector<Vec> DomainChart::boundary_samples(int m) const {
    require_boundary("boundary samples on a closed domain");
    const int n = dim();
    std::vector<Vec> out;
    if (shape_ == Shape::half_space) {
        for (int k = 0; k < m; ++k) {
            Vec y(n);
            for (int i = 0; i < n - 1; ++i) y(i) = 2.0 * halton(k + 1, kPrimes[i]) - 1.0;
            y(n - 1) = a_;
            out.push_back(y);
        }
        return out;
    }
    if (shape_ == Shape::annulus) {
        int half = std::max(1, m / 2);
        for (const Vec& e : euclidean_directions(n, half, false)) out.push_back(e * a_);
        for (const Vec& e : euclidean_directions(n, half, false)) out.push_back(e * b_);
        return out;
    }
    for (const Vec& e : euclidean_directions(n, n == 3 ? (m + 1) / 2 : m, false)) out.push_back(e * a_);
    return out;
}

std::pair<Vec, Vec> DomainChart::bounding_box() const {
    const int n = dim();
    switch (shape_) {
        case Shape::disk:
        case Shape::polar_cap: return {Vec::Constant(n, -a_), Vec::Constant(n, a_)};
        case Shape::annulus: return {Vec::Constant(n, -b_), Vec::Constant(n, b_)};
        case Shape::box_periodic: return {Vec::Zero(n), Vec::Constant(n, a_)};
        case Shape::half_space: {
            Vec lo = Vec::Constant(n, -1.0), hi = Vec::Constant(n, 1.0);
            lo(n - 1) = a_ - 1.0;
            hi(n - 1) = a_;
            return {lo, hi};
        }
    }
    return {Vec::Zero(n), Vec::Zero(n)};
}

std::vector<Vec> DomainChart::interior_samples(int m, std::uint64_t seed) const {
    const int n = dim();
    if (n > 10) throw PmcError(ErrorCode::InvalidArgument, "dimension too large for sampling");
    auto [lo, hi] = bounding_box();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec shift(n);
    for (int i = 0; i < n; ++i) shift(i) = seed == 0 ? 0.0 : U(rng);
    std::vector<Vec> out;
    for (int k = 1; static_cast<int>(out.size()) < m && k < 200 * m + 1000; ++k) {
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            double u = std::fmod(halton(k, kPrimes[i]) + shift(i), 1.0);
            x(i) = lo(i) + (hi(i) - lo(i)) * u;
        }
        if (shape_ == Shape::box_periodic || d(x) >= 0.0) out.push_back(x);
    }
    return out;
}

double DomainChart::diameter() const {
    switch (shape_) {
        case Shape::disk:
        case Shape::polar_cap: return 2.0 * a_;
        case Shape::annulus: return 2.0 * b_;
        case Shape::box_periodic: return a_ * std::sqrt(static_cast<double>(dim()));
        case Shape::half_space: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

// ---------------------------------------------------------------- problem families

PMCProblem make_cmc(double c) {
    PMCProblem p;
    p.family = "cmc";
    p.F = [c](const Vec&, const Vec&, double) { return -c; };
    p.phi = [](const Vec&, double, const Vec&, double) { return 0.0; };
    return p;
}

PMCProblem make_jang(ChartMetric metric, std::function<Mat(const Vec&)> k) {
    PMCProblem p;
    p.family = "jang";
    p.F = [metric = std::move(metric), k = std::move(k)](const Vec& x, const Vec& X, double) {
        Mat kx = k(x);
        double tr = (metric.sigma(x).inverse() * kx).trace();
        return tr - X.dot(kx * X);
    };
    p.phi = [](const Vec&, double, const Vec&, double) { return 0.0; };
    return p;
}

PMCProblem make_conformal_minimal(ConformalFactor fconf, int n) {
    PMCProblem p;
    p.family = "conformal";
    p.F = [g = fconf.grad_x, n](const Vec& x, const Vec& X, double) { return -n * g(x).dot(X); };
    p.phi = [dr = fconf.d_r, n](const Vec& x, double z, const Vec&, double) { return n * dr(x, z); };
    return p;
}

PMCProblem make_linear_phi(double F0, double beta, std::function<double(const Vec&)> g) {
    if (beta < 0.0) throw PmcError(ErrorCode::InvalidArgument, "beta >= 0");
    PMCProblem p;
    p.family = "custom";
    p.F = [F0](const Vec&, const Vec&, double) { return F0; };
    p.phi = [beta, g = std::move(g)](const Vec& x, double z, const Vec&, double) {
        return beta * z + g(x);
    };
    p.dphi_dz_lower_bound = beta;
    return p;
}

// ---------------------------------------------------------------- hypothesis checks

SerrinReport serrin_condition_check(const PMCProblem& problem, const DomainChart& domain,
                                    int samples) {
    if (!domain.has_boundary()) throw PmcError(ErrorCode::NoBoundary, "serrin check on a closed domain");
    SerrinReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const Vec& y : domain.boundary_samples(samples)) {
        Vec g = domain.gamma(y);
        double H = domain.H_boundary(y);
        double margin = H - std::max(problem.f(y, g), -problem.f(y, Vec(-g)));
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_point = y;
        }
    }
    rep.holds = rep.worst_margin >= -kTolGeom;
    return rep;
}

NcfReport ncf_sufficient_check(const PMCProblem& problem, const DomainChart& domain, int samples) {
    const ChartMetric& metric = domain.metric();
    if (!metric.analytic()) throw PmcError(ErrorCode::UnsupportedMetricKind, "sufficient condition check on grid_sampled");
    if (!domain.has_boundary()) throw PmcError(ErrorCode::NoBoundary, "sufficient condition check on a closed domain");
    const int n = domain.dim();
    if (n > 7) throw PmcError(ErrorCode::InvalidArgument, "only 2 <= n <= 7 is handled");

    NcfReport rep;
    auto boundary = domain.boundary_samples(samples);
    std::vector<Vec> points = domain.interior_samples(samples);
    points.insert(points.end(), boundary.begin(), boundary.end());
    for (const Vec& x : points)
        for (const Vec& e : metric_unit_directions(metric.sigma(x), 16))
            rep.mu = std::max({rep.mu, std::abs(problem.f(x, e)), std::abs(problem.f(x, Vec(-e)))});

    bool equal_plus = true, equal_minus = true;
    rep.H_min = std::numeric_limits<double>::infinity();
    for (const Vec& y : boundary) {
        Vec g = domain.gamma(y);
        double H = domain.H_boundary(y);
        rep.H_min = std::min(rep.H_min, H);
        if (std::abs(H - problem.f(y, g)) > kTolGeom) equal_plus = false;
        if (std::abs(H + problem.f(y, Vec(-g))) > kTolGeom) equal_minus = false;
    }
    rep.condition1 = !equal_plus && !equal_minus;
    rep.ricci_min = ricci_min_estimate(metric, domain, samples);

    double threshold = -rep.mu * rep.mu / (n - 1);
    bool a = rep.H_min >= rep.mu - kTolGeom && rep.ricci_min > threshold + kTolGeom;
    bool b = rep.H_min > rep.mu + kTolGeom && rep.ricci_min >= threshold - kTolGeom;
    if (rep.condition1 && a) rep.branch = "2a";
    else if (rep.condition1 && b) rep.branch = "2b";
    rep.satisfied = rep.branch != "none";
    return rep;
}

// ---------------------------------------------------------------- counterexample

double unit_sphere_area(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

double Counterexample::sphere_mean_curvature(double r) const {
    const Warp& h = metric.warp();
    return (n - 1) * h.df(r) / h.f(r);
}

double Counterexample::volume(double r) const {
    const Warp& h = metric.warp();
    int m = n;
    double integral = adaptive_simpson([&](double s) { return std::pow(h.f(s), m - 1); }, 0.0, r, 1e-12);
    return unit_sphere_area(n) * integral;
}

double Counterexample::euclidean_ball_volume(double r) const {
    return unit_sphere_area(n) * std::pow(r, n) / n;
}

Counterexample counterexample_problem(double beta, int n, double k) {
    if (!(beta > 0.0) || n < 2) throw PmcError(ErrorCode::InvalidArgument, "beta > 0, n >= 2");
    if (k == 0.0) k = std::max(beta, n / beta) + 1.0;
    Counterexample ce;
    ce.beta = beta;
    ce.n = n;
    ce.k = k;
    ce.metric = ChartMetric::spherical_warped(n, warp_counterexample(beta, n, k));
    ce.domain = DomainChart::polar_cap(ce.metric, k);
    ce.problem = make_cmc(beta);
    ce.problem.family = "counterexample";
    ce.problem.psi = [](const Vec&) { return 0.0; };
    return ce;
}

}  // namespace pmc

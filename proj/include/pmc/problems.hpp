#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmc/geometry.hpp"

namespace pmc {

enum class Shape { disk, annulus, box_periodic, polar_cap, half_space };
const char* to_string(Shape s);

class DomainChart {
public:
    static DomainChart disk(ChartMetric metric, double a);
    static DomainChart annulus(ChartMetric metric, double a, double b);
    // Flat torus [0, L)^n; no boundary.
    static DomainChart box_periodic(ChartMetric metric, double L);
    // Geodesic ball r < r_max around the pole of a spherical_warped metric.
    static DomainChart polar_cap(ChartMetric metric, double r_max);
    // {x : x_{n-1} < offset}; boundary is the slice x_{n-1} = offset.
    static DomainChart half_space(ChartMetric metric, double offset);

    Shape shape() const { return shape_; }
    const ChartMetric& metric() const { return metric_; }
    int dim() const { return metric_.dim(); }
    double a() const { return a_; }
    double b() const { return b_; }
    bool has_boundary() const { return shape_ != Shape::box_periodic; }

    bool inside(const Vec& x) const;
    // Level function vanishing on the boundary, positive inside, |Dd| = 1 in
    // the coordinate sense. It is the distance for the Euclidean shapes and
    // for polar_cap.
    double d(const Vec& x) const;
    Vec grad_d(const Vec& x) const;
    // Width of the collar where d is smooth.
    double collar() const;
    // Outward unit normal at a boundary point (contravariant components).
    Vec gamma(const Vec& y) const;
    // Closest boundary point along the normal direction of d.
    Vec project(const Vec& x) const;
    std::optional<double> analytic_boundary_H(const Vec& y) const;
    double H_boundary(const Vec& y) const;
    std::vector<Vec> boundary_samples(int m) const;
    // Deterministic points of the closed domain (Halton with a seeded shift).
    std::vector<Vec> interior_samples(int m, std::uint64_t seed = 0) const;
    std::pair<Vec, Vec> bounding_box() const;
    double diameter() const;

private:
    void require_boundary(const char* what) const;

    Shape shape_ = Shape::disk;
    ChartMetric metric_;
    double a_ = 1.0;
    double b_ = 0.0;
};

// Metric-unit directions: Gram factor of sigma applied to low-discrepancy
// Euclidean directions. In 2D the m directions cover a half circle.
std::vector<Vec> metric_unit_directions(const Mat& sigma, int m);

using FFn = std::function<double(const Vec& x, const Vec& X, double r)>;
using PhiFn = std::function<double(const Vec& x, double z, const Vec& X, double r)>;
using PsiFn = std::function<double(const Vec& x)>;

struct PMCProblem {
    std::string family;
    FFn F;
    PhiFn phi;
    PsiFn psi;  // empty on closed manifolds
    double dphi_dz_lower_bound = 0.0;
    double t = 0.0;

    double f(const Vec& x, const Vec& X) const { return F(x, X, 0.0); }
    bool needs_continuation() const { return t == 0.0 && dphi_dz_lower_bound == 0.0; }
};

// Constant mean curvature c: graphs with div(Du/omega) = c. Stored as F = -c
// so that the residual -div - F + phi/omega vanishes on them.
PMCProblem make_cmc(double c);
// F(x, X, r) = tr_sigma k(x) - k(X, X).
PMCProblem make_jang(ChartMetric metric, std::function<Mat(const Vec&)> k);

// Conformal factor fconf(x, r) of e^{2 fconf}(sigma + dr^2). The base gradient
// must not depend on the height because F carries no height argument.
struct ConformalFactor {
    std::function<Vec(const Vec& x)> grad_x;
    std::function<double(const Vec& x, double z)> d_r;
};
// F(x, X, r) = -n <D fconf, X>, phi(x, z, X, r) = n d_r fconf(x, z).
PMCProblem make_conformal_minimal(ConformalFactor fconf, int n);
// F = F0, phi(x, z) = beta z + g(x).
PMCProblem make_linear_phi(double F0, double beta, std::function<double(const Vec&)> g);

struct SerrinReport {
    bool holds = false;
    double worst_margin = 0.0;
    Vec worst_point;
};
SerrinReport serrin_condition_check(const PMCProblem& problem, const DomainChart& domain,
                                    int samples);

struct NcfReport {
    bool satisfied = false;
    std::string branch = "none";
    double mu = 0.0;
    bool condition1 = false;
    double H_min = 0.0;
    double ricci_min = 0.0;
};
NcfReport ncf_sufficient_check(const PMCProblem& problem, const DomainChart& domain,
                               int samples = 64);

struct Counterexample {
    double beta = 1.0;
    int n = 2;
    double k = 3.0;
    ChartMetric metric;
    DomainChart domain;
    PMCProblem problem;

    // Mean curvature of the geodesic sphere of radius r, (n-1) h'(r)/h(r).
    double sphere_mean_curvature(double r) const;
    double H_boundary_M() const { return sphere_mean_curvature(k); }
    // Volume of M_r by adaptive quadrature of |S^{n-1}| h^{n-1}.
    double volume(double r) const;
    double euclidean_ball_volume(double r) const;
};
double unit_sphere_area(int n);  // |S^{n-1}|

// k defaults to max(beta, n/beta) + 1.
Counterexample counterexample_problem(double beta, int n, double k = 0.0);

}  // namespace pmc

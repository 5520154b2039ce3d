#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmc/field.hpp"

namespace pmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class DomainChart;

// Scalar warp function with its first two derivatives.
struct Warp {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
};

Warp warp_identity();  // h(r) = r
Warp warp_cosh();      // phi(r) = cosh r
Warp warp_inverse();   // phi(r) = 1/r, hyperbolic upper half space in conformal form

// h(r) = r on [0, n/beta], exp(k r) on [k, inf), and on the bridge log h is a
// quintic smoothstep blend of log r and k r. Requires k > max(beta, n/beta).
Warp warp_counterexample(double beta, int n, double k);

enum class MetricKind { euclidean, conformal_product, spherical_warped, grid_sampled };
const char* to_string(MetricKind k);

class ChartMetric {
public:
    static ChartMetric euclidean(int n);
    // Coordinates (x_1, ..., x_{n-1}, r) with sigma = phi(r)^2 * identity.
    static ChartMetric conformal_product(int n, Warp phi);
    // Cartesian chart centred at the pole of h(r)^2 sigma_{n-1} + dr^2.
    static ChartMetric spherical_warped(int n, Warp h);
    // Two-dimensional metric stored at the nodes of `layout`, bilinear in between.
    static ChartMetric grid_sampled(const Field& layout, std::vector<Eigen::Matrix2d> nodes);

    int dim() const { return n_; }
    MetricKind kind() const { return kind_; }
    bool analytic() const { return kind_ != MetricKind::grid_sampled; }
    const Warp& warp() const { return warp_; }

    Mat sigma(const Vec& x) const;
    // dsigma[k](i, j) = d_k sigma_ij
    std::vector<Mat> dsigma(const Vec& x) const;
    // gamma[k](i, j) = Gamma^k_ij
    std::vector<Mat> christoffel(const Vec& x) const;
    // Ricci tensor R_ij. Throws UnsupportedMetricKind for grid_sampled.
    Mat ricci(const Vec& x) const;
    double sqrt_det(const Vec& x) const;
    double min_eigenvalue(const Vec& x) const;

private:
    struct Sampled {
        Field layout;
        std::vector<Eigen::Matrix2d> nodes;
    };

    int n_ = 2;
    MetricKind kind_ = MetricKind::euclidean;
    Warp warp_;
    std::shared_ptr<const Sampled> sampled_;
};

struct GraphGeometry {
    double omega = 1.0;
    double theta = 1.0;
    Vec normal;  // (-Du/omega, 1/omega), contravariant base components first
    Mat g;       // induced metric sigma + Du Du^T
    Mat g_inv;
    double A2 = 0.0;
    double H = 0.0;  // div(Du/omega)
};

// Difference of a nodal array along `axis` at node (i, j) of a 2D layout:
// centred when both neighbours are active, second-order one-sided otherwise.
double grid_diff(const Field& layout, const std::function<double(int)>& value, int i, int j,
                 int axis);

double covariant_divergence(const ChartMetric& metric, const Field& layout,
                            const std::vector<double>& Wx, const std::vector<double>& Wy, int i,
                            int j);

// Du at node (i, j) as a covector, by grid_diff.
Eigen::Vector2d grid_gradient(const Field& u, int i, int j);

GraphGeometry graph_geometry(const ChartMetric& metric, const Field& u, int i, int j);

double slice_mean_curvature(const Warp& phi, int n, double t);

// Mean curvature of the boundary at y w.r.t. the outward normal. Uses the
// analytic value when the domain provides one, else boundary_mean_curvature_numeric.
double boundary_mean_curvature(const DomainChart& domain, const ChartMetric& metric, const Vec& y);
// div(-Dd/|Dd|) by fourth-order central differences of the normal field.
double boundary_mean_curvature_numeric(const DomainChart& domain, const ChartMetric& metric,
                                       const Vec& y);

// Min of Ric(e, e) over sampled points and sampled metric-unit directions.
double ricci_min_estimate(const ChartMetric& metric, const DomainChart& domain, int samples,
                          std::uint64_t seed = 0);

}  // namespace pmc

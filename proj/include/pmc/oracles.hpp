#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pmc/discretization.hpp"

namespace pmc {

// Lower spherical cap u = -sqrt(R^2 - |x|^2) over the Euclidean disk(a).
struct CapOracle {
    double R = 2.0;
    double a = 1.0;
    int n = 2;
    double f = 1.0;  // n / R

    double u(const Vec& x) const;
    Vec grad(const Vec& x) const;
    PsiFn psi() const;
    PMCProblem problem() const;
};
CapOracle spherical_cap_oracle(double R, double a, int n);

struct FluxAnalysis {
    std::optional<double> saturation_radius;
    double max_ratio = 0.0;
    std::function<double(double)> ratio;
    // u(r) - u(0) = int_0^r Phi / sqrt(J^2 - Phi^2); set when ratio <= 0.9 everywhere.
    std::function<double(double)> u_exact;
};
FluxAnalysis flux_analysis(const RadialODE& ode);

struct BarrierConstants {
    double kappa = 0.0;
    double nu = 0.0;
    double d0 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C4 = 0.0;
};
// nu = max(1, C3), d0 = min(d0_max, 1 / (2 C2 nu)),
// kappa = max(C2 nu / (1 - C2 nu d0), (exp(C4 nu) - 1) / d0).
BarrierConstants barrier_constants_from(double C2, double C3, double C4, double d0_max);

struct BoundaryExtension {
    PsiFn value;
    std::function<Vec(const Vec&)> grad;  // optional, finite differences otherwise
    std::function<Mat(const Vec&)> hess;  // optional
};
// Estimates C2 and C3 on a collar lattice (10x safety) after checking the
// boundary inequalities through serrin_condition_check; C4 = c0 + sup|varphi|.
BarrierConstants barrier_constants(double c0, const BoundaryExtension& varphi,
                                   const PMCProblem& problem, const DomainChart& domain,
                                   int samples = 64);

// Delta_S Theta + (|A|^2 + Ric(v, v)) Theta - <grad H, d_r> on the graph of u.
// Nodes without a full stencil are marked inactive in the result.
Field theta_identity_residual(const ChartMetric& metric, const Field& u,
                              const std::function<double(const Vec&)>& H);

// Smallest c1 >= 0 with Delta Theta + beta |A|^2 Theta - c1 Theta <= 0 at the
// nodes of `mask` (constant data, so the f-derivative terms vanish).
double empirical_c1(const ChartMetric& metric, const Field& u, double beta,
                    const std::vector<std::uint8_t>& mask);

struct QField {
    std::vector<double> Qx, Qy;
    Field div_residual;   // div Q - f on unknown nodes with a full stencil
    double sup_norm = 0.0;  // sup <Q, Q> over unknown nodes
    double div_residual_inf = 0.0;  // over nodes with d >= d_min
};
// Requires ||residual(u)||_inf <= solve_tol (NotASolution otherwise).
QField q_field(const Discretization& disc, const Field& u,
               const std::function<double(const Vec&)>& f, double solve_tol, double d_min = 0.0);

}  // namespace pmc

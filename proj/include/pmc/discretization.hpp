#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "pmc/field.hpp"
#include "pmc/problems.hpp"

namespace pmc {

// Square grid covering a 2D domain. Nodes with d > 0 are unknowns; the ring of
// nodes touching them from outside holds psi evaluated at the node, which is
// the boundary-data extension. Everything else is inactive.
Field make_grid_field(const DomainChart& domain, double h, const PsiFn& psi);
// n x n periodic grid on [0, L)^2.
Field make_periodic_field(double L, int n);
// nr cells on [0, r_max] plus the boundary node at r_max.
Field make_radial_field(double r_max, int nr, double psi_outer);

struct ResidualSystem {
    Eigen::VectorXd residual;                            // unknown ordering
    Eigen::SparseMatrix<double, Eigen::RowMajor> jacobian;
    int colors = 0;
    // d/du of (phi + t u)/omega per unknown, and whether every entry is at
    // least t * min(1/omega) up to round-off.
    Eigen::VectorXd zeroth_order_diag;
    bool diag_monotone = false;
};

// Residual of -div(Du/w) - F(x, -Du/w, 1/w) + (phi(x, u, -Du/w, 1/w) + t u)/w on a
// fixed layout. Divergence in flux form: face fluxes sqrt(det s) s^{ij} u_j / w
// with the normal derivative across the face and the averaged tangential one.
class Discretization {
public:
    Discretization(DomainChart domain, PMCProblem problem, Field layout);

    const DomainChart& domain() const { return domain_; }
    const ChartMetric& metric() const { return domain_.metric(); }
    const PMCProblem& problem() const { return problem_; }
    PMCProblem& problem() { return problem_; }
    const Field& layout() const { return layout_; }
    void set_t(double t) { problem_.t = t; }

    int num_unknowns() const { return static_cast<int>(unknowns_.size()); }
    const std::vector<int>& unknowns() const { return unknowns_; }
    // Unknown ids each residual row depends on.
    const std::vector<std::vector<int>>& dependencies() const { return deps_; }

    Eigen::VectorXd gather(const Field& u) const;
    void scatter(const Eigen::VectorXd& v, Field& u) const;

    // Residual per unknown. Throws DivergedField on non-finite input or output.
    Eigen::VectorXd residual(const Field& u) const;
    ResidualSystem jacobian(const Field& u) const;
    // Graph colouring of the columns: no two columns of one colour share a row.
    const std::vector<int>& coloring() const { return color_; }
    int num_colors() const { return num_colors_; }

    // max(|psi| on Dirichlet nodes, |F|, |phi| sampled at zero slope).
    double data_scale() const;
    // Nodal |Du|_sigma by centred differences (0 on non-unknown nodes).
    std::vector<double> gradient_norm(const Field& u) const;
    // Du/omega at a node as contravariant components, centred differences.
    Eigen::Vector2d flux_at(const Field& u, int node) const;

private:
    double residual_grid(const Field& u, int node) const;
    double residual_radial(const Field& u, int node) const;
    double face_flux_x(const Field& u, int i, int j) const;
    double face_flux_y(const Field& u, int i, int j) const;
    double zeroth_order(const Field& u, int node, double z) const;
    void node_slope(const Field& u, int node, double& r, Vec& X) const;

    DomainChart domain_;
    PMCProblem problem_;
    Field layout_;
    std::vector<int> unknowns_;
    std::vector<int> unknown_id_;
    std::vector<std::vector<int>> deps_;
    std::vector<int> color_;
    int num_colors_ = 0;

    // Per-node metric data; faces are stored at the node to their left/below.
    std::vector<Vec> x_;
    std::vector<double> s_node_;
    std::vector<Eigen::Matrix2d> sinv_node_;
    std::vector<double> s_ex_, s_ny_;
    std::vector<Eigen::Matrix2d> sinv_ex_, sinv_ny_;
    // Radial data: cell volumes and face area densities (face i at r = (i+1) dr).
    std::vector<double> vol_, face_J_;
};

// Node-shaped residual (zero off the unknowns).
Field assemble_residual(const Discretization& disc, const Field& u);
ResidualSystem assemble_jacobian(const Discretization& disc, const Field& u);

// Flux form (J u'/w)' = J RHS of a rotationally symmetric problem.
struct RadialODE {
    int n = 2;
    double r_max = 0.0;
    std::function<double(double)> J;
    std::function<double(double)> RHS;
    // Cumulative flux int_0^r J RHS by adaptive Simpson (tolerance 1e-10).
    double Phi(double r) const;
};

// Requires a euclidean or spherical_warped metric on a disk or polar cap,
// F independent of angle and slope, and phi = 0; otherwise NotRadial.
RadialODE radial_reduce(const PMCProblem& problem, const DomainChart& domain);

}  // namespace pmc

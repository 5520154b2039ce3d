#include "pmc/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmc/errors.hpp"
#include "pmc/quadrature.hpp"

namespace pmc {

bool Field::finite() const {
    for (int k = 0; k < size(); ++k)
        if (kind[k] != NodeKind::inactive && !std::isfinite(values[k])) return false;
    return true;
}

std::vector<int> Field::unknowns() const {
    std::vector<int> out;
    for (int k = 0; k < size(); ++k)
        if (kind[k] == NodeKind::unknown) out.push_back(k);
    return out;
}

namespace {

Vec vec2(const Eigen::Vector2d& p) {
    Vec v(2);
    v << p(0), p(1);
    return v;
}

void require_min_size(const Field& f) {
    if (f.nx < 9 || (f.layout != Layout::radial && f.ny < 9))
        throw PmcError(ErrorCode::InvalidArgument, "fields need at least 9 nodes per axis");
}

double area_density(const ChartMetric& metric, double r) {
    int n = metric.dim();
    if (metric.kind() == MetricKind::euclidean) return std::pow(r, n - 1);
    return std::pow(metric.warp().f(r), n - 1);
}

}  // namespace

// ---------------------------------------------------------------- layouts

Field make_grid_field(const DomainChart& domain, double h, const PsiFn& psi) {
    if (domain.dim() != 2 || !domain.has_boundary() || domain.shape() == Shape::half_space)
        throw PmcError(ErrorCode::InvalidArgument, "grid embedding needs a bounded 2D domain");
    if (!(h > 0.0)) throw PmcError(ErrorCode::InvalidArgument, "h > 0");
    double R = domain.shape() == Shape::annulus ? domain.b() : domain.a();
    int N = static_cast<int>(std::ceil(R / h - 1e-12)) + 1;
    Field f;
    f.layout = Layout::grid2d;
    f.nx = f.ny = 2 * N + 1;
    f.h = h;
    f.x0 = f.y0 = -N * h;
    require_min_size(f);
    f.values.assign(f.size(), 0.0);
    f.kind.assign(f.size(), NodeKind::inactive);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            if (domain.d(vec2(f.point(i, j))) > 0.0) f.kind[f.index(i, j)] = NodeKind::unknown;
    for (int j = 1; j < f.ny - 1; ++j)
        for (int i = 1; i < f.nx - 1; ++i) {
            if (f.kind[f.index(i, j)] != NodeKind::unknown) continue;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    int k = f.index(i + di, j + dj);
                    if (f.kind[k] == NodeKind::inactive) f.kind[k] = NodeKind::dirichlet;
                }
        }
    for (int k = 0; k < f.size(); ++k)
        if (f.kind[k] == NodeKind::dirichlet) f.values[k] = psi(vec2(f.point(k % f.nx, k / f.nx)));
    return f;
}

Field make_periodic_field(double L, int n) {
    Field f;
    f.layout = Layout::grid_periodic;
    f.nx = f.ny = n;
    f.h = L / n;
    require_min_size(f);
    f.values.assign(f.size(), 0.0);
    f.kind.assign(f.size(), NodeKind::unknown);
    return f;
}

Field make_radial_field(double r_max, int nr, double psi_outer) {
    Field f;
    f.layout = Layout::radial;
    f.nx = nr + 1;
    f.ny = 1;
    f.h = r_max / nr;
    require_min_size(f);
    f.values.assign(f.size(), 0.0);
    f.kind.assign(f.size(), NodeKind::unknown);
    f.kind[nr] = NodeKind::dirichlet;
    f.values[nr] = psi_outer;
    return f;
}

// ---------------------------------------------------------------- Discretization

Discretization::Discretization(DomainChart domain, PMCProblem problem, Field layout)
    : domain_(std::move(domain)), problem_(std::move(problem)), layout_(std::move(layout)) {
    const Field& f = layout_;
    require_min_size(f);
    const ChartMetric& metric = domain_.metric();
    const bool radial = f.layout == Layout::radial;
    if (!radial && metric.dim() != 2)
        throw PmcError(ErrorCode::InvalidArgument, "grid layouts need a 2D metric");
    if (radial && metric.kind() != MetricKind::euclidean && metric.kind() != MetricKind::spherical_warped)
        throw PmcError(ErrorCode::InvalidArgument, "radial layouts need a rotationally symmetric metric");

    unknown_id_.assign(f.size(), -1);
    for (int k = 0; k < f.size(); ++k)
        if (f.kind[k] == NodeKind::unknown) {
            unknown_id_[k] = static_cast<int>(unknowns_.size());
            unknowns_.push_back(k);
        }

    x_.resize(f.size());
    if (radial) {
        const int n = metric.dim();
        const int nr = f.nx - 1;
        for (int i = 0; i < f.nx; ++i) {
            x_[i] = Vec::Zero(n);
            x_[i](0) = f.point(i, 0)(0);
        }
        vol_.resize(nr);
        face_J_.resize(nr);
        for (int i = 0; i < nr; ++i) {
            vol_[i] = adaptive_simpson([&](double r) { return area_density(metric, r); }, i * f.h,
                                       (i + 1) * f.h, 1e-14);
            face_J_[i] = area_density(metric, (i + 1) * f.h);
        }
    } else {
        s_node_.assign(f.size(), 0.0);
        s_ex_.assign(f.size(), 0.0);
        s_ny_.assign(f.size(), 0.0);
        sinv_node_.assign(f.size(), Eigen::Matrix2d::Identity());
        sinv_ex_.assign(f.size(), Eigen::Matrix2d::Identity());
        sinv_ny_.assign(f.size(), Eigen::Matrix2d::Identity());
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                int k = f.index(i, j);
                if (!f.active(k)) continue;
                Eigen::Vector2d p = f.point(i, j);
                x_[k] = vec2(p);
                Mat s = metric.sigma(x_[k]);
                s_node_[k] = std::sqrt(s.determinant());
                sinv_node_[k] = s.inverse();
                Vec pe = vec2(p + Eigen::Vector2d(0.5 * f.h, 0.0));
                Vec pn = vec2(p + Eigen::Vector2d(0.0, 0.5 * f.h));
                Mat se = metric.sigma(pe), sn = metric.sigma(pn);
                s_ex_[k] = std::sqrt(se.determinant());
                s_ny_[k] = std::sqrt(sn.determinant());
                sinv_ex_[k] = se.inverse();
                sinv_ny_[k] = sn.inverse();
            }
    }

    // Stencil dependencies (symmetric relation).
    deps_.resize(unknowns_.size());
    for (std::size_t u = 0; u < unknowns_.size(); ++u) {
        int k = unknowns_[u];
        if (radial) {
            for (int di = -1; di <= 1; ++di) {
                int kk = k + di;
                if (kk >= 0 && kk < f.size() && unknown_id_[kk] >= 0) deps_[u].push_back(unknown_id_[kk]);
            }
            continue;
        }
        int i = k % f.nx, j = k / f.nx;
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                int kk = f.node(i + di, j + dj);
                if (!f.active(kk))
                    throw PmcError(ErrorCode::InvalidArgument, "unknown node without a full stencil");
                if (unknown_id_[kk] >= 0) deps_[u].push_back(unknown_id_[kk]);
            }
        std::sort(deps_[u].begin(), deps_[u].end());
        deps_[u].erase(std::unique(deps_[u].begin(), deps_[u].end()), deps_[u].end());
    }

    // Greedy distance-2 colouring.
    color_.assign(unknowns_.size(), -1);
    std::vector<int> mark;
    for (std::size_t c = 0; c < unknowns_.size(); ++c) {
        mark.assign(num_colors_ + 1, 0);
        for (int r : deps_[c])
            for (int c2 : deps_[r])
                if (color_[c2] >= 0) mark[color_[c2]] = 1;
        int col = 0;
        while (mark[col]) ++col;
        color_[c] = col;
        num_colors_ = std::max(num_colors_, col + 1);
    }
}

Eigen::VectorXd Discretization::gather(const Field& u) const {
    Eigen::VectorXd v(num_unknowns());
    for (int a = 0; a < num_unknowns(); ++a) v(a) = u.values[unknowns_[a]];
    return v;
}

void Discretization::scatter(const Eigen::VectorXd& v, Field& u) const {
    for (int a = 0; a < num_unknowns(); ++a) u.values[unknowns_[a]] = v(a);
}

double Discretization::face_flux_x(const Field& u, int i, int j) const {
    const double h = u.h;
    const auto& v = u.values;
    int c = u.node(i, j), e = u.node(i + 1, j);
    double ux = (v[e] - v[c]) / h;
    double uy = (v[u.node(i, j + 1)] + v[u.node(i + 1, j + 1)] - v[u.node(i, j - 1)] -
                 v[u.node(i + 1, j - 1)]) /
                (4.0 * h);
    const Eigen::Matrix2d& si = sinv_ex_[c];
    double w0 = si(0, 0) * ux + si(0, 1) * uy;
    double w1 = si(1, 0) * ux + si(1, 1) * uy;
    double omega = std::sqrt(1.0 + ux * w0 + uy * w1);
    return s_ex_[c] * w0 / omega;
}

double Discretization::face_flux_y(const Field& u, int i, int j) const {
    const double h = u.h;
    const auto& v = u.values;
    int c = u.node(i, j), nn = u.node(i, j + 1);
    double uy = (v[nn] - v[c]) / h;
    double ux = (v[u.node(i + 1, j)] + v[u.node(i + 1, j + 1)] - v[u.node(i - 1, j)] -
                 v[u.node(i - 1, j + 1)]) /
                (4.0 * h);
    const Eigen::Matrix2d& si = sinv_ny_[c];
    double w0 = si(0, 0) * ux + si(0, 1) * uy;
    double w1 = si(1, 0) * ux + si(1, 1) * uy;
    double omega = std::sqrt(1.0 + ux * w0 + uy * w1);
    return s_ny_[c] * w1 / omega;
}

void Discretization::node_slope(const Field& u, int node, double& r, Vec& X) const {
    const auto& v = u.values;
    if (u.layout == Layout::radial) {
        const int nr = u.nx - 1;
        const double dr = u.h;
        int i = node;
        double g;
        if (i == 0) g = (v[1] - v[0]) / (2.0 * dr);
        else if (i < nr - 1) g = (v[i + 1] - v[i - 1]) / (2.0 * dr);
        else {
            double a = dr, b = 0.5 * dr;
            g = (a * a * v[nr] - b * b * v[i - 1] - (a * a - b * b) * v[i]) / (a * b * (a + b));
        }
        double omega = std::sqrt(1.0 + g * g);
        X.setZero();
        X(0) = -g / omega;
        r = 1.0 / omega;
        return;
    }
    int i = node % u.nx, j = node / u.nx;
    double ux = (v[u.node(i + 1, j)] - v[u.node(i - 1, j)]) / (2.0 * u.h);
    double uy = (v[u.node(i, j + 1)] - v[u.node(i, j - 1)]) / (2.0 * u.h);
    const Eigen::Matrix2d& si = sinv_node_[node];
    double w0 = si(0, 0) * ux + si(0, 1) * uy;
    double w1 = si(1, 0) * ux + si(1, 1) * uy;
    double omega = std::sqrt(1.0 + ux * w0 + uy * w1);
    X(0) = -w0 / omega;
    X(1) = -w1 / omega;
    r = 1.0 / omega;
}

double Discretization::residual_grid(const Field& u, int node) const {
    int i = node % u.nx, j = node / u.nx;
    double div = (face_flux_x(u, i, j) - face_flux_x(u, i - 1, j) + face_flux_y(u, i, j) -
                  face_flux_y(u, i, j - 1)) /
                 (u.h * s_node_[node]);
    thread_local Vec X(2);
    X.resize(2);
    double r;
    node_slope(u, node, r, X);
    double z = u.values[node];
    const Vec& x = x_[node];
    return -div - problem_.F(x, X, r) + (problem_.phi(x, z, X, r) + problem_.t * z) * r;
}

double Discretization::residual_radial(const Field& u, int node) const {
    const int nr = u.nx - 1;
    const double dr = u.h;
    const auto& v = u.values;
    auto flux = [&](int face) {
        double g = face < nr - 1 ? (v[face + 1] - v[face]) / dr : (v[nr] - v[nr - 1]) / (0.5 * dr);
        return face_J_[face] * g / std::sqrt(1.0 + g * g);
    };
    int i = node;
    double div = (flux(i) - (i > 0 ? flux(i - 1) : 0.0)) / vol_[i];
    const Vec& x = x_[node];
    thread_local Vec X;
    X.resize(x.size());
    double r;
    node_slope(u, node, r, X);
    double z = v[node];
    return -div - problem_.F(x, X, r) + (problem_.phi(x, z, X, r) + problem_.t * z) * r;
}

Eigen::VectorXd Discretization::residual(const Field& u) const {
    if (!u.finite()) throw PmcError(ErrorCode::DivergedField, "non-finite field values");
    Eigen::VectorXd R(num_unknowns());
    const bool radial = u.layout == Layout::radial;
    for (int a = 0; a < num_unknowns(); ++a) {
        int k = unknowns_[a];
        R(a) = radial ? residual_radial(u, k) : residual_grid(u, k);
        if (!std::isfinite(R(a))) throw PmcError(ErrorCode::DivergedField, "non-finite residual");
    }
    return R;
}

double Discretization::zeroth_order(const Field& u, int node, double z) const {
    thread_local Vec X;
    X.resize(x_[node].size());
    double r;
    node_slope(u, node, r, X);
    return (problem_.phi(x_[node], z, X, r) + problem_.t * z) * r;
}

ResidualSystem Discretization::jacobian(const Field& u) const {
    ResidualSystem sys;
    sys.residual = residual(u);
    sys.colors = num_colors_;
    const int m = num_unknowns();
    std::vector<std::vector<int>> by_color(num_colors_);
    for (int c = 0; c < m; ++c) by_color[color_[c]].push_back(c);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 9);
    // Central differences: the row sums carry the small zeroth-order part
    // (about t / omega) under large cancelling flux entries, so the forward
    // truncation error would swamp it.
    Field up = u, um = u;
    for (const auto& cols : by_color) {
        std::vector<double> step(cols.size());
        for (std::size_t q = 0; q < cols.size(); ++q) {
            int k = unknowns_[cols[q]];
            step[q] = 1e-6 * (1.0 + std::abs(u.values[k]));
            up.values[k] = u.values[k] + step[q];
            um.values[k] = u.values[k] - step[q];
        }
        Eigen::VectorXd R1 = residual(up);
        Eigen::VectorXd R0 = residual(um);
        for (std::size_t q = 0; q < cols.size(); ++q) {
            int c = cols[q];
            for (int row : deps_[c])
                trip.emplace_back(row, c, (R1(row) - R0(row)) / (2.0 * step[q]));
            up.values[unknowns_[c]] = u.values[unknowns_[c]];
            um.values[unknowns_[c]] = u.values[unknowns_[c]];
        }
    }
    sys.jacobian.resize(m, m);
    sys.jacobian.setFromTriplets(trip.begin(), trip.end());
    sys.jacobian.makeCompressed();

    sys.zeroth_order_diag.resize(m);
    double min_r = std::numeric_limits<double>::infinity();
    for (int a = 0; a < m; ++a) {
        int k = unknowns_[a];
        double z = u.values[k];
        double dz = 1e-7 * (1.0 + std::abs(z));
        sys.zeroth_order_diag(a) = (zeroth_order(u, k, z + dz) - zeroth_order(u, k, z)) / dz;
        thread_local Vec X;
        X.resize(x_[k].size());
        double r;
        node_slope(u, k, r, X);
        min_r = std::min(min_r, r);
    }
    double floor = problem_.t * min_r - 1e-6 * (1.0 + problem_.t);
    sys.diag_monotone = m == 0 || sys.zeroth_order_diag.minCoeff() >= floor;
    return sys;
}

double Discretization::data_scale() const {
    double s = 0.0;
    for (int k = 0; k < layout_.size(); ++k)
        if (layout_.kind[k] == NodeKind::dirichlet) s = std::max(s, std::abs(layout_.values[k]));
    for (int k : unknowns_) {
        Vec X = Vec::Zero(x_[k].size());
        s = std::max({s, std::abs(problem_.F(x_[k], X, 1.0)), std::abs(problem_.phi(x_[k], 0.0, X, 1.0))});
    }
    return s;
}

std::vector<double> Discretization::gradient_norm(const Field& u) const {
    std::vector<double> g(u.size(), 0.0);
    for (int k : unknowns_) {
        Vec X(x_[k].size());
        double r;
        node_slope(u, k, r, X);
        // |X|_sigma = |Du|_sigma / omega and 1/omega = r give |Du| = sqrt(w^2 - 1).
        double omega = 1.0 / r;
        g[k] = std::sqrt(std::max(0.0, omega * omega - 1.0));
    }
    return g;
}

Eigen::Vector2d Discretization::flux_at(const Field& u, int node) const {
    Vec X(2);
    double r;
    node_slope(u, node, r, X);
    return {-X(0), -X(1)};
}

Field assemble_residual(const Discretization& disc, const Field& u) {
    Field out = u;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    Eigen::VectorXd R = disc.residual(u);
    for (int a = 0; a < disc.num_unknowns(); ++a) out.values[disc.unknowns()[a]] = R(a);
    return out;
}

ResidualSystem assemble_jacobian(const Discretization& disc, const Field& u) { return disc.jacobian(u); }

// ---------------------------------------------------------------- radial reduction

double RadialODE::Phi(double r) const {
    return adaptive_simpson([this](double s) { return J(s) * RHS(s); }, 0.0, r, 1e-10);
}

RadialODE radial_reduce(const PMCProblem& problem, const DomainChart& domain) {
    const ChartMetric& metric = domain.metric();
    bool symmetric_metric =
        metric.kind() == MetricKind::euclidean || metric.kind() == MetricKind::spherical_warped;
    bool symmetric_domain = domain.shape() == Shape::disk || domain.shape() == Shape::polar_cap;
    if (!symmetric_metric || !symmetric_domain)
        throw PmcError(ErrorCode::NotRadial, "metric or domain is not rotationally symmetric");
    const int n = metric.dim();
    const double rmax = domain.a();

    // Angular, slope and height independence at a few probes.
    for (double r : {0.25 * rmax, 0.5 * rmax, 0.9 * rmax}) {
        Vec x0 = Vec::Zero(n);
        x0(0) = r;
        Vec Z = Vec::Zero(n);
        double ref = problem.F(x0, Z, 1.0);
        for (int k = 1; k < 8; ++k) {
            double a = 2.0 * 3.14159265358979323846 * k / 8.0;
            Vec x = Vec::Zero(n);
            x(0) = r * std::cos(a);
            x(1) = r * std::sin(a);
            Vec X = Vec::Zero(n);
            X(0) = 0.3 * std::cos(a);
            X(1) = 0.3 * std::sin(a);
            if (std::abs(problem.F(x, Z, 1.0) - ref) > 1e-12 || std::abs(problem.F(x, X, 0.7) - ref) > 1e-12)
                throw PmcError(ErrorCode::NotRadial, "F depends on the angle or the slope");
            if (problem.phi(x, 1.3, X, 0.7) != 0.0 || problem.phi(x, -2.0, Z, 1.0) != 0.0)
                throw PmcError(ErrorCode::NotRadial, "phi must vanish for the flux form");
        }
    }

    RadialODE ode;
    ode.n = n;
    ode.r_max = rmax;
    ode.J = [metric, n](double r) { return area_density(metric, r); };
    ode.RHS = [problem, n](double r) {
        Vec x = Vec::Zero(n);
        x(0) = r;
        return -problem.F(x, Vec::Zero(n), 1.0);
    };
    return ode;
}

}  // namespace pmc

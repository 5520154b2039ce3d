#include "pmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

#include "pmc/errors.hpp"

namespace pmc {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::converged: return "converged";
        case Outcome::blow_up: return "blow_up";
        case Outcome::newton_failure: return "newton_failure";
    }
    return "unknown";
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

Vec node_point(const Field& f, int k) {
    Eigen::Vector2d p = f.point(k % f.nx, k / f.nx);
    Vec v(2);
    v << p(0), p(1);
    return v;
}

// Interior level function of a node: d for 2D bounded domains, r_max - r radially.
double node_depth(const Discretization& disc, int k) {
    const Field& f = disc.layout();
    if (f.layout == Layout::radial) return (f.nx - 1) * f.h - f.point(k, 0)(0);
    if (!disc.domain().has_boundary()) return std::numeric_limits<double>::infinity();
    return disc.domain().d(node_point(f, k));
}

double sup_abs(const Discretization& disc, const Field& u) {
    double s = 0.0;
    for (int k : disc.unknowns()) s = std::max(s, std::abs(u.values[k]));
    return s;
}

// Predictor u = A + B / t fitted per node through the last two levels: exact
// for the 1/t growth on blow-up sets, an O(t) error elsewhere.
Field predict(const Discretization& disc, const std::vector<LevelState>& history, double t) {
    const LevelState& a = history[history.size() - 2];
    const LevelState& b = history[history.size() - 1];
    Field u = b.u;
    const double ia = 1.0 / a.t, ib = 1.0 / b.t;
    for (int k : disc.unknowns()) {
        double B = (b.u.values[k] - a.u.values[k]) / (ib - ia);
        u.values[k] = b.u.values[k] + B * (1.0 / t - ib);
    }
    return u;
}

// Newton from the predictor, falling back to the warm start.
NewtonResult solve_level(const Discretization& disc, const std::vector<LevelState>& history,
                         const Field& warm, double t) {
    if (history.size() >= 2 && history.back().t > t) {
        try {
            return newton_solve(disc, predict(disc, history, t));
        } catch (const PmcError& e) {
            spdlog::debug("predictor start failed at t={}: {}", t, e.what());
        }
    }
    return newton_solve(disc, warm);
}

}  // namespace

double newton_tolerance(const Discretization& disc) { return 1e-10 * (1.0 + disc.data_scale()); }

NewtonResult newton_solve(const Discretization& disc, const Field& u_init, NewtonOptions opts) {
    const double tol = opts.tol > 0.0 ? opts.tol : newton_tolerance(disc);
    NewtonResult out;
    out.u = u_init;
    Eigen::VectorXd R = disc.residual(out.u);
    out.residual_inf = R.size() ? R.lpNorm<Eigen::Infinity>() : 0.0;

    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    out.tolerance = tol;
    while (out.residual_inf > out.tolerance) {
        ResidualSystem sys = disc.jacobian(out.u);
        // Round-off floor of the residual evaluation: 4 eps max_i sum_j |J_ij u_j|.
        // It only exceeds tol when |u| grows like 1/t near a blow-up.
        const Eigen::VectorXd ua = disc.gather(out.u).cwiseAbs();
        const Eigen::VectorXd row = sys.jacobian.cwiseAbs() * ua;
        const double floor = 4.0 * std::numeric_limits<double>::epsilon() * (row.size() ? row.maxCoeff() : 0.0);
        out.tolerance = std::max(tol, floor);
        if (out.residual_inf <= out.tolerance) break;
        if (out.iterations >= opts.max_iter)
            throw PmcError(ErrorCode::NewtonStall, "iteration limit reached");
        ColMatrix A = sys.jacobian;
        if (!analyzed) {
            lu.analyzePattern(A);
            analyzed = true;
        }
        lu.factorize(A);
        if (lu.info() != Eigen::Success) throw PmcError(ErrorCode::SingularJacobian, "LU failed");
        Eigen::VectorXd delta = lu.solve(-R);
        if (!delta.allFinite()) throw PmcError(ErrorCode::SingularJacobian, "non-finite step");

        const double f0 = R.norm();
        const Eigen::VectorXd base = disc.gather(out.u);
        double lambda = 1.0;
        bool accepted = false;
        Field trial = out.u;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt, lambda *= 0.5) {
            disc.scatter(base + lambda * delta, trial);
            Eigen::VectorXd Rt;
            try {
                Rt = disc.residual(trial);
            } catch (const PmcError& e) {
                if (e.code() != ErrorCode::DivergedField) throw;
                continue;
            }
            if (Rt.norm() <= (1.0 - opts.armijo * lambda) * f0) {
                out.u = trial;
                R = Rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw PmcError(ErrorCode::NewtonStall, "no descent after backtracking");
        ++out.iterations;
        out.residual_inf = R.lpNorm<Eigen::Infinity>();
        spdlog::debug("newton t={} it={} res={:.3e} lambda={}", disc.problem().t, out.iterations,
                      out.residual_inf, lambda);
    }
    return out;
}

Field harmonic_extension(const Discretization& disc, const Field& u) {
    Field out = u;
    if (disc.num_unknowns() == 0) return out;
    bool has_dirichlet = false;
    for (auto k : u.kind) has_dirichlet |= k == NodeKind::dirichlet;
    for (int k : disc.unknowns()) out.values[k] = 0.0;
    if (!has_dirichlet) return out;

    PMCProblem minimal = make_cmc(0.0);
    Discretization lin(disc.domain(), minimal, disc.layout());
    Field zero = u;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    ColMatrix A = lin.jacobian(zero).jacobian;
    // Boundary contribution of the linearised operator: scale the data down so
    // the flux stays in its linear regime.
    const double eps = 1e-6;
    Field scaled = out;
    for (double& v : scaled.values) v *= eps;
    Eigen::VectorXd rb = lin.residual(scaled) / eps;
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu(A);
    if (lu.info() != Eigen::Success) throw PmcError(ErrorCode::SingularJacobian, "harmonic extension");
    lin.scatter(lu.solve(-rb), out);
    return out;
}

std::vector<std::uint8_t> monitored_mask(const Discretization& disc) {
    const Field& f = disc.layout();
    std::vector<std::uint8_t> mask(f.size(), 0);
    double diam = f.layout == Layout::radial ? 2.0 * (f.nx - 1) * f.h : disc.domain().diameter();
    for (int k : disc.unknowns()) {
        double depth = node_depth(disc, k);
        if (!std::isfinite(depth) || depth >= 0.1 * diam) mask[k] = 1;
    }
    return mask;
}

double max_second_form(const Discretization& disc, const Field& u) {
    auto mask = monitored_mask(disc);
    double best = 0.0;
    if (u.layout == Layout::radial) {
        const int n = disc.metric().dim();
        const int nr = u.nx - 1;
        const double dr = u.h;
        for (int i = 1; i < nr - 1; ++i) {
            if (!mask[i]) continue;
            double r = u.point(i, 0)(0);
            double g = (u.values[i + 1] - u.values[i - 1]) / (2.0 * dr);
            double g2 = (u.values[i + 1] - 2.0 * u.values[i] + u.values[i - 1]) / (dr * dr);
            double omega = std::sqrt(1.0 + g * g);
            double hh = disc.metric().kind() == MetricKind::euclidean ? r : disc.metric().warp().f(r);
            double hp = disc.metric().kind() == MetricKind::euclidean ? 1.0 : disc.metric().warp().df(r);
            double kr = g2 / (omega * omega * omega);
            double kt = hp / hh * g / omega;
            best = std::max(best, kr * kr + (n - 1) * kt * kt);
        }
        return best;
    }
    for (int k : disc.unknowns()) {
        if (!mask[k]) continue;
        GraphGeometry gg = graph_geometry(disc.metric(), u, k % u.nx, k / u.nx);
        best = std::max(best, gg.A2);
    }
    return best;
}

BlowUpSets detect_blow_up_sets(const std::vector<LevelState>& history, double beta2,
                               double factor) {
    if (history.size() < 2) throw PmcError(ErrorCode::InsufficientHistory, "need two t levels");
    const LevelState& a = history[history.size() - 2];
    const LevelState& b = history[history.size() - 1];
    BlowUpSets s;
    const int m = b.u.size();
    s.plus.assign(m, 0);
    s.minus.assign(m, 0);
    double ta = factor * beta2 / a.t, tb = factor * beta2 / b.t;
    for (int k = 0; k < m; ++k) {
        if (b.u.kind[k] != NodeKind::unknown) continue;
        if (a.u.values[k] >= ta && b.u.values[k] >= tb) {
            s.plus[k] = 1;
            ++s.plus_count;
        }
        if (-a.u.values[k] >= ta && -b.u.values[k] >= tb) {
            s.minus[k] = 1;
            ++s.minus_count;
        }
    }
    return s;
}

SolveReport continuation(Discretization& disc, const Schedule& schedule) {
    SolveReport rep;
    const PMCProblem base = disc.problem();
    const DomainChart& domain = disc.domain();
    rep.beta2 = beta2_bound(base, domain);
    if (base.dphi_dz_lower_bound > 0.0) {
        AprioriBounds ab = apriori_bounds(base, domain);
        rep.alpha1.applicable = ab.has_alpha1 && domain.has_boundary();
        rep.alpha1.bound = ab.alpha1;
        rep.alpha2.applicable = !domain.has_boundary();
        rep.alpha2.bound = ab.alpha2;
    }
    rep.tu_beta2.applicable = true;
    rep.tu_beta2.bound = rep.beta2;

    // Schedule levels; `inserted` marks intermediate levels added after a failure.
    struct Level {
        double t;
        bool inserted;
    };
    std::deque<Level> targets;
    for (double t = schedule.t0; t >= schedule.t_min * (1.0 - 1e-12); t *= schedule.ratio)
        targets.push_back({t, false});
    if (targets.empty() || targets.back().t > schedule.t_min * (1.0 + 1e-12))
        targets.push_back({schedule.t_min, false});

    Field u = harmonic_extension(disc, disc.layout());
    double prev_t = -1.0;
    bool have_sched = false;  // convergence compares scheduled levels only
    Field prev_u;
    double prev_sup = 0.0;
    int prev_blow = 0;
    bool decided = false;
    int pending = 0;  // consecutive insertions before the current target

    while (!targets.empty()) {
        const double t = targets.front().t;
        const bool inserted = targets.front().inserted;
        disc.set_t(t);
        NewtonResult nr;
        try {
            nr = solve_level(disc, rep.history, u, t);
        } catch (const PmcError& e) {
            spdlog::info("solve at t={} failed: {}", t, e.what());
            if (prev_t > 0.0 && pending < schedule.max_insertions) {
                targets.push_front({std::sqrt(prev_t * t), true});
                ++rep.insertions;
                ++pending;
                continue;
            }
            if (rep.outcome != Outcome::blow_up) {
                rep.outcome = Outcome::newton_failure;
                rep.reason = e.what();
            }
            decided = true;
            break;
        }
        targets.pop_front();
        if (!inserted) pending = 0;
        u = nr.u;

        TRecord rec;
        rec.t = t;
        rec.sup_u = sup_abs(disc, u);
        auto g = disc.gradient_norm(u);
        rec.sup_grad = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
        try {
            rec.max_A2 = max_second_form(disc, u);
        } catch (const PmcError&) {
            rec.max_A2 = std::numeric_limits<double>::quiet_NaN();
        }
        rec.newton_iters = nr.iterations;
        rec.final_residual = nr.residual_inf;
        rep.records.push_back(rec);
        spdlog::info("t={:.3e} sup_u={:.6g} sup_grad={:.6g} iters={}", t, rec.sup_u, rec.sup_grad,
                     rec.newton_iters);

        double tu = t * rec.sup_u;
        rep.tu_beta2.measured = std::max(rep.tu_beta2.measured, tu);
        if (tu > rep.beta2 + 1e-8) rep.tu_beta2.pass = false;
        if (rep.alpha2.applicable) {
            rep.alpha2.measured = std::max(rep.alpha2.measured, rec.sup_u);
            if (rec.sup_u > rep.alpha2.bound + 1e-8) rep.alpha2.pass = false;
        }
        if (rep.alpha1.applicable) {
            rep.alpha1.measured = std::max(rep.alpha1.measured, rec.sup_u);
            if (rec.sup_u > rep.alpha1.bound + 1e-8) rep.alpha1.pass = false;
        }

        rep.history.push_back({t, u});
        if (rep.history.size() > 2) rep.history.erase(rep.history.begin());

        int blow = 0;
        const double thr = schedule.blow_up_factor * rep.beta2 / t;
        for (int k : disc.unknowns()) blow += std::abs(u.values[k]) >= thr;
        if (rep.outcome != Outcome::blow_up && blow > 0 && prev_blow > 0) {
            BlowUpSets s = detect_blow_up_sets(rep.history, rep.beta2, schedule.blow_up_factor);
            if (s.plus_count + s.minus_count > 0) {
                rep.outcome = Outcome::blow_up;
                rep.omega_plus = s.plus;
                rep.omega_minus = s.minus;
                rep.omega_plus_cells = s.plus_count;
                rep.omega_minus_cells = s.minus_count;
                decided = true;
                if (schedule.stop_on_blow_up) break;
            }
        }
        if (rep.outcome == Outcome::blow_up) {
            BlowUpSets s = detect_blow_up_sets(rep.history, rep.beta2, schedule.blow_up_factor);
            if (s.plus_count + s.minus_count > 0) {
                rep.omega_plus = s.plus;
                rep.omega_minus = s.minus;
                rep.omega_plus_cells = s.plus_count;
                rep.omega_minus_cells = s.minus_count;
            }
        }
        if (rep.outcome != Outcome::blow_up && have_sched && !inserted) {
            double diff = 0.0;
            for (int k : disc.unknowns()) diff = std::max(diff, std::abs(u.values[k] - prev_u.values[k]));
            if (diff <= schedule.converge_tol && std::abs(rec.sup_u - prev_sup) <= schedule.converge_tol) {
                rep.outcome = Outcome::converged;
                decided = true;
                break;
            }
        }
        prev_t = t;
        if (!inserted) {
            have_sched = true;
            prev_u = u;
            prev_sup = rec.sup_u;
        }
        prev_blow = blow;
    }
    if (!decided && rep.outcome != Outcome::blow_up) {
        rep.outcome = Outcome::newton_failure;
        rep.reason = "schedule exhausted without convergence";
    }
    rep.u_final = u;
    if (rep.outcome == Outcome::converged && schedule.polish_at_zero) {
        disc.set_t(0.0);
        try {
            rep.u_final = newton_solve(disc, u).u;
            rep.polished = true;
        } catch (const PmcError& e) {
            spdlog::info("t = 0 polish skipped: {}", e.what());
        }
    }
    disc.set_t(base.t);
    return rep;
}

ComparisonReport comparison_check(const Discretization& disc, const Field& u1, const Field& u2,
                                  double tol_newton) {
    for (const Field* u : {&u1, &u2}) {
        Eigen::VectorXd R = disc.residual(*u);
        if (R.size() && R.lpNorm<Eigen::Infinity>() > 10.0 * tol_newton)
            throw PmcError(ErrorCode::NotSolutions, "residual above 10 tol_newton");
    }
    ComparisonReport rep;
    double mono = disc.problem().t + disc.problem().dphi_dz_lower_bound;
    rep.tol_cmp = mono > 0.0 ? 10.0 * tol_newton / mono : 1e-8;
    rep.min_difference = std::numeric_limits<double>::infinity();
    for (int k : disc.unknowns()) rep.min_difference = std::min(rep.min_difference, u1.values[k] - u2.values[k]);
    rep.pass = rep.min_difference >= -rep.tol_cmp;
    return rep;
}

BarrierReport barrier_check(const Discretization& disc, const Field& u, const PsiFn& psi_ext,
                            double kappa, double nu, double d0) {
    const Field& f = disc.layout();
    if (d0 < f.h) throw PmcError(ErrorCode::CollarEmpty, "d0 below one grid cell");
    BarrierReport rep;
    for (int k : disc.unknowns()) {
        double d = node_depth(disc, k);
        if (d > d0) continue;
        Vec x = node_point(f, k);
        double w = std::log1p(kappa * d) / nu;
        double p = psi_ext(x);
        double viol = std::max({p - w - u.values[k], u.values[k] - p - w, 0.0});
        rep.worst_violation = std::max(rep.worst_violation, viol);
        ++rep.checked_nodes;
    }
    if (rep.checked_nodes == 0) throw PmcError(ErrorCode::CollarEmpty, "no nodes in the collar");
    rep.pass = rep.worst_violation == 0.0;
    return rep;
}

GradientMonitor gradient_monitor(const Discretization& disc, const Field& u, const Vec& center,
                                 double radius) {
    const Field& f = disc.layout();
    GradientMonitor out;
    auto g = disc.gradient_norm(u);
    if (f.layout == Layout::radial) {
        if (center.norm() != 0.0 || radius >= (f.nx - 1) * f.h)
            throw PmcError(ErrorCode::BallOutsideDomain, "radial balls are centred at the pole");
        for (int k : disc.unknowns()) {
            double r = f.point(k, 0)(0);
            if (r <= radius && g[k] > out.max_grad) {
                out.max_grad = g[k];
                out.location = Vec::Zero(1);
                out.location(0) = r;
            }
        }
        return out;
    }
    if (disc.domain().has_boundary() && disc.domain().d(center) < radius)
        throw PmcError(ErrorCode::BallOutsideDomain, "ball leaves the domain");
    out.location = center;
    for (int k : disc.unknowns()) {
        Vec x = node_point(f, k);
        if ((x - center).norm() <= radius + 1e-12 && g[k] > out.max_grad) {
            out.max_grad = g[k];
            out.location = x;
        }
    }
    return out;
}

namespace {

struct SampleSet {
    std::vector<Vec> points;
    std::vector<std::vector<Vec>> directions;  // |X| <= 1 per point, including 0
};

SampleSet bound_samples(const DomainChart& domain, int samples) {
    SampleSet s;
    s.points = domain.interior_samples(samples);
    if (domain.has_boundary()) {
        auto b = domain.boundary_samples(samples);
        s.points.insert(s.points.end(), b.begin(), b.end());
    }
    for (const Vec& x : s.points) {
        std::vector<Vec> dirs{Vec::Zero(x.size())};
        for (const Vec& e : metric_unit_directions(domain.metric().sigma(x), 8))
            for (double m : {0.5, 1.0, -0.5, -1.0}) dirs.push_back(m * e);
        s.directions.push_back(std::move(dirs));
    }
    return s;
}

constexpr double kRs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};

}  // namespace

double beta2_bound(const PMCProblem& problem, const DomainChart& domain, int samples) {
    SampleSet s = bound_samples(domain, samples);
    double b = 0.0;
    for (std::size_t p = 0; p < s.points.size(); ++p) {
        const Vec& x = s.points[p];
        double psi = problem.psi ? problem.psi(x) : 0.0;
        b = std::max(b, std::abs(psi));
        for (const Vec& X : s.directions[p])
            for (double r : kRs) b = std::max(b, std::abs(problem.F(x, X, r) + problem.phi(x, psi, X, r)));
    }
    return b;
}

AprioriBounds apriori_bounds(const PMCProblem& problem, const DomainChart& domain, int samples) {
    const double beta = problem.dphi_dz_lower_bound;
    if (!(beta > 0.0)) throw PmcError(ErrorCode::ZeroBeta, "alpha bounds need dphi/dz >= beta > 0");
    SampleSet s = bound_samples(domain, samples);
    AprioriBounds out;
    out.beta2 = beta2_bound(problem, domain, samples);
    out.has_alpha1 = static_cast<bool>(problem.psi);
    double m1 = 0.0, m2 = 0.0, psi_max = 0.0;
    for (std::size_t p = 0; p < s.points.size(); ++p) {
        const Vec& x = s.points[p];
        double psi = problem.psi ? problem.psi(x) : 0.0;
        psi_max = std::max(psi_max, std::abs(psi));
        for (const Vec& X : s.directions[p])
            for (double r : kRs) {
                double F = std::abs(problem.F(x, X, r));
                m1 = std::max(m1, F + std::abs(problem.phi(x, psi, X, r)));
                m2 = std::max(m2, F + std::abs(problem.phi(x, 0.0, X, r)));
            }
    }
    out.alpha1 = m1 / beta + psi_max + 1.0;
    out.alpha2 = m2 / beta + 1.0;
    return out;
}

}  // namespace pmc

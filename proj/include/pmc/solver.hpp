#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmc/discretization.hpp"

namespace pmc {

struct NewtonOptions {
    double tol = 0.0;  // 0 selects 1e-10 * (1 + data scale)
    int max_iter = 60;
    int max_backtracks = 30;
    double armijo = 1e-4;
};

struct NewtonResult {
    Field u;
    int iterations = 0;
    double residual_inf = 0.0;
    double tolerance = 0.0;  // max(tol, round-off floor) actually applied
};

double newton_tolerance(const Discretization& disc);
// Damped Newton on the residual 2-norm. Stops at tol or at the round-off floor
// of the residual, whichever is larger. Throws NewtonStall, SingularJacobian or
// DivergedField.
NewtonResult newton_solve(const Discretization& disc, const Field& u_init, NewtonOptions opts = {});

// Solution of the minimal-surface operator linearised at zero slope with the
// Dirichlet values of `u`.
Field harmonic_extension(const Discretization& disc, const Field& u);

struct Schedule {
    double t0 = 0.1;
    double ratio = 0.5;
    double t_min = 1e-6;
    int max_insertions = 5;  // per schedule level
    double converge_tol = 1e-6;
    double blow_up_factor = 0.5;  // |u| >= factor * beta2 / t
    bool stop_on_blow_up = true;
    bool polish_at_zero = true;
};

struct TRecord {
    double t = 0.0;
    double sup_u = 0.0;
    double sup_grad = 0.0;
    double max_A2 = 0.0;
    int newton_iters = 0;
    double final_residual = 0.0;
};

enum class Outcome { converged, blow_up, newton_failure };
const char* to_string(Outcome o);

struct BoundCheck {
    bool applicable = false;
    double bound = 0.0;
    double measured = 0.0;
    bool pass = true;
};

struct LevelState {
    double t = 0.0;
    Field u;
};

struct SolveReport {
    std::vector<TRecord> records;
    Outcome outcome = Outcome::newton_failure;
    std::string reason;
    BoundCheck alpha1, alpha2, tu_beta2;
    double beta2 = 0.0;
    std::vector<std::uint8_t> omega_plus, omega_minus;
    int omega_plus_cells = 0;
    int omega_minus_cells = 0;
    int insertions = 0;
    bool polished = false;
    Field u_final;
    std::vector<LevelState> history;  // the two smallest solved levels
};

// Warm-started solves down the t schedule; see Schedule for the knobs.
SolveReport continuation(Discretization& disc, const Schedule& schedule = {});

struct BlowUpSets {
    std::vector<std::uint8_t> plus, minus;
    int plus_count = 0;
    int minus_count = 0;
};
// Nodes with +-u >= factor beta2 / t at both of the two smallest recorded t.
BlowUpSets detect_blow_up_sets(const std::vector<LevelState>& history, double beta2,
                               double factor = 0.5);

// Nodes of the set {d >= 0.1 diam} (all nodes on closed domains).
std::vector<std::uint8_t> monitored_mask(const Discretization& disc);
// max |A|^2 over monitored nodes.
double max_second_form(const Discretization& disc, const Field& u);

struct ComparisonReport {
    bool pass = false;
    double min_difference = 0.0;
    double tol_cmp = 0.0;
};
ComparisonReport comparison_check(const Discretization& disc, const Field& u1, const Field& u2,
                                  double tol_newton);

struct BarrierReport {
    bool pass = false;
    double worst_violation = 0.0;
    int checked_nodes = 0;
};
BarrierReport barrier_check(const Discretization& disc, const Field& u, const PsiFn& psi_ext,
                            double kappa, double nu, double d0);

struct GradientMonitor {
    double max_grad = 0.0;
    Vec location;
};
GradientMonitor gradient_monitor(const Discretization& disc, const Field& u, const Vec& center,
                                 double radius);

struct AprioriBounds {
    double alpha1 = 0.0;  // needs boundary data
    double alpha2 = 0.0;
    double beta2 = 0.0;
    bool has_alpha1 = false;
};
// Sampled suprema over x in the closed domain, |X| <= 1, |r| <= 1.
double beta2_bound(const PMCProblem& problem, const DomainChart& domain, int samples = 64);
AprioriBounds apriori_bounds(const PMCProblem& problem, const DomainChart& domain, int samples = 64);

}  // namespace pmc

// Fixed-point iteration of the best-reply map on the strategy lattice:
// upward from the zero profile to the least equilibrium, or downward from
// the all-cap profile to the greatest one, with re-solve certification.
#pragma once

#include <string>
#include <vector>

#include "mfgame/best_reply.hpp"

namespace mfgame {

struct TopkisOptions {
    SolverOptions inner;
    double outer_tol = 1e-9;     // stop when the profile moves less than this in sup-norm
    int max_outer = 500;
    double inner_tol_start = 1e-6; // halved per outer step, floored at inner.grad_tol
    double certify_budget = 1e-6;
    bool enforce_monotonicity = true; // hard-error on large violations; off for warm starts
    // Iterate dips below twice the current inner tolerance or this floor are
    // clipped; the floor absorbs the double-precision stall of inner solves,
    // whose strategy-level wander reaches sqrt(eps / weakest curvature) on
    // nearly flat margins, still orders of magnitude under any genuine
    // submodularity violation.
    double monotonicity_floor = 1e-5;
};

enum class Termination {
    converged,
    max_outer,
    monotonicity_violation,
    coercivity_failure,
    inner_failure,
};

const char* to_string(Termination t);

struct TraceRow {
    int outer = 0;
    int player = 0;
    double sup_change = 0.0;
    double cost = 0.0;
};

struct EquilibriumResult {
    Profile profile;
    std::vector<double> costs;
    int outer_iterations = 0;
    Termination termination = Termination::converged;
    std::vector<TraceRow> trace;
    double worst_monotonicity_violation = 0.0; // raw, before clipping
    bool monotone_certified = false;
    std::string message;
};

/// Iterate the simultaneous best-reply map upward from the zero profile
/// (or from `start`, e.g. a previous equilibrium when sweeping). Iterates
/// are asserted nondecreasing up to twice the inner tolerance of the step;
/// sub-tolerance dips are clipped so the stored trace is truly monotone.
EquilibriumResult solve_least(const GameSpec& game, const AdmissibleSet& set,
                              const TopkisOptions& opts, const Profile* start = nullptr);

/// Downward iteration from the all-cap profile; requires finite caps.
EquilibriumResult solve_greatest(const GameSpec& game, const AdmissibleSet& set,
                                 const TopkisOptions& opts);

/// Per-player deviation gaps J^i(profile) - J^i(fresh best reply, rest),
/// computed with a tightened solve. Nonnegative up to solver error; the
/// profile is an equilibrium when the largest gap fits the budget.
std::vector<double> certify_equilibrium(const GameSpec& game, const AdmissibleSet& set,
                                        const Profile& profile, const SolverOptions& opts);

} // namespace mfgame

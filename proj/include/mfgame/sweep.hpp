// Rate sweeps: solve the least equilibrium of the rate-capped game along an
// increasing schedule, measure first-order residual decay, payoff
// convergence, path distances, and deviation gaps against the free cone.
#pragma once

#include <string>
#include <vector>

#include "mfgame/diagnostics.hpp"
#include "mfgame/topkis.hpp"

namespace mfgame {

struct SweepOptions {
    std::vector<double> schedule;  // strictly increasing rates, length >= 2
    bool warm_start = true;        // seed each point with the previous equilibrium
    TopkisOptions topkis;
    double payoff_tol = 1e-3;      // absolute payoff-convergence verdict
    double pseudopath_tol = 1e-3;  // successive-distance verdict
    double verdict_slack = 0.0;    // additive slack on the monotonicity verdicts
};

struct SweepPoint {
    double rate = 0.0;
    bool solved = false;
    std::string error;
    std::vector<double> costs;
    FocReport foc;
    std::vector<double> eps_nash_gaps;  // vs the unrestricted monotone cone
    double pseudopath_prev = 0.0;       // distance to the previous equilibrium profile
    bool certified = false;
    double max_gap = 0.0; // certification gap at this point's own rate cap
    Profile profile;
};

struct SweepVerdicts {
    bool neg_mass_nonincreasing = false;
    bool eps_gap_nonincreasing = false;    // deviation gaps vs the free cone
    bool payoff_dev_nonincreasing = false; // |J(n) - J(limit)| per player
    bool payoff_converged = false;         // final |J(n) - J(limit)| within payoff_tol
    bool pseudopath_nonincreasing = false;
    bool pseudopath_converged = false; // last successive distance below tolerance
    bool non_cauchy = false;           // distances stopped shrinking well above tolerance
};

struct SweepReport {
    std::vector<SweepPoint> points;
    bool limit_solved = false;
    std::vector<double> limit_costs;   // free-cone least equilibrium payoffs
    Profile limit_profile;
    std::string limit_error;
    SweepVerdicts verdicts;
};

/// Runs the schedule, then the free-cone least equilibrium as the limit
/// reference. Per-point failures are recorded and the report stays partial.
SweepReport run_sweep(const GameSpec& game, const SweepOptions& opts);

} // namespace mfgame

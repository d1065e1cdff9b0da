// Best-reply computation: minimize one player's cost over the monotone cone,
// the fuel-capped set, or the rate-capped (Lipschitz) set, opponents fixed.
// Optimization runs over node increments, where every admissible set becomes
// a per-node box and projection is exact clipping. A dynamic program over
// gridded increments serves as the exhaustive-search oracle.
#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mfgame/functional.hpp"

namespace mfgame {

struct SolverOptions {
    int max_iters = 5000;
    double grad_tol = 1e-8;       // sup-norm of the unit-step projected-gradient residual
    double initial_step = 1.0;    // backtracking restarts from here every iteration
    double armijo_factor = 1e-4;
    bool momentum = false;        // heavy-ball trial steps, off for reproducibility
    double momentum_beta = 0.8;
    double divergence_fraction = 0.9; // outward-gradient node fraction that flags divergence
    double increment_guard = std::numeric_limits<double>::infinity(); // optional box guard on the free cone
};

/// Feasible increment boxes. Monotone: [0, w] per node (w = +inf without a
/// fuel cap), with the pathwise cap enforced by a final scaling pass.
/// Lipschitz: the root jump is forced to 0 and the increment of a depth-m
/// node is capped by rate * (t_m - t_{m-1}).
class AdmissibleSet {
public:
    enum class Kind { monotone, lipschitz };

    static AdmissibleSet monotone() { return AdmissibleSet(Kind::monotone, infinity(), 0.0); }
    static AdmissibleSet monotone(double fuel_cap) { return AdmissibleSet(Kind::monotone, fuel_cap, 0.0); }
    static AdmissibleSet lipschitz(double rate) { return AdmissibleSet(Kind::lipschitz, infinity(), rate); }

    Kind kind() const { return kind_; }
    bool has_fuel_cap() const { return fuel_cap_ < infinity(); }
    double fuel_cap() const { return fuel_cap_; }
    double rate() const { return rate_; }

    /// Upper bound of the increment box at a node (+inf allowed).
    double increment_cap(const ScenarioTree& tree, int node) const;

    /// Greatest element of the set: the constant-at-cap path (monotone with
    /// fuel) or the maximal-rate ramp (Lipschitz). Throws if unbounded.
    AdaptedProcess top_strategy(const std::shared_ptr<const ScenarioTree>& tree, int dims) const;

    /// True if every increment of `a` lies in its box (within tol) and, for
    /// fuel-capped sets, every path sum respects the cap.
    bool contains(const AdaptedProcess& a, double tol = 1e-9) const;

private:
    AdmissibleSet(Kind kind, double fuel_cap, double rate)
        : kind_(kind), fuel_cap_(fuel_cap), rate_(rate) {}
    static constexpr double infinity() { return std::numeric_limits<double>::infinity(); }

    Kind kind_;
    double fuel_cap_;
    double rate_;
};

enum class ReplyStatus { converged, max_iters, divergence };

struct BestReply {
    AdaptedProcess control;   // cumulative strategy
    double objective = 0.0;
    int iterations = 0;
    ReplyStatus status = ReplyStatus::converged;
    double residual = 0.0;          // final projected-gradient sup-norm
    double outward_fraction = 0.0;  // nodes still pushing against the cone/cap at exit
    bool fuel_scaled = false;       // pathwise fuel projection pass activated
};

/// Projected-gradient best reply of `player` against the other entries of
/// `profile` (the player's own entry is ignored). The search direction is
/// the nodewise marginal-cost process itself, i.e. the cost gradient with
/// the node probabilities divided out, so the termination residual controls
/// the first-order conditions uniformly across the tree. `warm` seeds the
/// iteration (projected into the set); default start is the zero control.
BestReply best_reply(const GameSpec& game, int player, const Profile& profile,
                     const AdmissibleSet& set, const SolverOptions& opts,
                     const AdaptedProcess* warm = nullptr);

/// Exact minimizer over increments restricted to multiples of `grid_step`,
/// by backward dynamic programming on the tree (the objective is additive
/// over nodes given the accumulated level, so this equals exhaustive
/// enumeration of the increment grid). Requires control_dim == 1 and a
/// bounded set; throws "search space too large" past ~1e7 candidate moves.
AdaptedProcess brute_force_best_reply(const GameSpec& game, int player, const Profile& profile,
                                      const AdmissibleSet& set, double grid_step);

struct MonotoneReplyReport {
    double worst_violation = 0.0; // max over pairs/nodes of R(low) - R(high)
    int pairs_checked = 0;
};

/// Verifies that the best-reply map is increasing in the opponents: for each
/// ordered pair (low <= high pointwise) the reply to `low` must not exceed
/// the reply to `high` anywhere. Report-only.
MonotoneReplyReport monotone_reply_check(const GameSpec& game, int player,
                                         std::span<const std::pair<Profile, Profile>> ordered_pairs,
                                         const AdmissibleSet& set, const SolverOptions& opts);

} // namespace mfgame

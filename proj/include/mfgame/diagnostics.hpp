// First-order-condition reports for candidate equilibria, deviation gaps
// against the unrestricted monotone cone, and the path-space measurements
// (dt + delta_T pseudometric, conditional variation) used by the rate sweeps.
#pragma once

#include <optional>
#include <vector>

#include "mfgame/best_reply.hpp"

namespace mfgame {

struct FocPlayerReport {
    /// E of the interval-weighted sum of negative parts of the marginal-cost
    /// process over the nodes that carry increments (depth >= 1). Each node
    /// at depth m is paired with its own interval (t_{m-1}, t_m], the same
    /// pairing the control increments use, which makes the rate-capped
    /// first-order identity exact at the discrete KKT point.
    double neg_part_mass = 0.0;
    /// Complementary slackness: E[sum Yhat * dA] including the time-0 jump.
    double slackness = 0.0;
    /// Smallest marginal-cost value over all nodes and coordinates.
    double min_subgradient = 0.0;
    /// |slackness + rate * neg_part_mass|; only for rate-capped sets.
    std::optional<double> lipschitz_identity_gap;
};

struct FocReport {
    std::vector<FocPlayerReport> players;

    double worst_identity_gap() const;
    double worst_neg_part_mass() const;
    double worst_slackness() const;
    double min_subgradient() const;
};

/// Exact tree sums of the first-order quantities at a profile. At a
/// certified optimum over the free cone the marginal cost is nonnegative
/// and the slackness vanishes; over the rate-capped set the slackness
/// equals -rate * neg_part_mass.
FocReport foc_report(const GameSpec& game, const Profile& profile, const AdmissibleSet& set);

/// Deviation gaps measured against best replies over the UNRESTRICTED
/// monotone cone, whatever set the profile came from. Nonnegative up to
/// solver tolerance; zero exactly at monotone-follower equilibria.
std::vector<double> epsilon_nash_gap(const GameSpec& game, const Profile& profile,
                                     const SolverOptions& opts);

/// Path distance in the measure dt + delta_T, in expectation over leaves:
/// E[ sum_m (|x_m - y_m| ^ cap) dt_m + (|x_T - y_T| ^ cap) ] with the
/// integrand capped at 1 unless `capped` is false. A pseudometric.
double pseudopath_distance(const AdaptedProcess& x, const AdaptedProcess& y, bool capped = true);

struct ConditionalVariationResult {
    double value = 0.0;
    bool exact = true;
};

/// Supremum over subpartitions 0 = t_{i_0} < ... < t_{i_n} <= T of the grid
/// of  sum_j E|E[X_{i_j} - X_{i_{j-1}} | F_{i_{j-1}}]| + E|X_{i_n}|.
/// Computed exactly for any grid size by a longest-path recursion over
/// consecutive-pair weights (the sum is additive along a subpartition).
ConditionalVariationResult conditional_variation(const AdaptedProcess& x);

} // namespace mfgame

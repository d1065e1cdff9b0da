// Game specification and exact evaluation of the player cost functionals on
// the tree: running cost by left-endpoint quadrature, terminal cost at the
// leaves, and the control-price pairing sum f * dA including the time-0 jump.
#pragma once

#include <optional>
#include <vector>

#include "mfgame/cost_models.hpp"
#include "mfgame/scenario_tree.hpp"

namespace mfgame {

/// One player's strategy per entry; each is a d-dimensional monotone control
/// on the game tree.
using Profile = std::vector<AdaptedProcess>;

struct GameSpec {
    std::shared_ptr<const ScenarioTree> tree;
    int num_players = 0;
    int control_dim = 1;
    std::vector<CostFamily> running;  // one per player
    std::vector<CostFamily> terminal; // one per player
    AdaptedProcess price;             // num_players * control_dim coordinates, >= 0
    AdaptedProcess exogenous;         // k coordinates
    std::optional<double> fuel_cap;   // pathwise cap on every control coordinate
    std::optional<double> lipschitz_rate;

    int exogenous_dim() const { return exogenous.dims(); }
};

/// Structural checks: family counts, process trees and dimensions, price
/// nonnegativity. Throws std::invalid_argument on the first defect.
void validate_game(const GameSpec& game);

/// Smallest price value over all nodes and coordinates of player i.
double min_price(const GameSpec& game, int player);

/// Copy of player i's d price coordinates as a standalone process.
AdaptedProcess price_slice(const GameSpec& game, int player);

Profile zero_profile(const GameSpec& game);

/// Player i's cost of a profile: expected running cost integrated by the
/// left-endpoint rule over [t_m, t_{m+1}), terminal cost at T, plus the
/// pairing sum f(node) * dA(node) over all nodes (the root carries the
/// time-0 jump). Throws "inadmissible strategy" if the profile is not a
/// monotone control within `admissibility_tol`.
double cost(const GameSpec& game, int player, const Profile& profile,
            double admissibility_tol = 1e-9);

/// Expected pairing of a d-dimensional price slice against a control:
/// E[ f_0 * A_0 + sum_{node != root} f * dA ].
double stieltjes_pair(const AdaptedProcess& price, const AdaptedProcess& control);

/// Adapted projection of the marginal-cost process of player i:
///   Yhat_t = E[ sum_{t_m >= t} grad_i h(L_m, A_m) dt_m + grad_i g(L_T, A_T) | F_t ] + f^i_t,
/// computed exactly by one backward induction pass. At an optimum over the
/// monotone cone this is nonnegative and flat where the control moves.
AdaptedProcess subgradient(const GameSpec& game, int player, const Profile& profile);

namespace detail {
/// Gathers the full profile point a in R^(N*d) at a node into `out`.
void profile_point(const Profile& profile, int node, int num_players, int dim,
                   std::span<double> out);
} // namespace detail

} // namespace mfgame

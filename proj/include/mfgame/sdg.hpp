// Reduction of linearly controlled diffusion games (geometric Brownian or
// Ornstein-Uhlenbeck private states) to monotone-control form by the state
// decomposition X = uncontrolled + multiplier * transformed control, and the
// map from transformed equilibria back to the original controls and states.
#pragma once

#include <vector>

#include "mfgame/functional.hpp"

namespace mfgame {

enum class Dynamics { gbm, ou };

struct SdgPlayer {
    Dynamics dynamics = Dynamics::gbm;
    double mu = 0.0;
    double sigma = 0.0;
    double theta = 1.0; // mean-reversion speed, OU only
    double x0 = 1.0;    // initial state, positive
    CostFamily running;  // h^i on states
    CostFamily terminal; // g^i on states
};

struct SdgSpec {
    std::shared_ptr<const ScenarioTree> tree;
    std::vector<SdgPlayer> players;
    AdaptedProcess price;     // one coordinate per player, >= 0
    AdaptedProcess exogenous; // shared L, k coordinates
    AdaptedProcess noise;     // per-branch Brownian increments, one coordinate per player
};

/// exp[(mu - sigma^2/2) t + sigma W_t] on the tree; positive, 1 at the root.
AdaptedProcess gbm_exponential(double mu, double sigma,
                               const std::shared_ptr<const ScenarioTree>& tree,
                               const AdaptedProcess& noise, int noise_coord);

struct TransformedGame {
    GameSpec game; // transformed costs; exogenous carries [L, unc^1..N, mult^1..N]
    /// Per player: d(original control) = multiplier * d(transformed control).
    /// Equals the exponential for geometric dynamics and exp(-theta t) for
    /// mean-reverting ones; always positive.
    std::vector<AdaptedProcess> multiplier;
    /// Per player: the state with the control switched off.
    std::vector<AdaptedProcess> uncontrolled;
    int raw_exogenous_dim = 0;

    /// State value implied by a transformed control level at a node.
    double state(int player, int node, double zeta) const {
        return uncontrolled[static_cast<size_t>(player)].at(node) +
               multiplier[static_cast<size_t>(player)].at(node) * zeta;
    }
};

/// Builds the equivalent monotone-control game. The transformed running and
/// terminal costs evaluate the raw costs at the reconstructed states, the
/// transformed price is price * multiplier, and the noise integrals use the
/// exact exponential step for mean-reverting dynamics so cost equivalence
/// holds to roundoff.
TransformedGame transform_game(const SdgSpec& sdg);

struct MappedEquilibrium {
    Profile controls; // original cumulative controls xi
    Profile states;   // controlled private states X
};

/// Original controls and states from a transformed profile:
/// xi = cumulative sum of multiplier * (zeta increments), X from the state
/// decomposition. Monotonicity of the controls is preserved exactly.
MappedEquilibrium map_back(const TransformedGame& tg, const Profile& zeta);

/// Raw-side cost of player i for original controls xi, with the state
/// rebuilt step by step from the discrete dynamics recursion (geometric:
/// X' = growth * X + dxi; mean-reverting: X' = e^{-theta dt} X +
/// mu (1 - e^{-theta dt}) + sigma dW + dxi). Independent of the transform;
/// used to check cost equivalence.
double raw_cost(const SdgSpec& sdg, int player, const Profile& xi);

} // namespace mfgame

#include "mfgame/topkis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgame {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_outer: return "max_outer exceeded";
        case Termination::monotonicity_violation: return "monotonicity violated beyond tolerance";
        case Termination::coercivity_failure: return "coercivity failure";
        case Termination::inner_failure: return "inner solver failed";
    }
    return "unknown";
}

namespace {

enum class Direction { up, down };

EquilibriumResult iterate(const GameSpec& game, const AdmissibleSet& set,
                          const TopkisOptions& opts, Profile current, Direction dir,
                          bool enforce_monotone) {
    validate_game(game);
    EquilibriumResult res;
    res.monotone_certified = true;

    SolverOptions inner = opts.inner;
    double inner_tol = std::max(opts.inner.grad_tol, opts.inner_tol_start);

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        inner.grad_tol = inner_tol;
        Profile next;
        next.reserve(current.size());
        std::vector<double> costs(static_cast<size_t>(game.num_players), 0.0);

        // Simultaneous update: every reply answers the previous profile.
        double sup_change = 0.0;
        for (int i = 0; i < game.num_players; ++i) {
            BestReply reply = best_reply(game, i, current, set, inner,
                                         &current[static_cast<size_t>(i)]);
            if (reply.status == ReplyStatus::divergence) {
                res.termination = Termination::coercivity_failure;
                res.message = "player " + std::to_string(i) +
                              ": best reply diverges on the free cone (marginal cost outward on " +
                              std::to_string(static_cast<int>(reply.outward_fraction * 100.0)) +
                              "% of nodes); no equilibrium expected, coercivity violated";
                res.profile = std::move(current);
                res.outer_iterations = outer;
                res.monotone_certified = false;
                return res;
            }
            if (reply.status == ReplyStatus::max_iters) {
                res.termination = Termination::inner_failure;
                res.message = "player " + std::to_string(i) + ": max_iters exceeded (residual " +
                              std::to_string(reply.residual) + ")";
                res.profile = std::move(current);
                res.outer_iterations = outer;
                res.monotone_certified = false;
                return res;
            }
            costs[static_cast<size_t>(i)] = reply.objective;
            next.push_back(std::move(reply.control));
        }

        // Lattice step: iterates move one way. Violations inside twice the
        // inner tolerance are clipped so the stored sequence is monotone;
        // anything larger signals broken submodularity or a loose solve.
        const double clip_tol = std::max(2.0 * inner_tol, opts.monotonicity_floor);
        for (int i = 0; i < game.num_players; ++i) {
            AdaptedProcess& prev = current[static_cast<size_t>(i)];
            AdaptedProcess& upd = next[static_cast<size_t>(i)];
            double player_change = 0.0;
            for (int n = 0; n < game.tree->num_nodes(); ++n) {
                for (int k = 0; k < game.control_dim; ++k) {
                    const double before = prev.at(n, k);
                    double after = upd.at(n, k);
                    const double viol = (dir == Direction::up) ? before - after : after - before;
                    if (viol > 0.0) {
                        res.worst_monotonicity_violation =
                            std::max(res.worst_monotonicity_violation, viol);
                        if (viol > clip_tol && enforce_monotone) {
                            res.termination = Termination::monotonicity_violation;
                            res.message = "player " + std::to_string(i) + ", node " +
                                          std::to_string(n) + ": iterate moved " +
                                          std::to_string(viol) + " against the lattice direction";
                            res.profile = std::move(current);
                            res.outer_iterations = outer;
                            res.monotone_certified = false;
                            return res;
                        }
                        if (enforce_monotone) after = before;
                        upd.at(n, k) = after;
                    }
                    player_change = std::max(player_change, std::abs(after - before));
                }
            }
            sup_change = std::max(sup_change, player_change);
            res.trace.push_back({outer, i, player_change, costs[static_cast<size_t>(i)]});
        }

        current = std::move(next);
        res.outer_iterations = outer;
        if (sup_change <= opts.outer_tol) {
            res.termination = Termination::converged;
            res.profile = std::move(current);
            res.costs.resize(static_cast<size_t>(game.num_players));
            for (int i = 0; i < game.num_players; ++i)
                res.costs[static_cast<size_t>(i)] = cost(game, i, res.profile);
            return res;
        }
        inner_tol = std::max(opts.inner.grad_tol, inner_tol * 0.5);
    }

    res.termination = Termination::max_outer;
    res.message = "max_outer exceeded";
    res.profile = std::move(current);
    res.costs.resize(static_cast<size_t>(game.num_players));
    for (int i = 0; i < game.num_players; ++i)
        res.costs[static_cast<size_t>(i)] = cost(game, i, res.profile);
    return res;
}

} // namespace

EquilibriumResult solve_least(const GameSpec& game, const AdmissibleSet& set,
                              const TopkisOptions& opts, const Profile* start) {
    Profile init = (start != nullptr) ? *start : zero_profile(game);
    // A warm start may approach the fixed point from above; only the cold
    // start from zero carries the monotone-iterate guarantee.
    const bool enforce = opts.enforce_monotonicity && start == nullptr;
    return iterate(game, set, opts, std::move(init), Direction::up, enforce);
}

EquilibriumResult solve_greatest(const GameSpec& game, const AdmissibleSet& set,
                                 const TopkisOptions& opts) {
    Profile top;
    top.reserve(static_cast<size_t>(game.num_players));
    for (int i = 0; i < game.num_players; ++i)
        top.push_back(set.top_strategy(game.tree, game.control_dim));
    return iterate(game, set, opts, std::move(top), Direction::down, opts.enforce_monotonicity);
}

std::vector<double> certify_equilibrium(const GameSpec& game, const AdmissibleSet& set,
                                        const Profile& profile, const SolverOptions& opts) {
    SolverOptions tight = opts;
    tight.grad_tol = opts.grad_tol * 0.1;
    tight.max_iters = opts.max_iters * 4;
    std::vector<double> gaps(static_cast<size_t>(game.num_players), 0.0);
    for (int i = 0; i < game.num_players; ++i) {
        const double own = cost(game, i, profile);
        const BestReply reply = best_reply(game, i, profile, set, tight,
                                           &profile[static_cast<size_t>(i)]);
        gaps[static_cast<size_t>(i)] = own - reply.objective;
    }
    return gaps;
}

} // namespace mfgame

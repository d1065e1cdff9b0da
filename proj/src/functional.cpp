#include "mfgame/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace mfgame {

void validate_game(const GameSpec& game) {
    if (!game.tree) throw std::invalid_argument("game: missing tree");
    if (game.num_players < 1) throw std::invalid_argument("game: need at least one player");
    if (game.control_dim < 1) throw std::invalid_argument("game: control_dim must be >= 1");
    if (static_cast<int>(game.running.size()) != game.num_players ||
        static_cast<int>(game.terminal.size()) != game.num_players)
        throw std::invalid_argument("game: one running and one terminal family per player expected");
    if (game.price.empty() || game.price.tree_ptr().get() != game.tree.get())
        throw std::invalid_argument("game: price process must live on the game tree");
    if (game.price.dims() != game.num_players * game.control_dim)
        throw std::invalid_argument("game: price process needs num_players*control_dim coordinates");
    if (game.exogenous.empty() || game.exogenous.tree_ptr().get() != game.tree.get())
        throw std::invalid_argument("game: exogenous process must live on the game tree");
    for (double v : game.price.values())
        if (v < 0.0) throw std::invalid_argument("game: price process must be nonnegative");
    if (game.fuel_cap && *game.fuel_cap < 0.0)
        throw std::invalid_argument("game: fuel cap must be nonnegative");
    if (game.lipschitz_rate && !(*game.lipschitz_rate > 0.0))
        throw std::invalid_argument("game: lipschitz rate must be positive");
}

double min_price(const GameSpec& game, int player) {
    const ScenarioTree& t = *game.tree;
    double m = std::numeric_limits<double>::infinity();
    for (int n = 0; n < t.num_nodes(); ++n)
        for (int k = 0; k < game.control_dim; ++k)
            m = std::min(m, game.price.at(n, player * game.control_dim + k));
    return m;
}

AdaptedProcess price_slice(const GameSpec& game, int player) {
    AdaptedProcess out(game.tree, game.control_dim);
    for (int n = 0; n < game.tree->num_nodes(); ++n)
        for (int k = 0; k < game.control_dim; ++k)
            out.at(n, k) = game.price.at(n, player * game.control_dim + k);
    return out;
}

Profile zero_profile(const GameSpec& game) {
    Profile p;
    p.reserve(static_cast<size_t>(game.num_players));
    for (int i = 0; i < game.num_players; ++i)
        p.emplace_back(game.tree, game.control_dim, 0.0);
    return p;
}

namespace detail {
void profile_point(const Profile& profile, int node, int num_players, int dim,
                   std::span<double> out) {
    for (int j = 0; j < num_players; ++j) {
        const auto vals = profile[static_cast<size_t>(j)].node_values(node);
        for (int k = 0; k < dim; ++k) out[static_cast<size_t>(j * dim + k)] = vals[static_cast<size_t>(k)];
    }
}
} // namespace detail

namespace {

void require_profile(const GameSpec& game, const Profile& profile, double tol) {
    if (static_cast<int>(profile.size()) != game.num_players)
        throw std::invalid_argument("profile: one strategy per player expected");
    for (const AdaptedProcess& a : profile) {
        if (a.tree_ptr().get() != game.tree.get())
            throw std::invalid_argument("profile: strategy lives on a different tree");
        if (a.dims() != game.control_dim)
            throw std::invalid_argument("profile: strategy dimension mismatch");
        if (tol >= 0.0 && !is_monotone_control(a, tol))
            throw std::invalid_argument("inadmissible strategy: not a monotone control");
    }
}

} // namespace

double cost(const GameSpec& game, int player, const Profile& profile, double admissibility_tol) {
    require_profile(game, profile, admissibility_tol);
    const ScenarioTree& t = *game.tree;
    const int dim = game.control_dim;
    const int m_max = t.depth();

    std::vector<double> a(static_cast<size_t>(game.num_players) * static_cast<size_t>(dim));
    const CostFamily& h = game.running[static_cast<size_t>(player)];
    const CostFamily& g = game.terminal[static_cast<size_t>(player)];
    const AdaptedProcess& own = profile[static_cast<size_t>(player)];

    double acc = 0.0;
    for (int n = 0; n < t.num_nodes(); ++n) {
        const TreeNode& nd = t.node(n);
        detail::profile_point(profile, n, game.num_players, dim, a);
        const auto l = game.exogenous.node_values(n);
        if (nd.depth < m_max)
            acc += nd.prob * t.dt(nd.depth) * h.eval(player, l, a, game.num_players, dim);
        else
            acc += nd.prob * g.eval(player, l, a, game.num_players, dim);
        // price pairing against the node increment; the root carries A_0
        for (int k = 0; k < dim; ++k) {
            const double da = (nd.parent == -1) ? own.at(n, k) : own.at(n, k) - own.at(nd.parent, k);
            acc += nd.prob * game.price.at(n, player * dim + k) * da;
        }
    }
    return acc;
}

double stieltjes_pair(const AdaptedProcess& price, const AdaptedProcess& control) {
    if (!price.same_tree(control) || price.dims() != control.dims())
        throw std::invalid_argument("stieltjes_pair: tree or dimension mismatch");
    const ScenarioTree& t = price.tree();
    double acc = 0.0;
    for (int n = 0; n < t.num_nodes(); ++n) {
        const TreeNode& nd = t.node(n);
        for (int k = 0; k < price.dims(); ++k) {
            const double da =
                (nd.parent == -1) ? control.at(n, k) : control.at(n, k) - control.at(nd.parent, k);
            acc += nd.prob * price.at(n, k) * da;
        }
    }
    return acc;
}

AdaptedProcess subgradient(const GameSpec& game, int player, const Profile& profile) {
    require_profile(game, profile, -1.0); // admissibility not required here
    const ScenarioTree& t = *game.tree;
    const int dim = game.control_dim;
    const int m_max = t.depth();
    const CostFamily& h = game.running[static_cast<size_t>(player)];
    const CostFamily& g = game.terminal[static_cast<size_t>(player)];
    if (!h.has_gradient() || !g.has_gradient()) throw std::runtime_error("gradient unavailable");

    AdaptedProcess out(game.tree, dim, 0.0);
    std::vector<double> a(static_cast<size_t>(game.num_players) * static_cast<size_t>(dim));
    std::vector<double> grad(static_cast<size_t>(dim));

    // Backward induction: terminal gradient at the leaves, then running
    // gradient plus the conditional expectation of the children.
    for (int n = t.num_nodes() - 1; n >= 0; --n) {
        const TreeNode& nd = t.node(n);
        detail::profile_point(profile, n, game.num_players, dim, a);
        const auto l = game.exogenous.node_values(n);
        if (nd.depth == m_max) {
            g.grad_own(player, l, a, game.num_players, dim, grad);
            for (int k = 0; k < dim; ++k) out.at(n, k) = grad[static_cast<size_t>(k)];
        } else {
            h.grad_own(player, l, a, game.num_players, dim, grad);
            for (int k = 0; k < dim; ++k) {
                double cond = 0.0;
                for (int c = nd.first_child; c < nd.first_child + nd.num_children; ++c)
                    cond += t.node(c).branch_prob * out.at(c, k);
                out.at(n, k) = grad[static_cast<size_t>(k)] * t.dt(nd.depth) + cond;
            }
        }
    }
    for (int n = 0; n < t.num_nodes(); ++n)
        for (int k = 0; k < dim; ++k) out.at(n, k) += game.price.at(n, player * dim + k);
    return out;
}

} // namespace mfgame

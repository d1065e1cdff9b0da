#include "mfgame/sdg.hpp"

#include <cmath>
#include <stdexcept>

namespace mfgame {

namespace {

void validate_sdg(const SdgSpec& sdg) {
    if (!sdg.tree) throw std::invalid_argument("sdg: missing tree");
    const int n = static_cast<int>(sdg.players.size());
    if (n < 1) throw std::invalid_argument("sdg: need at least one player");
    for (const SdgPlayer& p : sdg.players) {
        if (!(p.x0 > 0.0)) throw std::invalid_argument("sdg: x0 must be positive");
        if (p.sigma < 0.0) throw std::invalid_argument("sdg: sigma must be nonnegative");
        if (p.dynamics == Dynamics::ou && !(p.theta > 0.0))
            throw std::invalid_argument("sdg: theta must be positive for mean-reverting dynamics");
    }
    if (sdg.price.empty() || sdg.price.tree_ptr().get() != sdg.tree.get() || sdg.price.dims() != n)
        throw std::invalid_argument("sdg: price needs one coordinate per player on the game tree");
    if (sdg.noise.empty() || sdg.noise.tree_ptr().get() != sdg.tree.get() || sdg.noise.dims() < n)
        throw std::invalid_argument("sdg: noise needs one coordinate per player on the game tree");
    if (sdg.exogenous.empty() || sdg.exogenous.tree_ptr().get() != sdg.tree.get())
        throw std::invalid_argument("sdg: exogenous process must live on the game tree");
}

} // namespace

AdaptedProcess gbm_exponential(double mu, double sigma,
                               const std::shared_ptr<const ScenarioTree>& tree,
                               const AdaptedProcess& noise, int noise_coord) {
    const ScenarioTree& t = *tree;
    AdaptedProcess out(tree, 1);
    // cumulate W along paths, exponentiate nodewise
    std::vector<double> w(static_cast<size_t>(t.num_nodes()), 0.0);
    for (int n = 0; n < t.num_nodes(); ++n) {
        const int p = t.parent(n);
        w[static_cast<size_t>(n)] = (p == -1 ? 0.0 : w[static_cast<size_t>(p)]) + noise.at(n, noise_coord);
        const double time = t.time(t.node(n).depth);
        out.at(n) = std::exp((mu - 0.5 * sigma * sigma) * time + sigma * w[static_cast<size_t>(n)]);
    }
    return out;
}

TransformedGame transform_game(const SdgSpec& sdg) {
    validate_sdg(sdg);
    const ScenarioTree& t = *sdg.tree;
    const int n_players = static_cast<int>(sdg.players.size());
    const int k_raw = sdg.exogenous.dims();

    TransformedGame tg;
    tg.raw_exogenous_dim = k_raw;
    tg.multiplier.reserve(static_cast<size_t>(n_players));
    tg.uncontrolled.reserve(static_cast<size_t>(n_players));

    for (int i = 0; i < n_players; ++i) {
        const SdgPlayer& pl = sdg.players[static_cast<size_t>(i)];
        AdaptedProcess mult(sdg.tree, 1);
        AdaptedProcess unc(sdg.tree, 1);
        if (pl.dynamics == Dynamics::gbm) {
            mult = gbm_exponential(pl.mu, pl.sigma, sdg.tree, sdg.noise, i);
            for (int n = 0; n < t.num_nodes(); ++n) unc.at(n) = mult.at(n) * pl.x0;
        } else {
            // Mean reversion: exact exponential step for the deterministic
            // part; the weighted noise integral compounds as
            // I' = e^{-theta dt} I + dW, with the increment entering at its
            // own node and decaying afterwards.
            std::vector<double> integral(static_cast<size_t>(t.num_nodes()), 0.0);
            for (int n = 0; n < t.num_nodes(); ++n) {
                const TreeNode& nd = t.node(n);
                const double time = t.time(nd.depth);
                if (nd.parent != -1) {
                    const double decay = std::exp(-pl.theta * t.dt(nd.depth - 1));
                    integral[static_cast<size_t>(n)] =
                        decay * integral[static_cast<size_t>(nd.parent)] + sdg.noise.at(n, i);
                }
                const double e_neg = std::exp(-pl.theta * time);
                mult.at(n) = e_neg;
                unc.at(n) = pl.x0 * e_neg + pl.mu * (1.0 - e_neg) +
                            pl.sigma * integral[static_cast<size_t>(n)];
            }
        }
        tg.multiplier.push_back(std::move(mult));
        tg.uncontrolled.push_back(std::move(unc));
    }

    // Transformed exogenous process: [raw L, uncontrolled states, multipliers].
    const int k_new = k_raw + 2 * n_players;
    AdaptedProcess exo(sdg.tree, k_new);
    for (int n = 0; n < t.num_nodes(); ++n) {
        for (int k = 0; k < k_raw; ++k) exo.at(n, k) = sdg.exogenous.at(n, k);
        for (int j = 0; j < n_players; ++j) {
            exo.at(n, k_raw + j) = tg.uncontrolled[static_cast<size_t>(j)].at(n);
            exo.at(n, k_raw + n_players + j) = tg.multiplier[static_cast<size_t>(j)].at(n);
        }
    }

    AdaptedProcess price(sdg.tree, n_players);
    for (int n = 0; n < t.num_nodes(); ++n)
        for (int i = 0; i < n_players; ++i)
            price.at(n, i) = sdg.price.at(n, i) * tg.multiplier[static_cast<size_t>(i)].at(n);

    // Transformed costs: evaluate the raw family at the reconstructed states
    // x_j = unc_j + mult_j * z_j read from the extended exogenous vector.
    auto wrap = [k_raw, n_players](const CostFamily raw) {
        auto value = [raw, k_raw, n_players](int player, std::span<const double> l,
                                             std::span<const double> z, int np, int dim) {
            std::vector<double> x(static_cast<size_t>(np));
            for (int j = 0; j < np; ++j)
                x[static_cast<size_t>(j)] =
                    l[static_cast<size_t>(k_raw + j)] +
                    l[static_cast<size_t>(k_raw + n_players + j)] * z[static_cast<size_t>(j)];
            return raw.eval(player, l.subspan(0, static_cast<size_t>(k_raw)), x, np, dim);
        };
        auto grad = [raw, k_raw, n_players](int player, std::span<const double> l,
                                            std::span<const double> z, int np, int dim,
                                            std::span<double> out) {
            std::vector<double> x(static_cast<size_t>(np));
            for (int j = 0; j < np; ++j)
                x[static_cast<size_t>(j)] =
                    l[static_cast<size_t>(k_raw + j)] +
                    l[static_cast<size_t>(k_raw + n_players + j)] * z[static_cast<size_t>(j)];
            raw.grad_own(player, l.subspan(0, static_cast<size_t>(k_raw)), x, np, dim, out);
            for (int k = 0; k < dim; ++k)
                out[static_cast<size_t>(k)] *= l[static_cast<size_t>(k_raw + n_players + player)];
        };
        return CostFamily::custom(std::string("transformed_") + raw.name(), value,
                                  raw.has_gradient() ? CostFamily::GradFn(grad) : nullptr);
    };

    GameSpec game;
    game.tree = sdg.tree;
    game.num_players = n_players;
    game.control_dim = 1;
    for (const SdgPlayer& pl : sdg.players) {
        game.running.push_back(wrap(pl.running));
        game.terminal.push_back(wrap(pl.terminal));
    }
    game.price = std::move(price);
    game.exogenous = std::move(exo);
    tg.game = std::move(game);
    return tg;
}

MappedEquilibrium map_back(const TransformedGame& tg, const Profile& zeta) {
    const ScenarioTree& t = *tg.game.tree;
    const int n_players = tg.game.num_players;
    if (static_cast<int>(zeta.size()) != n_players)
        throw std::invalid_argument("map_back: one transformed control per player expected");

    MappedEquilibrium out;
    out.controls.reserve(static_cast<size_t>(n_players));
    out.states.reserve(static_cast<size_t>(n_players));
    for (int i = 0; i < n_players; ++i) {
        const AdaptedProcess& z = zeta[static_cast<size_t>(i)];
        if (z.tree_ptr().get() != tg.game.tree.get() || z.dims() != 1)
            throw std::invalid_argument("map_back: control on wrong tree");
        const AdaptedProcess& mult = tg.multiplier[static_cast<size_t>(i)];
        AdaptedProcess xi(tg.game.tree, 1);
        AdaptedProcess state(tg.game.tree, 1);
        for (int n = 0; n < t.num_nodes(); ++n) {
            const int p = t.parent(n);
            const double dz = (p == -1) ? z.at(n) : z.at(n) - z.at(p);
            xi.at(n) = (p == -1 ? 0.0 : xi.at(p)) + mult.at(n) * dz;
            state.at(n) = tg.state(i, n, z.at(n));
        }
        out.controls.push_back(std::move(xi));
        out.states.push_back(std::move(state));
    }
    return out;
}

double raw_cost(const SdgSpec& sdg, int player, const Profile& xi) {
    validate_sdg(sdg);
    const ScenarioTree& t = *sdg.tree;
    const int n_players = static_cast<int>(sdg.players.size());
    if (static_cast<int>(xi.size()) != n_players)
        throw std::invalid_argument("raw_cost: one control per player expected");

    // States via the discrete dynamics recursion, independent of the transform.
    std::vector<std::vector<double>> state(static_cast<size_t>(n_players),
                                           std::vector<double>(static_cast<size_t>(t.num_nodes())));
    for (int i = 0; i < n_players; ++i) {
        const SdgPlayer& pl = sdg.players[static_cast<size_t>(i)];
        const AdaptedProcess& c = xi[static_cast<size_t>(i)];
        for (int n = 0; n < t.num_nodes(); ++n) {
            const TreeNode& nd = t.node(n);
            const double dxi = (nd.parent == -1) ? c.at(n) : c.at(n) - c.at(nd.parent);
            if (nd.parent == -1) {
                state[static_cast<size_t>(i)][static_cast<size_t>(n)] = pl.x0 + dxi;
            } else {
                const double prev = state[static_cast<size_t>(i)][static_cast<size_t>(nd.parent)];
                const double dt = t.dt(nd.depth - 1);
                double next;
                if (pl.dynamics == Dynamics::gbm) {
                    const double growth = std::exp((pl.mu - 0.5 * pl.sigma * pl.sigma) * dt +
                                                   pl.sigma * sdg.noise.at(n, i));
                    next = growth * prev + dxi;
                } else {
                    const double decay = std::exp(-pl.theta * dt);
                    next = decay * prev + pl.mu * (1.0 - decay) + pl.sigma * sdg.noise.at(n, i) + dxi;
                }
                state[static_cast<size_t>(i)][static_cast<size_t>(n)] = next;
            }
        }
    }

    const SdgPlayer& pl = sdg.players[static_cast<size_t>(player)];
    const int m_max = t.depth();
    std::vector<double> point(static_cast<size_t>(n_players));
    double acc = 0.0;
    for (int n = 0; n < t.num_nodes(); ++n) {
        const TreeNode& nd = t.node(n);
        for (int j = 0; j < n_players; ++j)
            point[static_cast<size_t>(j)] = state[static_cast<size_t>(j)][static_cast<size_t>(n)];
        const auto l = sdg.exogenous.node_values(n);
        if (nd.depth < m_max)
            acc += nd.prob * t.dt(nd.depth) * pl.running.eval(player, l, point, n_players, 1);
        else
            acc += nd.prob * pl.terminal.eval(player, l, point, n_players, 1);
        const AdaptedProcess& c = xi[static_cast<size_t>(player)];
        const double dxi = (nd.parent == -1) ? c.at(n) : c.at(n) - c.at(nd.parent);
        acc += nd.prob * sdg.price.at(n, player) * dxi;
    }
    return acc;
}

} // namespace mfgame

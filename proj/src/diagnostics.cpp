#include "mfgame/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgame {

double FocReport::worst_identity_gap() const {
    double w = 0.0;
    for (const auto& p : players)
        if (p.lipschitz_identity_gap) w = std::max(w, *p.lipschitz_identity_gap);
    return w;
}

double FocReport::worst_neg_part_mass() const {
    double w = 0.0;
    for (const auto& p : players) w = std::max(w, p.neg_part_mass);
    return w;
}

double FocReport::worst_slackness() const {
    double w = 0.0;
    for (const auto& p : players) w = std::max(w, std::abs(p.slackness));
    return w;
}

double FocReport::min_subgradient() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : players) m = std::min(m, p.min_subgradient);
    return m;
}

FocReport foc_report(const GameSpec& game, const Profile& profile, const AdmissibleSet& set) {
    validate_game(game);
    const ScenarioTree& t = *game.tree;
    FocReport rep;
    rep.players.reserve(static_cast<size_t>(game.num_players));

    for (int i = 0; i < game.num_players; ++i) {
        const AdaptedProcess y = subgradient(game, i, profile);
        const AdaptedProcess& a = profile[static_cast<size_t>(i)];
        FocPlayerReport pr;
        pr.min_subgradient = std::numeric_limits<double>::infinity();
        for (int n = 0; n < t.num_nodes(); ++n) {
            const TreeNode& nd = t.node(n);
            for (int k = 0; k < game.control_dim; ++k) {
                const double yv = y.at(n, k);
                pr.min_subgradient = std::min(pr.min_subgradient, yv);
                const double da = (nd.parent == -1) ? a.at(n, k) : a.at(n, k) - a.at(nd.parent, k);
                pr.slackness += nd.prob * yv * da;
                if (nd.depth >= 1)
                    pr.neg_part_mass += nd.prob * std::max(-yv, 0.0) * t.dt(nd.depth - 1);
            }
        }
        if (set.kind() == AdmissibleSet::Kind::lipschitz)
            pr.lipschitz_identity_gap = std::abs(pr.slackness + set.rate() * pr.neg_part_mass);
        rep.players.push_back(pr);
    }
    return rep;
}

std::vector<double> epsilon_nash_gap(const GameSpec& game, const Profile& profile,
                                     const SolverOptions& opts) {
    const AdmissibleSet cone = AdmissibleSet::monotone();
    std::vector<double> gaps(static_cast<size_t>(game.num_players), 0.0);
    for (int i = 0; i < game.num_players; ++i) {
        const double own = cost(game, i, profile);
        const BestReply reply =
            best_reply(game, i, profile, cone, opts, &profile[static_cast<size_t>(i)]);
        gaps[static_cast<size_t>(i)] = own - reply.objective;
    }
    return gaps;
}

double pseudopath_distance(const AdaptedProcess& x, const AdaptedProcess& y, bool capped) {
    if (!x.same_tree(y) || x.dims() != y.dims())
        throw std::invalid_argument("pseudopath_distance: tree or dimension mismatch");
    const ScenarioTree& t = x.tree();
    const int m_max = t.depth();
    double acc = 0.0;
    for (int n = 0; n < t.num_nodes(); ++n) {
        const TreeNode& nd = t.node(n);
        double norm2 = 0.0;
        for (int k = 0; k < x.dims(); ++k) {
            const double d = x.at(n, k) - y.at(n, k);
            norm2 += d * d;
        }
        double gap = std::sqrt(norm2);
        if (capped) gap = std::min(gap, 1.0);
        acc += nd.prob * gap * (nd.depth < m_max ? t.dt(nd.depth) : 1.0);
    }
    return acc;
}

ConditionalVariationResult conditional_variation(const AdaptedProcess& x) {
    const ScenarioTree& t = x.tree();
    const int m_max = t.depth();
    const int dims = x.dims();

    // weight(i, j) = E | E[X_{t_j} - X_{t_i} | F_{t_i}] |  for i < j, with
    // the conditional expectation evaluated exactly at every depth-i node.
    // cond[n] accumulates E[X_{t_j} | node at depth i] via one backward
    // sweep per target depth j.
    std::vector<std::vector<double>> weight(
        static_cast<size_t>(m_max) + 1, std::vector<double>(static_cast<size_t>(m_max) + 1, 0.0));
    std::vector<double> cond(static_cast<size_t>(t.num_nodes()) * static_cast<size_t>(dims));

    for (int j = 1; j <= m_max; ++j) {
        for (int n = t.level_end(j) - 1; n >= 0; --n) {
            const TreeNode& nd = t.node(n);
            for (int k = 0; k < dims; ++k) {
                double v;
                if (nd.depth == j) {
                    v = x.at(n, k);
                } else {
                    v = 0.0;
                    for (int c = nd.first_child; c < nd.first_child + nd.num_children; ++c)
                        v += t.node(c).branch_prob *
                             cond[static_cast<size_t>(c) * dims + static_cast<size_t>(k)];
                }
                cond[static_cast<size_t>(n) * dims + static_cast<size_t>(k)] = v;
            }
        }
        for (int i = 0; i < j; ++i) {
            double acc = 0.0;
            for (int n = t.level_begin(i); n < t.level_end(i); ++n) {
                double norm2 = 0.0;
                for (int k = 0; k < dims; ++k) {
                    const double d =
                        cond[static_cast<size_t>(n) * dims + static_cast<size_t>(k)] - x.at(n, k);
                    norm2 += d * d;
                }
                acc += t.prob(n) * std::sqrt(norm2);
            }
            weight[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
        }
    }

    // E|X_{t_m}| per depth for the terminal term of a subpartition.
    std::vector<double> terminal(static_cast<size_t>(m_max) + 1, 0.0);
    for (int m = 0; m <= m_max; ++m) {
        double acc = 0.0;
        for (int n = t.level_begin(m); n < t.level_end(m); ++n) {
            double norm2 = 0.0;
            for (int k = 0; k < dims; ++k) norm2 += x.at(n, k) * x.at(n, k);
            acc += t.prob(n) * std::sqrt(norm2);
        }
        terminal[static_cast<size_t>(m)] = acc;
    }

    // Longest path over subpartitions starting at 0: best[j] is the largest
    // conditional-increment sum over subpartitions ending at t_j.
    std::vector<double> best(static_cast<size_t>(m_max) + 1, 0.0);
    double sup = terminal[0]; // the one-point partition {0}
    for (int j = 1; j <= m_max; ++j) {
        double b = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < j; ++i)
            b = std::max(b, best[static_cast<size_t>(i)] + weight[static_cast<size_t>(i)][static_cast<size_t>(j)]);
        best[static_cast<size_t>(j)] = b;
        sup = std::max(sup, b + terminal[static_cast<size_t>(j)]);
    }
    return {sup, true};
}

} // namespace mfgame

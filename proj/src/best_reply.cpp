#include "mfgame/best_reply.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgame {

double AdmissibleSet::increment_cap(const ScenarioTree& tree, int node) const {
    if (kind_ == Kind::lipschitz) {
        const TreeNode& nd = tree.node(node);
        if (nd.parent == -1) return 0.0; // no time-0 jump
        return rate_ * tree.dt(nd.depth - 1);
    }
    return fuel_cap_; // +inf on the free cone
}

AdaptedProcess AdmissibleSet::top_strategy(const std::shared_ptr<const ScenarioTree>& tree,
                                           int dims) const {
    const ScenarioTree& t = *tree;
    AdaptedProcess a(tree, dims);
    if (kind_ == Kind::monotone) {
        if (!has_fuel_cap()) throw std::invalid_argument("top_strategy: set has no finite caps");
        for (int n = 0; n < t.num_nodes(); ++n)
            for (int k = 0; k < dims; ++k) a.at(n, k) = fuel_cap_;
    } else {
        for (int n = 0; n < t.num_nodes(); ++n) {
            const double lvl = rate_ * t.time(t.node(n).depth);
            for (int k = 0; k < dims; ++k) a.at(n, k) = lvl;
        }
    }
    return a;
}

bool AdmissibleSet::contains(const AdaptedProcess& a, double tol) const {
    const ScenarioTree& t = a.tree();
    for (int n = 0; n < t.num_nodes(); ++n) {
        const int p = t.parent(n);
        const double cap = increment_cap(t, n);
        for (int k = 0; k < a.dims(); ++k) {
            const double d = (p == -1) ? a.at(n, k) : a.at(n, k) - a.at(p, k);
            if (d < -tol || d > cap + tol) return false;
            if (kind_ == Kind::monotone && has_fuel_cap() && a.at(n, k) > fuel_cap_ + tol)
                return false;
        }
    }
    return true;
}

namespace {

// Flat-buffer evaluation environment for one best-reply solve. Holds the
// opponents' profile points with the player's own slots rewritten in place
// before every cost or gradient evaluation. Single-owner, not re-entrant.
class ReplyProblem {
public:
    ReplyProblem(const GameSpec& game, int player, const Profile& profile,
                 const AdmissibleSet& set)
        : game_(game), t_(*game.tree), player_(player), set_(set),
          dim_(game.control_dim), nodes_(t_.num_nodes()),
          vars_(static_cast<size_t>(nodes_) * static_cast<size_t>(dim_)) {
        point_.resize(static_cast<size_t>(nodes_) * static_cast<size_t>(game.num_players) *
                      static_cast<size_t>(dim_));
        for (int n = 0; n < nodes_; ++n)
            detail::profile_point(profile, n, game.num_players, dim_,
                                  {point_.data() + point_row(n), static_cast<size_t>(game.num_players * dim_)});
        price_.resize(vars_);
        cap_.resize(vars_);
        for (int n = 0; n < nodes_; ++n) {
            const double c = set.increment_cap(t_, n);
            for (int k = 0; k < dim_; ++k) {
                price_[idx(n, k)] = game.price.at(n, player * dim_ + k);
                cap_[idx(n, k)] = c;
            }
        }
        levels_.resize(vars_);
        backward_.resize(vars_);
        grad_buf_.resize(static_cast<size_t>(dim_));
    }

    size_t num_vars() const { return vars_; }
    int num_nodes() const { return nodes_; }
    double cap(size_t i) const { return cap_[i]; }

    void project(std::vector<double>& z) const {
        for (size_t i = 0; i < vars_; ++i) z[i] = std::clamp(z[i], 0.0, cap_[i]);
    }

    // Full cost of the player at increments z (levels rebuilt as cumsums).
    double objective(const std::vector<double>& z) {
        rebuild_levels(z);
        const int m_max = t_.depth();
        const CostFamily& h = game_.running[static_cast<size_t>(player_)];
        const CostFamily& g = game_.terminal[static_cast<size_t>(player_)];
        double acc = 0.0;
        for (int n = 0; n < nodes_; ++n) {
            const TreeNode& nd = t_.node(n);
            const auto a = write_own(n);
            const auto l = game_.exogenous.node_values(n);
            if (nd.depth < m_max)
                acc += nd.prob * t_.dt(nd.depth) * h.eval(player_, l, a, game_.num_players, dim_);
            else
                acc += nd.prob * g.eval(player_, l, a, game_.num_players, dim_);
            for (int k = 0; k < dim_; ++k) acc += nd.prob * price_[idx(n, k)] * z[idx(n, k)];
        }
        return acc;
    }

    // Marginal-cost field at the current levels: the cost gradient w.r.t.
    // the increment at node n equals prob(n) * Y(n), so Y is the natural
    // probability-preconditioned descent direction.
    void marginal_field(const std::vector<double>& z, std::vector<double>& y) {
        rebuild_levels(z);
        const int m_max = t_.depth();
        const CostFamily& h = game_.running[static_cast<size_t>(player_)];
        const CostFamily& g = game_.terminal[static_cast<size_t>(player_)];
        for (int n = nodes_ - 1; n >= 0; --n) {
            const TreeNode& nd = t_.node(n);
            const auto a = write_own(n);
            const auto l = game_.exogenous.node_values(n);
            if (nd.depth == m_max) {
                g.grad_own(player_, l, a, game_.num_players, dim_, grad_buf_);
                for (int k = 0; k < dim_; ++k) backward_[idx(n, k)] = grad_buf_[static_cast<size_t>(k)];
            } else {
                h.grad_own(player_, l, a, game_.num_players, dim_, grad_buf_);
                for (int k = 0; k < dim_; ++k) {
                    double cond = 0.0;
                    for (int c = nd.first_child; c < nd.first_child + nd.num_children; ++c)
                        cond += t_.node(c).branch_prob * backward_[idx(c, k)];
                    backward_[idx(n, k)] = grad_buf_[static_cast<size_t>(k)] * t_.dt(nd.depth) + cond;
                }
            }
        }
        for (size_t i = 0; i < vars_; ++i) y[i] = backward_[i] + price_[i];
    }

    // sup-norm of z - clip(z - y): the unit-step projected-gradient residual.
    double residual(const std::vector<double>& z, const std::vector<double>& y) const {
        double r = 0.0;
        for (size_t i = 0; i < vars_; ++i)
            r = std::max(r, std::abs(z[i] - std::clamp(z[i] - y[i], 0.0, cap_[i])));
        return r;
    }

    // <true gradient, z - w> = sum prob * y * (z - w); the Armijo decrease.
    double directional_gap(const std::vector<double>& z, const std::vector<double>& w,
                           const std::vector<double>& y) const {
        double acc = 0.0;
        for (int n = 0; n < nodes_; ++n) {
            const double p = t_.prob(n);
            for (int k = 0; k < dim_; ++k) acc += p * y[idx(n, k)] * (z[idx(n, k)] - w[idx(n, k)]);
        }
        return acc;
    }

    double max_level(const std::vector<double>& z) {
        rebuild_levels(z);
        double m = 0.0;
        for (double v : levels_) m = std::max(m, v);
        return m;
    }

    // Fraction of nodes still pushing outward at exit: marginal cost below
    // -tol on a coordinate that is either unbounded above or pinned at its cap.
    double outward_fraction(const std::vector<double>& z, const std::vector<double>& y,
                            double tol) const {
        int count = 0;
        for (int n = 0; n < nodes_; ++n) {
            bool outward = false;
            for (int k = 0; k < dim_ && !outward; ++k) {
                const size_t i = idx(n, k);
                if (y[i] < -tol &&
                    (cap_[i] == std::numeric_limits<double>::infinity() || z[i] >= cap_[i] - 1e-12))
                    outward = true;
            }
            if (outward) ++count;
        }
        return static_cast<double>(count) / static_cast<double>(nodes_);
    }

    // Pathwise fuel projection: scale each coordinate so the largest path
    // sum meets the cap. Leaves box feasibility intact (scaling down).
    bool enforce_fuel_cap(std::vector<double>& z) {
        if (set_.kind() != AdmissibleSet::Kind::monotone || !set_.has_fuel_cap()) return false;
        rebuild_levels(z);
        const double w = set_.fuel_cap();
        bool scaled = false;
        for (int k = 0; k < dim_; ++k) {
            double worst = 0.0;
            for (int n = t_.first_leaf(); n < nodes_; ++n) worst = std::max(worst, levels_[idx(n, k)]);
            if (worst > w * (1.0 + 1e-14) && worst > 0.0) {
                const double s = w / worst;
                for (int n = 0; n < nodes_; ++n) z[idx(n, k)] *= s;
                scaled = true;
            }
        }
        return scaled;
    }

    AdaptedProcess to_process(const std::vector<double>& z) {
        rebuild_levels(z);
        AdaptedProcess a(game_.tree, dim_);
        std::copy(levels_.begin(), levels_.end(), a.values().begin());
        return a;
    }

private:
    size_t idx(int node, int k) const { return static_cast<size_t>(node) * dim_ + static_cast<size_t>(k); }
    size_t point_row(int node) const {
        return static_cast<size_t>(node) * static_cast<size_t>(game_.num_players) * static_cast<size_t>(dim_);
    }

    void rebuild_levels(const std::vector<double>& z) {
        for (int n = 0; n < nodes_; ++n) {
            const int p = t_.parent(n);
            for (int k = 0; k < dim_; ++k)
                levels_[idx(n, k)] = z[idx(n, k)] + (p == -1 ? 0.0 : levels_[idx(p, k)]);
        }
    }

    std::span<const double> write_own(int n) {
        double* row = point_.data() + point_row(n);
        for (int k = 0; k < dim_; ++k) row[player_ * dim_ + k] = levels_[idx(n, k)];
        return {row, static_cast<size_t>(game_.num_players * dim_)};
    }

    const GameSpec& game_;
    const ScenarioTree& t_;
    const int player_;
    const AdmissibleSet& set_;
    const int dim_;
    const int nodes_;
    const size_t vars_;
    std::vector<double> point_;
    std::vector<double> price_;
    std::vector<double> cap_;
    std::vector<double> levels_;
    std::vector<double> backward_;
    std::vector<double> grad_buf_;
};

} // namespace

BestReply best_reply(const GameSpec& game, int player, const Profile& profile,
                     const AdmissibleSet& set, const SolverOptions& opts,
                     const AdaptedProcess* warm) {
    validate_game(game);
    if (player < 0 || player >= game.num_players)
        throw std::invalid_argument("best_reply: player index out of range");

    // An increment guard turns the free cone into finite boxes so runaway
    // iterates pin visibly instead of drifting.
    AdmissibleSet effective = set;
    if (set.kind() == AdmissibleSet::Kind::monotone && !set.has_fuel_cap() &&
        opts.increment_guard < std::numeric_limits<double>::infinity())
        effective = AdmissibleSet::monotone(opts.increment_guard);

    ReplyProblem prob(game, player, profile, effective);
    std::vector<double> z(prob.num_vars(), 0.0);
    if (warm != nullptr) {
        if (warm->tree_ptr().get() != game.tree.get() || warm->dims() != game.control_dim)
            throw std::invalid_argument("best_reply: warm start on wrong tree");
        const AdaptedProcess winc = increments(*warm);
        std::copy(winc.values().begin(), winc.values().end(), z.begin());
        prob.project(z);
    }

    std::vector<double> y(prob.num_vars()), z_try(prob.num_vars()), z_prev(prob.num_vars());
    double f_val = prob.objective(z);
    double residual = 0.0;
    int iter = 0;
    bool hit_max = false;
    double level_mid = 0.0;
    bool have_prev = false;

    for (;; ++iter) {
        prob.marginal_field(z, y);
        residual = prob.residual(z, y);
        if (residual <= opts.grad_tol) break;
        if (iter >= opts.max_iters) {
            hit_max = true;
            break;
        }
        if (iter == opts.max_iters / 2) level_mid = prob.max_level(z);

        double step = opts.initial_step;
        bool accepted = false;
        while (step > 1e-18) {
            for (size_t i = 0; i < z.size(); ++i)
                z_try[i] = std::clamp(z[i] - step * y[i], 0.0, prob.cap(i));
            const double gap = prob.directional_gap(z, z_try, y);
            if (gap <= 0.0) break; // fully blocked: nothing to move
            const double f_try = prob.objective(z_try);
            // strict decrease on top of the sufficient-decrease test: when
            // armijo_factor * gap rounds away against f_val, a plain <= would
            // accept an exact reflection about the minimizer and ping-pong
            if (f_try < f_val && f_try <= f_val - opts.armijo_factor * gap) {
                if (opts.momentum && have_prev) {
                    // heavy-ball trial, kept only when it strictly improves
                    std::vector<double> z_mom(z.size());
                    for (size_t i = 0; i < z.size(); ++i)
                        z_mom[i] = std::clamp(
                            z_try[i] + opts.momentum_beta * (z_try[i] - z_prev[i]), 0.0, prob.cap(i));
                    const double f_mom = prob.objective(z_mom);
                    if (f_mom < f_try) {
                        z_prev = z;
                        z = std::move(z_mom);
                        f_val = f_mom;
                        accepted = true;
                        break;
                    }
                }
                z_prev = z;
                have_prev = true;
                std::swap(z, z_try);
                f_val = f_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        // No step yields a representable strict decrease: the iterate is
        // optimal to double-precision resolution (the residual floor is
        // about sqrt(eps * curvature * |F|), well under every certification
        // tolerance used downstream). Keep the achieved residual on record.
        if (!accepted) break;
    }

    BestReply out;
    out.iterations = iter;
    out.residual = residual;
    out.outward_fraction = prob.outward_fraction(z, y, opts.grad_tol);
    out.status = hit_max ? ReplyStatus::max_iters : ReplyStatus::converged;

    // Coercivity-failure signal on the free cone: the iterate keeps growing
    // with the marginal cost pointing outward almost everywhere.
    if (set.kind() == AdmissibleSet::Kind::monotone && !set.has_fuel_cap() &&
        out.outward_fraction >= opts.divergence_fraction) {
        const bool pinned_at_guard = opts.increment_guard < std::numeric_limits<double>::infinity();
        const bool still_growing = hit_max && prob.max_level(z) > level_mid + 10.0 * opts.grad_tol;
        if (pinned_at_guard || still_growing) out.status = ReplyStatus::divergence;
    }

    out.fuel_scaled = prob.enforce_fuel_cap(z);
    out.control = prob.to_process(z);
    out.objective = prob.objective(z);
    return out;
}

AdaptedProcess brute_force_best_reply(const GameSpec& game, int player, const Profile& profile,
                                      const AdmissibleSet& set, double grid_step) {
    validate_game(game);
    if (game.control_dim != 1)
        throw std::invalid_argument("brute_force_best_reply: only control_dim == 1 supported");
    if (!(grid_step > 0.0)) throw std::invalid_argument("brute_force_best_reply: grid_step must be positive");

    const ScenarioTree& t = *game.tree;
    const int nodes = t.num_nodes();
    const int m_max = t.depth();

    double level_cap;
    if (set.kind() == AdmissibleSet::Kind::lipschitz)
        level_cap = set.rate() * t.horizon();
    else if (set.has_fuel_cap())
        level_cap = set.fuel_cap();
    else
        throw std::invalid_argument("search space too large: unbounded feasible set");

    const int num_levels = static_cast<int>(std::floor(level_cap / grid_step + 1e-9)) + 1;
    long long moves = 0;
    std::vector<int> zmax(static_cast<size_t>(nodes));
    for (int n = 0; n < nodes; ++n) {
        const double cap = std::min(set.increment_cap(t, n), level_cap);
        zmax[static_cast<size_t>(n)] = static_cast<int>(std::floor(cap / grid_step + 1e-9));
        moves += static_cast<long long>(zmax[static_cast<size_t>(n)] + 1) * num_levels;
    }
    if (moves > 10'000'000LL) throw std::invalid_argument("search space too large");

    // Stage cost of sitting at `level` in node n, plus the price of the move.
    std::vector<double> point(static_cast<size_t>(game.num_players));
    const CostFamily& h = game.running[static_cast<size_t>(player)];
    const CostFamily& g = game.terminal[static_cast<size_t>(player)];
    auto stage = [&](int n, double level, double move) {
        const TreeNode& nd = t.node(n);
        detail::profile_point(profile, n, game.num_players, 1, point);
        point[static_cast<size_t>(player)] = level;
        const auto l = game.exogenous.node_values(n);
        double c = (nd.depth < m_max)
                       ? t.dt(nd.depth) * h.eval(player, l, point, game.num_players, 1)
                       : g.eval(player, l, point, game.num_players, 1);
        return c + game.price.at(n, player) * move;
    };

    // value[n][a] = conditional cost-to-go from node n entering with level
    // index a; choice[n][a] = minimizing increment in grid units (smallest on
    // ties, for determinism).
    std::vector<std::vector<double>> value(static_cast<size_t>(nodes));
    std::vector<std::vector<int>> choice(static_cast<size_t>(nodes));
    for (int n = nodes - 1; n >= 0; --n) {
        const TreeNode& nd = t.node(n);
        value[static_cast<size_t>(n)].assign(static_cast<size_t>(num_levels), 0.0);
        choice[static_cast<size_t>(n)].assign(static_cast<size_t>(num_levels), 0);
        for (int a = 0; a < num_levels; ++a) {
            double best = std::numeric_limits<double>::infinity();
            int best_z = 0;
            const int z_hi = std::min(zmax[static_cast<size_t>(n)], num_levels - 1 - a);
            for (int zi = 0; zi <= z_hi; ++zi) {
                const int lvl = a + zi;
                double v = stage(n, lvl * grid_step, zi * grid_step);
                for (int c = nd.first_child; c < nd.first_child + nd.num_children; ++c)
                    v += t.node(c).branch_prob * value[static_cast<size_t>(c)][static_cast<size_t>(lvl)];
                if (v < best) {
                    best = v;
                    best_z = zi;
                }
            }
            value[static_cast<size_t>(n)][static_cast<size_t>(a)] = best;
            choice[static_cast<size_t>(n)][static_cast<size_t>(a)] = best_z;
        }
    }

    // Reconstruct levels along the tree (parents first in BFS order).
    AdaptedProcess out(game.tree, 1);
    std::vector<int> entering(static_cast<size_t>(nodes), 0);
    for (int n = 0; n < nodes; ++n) {
        const int p = t.parent(n);
        const int a = (p == -1) ? 0 : entering[static_cast<size_t>(p)];
        const int lvl = a + choice[static_cast<size_t>(n)][static_cast<size_t>(a)];
        entering[static_cast<size_t>(n)] = lvl;
        out.at(n, 0) = lvl * grid_step;
    }
    return out;
}

MonotoneReplyReport monotone_reply_check(const GameSpec& game, int player,
                                         std::span<const std::pair<Profile, Profile>> ordered_pairs,
                                         const AdmissibleSet& set, const SolverOptions& opts) {
    MonotoneReplyReport rep;
    for (const auto& [low, high] : ordered_pairs) {
        const BestReply r_low = best_reply(game, player, low, set, opts);
        const BestReply r_high = best_reply(game, player, high, set, opts);
        const ScenarioTree& t = *game.tree;
        for (int n = 0; n < t.num_nodes(); ++n)
            for (int k = 0; k < game.control_dim; ++k)
                rep.worst_violation = std::max(
                    rep.worst_violation, r_low.control.at(n, k) - r_high.control.at(n, k));
        ++rep.pairs_checked;
    }
    return rep;
}

} // namespace mfgame

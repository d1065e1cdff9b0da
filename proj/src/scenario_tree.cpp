#include "mfgame/scenario_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mfgame {

namespace {
constexpr double kProbTol = 1e-12;
}

std::shared_ptr<const ScenarioTree> ScenarioTree::build(std::vector<double> times,
                                                        const std::vector<int>& parents,
                                                        const std::vector<double>& branch_probs) {
    const int n = static_cast<int>(parents.size());
    if (n == 0) throw std::invalid_argument("tree: no nodes");
    if (branch_probs.size() != parents.size())
        throw std::invalid_argument("tree: parents/branch_probs size mismatch");
    if (times.size() < 2) throw std::invalid_argument("tree: need at least two time points");
    for (size_t m = 0; m + 1 < times.size(); ++m)
        if (!(times[m] < times[m + 1])) throw std::invalid_argument("tree: times must be strictly increasing");
    if (times.front() != 0.0) throw std::invalid_argument("tree: grid must start at 0");

    // Derive depths; parents must precede children in the input order.
    std::vector<int> depth(parents.size(), -1);
    int root_count = 0;
    for (int i = 0; i < n; ++i) {
        const int p = parents[static_cast<size_t>(i)];
        if (p == -1) {
            depth[static_cast<size_t>(i)] = 0;
            ++root_count;
        } else {
            if (p < 0 || p >= i) throw std::invalid_argument("tree: parent must precede child");
            depth[static_cast<size_t>(i)] = depth[static_cast<size_t>(p)] + 1;
        }
    }
    if (root_count != 1) throw std::invalid_argument("tree: exactly one root expected");

    const int max_depth_seen = *std::max_element(depth.begin(), depth.end());
    if (max_depth_seen != static_cast<int>(times.size()) - 1)
        throw std::invalid_argument("tree: deepest node must sit at the last time index");

    // Stable sort into breadth-first order, grouping siblings by (depth, parent).
    std::vector<int> order(parents.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto da = depth[static_cast<size_t>(a)];
        const auto db = depth[static_cast<size_t>(b)];
        if (da != db) return da < db;
        return parents[static_cast<size_t>(a)] < parents[static_cast<size_t>(b)];
    });
    std::vector<int> new_id(parents.size());
    for (int i = 0; i < n; ++i) new_id[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

    auto tree = std::shared_ptr<ScenarioTree>(new ScenarioTree());
    tree->times_ = std::move(times);
    tree->nodes_.resize(parents.size());
    for (int i = 0; i < n; ++i) {
        const int src = order[static_cast<size_t>(i)];
        TreeNode& nd = tree->nodes_[static_cast<size_t>(i)];
        const int p = parents[static_cast<size_t>(src)];
        nd.parent = (p == -1) ? -1 : new_id[static_cast<size_t>(p)];
        nd.depth = depth[static_cast<size_t>(src)];
        nd.branch_prob = (p == -1) ? 1.0 : branch_probs[static_cast<size_t>(src)];
        if (nd.branch_prob <= 0.0) throw std::invalid_argument("tree: branch probabilities must be positive");
    }
    for (int i = 0; i < n; ++i) {
        TreeNode& nd = tree->nodes_[static_cast<size_t>(i)];
        nd.prob = (nd.parent == -1) ? 1.0 : tree->nodes_[static_cast<size_t>(nd.parent)].prob * nd.branch_prob;
        if (nd.parent != -1) {
            TreeNode& par = tree->nodes_[static_cast<size_t>(nd.parent)];
            if (par.num_children == 0) par.first_child = i;
            ++par.num_children;
        }
    }
    tree->level_begin_.assign(static_cast<size_t>(tree->depth()) + 2, 0);
    for (const TreeNode& nd : tree->nodes_) ++tree->level_begin_[static_cast<size_t>(nd.depth) + 1];
    for (size_t m = 1; m < tree->level_begin_.size(); ++m)
        tree->level_begin_[m] += tree->level_begin_[m - 1];

    tree->validate();
    return tree;
}

void ScenarioTree::validate() const {
    const int m_max = depth();
    for (int i = 0; i < num_nodes(); ++i) {
        const TreeNode& nd = node(i);
        // children contiguity and depth structure
        if (nd.depth < m_max && nd.num_children == 0)
            throw std::invalid_argument("tree: interior node without children (leaves must sit at the last depth)");
        if (nd.depth == m_max && nd.num_children != 0)
            throw std::invalid_argument("tree: node at terminal depth has children");
        if (nd.num_children > 0) {
            double mass = 0.0;
            for (int c = nd.first_child; c < nd.first_child + nd.num_children; ++c) {
                if (node(c).parent != i) throw std::invalid_argument("tree: children of one parent must be contiguous");
                if (node(c).depth != nd.depth + 1) throw std::invalid_argument("tree: child depth mismatch");
                mass += node(c).branch_prob;
            }
            if (std::abs(mass - 1.0) > 1e-9)
                throw std::invalid_argument("tree: branch probabilities of a parent must sum to 1");
        }
    }
    for (int m = 0; m <= m_max; ++m) {
        double mass = 0.0;
        for (int id = level_begin(m); id < level_end(m); ++id) mass += prob(id);
        if (std::abs(mass - 1.0) > kProbTol * static_cast<double>(num_nodes()))
            throw std::invalid_argument("tree: level probabilities must sum to 1");
    }
}

std::shared_ptr<const ScenarioTree> ScenarioTree::uniform(int depth, double dt, int branching,
                                                          int max_depth) {
    if (depth < 1) throw std::invalid_argument("tree: depth must be >= 1");
    if (depth > max_depth) throw std::invalid_argument("tree too large");
    if (!(dt > 0.0)) throw std::invalid_argument("tree: dt must be positive");
    if (branching < 1) throw std::invalid_argument("tree: branching must be >= 1");

    std::vector<double> times(static_cast<size_t>(depth) + 1);
    for (int m = 0; m <= depth; ++m) times[static_cast<size_t>(m)] = m * dt;

    std::vector<int> parents{-1};
    std::vector<double> probs{1.0};
    int level_start = 0;
    int level_count = 1;
    const double bp = 1.0 / branching;
    for (int m = 0; m < depth; ++m) {
        const int next_start = static_cast<int>(parents.size());
        for (int p = level_start; p < level_start + level_count; ++p) {
            for (int b = 0; b < branching; ++b) {
                parents.push_back(p);
                probs.push_back(bp);
            }
        }
        level_start = next_start;
        level_count *= branching;
    }
    return build(std::move(times), parents, probs);
}

std::shared_ptr<const ScenarioTree> ScenarioTree::binary(int depth, double dt, double up_prob,
                                                         int max_depth) {
    if (depth < 1) throw std::invalid_argument("tree: depth must be >= 1");
    if (depth > max_depth) throw std::invalid_argument("tree too large");
    if (!(dt > 0.0)) throw std::invalid_argument("tree: dt must be positive");
    if (!(up_prob > 0.0 && up_prob < 1.0)) throw std::invalid_argument("tree: up_prob must lie in (0,1)");

    std::vector<double> times(static_cast<size_t>(depth) + 1);
    for (int m = 0; m <= depth; ++m) times[static_cast<size_t>(m)] = m * dt;
    std::vector<int> parents{-1};
    std::vector<double> probs{1.0};
    int level_start = 0;
    int level_count = 1;
    for (int m = 0; m < depth; ++m) {
        const int next_start = static_cast<int>(parents.size());
        for (int p = level_start; p < level_start + level_count; ++p) {
            parents.push_back(p);
            probs.push_back(up_prob);
            parents.push_back(p);
            probs.push_back(1.0 - up_prob);
        }
        level_start = next_start;
        level_count *= 2;
    }
    return build(std::move(times), parents, probs);
}

std::shared_ptr<const ScenarioTree> ScenarioTree::chain(int depth, double dt) {
    if (depth < 1) throw std::invalid_argument("tree: depth must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("tree: dt must be positive");
    std::vector<double> times(static_cast<size_t>(depth) + 1);
    for (int m = 0; m <= depth; ++m) times[static_cast<size_t>(m)] = m * dt;
    std::vector<int> parents(static_cast<size_t>(depth) + 1);
    std::vector<double> probs(static_cast<size_t>(depth) + 1, 1.0);
    for (int i = 0; i <= depth; ++i) parents[static_cast<size_t>(i)] = i - 1;
    return build(std::move(times), parents, probs);
}

AdaptedProcess::AdaptedProcess(std::shared_ptr<const ScenarioTree> tree, int dims, double fill)
    : tree_(std::move(tree)), dims_(dims) {
    if (!tree_) throw std::invalid_argument("process: null tree");
    if (dims_ < 1) throw std::invalid_argument("process: dims must be >= 1");
    values_.assign(static_cast<size_t>(tree_->num_nodes()) * static_cast<size_t>(dims_), fill);
}

double expectation(const ScenarioTree& tree, std::span<const double> terminal_values) {
    if (static_cast<int>(terminal_values.size()) != tree.num_leaves())
        throw std::invalid_argument("expectation: one value per leaf expected");
    double acc = 0.0;
    const int first = tree.first_leaf();
    for (int id = first; id < tree.num_nodes(); ++id)
        acc += tree.prob(id) * terminal_values[static_cast<size_t>(id - first)];
    return acc;
}

AdaptedProcess adapted_projection(const std::shared_ptr<const ScenarioTree>& tree, int dims,
                                  std::span<const double> raw) {
    const ScenarioTree& t = *tree;
    const size_t steps = static_cast<size_t>(t.depth()) + 1;
    if (raw.size() != static_cast<size_t>(t.num_leaves()) * steps * static_cast<size_t>(dims))
        throw std::invalid_argument("adapted_projection: raw shape mismatch");

    AdaptedProcess out(tree, dims, 0.0);
    // Accumulate probability-weighted raw values leaf by leaf along each
    // path, then normalize by the node mass.
    const int first = t.first_leaf();
    for (int leaf = first; leaf < t.num_nodes(); ++leaf) {
        const double p = t.prob(leaf);
        const size_t base = static_cast<size_t>(leaf - first) * steps * static_cast<size_t>(dims);
        for (int n = leaf; n != -1; n = t.parent(n)) {
            const size_t row = base + static_cast<size_t>(t.node(n).depth) * static_cast<size_t>(dims);
            for (int k = 0; k < dims; ++k) out.at(n, k) += p * raw[row + static_cast<size_t>(k)];
        }
    }
    for (int n = 0; n < t.num_nodes(); ++n) {
        const double p = t.prob(n);
        for (int k = 0; k < dims; ++k) out.at(n, k) /= p;
    }
    return out;
}

AdaptedProcess increments(const AdaptedProcess& a) {
    const ScenarioTree& t = a.tree();
    AdaptedProcess out(a.tree_ptr(), a.dims());
    for (int n = 0; n < t.num_nodes(); ++n) {
        const int p = t.parent(n);
        for (int k = 0; k < a.dims(); ++k)
            out.at(n, k) = (p == -1) ? a.at(n, k) : a.at(n, k) - a.at(p, k);
    }
    return out;
}

AdaptedProcess cumulative(const AdaptedProcess& delta) {
    const ScenarioTree& t = delta.tree();
    AdaptedProcess out(delta.tree_ptr(), delta.dims());
    for (int n = 0; n < t.num_nodes(); ++n) { // BFS order: parents first
        const int p = t.parent(n);
        for (int k = 0; k < delta.dims(); ++k)
            out.at(n, k) = delta.at(n, k) + (p == -1 ? 0.0 : out.at(p, k));
    }
    return out;
}

bool is_monotone_control(const AdaptedProcess& a, double tol) {
    const ScenarioTree& t = a.tree();
    for (int n = 0; n < t.num_nodes(); ++n) {
        const int p = t.parent(n);
        for (int k = 0; k < a.dims(); ++k) {
            const double d = (p == -1) ? a.at(n, k) : a.at(n, k) - a.at(p, k);
            if (d < -tol) return false;
        }
    }
    return true;
}

double sup_norm(const AdaptedProcess& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

double sup_diff(const AdaptedProcess& a, const AdaptedProcess& b) {
    if (!a.same_tree(b) || a.dims() != b.dims())
        throw std::invalid_argument("sup_diff: processes live on different trees or dims");
    double m = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
    return m;
}

AdaptedProcess brownian_increments(const std::shared_ptr<const ScenarioTree>& tree, int dims) {
    const ScenarioTree& t = *tree;
    AdaptedProcess out(tree, dims, 0.0);
    for (int n = 1; n < t.num_nodes(); ++n) {
        const TreeNode& nd = t.node(n);
        const TreeNode& par = t.node(nd.parent);
        const int pos = n - par.first_child; // position among siblings
        const double step = std::sqrt(t.dt(nd.depth - 1));
        for (int k = 0; k < dims; ++k)
            out.at(n, k) = ((pos >> k) & 1) ? -step : step;
    }
    return out;
}

AdaptedProcess brownian_paths(const std::shared_ptr<const ScenarioTree>& tree, int dims) {
    return cumulative(brownian_increments(tree, dims));
}

} // namespace mfgame

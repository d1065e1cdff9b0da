// Finite scenario trees: time grid, node layout, branch probabilities, and
// the node-indexed adapted processes everything else in the library runs on.
// All expectations reduce to exact finite sums over leaves or depth slices.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mfgame {

struct TreeNode {
    int parent = -1;          // -1 at the root
    int depth = 0;            // index into the time grid
    double branch_prob = 1.0; // P(node | parent), 1 at the root
    double prob = 1.0;        // unconditional probability of reaching the node
    int first_child = -1;     // children occupy a contiguous index range
    int num_children = 0;
};

/// Rooted non-recombining tree over a strictly increasing time grid
/// 0 = t_0 < t_1 < ... < t_M = T. Nodes are stored breadth-first, so every
/// depth is one contiguous index range and parents precede their children.
/// Leaves are exactly the depth-M nodes. Immutable after construction.
class ScenarioTree {
public:
    static constexpr int default_max_depth = 16;

    /// General constructor. `parents[i]` must reference an earlier entry
    /// (-1 exactly once, for the root); depths are derived, nodes are
    /// re-sorted breadth-first internally. Throws on malformed input:
    /// non-increasing times, branch probabilities that are not positive or
    /// do not sum to 1 per parent, or leaves at the wrong depth.
    static std::shared_ptr<const ScenarioTree> build(std::vector<double> times,
                                                     const std::vector<int>& parents,
                                                     const std::vector<double>& branch_probs);

    /// Non-recombining binary tree: 2^(depth+1) - 1 nodes, t_m = m*dt, first
    /// child of every node carries probability `up_prob`.
    static std::shared_ptr<const ScenarioTree> binary(int depth, double dt, double up_prob,
                                                      int max_depth = default_max_depth);

    /// Deterministic chain (branching 1).
    static std::shared_ptr<const ScenarioTree> chain(int depth, double dt);

    /// Constant branching factor with uniform branch probabilities. Used for
    /// product noises (branching 2^N realizes N independent binary drivers).
    static std::shared_ptr<const ScenarioTree> uniform(int depth, double dt, int branching,
                                                       int max_depth = default_max_depth);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_leaves() const { return num_nodes() - level_begin_[depth()]; }
    /// Number of time steps M; the grid has M+1 points.
    int depth() const { return static_cast<int>(times_.size()) - 1; }

    const std::vector<double>& times() const { return times_; }
    double time(int m) const { return times_[static_cast<size_t>(m)]; }
    double horizon() const { return times_.back(); }
    /// Step length t_{m+1} - t_m; valid for m < depth().
    double dt(int m) const { return times_[static_cast<size_t>(m) + 1] - times_[static_cast<size_t>(m)]; }

    const TreeNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
    int parent(int id) const { return nodes_[static_cast<size_t>(id)].parent; }
    double prob(int id) const { return nodes_[static_cast<size_t>(id)].prob; }

    /// Index of the first node at depth m. Nodes at depth m are
    /// [level_begin(m), level_begin(m+1)).
    int level_begin(int m) const { return level_begin_[static_cast<size_t>(m)]; }
    int level_end(int m) const { return level_begin_[static_cast<size_t>(m) + 1]; }
    int first_leaf() const { return level_begin(depth()); }

    /// Leaf ordinal for a leaf node id (0-based within the last level).
    int leaf_index(int node_id) const { return node_id - first_leaf(); }

private:
    ScenarioTree() = default;
    void validate() const;

    std::vector<double> times_;
    std::vector<TreeNode> nodes_;
    std::vector<int> level_begin_; // size depth()+2, last entry = num_nodes()
};

/// Vector-valued process with one value per tree node. Adaptedness is
/// structural: a node's value is measurable for the information at its time.
/// Values are stored node-major. Safe to share across threads once filled.
class AdaptedProcess {
public:
    AdaptedProcess() = default;
    AdaptedProcess(std::shared_ptr<const ScenarioTree> tree, int dims, double fill = 0.0);

    int dims() const { return dims_; }
    bool empty() const { return !tree_; }
    const ScenarioTree& tree() const { return *tree_; }
    const std::shared_ptr<const ScenarioTree>& tree_ptr() const { return tree_; }
    bool same_tree(const AdaptedProcess& other) const { return tree_.get() == other.tree_.get(); }

    double at(int node, int k = 0) const { return values_[static_cast<size_t>(node) * dims_ + k]; }
    double& at(int node, int k = 0) { return values_[static_cast<size_t>(node) * dims_ + k]; }
    std::span<const double> node_values(int node) const {
        return {values_.data() + static_cast<size_t>(node) * dims_, static_cast<size_t>(dims_)};
    }
    std::span<double> node_values(int node) {
        return {values_.data() + static_cast<size_t>(node) * dims_, static_cast<size_t>(dims_)};
    }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    std::shared_ptr<const ScenarioTree> tree_;
    int dims_ = 0;
    std::vector<double> values_;
};

/// Exact expectation of a terminal payoff: sum of node_prob * value over
/// leaves. Throws if the value count does not match the leaf count.
double expectation(const ScenarioTree& tree, std::span<const double> terminal_values);

/// Conditional expectation of pathwise (non-adapted) data. `raw` holds one
/// value per (leaf, time, coordinate), leaf-major then time-major: the entry
/// for leaf j at time index m, coordinate k sits at (j*(M+1) + m)*dims + k.
/// The node value at depth m is the probability-weighted average of the raw
/// values at time m over the leaves descending from the node.
AdaptedProcess adapted_projection(const std::shared_ptr<const ScenarioTree>& tree, int dims,
                                  std::span<const double> raw);

/// Nodewise increments with the time-0 jump stored at the root:
/// dA(root) = A(root), dA(node) = A(node) - A(parent) elsewhere.
AdaptedProcess increments(const AdaptedProcess& a);

/// Inverse of `increments`: cumulative sums along every root-to-node path.
AdaptedProcess cumulative(const AdaptedProcess& delta);

/// True iff every increment (including the root jump) is >= -tol in every
/// coordinate, i.e. the process is a nondecreasing nonnegative control.
bool is_monotone_control(const AdaptedProcess& a, double tol = 1e-12);

double sup_norm(const AdaptedProcess& a);
double sup_diff(const AdaptedProcess& a, const AdaptedProcess& b);

/// Brownian-driver increments: +/- sqrt(dt) per branch, coordinate i reading
/// bit i of the child's position among its siblings (so a binary tree yields
/// one driver, a branching-2^N tree yields N independent drivers). The root
/// increment is 0.
AdaptedProcess brownian_increments(const std::shared_ptr<const ScenarioTree>& tree, int dims);

/// Cumulative driver paths W with W_0 = 0, from `brownian_increments`.
AdaptedProcess brownian_paths(const std::shared_ptr<const ScenarioTree>& tree, int dims);
} // namespace mfgame

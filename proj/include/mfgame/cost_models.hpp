// Parametric running/terminal cost families with exact own-player gradients,
// plus sampled structure checks for convexity, decreasing differences and
// own-variable submodularity.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace mfgame {

enum class CostKind { zero, quadratic_tracking, exponential_counterexample, custom };

/// Affine read-out of the exogenous state: target(l) = offset + slope * l[l_index].
struct TargetMap {
    double offset = 0.0;
    double slope = 0.0;
    int l_index = 0;

    double operator()(std::span<const double> l) const {
        if (slope == 0.0) return offset;
        return offset + slope * l[static_cast<size_t>(l_index)];
    }
};

/// One player's running or terminal cost phi^i(l, a), a in R^(N*d) laid out
/// player-major. Families:
///  - zero: phi = 0.
///  - quadratic_tracking: sum over coordinates of
///        weight * (a^{i,k} - coupling * sum_{j != i} a^{j,k} - target(l))^2.
///    coupling >= 0 keeps decreasing differences; a negative coupling yields
///    the supermodular variant the structure checker is expected to reject.
///  - exponential_counterexample: two players, one coordinate,
///        exp(-a^i) * (2 - exp(-a^other)).
///    Satisfies the structural conditions but defeats coercivity.
///  - custom: user-supplied evaluators (gradient optional).
/// Immutable; eval/grad_own are pure and reentrant.
class CostFamily {
public:
    using ValueFn = std::function<double(int player, std::span<const double> l,
                                         std::span<const double> a, int num_players, int dim)>;
    using GradFn = std::function<void(int player, std::span<const double> l,
                                      std::span<const double> a, int num_players, int dim,
                                      std::span<double> out)>;

    CostFamily() = default;

    static CostFamily zero();
    static CostFamily quadratic_tracking(double weight, double coupling, TargetMap target);
    static CostFamily exponential_counterexample();
    static CostFamily custom(std::string name, ValueFn value, GradFn grad = nullptr);

    CostKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double weight() const { return weight_; }
    double coupling() const { return coupling_; }
    const TargetMap& target() const { return target_; }

    double eval(int player, std::span<const double> l, std::span<const double> a,
                int num_players, int dim) const;

    /// Exact gradient with respect to the player's own d coordinates.
    /// Throws "gradient unavailable" for custom families without one.
    void grad_own(int player, std::span<const double> l, std::span<const double> a,
                  int num_players, int dim, std::span<double> out) const;

    bool has_gradient() const;

private:
    CostKind kind_ = CostKind::zero;
    std::string name_ = "zero";
    double weight_ = 0.0;
    double coupling_ = 0.0;
    TargetMap target_{};
    ValueFn value_fn_;
    GradFn grad_fn_;
};

/// Sampling rectangle for the structure checks; the same interval is applied
/// to every l coordinate and every control coordinate.
struct SampleBox {
    double l_lo = 0.0;
    double l_hi = 1.0;
    double a_lo = 0.0;
    double a_hi = 2.0;
};

/// Worst sampled violations of the structural conditions. Each entry is the
/// largest positive defect observed (0 means the sampled inequality held
/// everywhere). `min_value` tracks sampled nonnegativity.
struct StructureReport {
    double convexity_violation = 0.0;   // midpoint convexity in own block
    double dec_diff_violation = 0.0;    // decreasing differences over ordered pairs
    double submodularity_violation = 0.0; // own-variable four-point inequality
    double min_value = 0.0;
    int samples = 0;

    bool pass(double tol = 1e-8) const {
        return convexity_violation <= tol && dec_diff_violation <= tol &&
               submodularity_violation <= tol;
    }
};

/// Monte-Carlo check of the structural conditions for one player's family,
/// carried out on `sample_count` draws from the box. Report-only.
StructureReport check_assumption1(const CostFamily& family, int player, int num_players, int dim,
                                  int l_dim, const SampleBox& box, int sample_count,
                                  std::uint64_t seed);

} // namespace mfgame

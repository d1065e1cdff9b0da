#include "mfgame/cost_models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace mfgame {

CostFamily CostFamily::zero() {
    CostFamily f;
    f.kind_ = CostKind::zero;
    f.name_ = "zero";
    return f;
}

CostFamily CostFamily::quadratic_tracking(double weight, double coupling, TargetMap target) {
    if (!(weight > 0.0)) throw std::invalid_argument("quadratic_tracking: weight must be positive");
    CostFamily f;
    f.kind_ = CostKind::quadratic_tracking;
    f.name_ = "quadratic_tracking";
    f.weight_ = weight;
    f.coupling_ = coupling;
    f.target_ = target;
    return f;
}

CostFamily CostFamily::exponential_counterexample() {
    CostFamily f;
    f.kind_ = CostKind::exponential_counterexample;
    f.name_ = "exponential_counterexample";
    return f;
}

CostFamily CostFamily::custom(std::string name, ValueFn value, GradFn grad) {
    if (!value) throw std::invalid_argument("custom cost: value function required");
    CostFamily f;
    f.kind_ = CostKind::custom;
    f.name_ = std::move(name);
    f.value_fn_ = std::move(value);
    f.grad_fn_ = std::move(grad);
    return f;
}

namespace {

void require_dims(int player, std::span<const double> a, int num_players, int dim) {
    if (player < 0 || player >= num_players) throw std::invalid_argument("cost: player index out of range");
    if (static_cast<int>(a.size()) != num_players * dim)
        throw std::invalid_argument("cost: profile point dimension mismatch");
}

} // namespace

double CostFamily::eval(int player, std::span<const double> l, std::span<const double> a,
                        int num_players, int dim) const {
    require_dims(player, a, num_players, dim);
    switch (kind_) {
        case CostKind::zero:
            return 0.0;
        case CostKind::quadratic_tracking: {
            const double theta = target_(l);
            double acc = 0.0;
            for (int k = 0; k < dim; ++k) {
                double others = 0.0;
                for (int j = 0; j < num_players; ++j)
                    if (j != player) others += a[static_cast<size_t>(j * dim + k)];
                const double r = a[static_cast<size_t>(player * dim + k)] - coupling_ * others - theta;
                acc += weight_ * r * r;
            }
            return acc;
        }
        case CostKind::exponential_counterexample: {
            if (num_players != 2 || dim != 1)
                throw std::invalid_argument("exponential_counterexample: requires 2 players, 1 coordinate");
            const double own = a[static_cast<size_t>(player)];
            const double other = a[static_cast<size_t>(1 - player)];
            return std::exp(-own) * (2.0 - std::exp(-other));
        }
        case CostKind::custom:
            return value_fn_(player, l, a, num_players, dim);
    }
    throw std::logic_error("cost: unknown kind");
}

void CostFamily::grad_own(int player, std::span<const double> l, std::span<const double> a,
                          int num_players, int dim, std::span<double> out) const {
    require_dims(player, a, num_players, dim);
    if (static_cast<int>(out.size()) != dim) throw std::invalid_argument("grad_own: output size mismatch");
    switch (kind_) {
        case CostKind::zero:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case CostKind::quadratic_tracking: {
            const double theta = target_(l);
            for (int k = 0; k < dim; ++k) {
                double others = 0.0;
                for (int j = 0; j < num_players; ++j)
                    if (j != player) others += a[static_cast<size_t>(j * dim + k)];
                const double r = a[static_cast<size_t>(player * dim + k)] - coupling_ * others - theta;
                out[static_cast<size_t>(k)] = 2.0 * weight_ * r;
            }
            return;
        }
        case CostKind::exponential_counterexample: {
            if (num_players != 2 || dim != 1)
                throw std::invalid_argument("exponential_counterexample: requires 2 players, 1 coordinate");
            const double own = a[static_cast<size_t>(player)];
            const double other = a[static_cast<size_t>(1 - player)];
            out[0] = -std::exp(-own) * (2.0 - std::exp(-other));
            return;
        }
        case CostKind::custom:
            if (!grad_fn_) throw std::runtime_error("gradient unavailable");
            grad_fn_(player, l, a, num_players, dim, out);
            return;
    }
    throw std::logic_error("grad_own: unknown kind");
}

bool CostFamily::has_gradient() const {
    return kind_ != CostKind::custom || static_cast<bool>(grad_fn_);
}

StructureReport check_assumption1(const CostFamily& family, int player, int num_players, int dim,
                                  int l_dim, const SampleBox& box, int sample_count,
                                  std::uint64_t seed) {
    if (sample_count < 1) throw std::invalid_argument("check_assumption1: sample_count must be >= 1");
    if (!(box.l_lo <= box.l_hi && box.a_lo <= box.a_hi))
        throw std::invalid_argument("check_assumption1: malformed box");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ul(box.l_lo, box.l_hi);
    std::uniform_real_distribution<double> ua(box.a_lo, box.a_hi);

    const int nd = num_players * dim;
    std::vector<double> l(static_cast<size_t>(std::max(l_dim, 1)));
    std::vector<double> a(static_cast<size_t>(nd)), b(static_cast<size_t>(nd)),
        lo(static_cast<size_t>(nd)), hi(static_cast<size_t>(nd));

    StructureReport rep;
    rep.samples = sample_count;
    rep.min_value = std::numeric_limits<double>::infinity();

    auto value = [&](std::span<const double> point) {
        const double v = family.eval(player, l, point, num_players, dim);
        rep.min_value = std::min(rep.min_value, v);
        return v;
    };

    for (int s = 0; s < sample_count; ++s) {
        for (auto& v : l) v = ul(rng);

        // Midpoint convexity in the own block, opponents held fixed.
        for (auto& v : a) v = ua(rng);
        b = a;
        for (int k = 0; k < dim; ++k) b[static_cast<size_t>(player * dim + k)] = ua(rng);
        std::vector<double> mid = a;
        for (int k = 0; k < dim; ++k) {
            const size_t idx = static_cast<size_t>(player * dim + k);
            mid[idx] = 0.5 * (a[idx] + b[idx]);
        }
        rep.convexity_violation = std::max(
            rep.convexity_violation, value(mid) - 0.5 * (value(a) + value(b)));

        // Decreasing differences over an ordered pair lo <= hi.
        for (int k = 0; k < nd; ++k) {
            const double x = ua(rng);
            const double y = ua(rng);
            lo[static_cast<size_t>(k)] = std::min(x, y);
            hi[static_cast<size_t>(k)] = std::max(x, y);
        }
        std::vector<double> hi_own_lo_rest = lo;
        std::vector<double> lo_own_hi_rest = hi;
        for (int k = 0; k < dim; ++k) {
            const size_t idx = static_cast<size_t>(player * dim + k);
            hi_own_lo_rest[idx] = hi[idx];
            lo_own_hi_rest[idx] = lo[idx];
        }
        const double lhs = value(hi_own_lo_rest) - value(lo);
        const double rhs = value(hi) - value(lo_own_hi_rest);
        rep.dec_diff_violation = std::max(rep.dec_diff_violation, rhs - lhs);

        // Own-variable submodularity: four-point inequality with a common
        // opponent block (an identity when dim == 1).
        std::vector<double> x = a, y = a, meet = a, join = a;
        for (int k = 0; k < dim; ++k) {
            const size_t idx = static_cast<size_t>(player * dim + k);
            x[idx] = ua(rng);
            y[idx] = ua(rng);
            meet[idx] = std::min(x[idx], y[idx]);
            join[idx] = std::max(x[idx], y[idx]);
        }
        rep.submodularity_violation = std::max(
            rep.submodularity_violation, value(meet) + value(join) - value(x) - value(y));
    }
    return rep;
}

} // namespace mfgame

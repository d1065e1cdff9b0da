#include <doctest.h>

#include <random>

#include "mfgame/cost_models.hpp"
#include "test_support.hpp"

using namespace mfgame;

namespace {

double fd_grad(const CostFamily& f, int player, std::span<const double> l,
               std::vector<double> a, int np, int d, int coord, double h = 1e-6) {
    const size_t idx = static_cast<size_t>(player * d + coord);
    a[idx] += h;
    const double up = f.eval(player, l, a, np, d);
    a[idx] -= 2.0 * h;
    const double down = f.eval(player, l, a, np, d);
    return (up - down) / (2.0 * h);
}

} // namespace

TEST_CASE("quadratic tracking values") {
    const CostFamily q = CostFamily::quadratic_tracking(1.0, 0.5, TargetMap{1.0, 0.0, 0});
    const std::vector<double> l{0.0};
    CHECK(q.eval(0, l, std::vector<double>{1.0, 0.0}, 2, 1) == doctest::Approx(0.0));
    CHECK(q.eval(0, l, std::vector<double>{0.0, 1.0}, 2, 1) == doctest::Approx(2.25));
    // target read off the exogenous value
    const CostFamily qs = CostFamily::quadratic_tracking(2.0, 0.0, TargetMap{0.0, 1.0, 0});
    const std::vector<double> l2{0.75};
    CHECK(qs.eval(0, l2, std::vector<double>{0.0, 0.0}, 2, 1) == doctest::Approx(2.0 * 0.75 * 0.75));
    CHECK_THROWS(CostFamily::quadratic_tracking(0.0, 0.5, TargetMap{}));
    CHECK_THROWS(q.eval(0, l, std::vector<double>{1.0}, 2, 1));
}

TEST_CASE("exponential counterexample values") {
    const CostFamily e = CostFamily::exponential_counterexample();
    const std::vector<double> l{0.0};
    CHECK(e.eval(0, l, std::vector<double>{0.0, 0.0}, 2, 1) == doctest::Approx(1.0));
    // value stays in (0, 2] on nonnegative controls, decreasing in own action
    CHECK(e.eval(0, l, std::vector<double>{3.0, 1.0}, 2, 1) <
          e.eval(0, l, std::vector<double>{1.0, 1.0}, 2, 1));
    CHECK(e.eval(1, l, std::vector<double>{5.0, 0.0}, 2, 1) == doctest::Approx(2.0 - std::exp(-5.0)).epsilon(1e-9));
    CHECK_THROWS(e.eval(0, l, std::vector<double>{0.0, 0.0, 0.0}, 3, 1));
}

TEST_CASE("analytic gradients at reference points") {
    const CostFamily q = CostFamily::quadratic_tracking(1.0, 0.5, TargetMap{1.0, 0.0, 0});
    const std::vector<double> l{0.0};
    std::vector<double> g(1);
    q.grad_own(0, l, std::vector<double>{1.0, 0.0}, 2, 1, g);
    CHECK(g[0] == doctest::Approx(0.0)); // stationary point

    const CostFamily e = CostFamily::exponential_counterexample();
    e.grad_own(0, l, std::vector<double>{0.0, 0.0}, 2, 1, g);
    CHECK(g[0] == doctest::Approx(-1.0));
}

TEST_CASE("gradients match central differences at random points") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const std::vector<CostFamily> families{
        CostFamily::quadratic_tracking(1.3, 0.4, TargetMap{0.7, 0.5, 0}),
        CostFamily::exponential_counterexample(),
    };
    for (const CostFamily& f : families) {
        const int np = 2, d = 1;
        for (int s = 0; s < 100; ++s) {
            std::vector<double> l{u(rng)};
            std::vector<double> a{u(rng), u(rng)};
            for (int i = 0; i < np; ++i) {
                std::vector<double> g(1);
                f.grad_own(i, l, a, np, d, g);
                const double fd = fd_grad(f, i, l, a, np, d, 0);
                const double denom = std::max({1.0, std::abs(g[0]), std::abs(fd)});
                CHECK(std::abs(g[0] - fd) / denom < 1e-6);
            }
        }
    }
}

TEST_CASE("gradients match central differences for multi-coordinate controls") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const CostFamily f = CostFamily::quadratic_tracking(0.8, 0.3, TargetMap{0.2, 1.0, 0});
    const int np = 3, d = 2;
    for (int s = 0; s < 50; ++s) {
        std::vector<double> l{u(rng)};
        std::vector<double> a(static_cast<size_t>(np * d));
        for (auto& v : a) v = u(rng);
        for (int i = 0; i < np; ++i) {
            std::vector<double> g(static_cast<size_t>(d));
            f.grad_own(i, l, a, np, d, g);
            for (int k = 0; k < d; ++k) {
                const double fd = fd_grad(f, i, l, a, np, d, k);
                CHECK(std::abs(g[static_cast<size_t>(k)] - fd) /
                          std::max({1.0, std::abs(fd)}) < 1e-6);
            }
        }
    }
}

TEST_CASE("custom family without gradient") {
    const CostFamily c = CostFamily::custom(
        "abs", [](int i, std::span<const double>, std::span<const double> a, int, int d) {
            return std::abs(a[static_cast<size_t>(i * d)]);
        });
    CHECK_FALSE(c.has_gradient());
    std::vector<double> g(1);
    CHECK_THROWS_WITH(c.grad_own(0, std::vector<double>{0.0}, std::vector<double>{1.0, 2.0}, 2, 1, g),
                      "gradient unavailable");
}

TEST_CASE("structure checks") {
    const SampleBox box{0.0, 1.0, 0.0, 2.0};

    SUBCASE("quadratic tracking passes") {
        const CostFamily q = CostFamily::quadratic_tracking(1.0, 0.5, TargetMap{1.0, 0.0, 0});
        const StructureReport rep = check_assumption1(q, 0, 2, 1, 1, box, 1000, 7);
        CHECK(rep.pass(1e-9));
        CHECK(rep.convexity_violation <= 1e-9);
        CHECK(rep.dec_diff_violation <= 1e-9);
        CHECK(rep.submodularity_violation <= 1e-9);
        CHECK(rep.min_value >= 0.0);
    }

    SUBCASE("supermodular variant fails decreasing differences") {
        const CostFamily s = CostFamily::quadratic_tracking(1.0, -0.5, TargetMap{1.0, 0.0, 0});
        const StructureReport rep = check_assumption1(s, 0, 2, 1, 1, box, 1000, 7);
        CHECK_FALSE(rep.pass(1e-8));
        CHECK(rep.dec_diff_violation > 0.0);
    }

    SUBCASE("exponential counterexample passes the structural conditions") {
        const CostFamily e = CostFamily::exponential_counterexample();
        const StructureReport rep = check_assumption1(e, 0, 2, 1, 1, box, 1000, 7);
        CHECK(rep.pass(1e-9));
        const StructureReport rep2 = check_assumption1(e, 1, 2, 1, 1, box, 1000, 8);
        CHECK(rep2.pass(1e-9));
    }
}

TEST_CASE("opponent permutation invariance of quadratic tracking") {
    const CostFamily q = CostFamily::quadratic_tracking(1.0, 0.7, TargetMap{0.4, 0.0, 0});
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> l{0.0};
    for (int s = 0; s < 50; ++s) {
        std::vector<double> a{u(rng), u(rng), u(rng)};
        std::vector<double> swapped{a[0], a[2], a[1]}; // swap the two opponents of player 0
        CHECK(q.eval(0, l, a, 3, 1) == doctest::Approx(q.eval(0, l, swapped, 3, 1)).epsilon(1e-12));
    }
}

TEST_CASE("four-point identity is an equality for scalar controls") {
    // for d = 1 meet and join permute the pair, so the inequality is tight
    const CostFamily q = CostFamily::quadratic_tracking(1.0, 0.5, TargetMap{1.0, 0.0, 0});
    const StructureReport rep = check_assumption1(q, 0, 2, 1, 1, SampleBox{}, 500, 9);
    CHECK(rep.submodularity_violation == doctest::Approx(0.0).epsilon(1e-12));
}

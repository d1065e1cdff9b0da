#include <doctest.h>

#include "mfgame/sweep.hpp"
#include "test_support.hpp"

using namespace mfgame;
using namespace mfgame::testing;

TEST_CASE("decoupled deterministic ramp levels") {
    // x* = theta - price/2 = 1.3, horizon 1: rate-capped terminal level is
    // min(n * T, x*)
    auto tree = ScenarioTree::chain(2, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.0, 1.0, 0.0, 1.5, 0.0, 0.4);
    SweepOptions opts;
    opts.schedule = {1.0, 2.0, 4.0};
    const SweepReport rep = run_sweep(game, opts);
    REQUIRE(rep.points.size() == 3);
    double last_cost = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < 3; ++k) {
        const SweepPoint& pt = rep.points[k];
        REQUIRE(pt.solved);
        CHECK(pt.certified);
        const double expected = std::min(opts.schedule[k] * 1.0, 1.3);
        const AdaptedProcess& a = pt.profile[0];
        CHECK(a.at(tree->num_nodes() - 1) == doctest::Approx(expected).epsilon(1e-6));
        CHECK(pt.costs[0] <= last_cost + 1e-12);
        last_cost = pt.costs[0];
    }
    REQUIRE(rep.limit_solved);
    // rate caps only hurt: costs sit above the free-cone equilibrium value
    for (const SweepPoint& pt : rep.points)
        for (size_t i = 0; i < pt.costs.size(); ++i)
            CHECK(pt.costs[i] >= rep.limit_costs[i] - 1e-9);
}

TEST_CASE("interaction game sweep verdicts") {
    // the target ramps up from zero, so the free-cone equilibrium carries no
    // time-zero jump and the rate caps stop binding along the schedule
    auto tree = ScenarioTree::chain(4, 0.25);
    GameSpec game = make_quadratic_game(tree, 1.0, 1.0, 0.5, 0.0, 1.0, 0.2);
    for (int n = 0; n < tree->num_nodes(); ++n)
        game.exogenous.at(n) = tree->time(tree->node(n).depth);
    SweepOptions opts;
    opts.schedule = {1.0, 2.0, 4.0, 8.0, 16.0};
    const SweepReport rep = run_sweep(game, opts);
    REQUIRE(rep.limit_solved);
    for (const SweepPoint& pt : rep.points) {
        REQUIRE(pt.solved);
        CHECK(pt.certified);
        CHECK(pt.foc.worst_identity_gap() <= 1e-6);
    }
    CHECK(rep.verdicts.neg_mass_nonincreasing);
    CHECK(rep.verdicts.eps_gap_nonincreasing);
    CHECK(rep.verdicts.pseudopath_nonincreasing);
    CHECK(rep.verdicts.payoff_converged);
    const SweepPoint& last = rep.points.back();
    CHECK(*std::max_element(last.eps_nash_gaps.begin(), last.eps_nash_gaps.end()) <= 1e-2);
}

TEST_CASE("warm and cold starts agree on the equilibria") {
    auto tree = ScenarioTree::chain(3, 1.0 / 3.0);
    const GameSpec game = make_quadratic_game(tree, 0.8, 1.0, 0.4, 1.0, 0.0, 0.3);
    SweepOptions warm;
    warm.schedule = {1.0, 2.0, 4.0};
    SweepOptions cold = warm;
    cold.warm_start = false;
    const SweepReport a = run_sweep(game, warm);
    const SweepReport b = run_sweep(game, cold);
    for (size_t k = 0; k < a.points.size(); ++k) {
        REQUIRE(a.points[k].solved);
        REQUIRE(b.points[k].solved);
        for (int i = 0; i < game.num_players; ++i)
            CHECK(sup_diff(a.points[k].profile[static_cast<size_t>(i)],
                           b.points[k].profile[static_cast<size_t>(i)]) <= 1e-6);
    }
}

TEST_CASE("time-zero jump leaves a floor under the distance to the limit") {
    // rising price makes acting at time 0 strictly cheapest, so the free-cone
    // equilibrium jumps at the root; rate-capped strategies cannot, and the
    // node-zero gap survives in the path distance however large the rate is
    auto tree = ScenarioTree::chain(2, 0.5);
    GameSpec game = make_quadratic_game(tree, 1.0, 1.0, 0.3, 1.0, 0.0, 0.0);
    for (int n = 0; n < tree->num_nodes(); ++n) {
        const double f = 0.1 + 1.2 * tree->time(tree->node(n).depth);
        for (int k = 0; k < 2; ++k) game.price.at(n, k) = f;
    }
    SweepOptions opts;
    opts.schedule = {1.0, 2.0, 4.0, 8.0};
    const SweepReport rep = run_sweep(game, opts);
    REQUIRE(rep.limit_solved);
    const double root_jump = rep.limit_profile[0].at(0);
    CHECK(root_jump > 0.05);
    const SweepPoint& last = rep.points.back();
    REQUIRE(last.solved);
    double dist_to_limit = 0.0;
    for (int i = 0; i < game.num_players; ++i)
        dist_to_limit += pseudopath_distance(last.profile[static_cast<size_t>(i)],
                                             rep.limit_profile[static_cast<size_t>(i)]);
    // the smeared jump keeps at least the root-interval mass of the gap
    CHECK(dist_to_limit >= 0.5 * std::min(root_jump, 1.0) * tree->dt(0));
    // while successive equilibria keep approaching each other
    CHECK(rep.points.back().pseudopath_prev <= rep.points[1].pseudopath_prev + 1e-9);
}

TEST_CASE("schedule validation") {
    const GameSpec game = make_scalar_game();
    SweepOptions opts;
    opts.schedule = {2.0};
    CHECK_THROWS(run_sweep(game, opts));
    opts.schedule = {4.0, 2.0};
    CHECK_THROWS(run_sweep(game, opts));
    opts.schedule = {-1.0, 2.0};
    CHECK_THROWS(run_sweep(game, opts));
}

#include <doctest.h>

#include <random>

#include "mfgame/best_reply.hpp"
#include "test_support.hpp"

using namespace mfgame;
using namespace mfgame::testing;

TEST_CASE("doing nothing is optimal when the marginal cost stays positive") {
    // h = 0, g = (a-1)^2, f = 3: the field is >= 1 everywhere
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.0, 1.0, 0.0, 1.0, 0.0, 3.0, 1);
    const BestReply r = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(10.0),
                                   SolverOptions{});
    CHECK(r.status == ReplyStatus::converged);
    CHECK(sup_norm(r.control) == doctest::Approx(0.0));
}

TEST_CASE("one-period closed form") {
    // minimize (a-1)^2 + a: optimum at 1 - 1/2
    const GameSpec game =
        make_quadratic_game(ScenarioTree::chain(1, 1.0), 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1);
    const BestReply r = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(10.0),
                                   SolverOptions{});
    CHECK(r.status == ReplyStatus::converged);
    CHECK(r.control.at(game.tree->num_nodes() - 1) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.objective == doctest::Approx(0.25 + 0.5).epsilon(1e-9));

    // the 0.01 grid contains the analytic point and the oracle lands on it
    const AdaptedProcess oracle = brute_force_best_reply(
        game, 0, zero_profile(game), AdmissibleSet::monotone(10.0), 0.01);
    CHECK(oracle.at(game.tree->num_nodes() - 1) == doctest::Approx(0.5));
    Profile with_oracle{oracle};
    CHECK(cost(game, 0, with_oracle) <= r.objective + 1e-6);
}

TEST_CASE("grid oracle equals literal enumeration on a two-node chain") {
    // validates the dynamic program against raw exhaustive search
    const GameSpec game =
        make_quadratic_game(ScenarioTree::chain(1, 1.0), 0.4, 1.0, 0.0, 0.9, 0.0, 0.3, 1);
    const AdmissibleSet set = AdmissibleSet::monotone(2.0);
    const double step = 1.0 / 32.0;
    const AdaptedProcess dp = brute_force_best_reply(game, 0, zero_profile(game), set, step);

    double best = std::numeric_limits<double>::infinity();
    double best_z0 = 0.0, best_z1 = 0.0;
    const int steps = static_cast<int>(2.0 / step);
    for (int z0 = 0; z0 <= steps; ++z0) {
        for (int z1 = 0; z1 + z0 <= steps; ++z1) {
            Profile p = zero_profile(game);
            p[0].at(0) = z0 * step;
            p[0].at(1) = (z0 + z1) * step;
            const double j = cost(game, 0, p);
            if (j < best) {
                best = j;
                best_z0 = z0 * step;
                best_z1 = (z0 + z1) * step;
            }
        }
    }
    CHECK(dp.at(0) == doctest::Approx(best_z0));
    CHECK(dp.at(1) == doctest::Approx(best_z1));
}

TEST_CASE("projected gradient matches the grid oracle on stochastic instances") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 0.4);
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.8, 1.0, 0.5, 1.0, 0.0, 0.6);
    const AdmissibleSet set = AdmissibleSet::monotone(4.0);
    const double step = 1.0 / 64.0;
    for (int trial = 0; trial < 3; ++trial) {
        Profile opp = zero_profile(game);
        opp[1] = random_monotone_control(tree, 1, rng, u(rng));
        const BestReply r = best_reply(game, 0, opp, set, SolverOptions{});
        REQUIRE(r.status == ReplyStatus::converged);
        const AdaptedProcess oracle = brute_force_best_reply(game, 0, opp, set, step);
        Profile with_oracle = opp;
        with_oracle[0] = oracle;
        CHECK(sup_diff(r.control, oracle) <= step + 1e-9);
        CHECK(std::abs(r.objective - cost(game, 0, with_oracle)) <= 1e-3);
        // the exhaustive minimum can only be above the continuous one
        CHECK(cost(game, 0, with_oracle) >= r.objective - 1e-9);
    }
}

TEST_CASE("degenerate fuel cap forces the zero strategy") {
    const GameSpec game = make_scalar_game();
    const AdmissibleSet set = AdmissibleSet::monotone(0.0);
    const AdaptedProcess oracle =
        brute_force_best_reply(game, 0, zero_profile(game), set, 0.01);
    CHECK(sup_norm(oracle) == 0.0);
    const BestReply r = best_reply(game, 0, zero_profile(game), set, SolverOptions{});
    CHECK(r.status == ReplyStatus::converged);
    CHECK(sup_norm(r.control) == 0.0);
}

TEST_CASE("oracle refuses unbounded or oversized searches") {
    const GameSpec game = make_scalar_game();
    CHECK_THROWS(brute_force_best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(),
                                        0.01));
    CHECK_THROWS_WITH(brute_force_best_reply(game, 0, zero_profile(game),
                                             AdmissibleSet::monotone(1000.0), 1e-6),
                      "search space too large");
}

TEST_CASE("feasibility and first-order certificate at the solution") {
    auto tree = ScenarioTree::binary(3, 0.25, 0.4);
    const GameSpec game = make_quadratic_game(tree, 0.6, 1.0, 0.4, 1.1, 0.0, 0.5);
    std::mt19937_64 rng(13);
    Profile opp = zero_profile(game);
    opp[1] = random_monotone_control(tree, 1, rng);
    SolverOptions opts;
    for (const AdmissibleSet& set :
         {AdmissibleSet::monotone(3.0), AdmissibleSet::lipschitz(2.0)}) {
        const BestReply r = best_reply(game, 0, opp, set, opts);
        REQUIRE(r.status == ReplyStatus::converged);
        CHECK(is_monotone_control(r.control, 1e-12));
        CHECK(set.contains(r.control));
        // every node is either stationary, at rest with upward push, or
        // pinned at its cap with downward push
        Profile sol = opp;
        sol[0] = r.control;
        const AdaptedProcess y = subgradient(game, 0, sol);
        const AdaptedProcess inc = increments(r.control);
        for (int n = 0; n < tree->num_nodes(); ++n) {
            const double cap = set.increment_cap(*tree, n);
            const double z = inc.at(n);
            const double yv = y.at(n);
            if (cap <= 1e-12)
                continue; // degenerate box: the increment is pinned either way
            if (z <= 1e-12)
                CHECK(yv >= -10.0 * opts.grad_tol);
            else if (cap != std::numeric_limits<double>::infinity() && z >= cap - 1e-12)
                CHECK(yv <= 10.0 * opts.grad_tol);
            else
                CHECK(std::abs(yv) <= 10.0 * opts.grad_tol);
        }
    }
}

TEST_CASE("rate cap structure") {
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    const GameSpec game = make_quadratic_game(tree, 1.0, 1.0, 0.3, 2.0, 0.0, 0.1);
    const AdmissibleSet set = AdmissibleSet::lipschitz(1.0);
    const BestReply r = best_reply(game, 0, zero_profile(game), set, SolverOptions{});
    REQUIRE(r.status == ReplyStatus::converged);
    CHECK(r.control.at(0) == doctest::Approx(0.0)); // no time-0 jump
    const AdaptedProcess inc = increments(r.control);
    for (int n = 1; n < tree->num_nodes(); ++n)
        CHECK(inc.at(n) <= 1.0 * 0.5 + 1e-12);
}

TEST_CASE("uniqueness: two starts agree") {
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.7, 1.0, 0.4, 1.0, 0.0, 0.4);
    std::mt19937_64 rng(19);
    Profile opp = zero_profile(game);
    opp[1] = random_monotone_control(tree, 1, rng);
    SolverOptions opts;
    const AdmissibleSet set = AdmissibleSet::monotone(5.0);
    const BestReply from_zero = best_reply(game, 0, opp, set, opts);
    const AdaptedProcess high(tree, 1, 2.0);
    const BestReply from_high = best_reply(game, 0, opp, set, opts, &high);
    CHECK(sup_diff(from_zero.control, from_high.control) <= 10.0 * opts.grad_tol);
}

TEST_CASE("momentum reaches the same answer") {
    auto tree = ScenarioTree::binary(3, 0.25, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.6, 1.0, 0.4, 1.0, 0.0, 0.5);
    SolverOptions plain;
    SolverOptions accel;
    accel.momentum = true;
    const BestReply a = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(4.0), plain);
    const BestReply b = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(4.0), accel);
    CHECK(sup_diff(a.control, b.control) <= 10.0 * plain.grad_tol);
}

TEST_CASE("objective never increases across iterations") {
    // implied by the line search; spot-check via a tight iteration budget
    auto tree = ScenarioTree::binary(3, 0.25, 0.5);
    const GameSpec game = make_quadratic_game(tree, 0.6, 1.0, 0.4, 1.3, 0.0, 0.5);
    SolverOptions coarse;
    double last = std::numeric_limits<double>::infinity();
    for (int iters : {1, 2, 5, 10, 50, 200}) {
        coarse.max_iters = iters;
        const BestReply r =
            best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(4.0), coarse);
        CHECK(r.objective <= last + 1e-12);
        last = r.objective;
    }
}

TEST_CASE("reply map is monotone in the opponents") {
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    std::mt19937_64 rng(23);
    SolverOptions opts;
    const AdmissibleSet set = AdmissibleSet::monotone(6.0);

    SUBCASE("decoupled game: reply constant in opponents") {
        const GameSpec game = make_quadratic_game(tree, 0.5, 1.0, 0.0, 1.0, 0.0, 0.5);
        std::vector<std::pair<Profile, Profile>> pairs;
        for (int i = 0; i < 3; ++i) {
            Profile low = zero_profile(game);
            low[1] = random_monotone_control(tree, 1, rng);
            Profile high = low;
            const AdaptedProcess extra = random_monotone_control(tree, 1, rng, 0.2);
            for (int n = 0; n < tree->num_nodes(); ++n) high[1].at(n) += extra.at(n);
            pairs.emplace_back(low, high);
        }
        const MonotoneReplyReport rep = monotone_reply_check(game, 0, pairs, set, opts);
        CHECK(rep.worst_violation <= 10.0 * opts.grad_tol);
    }

    SUBCASE("coupled game: reply increases") {
        const GameSpec game = make_quadratic_game(tree, 0.5, 1.0, 0.5, 1.0, 0.0, 0.5);
        std::vector<std::pair<Profile, Profile>> pairs;
        for (int i = 0; i < 5; ++i) {
            Profile low = zero_profile(game);
            low[1] = random_monotone_control(tree, 1, rng);
            Profile high = low;
            const AdaptedProcess extra = random_monotone_control(tree, 1, rng, 0.2);
            for (int n = 0; n < tree->num_nodes(); ++n) high[1].at(n) += extra.at(n);
            pairs.emplace_back(low, high);
        }
        const MonotoneReplyReport rep = monotone_reply_check(game, 0, pairs, set, opts);
        CHECK(rep.worst_violation <= 1e-6);
    }

    SUBCASE("supermodular variant: reply decreases, check reports it") {
        const GameSpec game = make_quadratic_game(tree, 0.5, 1.0, -0.5, 1.0, 0.0, 0.5);
        std::vector<std::pair<Profile, Profile>> pairs;
        Profile low = zero_profile(game);
        Profile high = low;
        for (int n = 0; n < tree->num_nodes(); ++n) high[1].at(n) = 0.8;
        pairs.emplace_back(low, high);
        const MonotoneReplyReport rep = monotone_reply_check(game, 0, pairs, set, opts);
        CHECK(rep.worst_violation > 0.01);
    }
}

TEST_CASE("coercivity failure is detected on the free cone") {
    const GameSpec game = make_counterexample_game();
    const BestReply r =
        best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(), SolverOptions{});
    CHECK(r.status == ReplyStatus::divergence);
    CHECK(r.outward_fraction >= 0.9);
    // the well-behaved second player converges
    const BestReply r2 =
        best_reply(game, 1, zero_profile(game), AdmissibleSet::monotone(), SolverOptions{});
    CHECK(r2.status == ReplyStatus::converged);

    // with an increment guard the runaway pins at the box and flags early
    SolverOptions guarded;
    guarded.increment_guard = 1.0;
    const BestReply rg =
        best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(), guarded);
    CHECK(rg.status == ReplyStatus::divergence);
    CHECK(rg.iterations < guarded.max_iters);
    CHECK(sup_norm(increments(rg.control)) <= 1.0 + 1e-12);
    // the guard is a divergence tripwire, not a constraint on healthy games
    const GameSpec sane = make_scalar_game();
    const BestReply rs = best_reply(sane, 0, zero_profile(sane), AdmissibleSet::monotone(), guarded);
    CHECK(rs.status == ReplyStatus::converged);
}

TEST_CASE("multi-coordinate controls decouple per coordinate") {
    // per-coordinate quadratic tracking with a shared scalar target: the
    // two-coordinate reply must equal the one-coordinate reply in both slots
    auto tree = ScenarioTree::binary(2, 0.5, 0.5);
    GameSpec wide;
    wide.tree = tree;
    wide.num_players = 2;
    wide.control_dim = 2;
    const TargetMap target{1.0, 0.0, 0};
    for (int i = 0; i < 2; ++i) {
        wide.running.push_back(CostFamily::quadratic_tracking(0.7, 0.4, target));
        wide.terminal.push_back(CostFamily::quadratic_tracking(1.0, 0.4, target));
    }
    wide.price = constant_process(tree, 4, 0.5);
    wide.exogenous = constant_process(tree, 1, 0.0);

    const GameSpec narrow = make_quadratic_game(tree, 0.7, 1.0, 0.4, 1.0, 0.0, 0.5);
    SolverOptions opts;
    const BestReply r2d = best_reply(wide, 0, zero_profile(wide), AdmissibleSet::monotone(8.0), opts);
    const BestReply r1d =
        best_reply(narrow, 0, zero_profile(narrow), AdmissibleSet::monotone(8.0), opts);
    REQUIRE(r2d.status == ReplyStatus::converged);
    for (int n = 0; n < tree->num_nodes(); ++n)
        for (int k = 0; k < 2; ++k)
            CHECK(r2d.control.at(n, k) == doctest::Approx(r1d.control.at(n)).epsilon(1e-7));
    CHECK(r2d.objective == doctest::Approx(2.0 * r1d.objective).epsilon(1e-9));
}

TEST_CASE("fuel scaling keeps the pathwise cap") {
    // strong pull toward 3 with cap 1: the box-feasible iterate overshoots
    // the path cap and the final pass scales it back
    const GameSpec game =
        make_quadratic_game(ScenarioTree::chain(2, 0.5), 1.0, 1.0, 0.0, 3.0, 0.0, 0.01, 1);
    const AdmissibleSet set = AdmissibleSet::monotone(1.0);
    const BestReply r = best_reply(game, 0, zero_profile(game), set, SolverOptions{});
    CHECK(set.contains(r.control));
    CHECK(r.control.at(game.tree->num_nodes() - 1) <= 1.0 + 1e-12);
}

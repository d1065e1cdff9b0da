#include <doctest.h>

#include <random>

#include "mfgame/diagnostics.hpp"
#include "mfgame/topkis.hpp"
#include "test_support.hpp"

using namespace mfgame;
using namespace mfgame::testing;

namespace {

// chain game with running and terminal tracking toward 1, cheap control;
// the rate cap binds early for small caps
GameSpec make_ramp_game() {
    auto tree = ScenarioTree::chain(4, 0.25);
    return make_quadratic_game(tree, 1.0, 1.0, 0.5, 1.0, 0.0, 0.2);
}

} // namespace

TEST_CASE("first-order report on inactive and interior optima") {
    SUBCASE("inactive control: positive field, zero slackness") {
        auto tree = ScenarioTree::binary(2, 0.5, 0.5);
        const GameSpec game = make_quadratic_game(tree, 0.0, 1.0, 0.0, 1.0, 0.0, 3.0, 1);
        const FocReport rep = foc_report(game, zero_profile(game), AdmissibleSet::monotone());
        CHECK(rep.players[0].slackness == doctest::Approx(0.0));
        CHECK(rep.players[0].neg_part_mass == doctest::Approx(0.0));
        CHECK(rep.players[0].min_subgradient == doctest::Approx(1.0));
    }

    SUBCASE("interior optimum: flat field where the control moves") {
        const GameSpec game =
            make_quadratic_game(ScenarioTree::chain(1, 1.0), 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1);
        const BestReply r = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(10.0),
                                       SolverOptions{});
        Profile p{r.control};
        const AdaptedProcess y = subgradient(game, 0, p);
        CHECK(y.at(game.tree->num_nodes() - 1) == doctest::Approx(0.0).epsilon(1e-7));
        const FocReport rep = foc_report(game, p, AdmissibleSet::monotone());
        CHECK(std::abs(rep.players[0].slackness) <= 1e-7);
    }
}

TEST_CASE("rate-capped equilibria satisfy the first-order identity") {
    const GameSpec game = make_ramp_game();
    double last_neg_mass = std::numeric_limits<double>::infinity();
    for (double n : {1.0, 2.0, 4.0, 8.0}) {
        const AdmissibleSet set = AdmissibleSet::lipschitz(n);
        const EquilibriumResult res = solve_least(game, set, TopkisOptions{});
        REQUIRE(res.termination == Termination::converged);
        const FocReport rep = foc_report(game, res.profile, set);
        CHECK(rep.worst_identity_gap() <= 1e-6);
        CHECK(rep.worst_neg_part_mass() < last_neg_mass);
        last_neg_mass = rep.worst_neg_part_mass();
    }
    // the identity also holds at plain best replies, not only equilibria
    const AdmissibleSet set = AdmissibleSet::lipschitz(2.0);
    std::mt19937_64 rng(3);
    Profile opp = zero_profile(game);
    opp[1] = random_lipschitz_control(game.tree, 1, 2.0, rng);
    SolverOptions opts;
    const BestReply r = best_reply(game, 0, opp, set, opts);
    Profile sol = opp;
    sol[0] = r.control;
    const FocReport rep = foc_report(game, sol, set);
    const FocPlayerReport& p0 = rep.players[0];
    CHECK(*p0.lipschitz_identity_gap <= 10.0 * opts.grad_tol);
}

TEST_CASE("free-cone equilibria satisfy nonnegativity and flat-off") {
    const GameSpec game = make_ramp_game();
    const AdmissibleSet cone = AdmissibleSet::monotone();
    const EquilibriumResult res = solve_least(game, cone, TopkisOptions{});
    REQUIRE(res.termination == Termination::converged);
    const FocReport rep = foc_report(game, res.profile, cone);
    SolverOptions opts;
    CHECK(rep.min_subgradient() >= -10.0 * opts.grad_tol);
    CHECK(rep.worst_slackness() <= 10.0 * opts.grad_tol);
}

TEST_CASE("identity with multi-coordinate controls sums the negative parts") {
    // two control coordinates per player; the rate-capped identity couples
    // the slackness to the coordinate-summed negative-part mass
    auto tree = ScenarioTree::chain(3, 1.0 / 3.0);
    GameSpec game;
    game.tree = tree;
    game.num_players = 2;
    game.control_dim = 2;
    const TargetMap target{1.0, 0.0, 0};
    for (int i = 0; i < 2; ++i) {
        game.running.push_back(CostFamily::quadratic_tracking(1.0, 0.4, target));
        game.terminal.push_back(CostFamily::quadratic_tracking(1.0, 0.4, target));
    }
    game.price = constant_process(tree, 4, 0.2);
    game.exogenous = constant_process(tree, 1, 0.0);

    const AdmissibleSet set = AdmissibleSet::lipschitz(1.0);
    SolverOptions opts;
    const BestReply r = best_reply(game, 0, zero_profile(game), set, opts);
    REQUIRE(r.status == ReplyStatus::converged);
    Profile sol = zero_profile(game);
    sol[0] = r.control;
    const FocReport rep = foc_report(game, sol, set);
    CHECK(rep.players[0].neg_part_mass > 1e-3); // the unit rate binds
    CHECK(*rep.players[0].lipschitz_identity_gap <= 10.0 * opts.grad_tol);
}

TEST_CASE("deviation gaps against the free cone") {
    const GameSpec game = make_ramp_game();
    TopkisOptions topts;

    SUBCASE("free-cone equilibrium has negligible gaps") {
        const EquilibriumResult res = solve_least(game, AdmissibleSet::monotone(), topts);
        REQUIRE(res.termination == Termination::converged);
        for (double g : epsilon_nash_gap(game, res.profile, topts.inner)) CHECK(g <= 1e-6);
    }

    SUBCASE("rate-capped equilibria have shrinking positive gaps") {
        double last = std::numeric_limits<double>::infinity();
        for (double n : {1.0, 4.0}) {
            const EquilibriumResult res = solve_least(game, AdmissibleSet::lipschitz(n), topts);
            REQUIRE(res.termination == Termination::converged);
            const std::vector<double> gaps = epsilon_nash_gap(game, res.profile, topts.inner);
            const double worst = *std::max_element(gaps.begin(), gaps.end());
            CHECK(worst >= -1e-12);
            CHECK(worst < last);
            if (n == 1.0) CHECK(worst > 1e-4); // the unit rate cap visibly binds
            last = worst;
        }
    }

    SUBCASE("zero profile gap equals the direct two-term difference") {
        const std::vector<double> gaps = epsilon_nash_gap(game, zero_profile(game), topts.inner);
        const BestReply r = best_reply(game, 0, zero_profile(game), AdmissibleSet::monotone(),
                                       topts.inner);
        const double direct = cost(game, 0, zero_profile(game)) - r.objective;
        CHECK(gaps[0] == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("pseudopath distance") {
    SUBCASE("coincidence and the single-step example") {
        auto tree = ScenarioTree::chain(1, 1.0);
        const AdaptedProcess x(tree, 1, 0.0);
        const AdaptedProcess y(tree, 1, 1.0);
        CHECK(pseudopath_distance(x, x) == doctest::Approx(0.0));
        CHECK(pseudopath_distance(x, y) == doctest::Approx(2.0));
        // uncapped variant scales with the gap
        AdaptedProcess big(tree, 1, 3.0);
        CHECK(pseudopath_distance(x, big, false) == doctest::Approx(6.0));
        CHECK(pseudopath_distance(x, big, true) == doctest::Approx(2.0));
    }

    SUBCASE("pseudometric axioms on random triples") {
        auto tree = ScenarioTree::binary(3, 0.3, 0.45);
        std::mt19937_64 rng(71);
        for (int trial = 0; trial < 100; ++trial) {
            const AdaptedProcess a = random_monotone_control(tree, 2, rng, 1.2);
            const AdaptedProcess b = random_monotone_control(tree, 2, rng, 1.2);
            const AdaptedProcess c = random_monotone_control(tree, 2, rng, 1.2);
            CHECK(pseudopath_distance(a, a) == 0.0);
            CHECK(pseudopath_distance(a, b) ==
                  doctest::Approx(pseudopath_distance(b, a)).epsilon(1e-15));
            CHECK(pseudopath_distance(a, c) <=
                  pseudopath_distance(a, b) + pseudopath_distance(b, c) + 1e-12);
        }
    }
}

TEST_CASE("conditional variation") {
    SUBCASE("martingale: only the terminal term survives") {
        auto tree = ScenarioTree::binary(4, 0.25, 0.5);
        const AdaptedProcess w = brownian_paths(tree, 1);
        const ConditionalVariationResult cv = conditional_variation(w);
        double abs_terminal = 0.0;
        for (int n = tree->first_leaf(); n < tree->num_nodes(); ++n)
            abs_terminal += tree->prob(n) * std::abs(w.at(n));
        CHECK(cv.exact);
        CHECK(cv.value == doctest::Approx(abs_terminal).epsilon(1e-12));
    }

    SUBCASE("deterministic nondecreasing path doubles its terminal value") {
        auto tree = ScenarioTree::chain(3, 0.5);
        AdaptedProcess x(tree, 1);
        for (int n = 0; n < tree->num_nodes(); ++n) x.at(n) = 0.4 * tree->node(n).depth;
        const ConditionalVariationResult cv = conditional_variation(x);
        CHECK(cv.value == doctest::Approx(2.0 * 1.2).epsilon(1e-12));
    }

    SUBCASE("matches explicit subpartition enumeration") {
        auto tree = ScenarioTree::binary(4, 0.25, 0.4);
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 5; ++trial) {
            AdaptedProcess x(tree, 1);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (auto& v : x.values()) v = u(rng);
            const ConditionalVariationResult cv = conditional_variation(x);
            CHECK(cv.value ==
                  doctest::Approx(enumerate_conditional_variation(x)).epsilon(1e-12));
        }
    }

    SUBCASE("dominates the terminal expectation for monotone controls") {
        auto tree = ScenarioTree::binary(3, 0.25, 0.5);
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 10; ++trial) {
            const AdaptedProcess a = random_monotone_control(tree, 1, rng);
            double terminal = 0.0;
            for (int n = tree->first_leaf(); n < tree->num_nodes(); ++n)
                terminal += tree->prob(n) * std::abs(a.at(n));
            CHECK(conditional_variation(a).value >= terminal - 1e-12);
        }
    }
}

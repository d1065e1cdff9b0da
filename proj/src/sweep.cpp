#include "mfgame/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfgame {

namespace {

double profile_pseudopath(const Profile& a, const Profile& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += pseudopath_distance(a[i], b[i]);
    return acc;
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace

SweepReport run_sweep(const GameSpec& game, const SweepOptions& opts) {
    if (opts.schedule.size() < 2) throw std::invalid_argument("sweep: schedule needs at least two rates");
    for (size_t i = 0; i + 1 < opts.schedule.size(); ++i)
        if (!(opts.schedule[i] < opts.schedule[i + 1]))
            throw std::invalid_argument("sweep: schedule must be strictly increasing");
    for (double n : opts.schedule)
        if (!(n > 0.0)) throw std::invalid_argument("sweep: rates must be positive");
    validate_game(game);

    SweepReport rep;
    const Profile* prev_profile = nullptr;

    for (double n : opts.schedule) {
        SweepPoint pt;
        pt.rate = n;
        const AdmissibleSet set = AdmissibleSet::lipschitz(n);
        try {
            TopkisOptions topts = opts.topkis;
            const Profile* start = (opts.warm_start && prev_profile) ? prev_profile : nullptr;
            EquilibriumResult eq = solve_least(game, set, topts, start);
            if (eq.termination != Termination::converged)
                throw std::runtime_error(std::string("sweep point failed: ") + to_string(eq.termination) +
                                         (eq.message.empty() ? "" : (": " + eq.message)));
            const std::vector<double> gaps =
                certify_equilibrium(game, set, eq.profile, opts.topkis.inner);
            pt.max_gap = max_of(gaps);
            pt.certified = pt.max_gap <= opts.topkis.certify_budget;
            pt.costs = eq.costs;
            pt.foc = foc_report(game, eq.profile, set);
            pt.eps_nash_gaps = epsilon_nash_gap(game, eq.profile, opts.topkis.inner);
            pt.pseudopath_prev =
                prev_profile ? profile_pseudopath(eq.profile, *prev_profile) : 0.0;
            pt.profile = std::move(eq.profile);
            pt.solved = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        rep.points.push_back(std::move(pt));
        if (rep.points.back().solved) prev_profile = &rep.points.back().profile;
    }

    try {
        EquilibriumResult limit = solve_least(game, AdmissibleSet::monotone(), opts.topkis);
        if (limit.termination != Termination::converged)
            throw std::runtime_error(std::string("limit solve failed: ") + to_string(limit.termination));
        rep.limit_costs = limit.costs;
        rep.limit_profile = std::move(limit.profile);
        rep.limit_solved = true;
    } catch (const std::exception& e) {
        rep.limit_error = e.what();
    }

    // Verdicts over the solved prefix of the schedule.
    std::vector<const SweepPoint*> solved;
    for (const auto& p : rep.points)
        if (p.solved) solved.push_back(&p);
    if (solved.size() >= 2) {
        const double slack = opts.verdict_slack;
        bool neg_ok = true, gap_ok = true, pp_ok = true;
        for (size_t i = 1; i < solved.size(); ++i) {
            neg_ok = neg_ok && solved[i]->foc.worst_neg_part_mass() <=
                                   solved[i - 1]->foc.worst_neg_part_mass() + slack;
            gap_ok = gap_ok &&
                     max_of(solved[i]->eps_nash_gaps) <= max_of(solved[i - 1]->eps_nash_gaps) + slack;
            if (i >= 2) pp_ok = pp_ok && solved[i]->pseudopath_prev <= solved[i - 1]->pseudopath_prev + slack;
        }
        rep.verdicts.neg_mass_nonincreasing = neg_ok;
        rep.verdicts.eps_gap_nonincreasing = gap_ok;
        rep.verdicts.pseudopath_nonincreasing = pp_ok;
        rep.verdicts.pseudopath_converged = solved.back()->pseudopath_prev <= opts.pseudopath_tol;
        rep.verdicts.non_cauchy =
            !pp_ok && solved.back()->pseudopath_prev > 10.0 * opts.pseudopath_tol;
    }

    // Payoff convergence against the limit equilibrium when it exists:
    // how |J(n_k) - J(limit)| behaves along the schedule. Reported, not an
    // exit condition; equilibrium payoffs may approach the limit non-
    // monotonically because the opponents' restriction moves too.
    if (rep.limit_solved && solved.size() >= 2) {
        bool payoff_ok = true;
        double prev_dev = std::numeric_limits<double>::infinity();
        for (const SweepPoint* p : solved) {
            double dev = 0.0;
            for (size_t i = 0; i < p->costs.size(); ++i)
                dev = std::max(dev, std::abs(p->costs[i] - rep.limit_costs[i]));
            if (dev > prev_dev + opts.verdict_slack) payoff_ok = false;
            prev_dev = dev;
        }
        rep.verdicts.payoff_dev_nonincreasing = payoff_ok;
        rep.verdicts.payoff_converged = prev_dev <= opts.payoff_tol;
    }
    return rep;
}

} // namespace mfgame

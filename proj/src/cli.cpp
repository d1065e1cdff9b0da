#include "mfgame/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfgame/config.hpp"
#include "mfgame/diagnostics.hpp"
#include "mfgame/io.hpp"
#include "mfgame/sweep.hpp"

namespace mfgame {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string resolve_out_dir(const RunConfig& cfg, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("MFGAME_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return cfg.out_dir;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

ordered_json json_vector(const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

struct ValidationOutcome {
    bool ok = true;
    std::ostringstream table;
};

ValidationOutcome run_checks(const RunConfig& cfg, const GameSpec& game) {
    ValidationOutcome out;
    out.table << "check,player,family,convexity,dec_diff,submodularity,result\n";
    const int k = game.exogenous_dim();
    std::uint64_t seed = cfg.seed;
    for (int i = 0; i < game.num_players; ++i) {
        const CostFamily* fams[2] = {&game.running[static_cast<size_t>(i)],
                                     &game.terminal[static_cast<size_t>(i)]};
        const char* labels[2] = {"h", "g"};
        for (int f = 0; f < 2; ++f) {
            const StructureReport rep =
                check_assumption1(*fams[f], i, game.num_players, game.control_dim, k,
                                  cfg.checks.box, cfg.checks.samples, seed++);
            const bool pass = rep.pass(cfg.checks.tol);
            out.ok = out.ok && pass;
            out.table << "assumption1," << i << ',' << labels[f] << ','
                      << format_double(rep.convexity_violation) << ','
                      << format_double(rep.dec_diff_violation) << ','
                      << format_double(rep.submodularity_violation) << ','
                      << (pass ? "pass" : "FAIL") << '\n';
            if (rep.min_value < 0.0)
                out.table << "warning," << i << ',' << labels[f]
                          << ",negative cost value sampled: " << format_double(rep.min_value)
                          << ",,,\n";
        }
    }
    if (cfg.checks.coercivity == "price") {
        double floor = std::numeric_limits<double>::infinity();
        for (int i = 0; i < game.num_players; ++i) floor = std::min(floor, min_price(game, i));
        const bool pass = floor >= cfg.checks.price_floor;
        out.ok = out.ok && pass;
        out.table << "price_floor,all,f," << format_double(floor) << ",,,"
                  << (pass ? "pass" : "FAIL: price floor violated") << '\n';
    }
    return out;
}

int cmd_validate(const std::string& config_path, const std::string& cli_out) {
    const RunConfig cfg = load_config(config_path);
    const GameSpec game = build_game(cfg);
    ValidationOutcome checks = run_checks(cfg, game);
    std::cout << checks.table.str();
    const std::string dir = resolve_out_dir(cfg, cli_out);
    ensure_dir(dir);
    write_file(dir + "/validate.csv", checks.table.str());
    return checks.ok ? kExitOk : kExitDomain;
}

// Nodes whose marginal cost still points outward; used to narrate
// coercivity failures.
std::vector<int> outward_nodes(const GameSpec& game, const Profile& profile, double tol) {
    std::vector<int> bad;
    for (int i = 0; i < game.num_players; ++i) {
        const AdaptedProcess y = subgradient(game, i, profile);
        for (int n = 0; n < game.tree->num_nodes(); ++n)
            for (int c = 0; c < game.control_dim; ++c)
                if (y.at(n, c) < -tol) {
                    bad.push_back(n);
                    break;
                }
    }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    return bad;
}

int cmd_solve(const std::string& config_path, const std::string& cli_out, bool force,
              bool greatest) {
    const RunConfig cfg = load_config(config_path);
    const GameSpec game = build_game(cfg);
    if (!force) {
        ValidationOutcome checks = run_checks(cfg, game);
        if (!checks.ok) {
            std::cerr << "validation failed; rerun with --force to solve anyway\n"
                      << checks.table.str();
            return kExitDomain;
        }
    }
    const AdmissibleSet set = admissible_set(cfg);
    const TopkisOptions topts = topkis_options(cfg);
    const EquilibriumResult eq = greatest ? solve_greatest(game, set, topts)
                                          : solve_least(game, set, topts);

    const std::string dir = resolve_out_dir(cfg, cli_out);
    ensure_dir(dir);
    write_file(dir + "/trace.csv", trace_csv(eq.trace));
    write_file(dir + "/equilibrium.csv", equilibrium_csv(*game.tree, eq.profile));
    write_file(dir + "/tree.json", tree_to_json(*game.tree));

    ordered_json summary;
    summary["seed"] = cfg.seed;
    summary["termination"] = to_string(eq.termination);
    summary["outer_iterations"] = eq.outer_iterations;
    summary["worst_monotonicity_violation"] = eq.worst_monotonicity_violation;

    if (eq.termination == Termination::converged) {
        const std::vector<double> gaps = certify_equilibrium(game, set, eq.profile, topts.inner);
        const double max_gap = *std::max_element(gaps.begin(), gaps.end());
        const FocReport foc = foc_report(game, eq.profile, set);
        write_file(dir + "/foc.csv", foc_csv(foc));
        summary["costs"] = json_vector(eq.costs);
        summary["certified"] = max_gap <= topts.certify_budget;
        summary["max_deviation_gap"] = max_gap;
        summary["min_subgradient"] = foc.min_subgradient();
        write_file(dir + "/summary.json", summary.dump(2) + "\n");
        std::cout << "termination: converged in " << eq.outer_iterations
                  << " outer steps; max deviation gap " << format_double(max_gap) << "\n";
        for (size_t i = 0; i < eq.costs.size(); ++i)
            std::cout << "player " << i << " cost " << format_double(eq.costs[i]) << "\n";
        return max_gap <= topts.certify_budget ? kExitOk : kExitDomain;
    }

    summary["message"] = eq.message;
    if (eq.termination == Termination::coercivity_failure) {
        const std::vector<int> nodes = outward_nodes(game, eq.profile, topts.inner.grad_tol);
        ordered_json flagged = ordered_json::array();
        for (size_t i = 0; i < nodes.size() && i < 16; ++i) flagged.push_back(nodes[i]);
        summary["outward_nodes"] = flagged;
        std::cerr << "coercivity failure: " << eq.message << "\n  flagged nodes:";
        for (size_t i = 0; i < nodes.size() && i < 16; ++i) std::cerr << ' ' << nodes[i];
        if (nodes.size() > 16) std::cerr << " ...";
        std::cerr << "\n";
    } else {
        std::cerr << to_string(eq.termination) << ": " << eq.message << "\n";
    }
    write_file(dir + "/summary.json", summary.dump(2) + "\n");
    return kExitDomain;
}

int cmd_sweep(const std::string& config_path, const std::string& cli_out) {
    const RunConfig cfg = load_config(config_path);
    if (cfg.admissible.mode != "lipschitz") throw ConfigError("sweep: admissible.mode must be lipschitz");
    if (cfg.admissible.schedule.size() < 2)
        throw ConfigError("sweep: n_schedule with at least two increasing rates required");
    for (size_t i = 0; i + 1 < cfg.admissible.schedule.size(); ++i)
        if (!(cfg.admissible.schedule[i] < cfg.admissible.schedule[i + 1]))
            throw ConfigError("sweep: n_schedule must be strictly increasing");

    const GameSpec game = build_game(cfg);
    SweepOptions opts;
    opts.schedule = cfg.admissible.schedule;
    opts.warm_start = cfg.sweep_warm_start;
    opts.topkis = topkis_options(cfg);
    opts.payoff_tol = cfg.payoff_tol;
    opts.pseudopath_tol = cfg.pseudopath_tol;
    const SweepReport rep = run_sweep(game, opts);

    const std::string dir = resolve_out_dir(cfg, cli_out);
    ensure_dir(dir);
    write_file(dir + "/sweep.csv", sweep_csv(rep));

    ordered_json summary;
    summary["seed"] = cfg.seed;
    summary["schedule"] = json_vector(opts.schedule);
    summary["limit_solved"] = rep.limit_solved;
    if (rep.limit_solved) summary["limit_costs"] = json_vector(rep.limit_costs);
    summary["verdicts"] = {{"neg_mass_nonincreasing", rep.verdicts.neg_mass_nonincreasing},
                           {"eps_gap_nonincreasing", rep.verdicts.eps_gap_nonincreasing},
                           {"payoff_dev_nonincreasing", rep.verdicts.payoff_dev_nonincreasing},
                           {"payoff_converged", rep.verdicts.payoff_converged},
                           {"pseudopath_nonincreasing", rep.verdicts.pseudopath_nonincreasing},
                           {"pseudopath_converged", rep.verdicts.pseudopath_converged},
                           {"non_cauchy", rep.verdicts.non_cauchy}};
    ordered_json pts = ordered_json::array();
    bool all_ok = rep.limit_solved;
    for (const SweepPoint& pt : rep.points) {
        ordered_json pj;
        pj["rate"] = pt.rate;
        pj["solved"] = pt.solved;
        if (pt.solved) {
            pj["certified"] = pt.certified;
            pj["max_gap"] = pt.max_gap;
            pj["costs"] = json_vector(pt.costs);
            pj["eps_nash_gaps"] = json_vector(pt.eps_nash_gaps);
            pj["neg_part_mass"] = pt.foc.worst_neg_part_mass();
            pj["identity_gap"] = pt.foc.worst_identity_gap();
            pj["pseudopath_dist"] = pt.pseudopath_prev;
            all_ok = all_ok && pt.certified;
        } else {
            pj["error"] = pt.error;
            all_ok = false;
        }
        pts.push_back(std::move(pj));
    }
    summary["points"] = std::move(pts);
    write_file(dir + "/sweep_summary.json", summary.dump(2) + "\n");
    std::cout << sweep_csv(rep);
    return all_ok ? kExitOk : kExitDomain;
}

int cmd_sdg(const std::string& config_path, const std::string& cli_out) {
    const RunConfig cfg = load_config(config_path);
    const SdgSpec sdg = build_sdg(cfg);
    if (cfg.sdg && cfg.sdg->noise == "independent" && sdg.players.size() > 1)
        std::cerr << "note: independent drivers use a product-branching tree ("
                  << sdg.tree->num_nodes() << " nodes at branching "
                  << (1 << sdg.players.size()) << ")\n";
    const TransformedGame tg = transform_game(sdg);
    const AdmissibleSet set = admissible_set(cfg);
    const TopkisOptions topts = topkis_options(cfg);
    const EquilibriumResult eq = solve_least(tg.game, set, topts);
    const std::string dir = resolve_out_dir(cfg, cli_out);
    ensure_dir(dir);
    write_file(dir + "/trace.csv", trace_csv(eq.trace));
    if (eq.termination != Termination::converged) {
        std::cerr << to_string(eq.termination) << ": " << eq.message << "\n";
        return kExitDomain;
    }
    const std::vector<double> gaps = certify_equilibrium(tg.game, set, eq.profile, topts.inner);
    const MappedEquilibrium mapped = map_back(tg, eq.profile);

    write_file(dir + "/equilibrium_transformed.csv", equilibrium_csv(*tg.game.tree, eq.profile));
    std::ostringstream mb;
    mb << "node_id,time,player,zeta,xi,state\n";
    const ScenarioTree& t = *tg.game.tree;
    for (int n = 0; n < t.num_nodes(); ++n)
        for (size_t i = 0; i < mapped.controls.size(); ++i)
            mb << n << ',' << format_double(t.time(t.node(n).depth)) << ',' << i << ','
               << format_double(eq.profile[i].at(n)) << ','
               << format_double(mapped.controls[i].at(n)) << ','
               << format_double(mapped.states[i].at(n)) << '\n';
    write_file(dir + "/mapback.csv", mb.str());

    // cost equivalence between the transformed and the original game
    double worst_identity = 0.0;
    ordered_json costs_raw = ordered_json::array();
    for (int i = 0; i < tg.game.num_players; ++i) {
        const double raw = raw_cost(sdg, i, mapped.controls);
        costs_raw.push_back(raw);
        worst_identity = std::max(worst_identity, std::abs(raw - eq.costs[static_cast<size_t>(i)]));
    }
    ordered_json summary;
    summary["seed"] = cfg.seed;
    summary["termination"] = to_string(eq.termination);
    summary["costs_transformed"] = json_vector(eq.costs);
    summary["costs_original"] = std::move(costs_raw);
    summary["cost_identity_residual"] = worst_identity;
    summary["max_deviation_gap"] = *std::max_element(gaps.begin(), gaps.end());
    write_file(dir + "/summary.json", summary.dump(2) + "\n");
    std::cout << "cost identity residual " << format_double(worst_identity) << "\n";
    return kExitOk;
}

int cmd_oracle_compare(const std::string& config_path, const std::string& cli_out,
                       double grid_step) {
    const RunConfig cfg = load_config(config_path);
    const GameSpec game = build_game(cfg);
    const AdmissibleSet set = admissible_set(cfg);
    SolverOptions opts = cfg.solver.inner;

    std::ostringstream table;
    table << "player,sup_gap,objective_gap\n";
    double worst_sup = 0.0, worst_obj = 0.0;
    const Profile base = zero_profile(game);
    for (int i = 0; i < game.num_players; ++i) {
        const BestReply reply = best_reply(game, i, base, set, opts);
        const AdaptedProcess oracle = brute_force_best_reply(game, i, base, set, grid_step);
        Profile with_oracle = base;
        with_oracle[static_cast<size_t>(i)] = oracle;
        const double obj_oracle = cost(game, i, with_oracle);
        const double sup_gap = sup_diff(reply.control, oracle);
        const double obj_gap = std::abs(reply.objective - obj_oracle);
        worst_sup = std::max(worst_sup, sup_gap);
        worst_obj = std::max(worst_obj, obj_gap);
        table << i << ',' << format_double(sup_gap) << ',' << format_double(obj_gap) << '\n';
    }
    std::cout << table.str() << "worst sup gap " << format_double(worst_sup)
              << ", worst objective gap " << format_double(worst_obj) << "\n";
    const std::string dir = resolve_out_dir(cfg, cli_out);
    ensure_dir(dir);
    write_file(dir + "/oracle_compare.csv", table.str());
    return kExitOk;
}

} // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Nash equilibria of monotone-control games on scenario trees"};
    app.require_subcommand(1);
    app.footer(
        "Configuration keys (JSON):\n"
        "  seed                  integer; drives every sampled check\n"
        "  tree                  kind (binary|chain|uniform), depth, dt, up_prob, branching,\n"
        "                        max_depth (node count grows like branching^depth)\n"
        "  players               count, control_dim, costs: per player {h, g}, each a family\n"
        "                        {kind: zero|quadratic_tracking|exponential_counterexample,\n"
        "                         weight, coupling, target: {offset, slope, l_index}}\n"
        "  processes.price       kind constant (value | values per coordinate), brownian\n"
        "                        (x0, drift, vol) or gbm (x0, mu, sigma); must be >= 0\n"
        "  processes.exogenous   same kinds; drives the cost targets\n"
        "  admissible            mode monotone | fuel (w) | lipschitz (n or n_schedule)\n"
        "  checks                coercivity (none|price), price_floor, samples, tol,\n"
        "                        box {l_lo, l_hi, a_lo, a_hi}\n"
        "  solver                grad_tol, max_iters, momentum, increment_guard, outer_tol,\n"
        "                        max_outer, inner_tol_start, certify_budget\n"
        "  sweep                 warm_start, payoff_tol, pseudopath_tol\n"
        "  sdg                   noise (shared|independent), players: [{dynamics gbm|ou,\n"
        "                        mu, sigma, theta, x0, h, g}]\n"
        "  output.dir            artifact directory (overridden by --out or MFGAME_OUT_DIR)");

    std::string config_path;
    std::string out_dir;
    bool force = false;
    bool greatest = false;
    double grid_step = 1.0 / 64.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "JSON run configuration")->required();
        cmd->add_option("-o,--out", out_dir, "output directory (overrides config and MFGAME_OUT_DIR)");
    };

    CLI::App* validate = app.add_subcommand("validate", "structure and price-floor checks");
    add_common(validate);
    CLI::App* solve = app.add_subcommand("solve", "least-equilibrium fixed point iteration");
    add_common(solve);
    solve->add_flag("--force", force, "solve even if validation fails");
    solve->add_flag("--greatest", greatest, "iterate downward from the cap profile instead");
    CLI::App* sweep = app.add_subcommand("sweep", "rate-cap schedule with convergence report");
    add_common(sweep);
    CLI::App* sdg = app.add_subcommand("sdg", "reduce a diffusion game, solve, map back");
    add_common(sdg);
    CLI::App* oracle = app.add_subcommand("oracle-compare", "projected gradient vs grid search");
    add_common(oracle);
    oracle->add_option("--grid-step", grid_step, "grid resolution for the exhaustive search");

    std::reverse(args.begin(), args.end()); // CLI11 vector parse takes reversed args
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(config_path, out_dir);
        if (solve->parsed()) return cmd_solve(config_path, out_dir, force, greatest);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
        if (sdg->parsed()) return cmd_sdg(config_path, out_dir);
        if (oracle->parsed()) return cmd_oracle_compare(config_path, out_dir, grid_step);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}

} // namespace mfgame

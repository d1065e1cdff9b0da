#include "mfgame/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mfgame {

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

int get_int(const json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

std::string get_str(const json& j, const char* key, const std::string& fallback) {
    return j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

CostFamily parse_family(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return CostFamily::zero();
    if (kind == "quadratic_tracking") {
        TargetMap target;
        if (j.contains("target")) {
            const json& tj = j.at("target");
            target.offset = get_num(tj, "offset", 0.0);
            target.slope = get_num(tj, "slope", 0.0);
            target.l_index = get_int(tj, "l_index", 0);
        }
        return CostFamily::quadratic_tracking(get_num(j, "weight", 1.0), get_num(j, "coupling", 0.0),
                                              target);
    }
    if (kind == "exponential_counterexample") return CostFamily::exponential_counterexample();
    throw ConfigError("unknown cost family kind: " + kind);
}

ProcessConfig parse_process(const json& j) {
    ProcessConfig p;
    p.kind = get_str(j, "kind", "constant");
    if (j.contains("values"))
        p.values = j.at("values").get<std::vector<double>>();
    else if (j.contains("value"))
        p.values = {j.at("value").get<double>()};
    p.x0 = get_num(j, "x0", 1.0);
    p.mu = get_num(j, "mu", 0.0);
    p.sigma = get_num(j, "sigma", 0.0);
    p.drift = get_num(j, "drift", 0.0);
    p.vol = get_num(j, "vol", 0.0);
    return p;
}

SdgPlayer parse_sdg_player(const json& j) {
    SdgPlayer p;
    const std::string dyn = j.at("dynamics").get<std::string>();
    if (dyn == "gbm")
        p.dynamics = Dynamics::gbm;
    else if (dyn == "ou")
        p.dynamics = Dynamics::ou;
    else
        throw ConfigError("unknown dynamics kind: " + dyn);
    p.mu = get_num(j, "mu", 0.0);
    p.sigma = get_num(j, "sigma", 0.0);
    p.theta = get_num(j, "theta", 1.0);
    p.x0 = get_num(j, "x0", 1.0);
    p.running = j.contains("h") ? parse_family(j.at("h")) : CostFamily::zero();
    p.terminal = j.contains("g") ? parse_family(j.at("g")) : CostFamily::zero();
    return p;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        RunConfig cfg;
        cfg.seed = doc.contains("seed") ? doc.at("seed").get<std::uint64_t>() : 1;

        if (doc.contains("tree")) {
            const json& tj = doc.at("tree");
            cfg.tree.kind = get_str(tj, "kind", "binary");
            cfg.tree.depth = get_int(tj, "depth", 1);
            cfg.tree.dt = get_num(tj, "dt", 1.0);
            cfg.tree.up_prob = get_num(tj, "up_prob", 0.5);
            cfg.tree.branching = get_int(tj, "branching", 2);
            cfg.tree.max_depth = get_int(tj, "max_depth", ScenarioTree::default_max_depth);
        }

        if (doc.contains("players")) {
            const json& pj = doc.at("players");
            cfg.num_players = get_int(pj, "count", 1);
            cfg.control_dim = get_int(pj, "control_dim", 1);
            if (!pj.contains("costs")) throw ConfigError("players.costs missing");
            const json& costs = pj.at("costs");
            if (!costs.is_array() || costs.empty()) throw ConfigError("players.costs must be a non-empty array");
            for (const auto& cj : costs) {
                cfg.running.push_back(cj.contains("h") ? parse_family(cj.at("h")) : CostFamily::zero());
                cfg.terminal.push_back(cj.contains("g") ? parse_family(cj.at("g")) : CostFamily::zero());
            }
            // a single entry is shared by all players
            while (static_cast<int>(cfg.running.size()) < cfg.num_players) {
                cfg.running.push_back(cfg.running.front());
                cfg.terminal.push_back(cfg.terminal.front());
            }
            if (static_cast<int>(cfg.running.size()) != cfg.num_players)
                throw ConfigError("players.costs: give one entry or one per player");
        }

        if (doc.contains("processes")) {
            const json& prj = doc.at("processes");
            if (prj.contains("price")) cfg.price = parse_process(prj.at("price"));
            if (prj.contains("exogenous")) cfg.exogenous = parse_process(prj.at("exogenous"));
        }
        if (cfg.price.values.empty() && cfg.price.kind == "constant") cfg.price.values = {1.0};
        if (cfg.exogenous.values.empty() && cfg.exogenous.kind == "constant") cfg.exogenous.values = {0.0};

        if (doc.contains("admissible")) {
            const json& aj = doc.at("admissible");
            cfg.admissible.mode = get_str(aj, "mode", "monotone");
            if (aj.contains("w")) cfg.admissible.fuel_cap = aj.at("w").get<double>();
            if (aj.contains("n")) cfg.admissible.rate = aj.at("n").get<double>();
            if (aj.contains("n_schedule"))
                cfg.admissible.schedule = aj.at("n_schedule").get<std::vector<double>>();
        }

        if (doc.contains("checks")) {
            const json& cj = doc.at("checks");
            cfg.checks.coercivity = get_str(cj, "coercivity", "none");
            cfg.checks.price_floor = get_num(cj, "price_floor", 1e-6);
            cfg.checks.samples = get_int(cj, "samples", 1000);
            cfg.checks.tol = get_num(cj, "tol", 1e-8);
            if (cj.contains("box")) {
                const json& bj = cj.at("box");
                cfg.checks.box.l_lo = get_num(bj, "l_lo", 0.0);
                cfg.checks.box.l_hi = get_num(bj, "l_hi", 1.0);
                cfg.checks.box.a_lo = get_num(bj, "a_lo", 0.0);
                cfg.checks.box.a_hi = get_num(bj, "a_hi", 2.0);
            }
        }

        if (doc.contains("solver")) {
            const json& sj = doc.at("solver");
            cfg.solver.inner.max_iters = get_int(sj, "max_iters", cfg.solver.inner.max_iters);
            cfg.solver.inner.grad_tol = get_num(sj, "grad_tol", cfg.solver.inner.grad_tol);
            cfg.solver.inner.momentum = sj.contains("momentum") && sj.at("momentum").get<bool>();
            cfg.solver.inner.increment_guard =
                get_num(sj, "increment_guard", cfg.solver.inner.increment_guard);
            cfg.solver.outer_tol = get_num(sj, "outer_tol", cfg.solver.outer_tol);
            cfg.solver.max_outer = get_int(sj, "max_outer", cfg.solver.max_outer);
            cfg.solver.inner_tol_start = get_num(sj, "inner_tol_start", cfg.solver.inner_tol_start);
            cfg.solver.certify_budget = get_num(sj, "certify_budget", cfg.solver.certify_budget);
        }

        if (doc.contains("sweep")) {
            const json& wj = doc.at("sweep");
            cfg.sweep_warm_start = !wj.contains("warm_start") || wj.at("warm_start").get<bool>();
            cfg.payoff_tol = get_num(wj, "payoff_tol", cfg.payoff_tol);
            cfg.pseudopath_tol = get_num(wj, "pseudopath_tol", cfg.pseudopath_tol);
        }

        if (doc.contains("sdg")) {
            SdgConfig sc;
            const json& gj = doc.at("sdg");
            for (const auto& pj : gj.at("players")) sc.players.push_back(parse_sdg_player(pj));
            sc.noise = get_str(gj, "noise", "shared");
            cfg.sdg = std::move(sc);
        }

        if (doc.contains("output")) cfg.out_dir = get_str(doc.at("output"), "dir", cfg.out_dir);
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::shared_ptr<const ScenarioTree> build_tree(const TreeConfig& cfg) {
    try {
        if (cfg.kind == "binary") return ScenarioTree::binary(cfg.depth, cfg.dt, cfg.up_prob, cfg.max_depth);
        if (cfg.kind == "chain") return ScenarioTree::chain(cfg.depth, cfg.dt);
        if (cfg.kind == "uniform")
            return ScenarioTree::uniform(cfg.depth, cfg.dt, cfg.branching, cfg.max_depth);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("tree: ") + e.what());
    }
    throw ConfigError("unknown tree kind: " + cfg.kind);
}

AdaptedProcess build_process(const ProcessConfig& cfg, const std::shared_ptr<const ScenarioTree>& tree,
                             int dims) {
    const ScenarioTree& t = *tree;
    AdaptedProcess out(tree, dims);
    if (cfg.kind == "constant") {
        if (cfg.values.size() != 1 && static_cast<int>(cfg.values.size()) != dims)
            throw ConfigError("constant process: give one value or one per coordinate");
        for (int n = 0; n < t.num_nodes(); ++n)
            for (int k = 0; k < dims; ++k)
                out.at(n, k) = cfg.values[cfg.values.size() == 1 ? 0 : static_cast<size_t>(k)];
        return out;
    }
    if (cfg.kind == "brownian" || cfg.kind == "gbm") {
        const AdaptedProcess w = brownian_paths(tree, 1);
        for (int n = 0; n < t.num_nodes(); ++n) {
            const double time = t.time(t.node(n).depth);
            double v;
            if (cfg.kind == "brownian")
                v = cfg.x0 + cfg.drift * time + cfg.vol * w.at(n);
            else
                v = cfg.x0 * std::exp((cfg.mu - 0.5 * cfg.sigma * cfg.sigma) * time + cfg.sigma * w.at(n));
            for (int k = 0; k < dims; ++k) out.at(n, k) = v;
        }
        return out;
    }
    throw ConfigError("unknown process kind: " + cfg.kind);
}

GameSpec build_game(const RunConfig& cfg) {
    GameSpec game;
    game.tree = build_tree(cfg.tree);
    game.num_players = cfg.num_players;
    game.control_dim = cfg.control_dim;
    game.running = cfg.running;
    game.terminal = cfg.terminal;
    game.price = build_process(cfg.price, game.tree, cfg.num_players * cfg.control_dim);
    const int k = (cfg.exogenous.kind == "constant") ? static_cast<int>(cfg.exogenous.values.size()) : 1;
    game.exogenous = build_process(cfg.exogenous, game.tree, k);
    if (cfg.admissible.mode == "fuel") game.fuel_cap = cfg.admissible.fuel_cap;
    if (cfg.admissible.mode == "lipschitz") game.lipschitz_rate = cfg.admissible.rate;
    try {
        validate_game(game);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return game;
}

AdmissibleSet admissible_set(const RunConfig& cfg) {
    const AdmissibleConfig& a = cfg.admissible;
    if (a.mode == "monotone") return AdmissibleSet::monotone();
    if (a.mode == "fuel") {
        if (!a.fuel_cap || *a.fuel_cap < 0.0) throw ConfigError("fuel mode: nonnegative w required");
        return AdmissibleSet::monotone(*a.fuel_cap);
    }
    if (a.mode == "lipschitz") {
        if (a.rate) {
            if (!(*a.rate > 0.0)) throw ConfigError("lipschitz mode: n must be positive");
            return AdmissibleSet::lipschitz(*a.rate);
        }
        if (!a.schedule.empty()) return AdmissibleSet::lipschitz(a.schedule.front());
        throw ConfigError("lipschitz mode: n or n_schedule required");
    }
    throw ConfigError("unknown admissible mode: " + a.mode);
}

SdgSpec build_sdg(const RunConfig& cfg) {
    if (!cfg.sdg) throw ConfigError("config has no sdg section");
    SdgSpec sdg;
    const int n = static_cast<int>(cfg.sdg->players.size());
    if (n < 1) throw ConfigError("sdg: at least one player required");

    TreeConfig tree_cfg = cfg.tree;
    if (cfg.sdg->noise == "independent" && n > 1) {
        tree_cfg.kind = "uniform";
        tree_cfg.branching = 1 << n; // product branching for independent drivers
    } else if (cfg.sdg->noise != "shared" && cfg.sdg->noise != "independent") {
        throw ConfigError("sdg.noise must be shared or independent");
    }
    sdg.tree = build_tree(tree_cfg);
    sdg.players = cfg.sdg->players;
    sdg.price = build_process(cfg.price, sdg.tree, n);
    const int k = (cfg.exogenous.kind == "constant") ? static_cast<int>(cfg.exogenous.values.size()) : 1;
    sdg.exogenous = build_process(cfg.exogenous, sdg.tree, k);
    sdg.noise = brownian_increments(sdg.tree, cfg.sdg->noise == "independent" ? n : 1);
    if (cfg.sdg->noise == "shared" && n > 1) {
        // one driver copied to every player
        AdaptedProcess shared(sdg.tree, n);
        for (int node = 0; node < sdg.tree->num_nodes(); ++node)
            for (int i = 0; i < n; ++i) shared.at(node, i) = sdg.noise.at(node, 0);
        sdg.noise = std::move(shared);
    }
    return sdg;
}

TopkisOptions topkis_options(const RunConfig& cfg) {
    TopkisOptions opts;
    opts.inner = cfg.solver.inner;
    opts.outer_tol = cfg.solver.outer_tol;
    opts.max_outer = cfg.solver.max_outer;
    opts.inner_tol_start = cfg.solver.inner_tol_start;
    opts.certify_budget = cfg.solver.certify_budget;
    return opts;
}

} // namespace mfgame

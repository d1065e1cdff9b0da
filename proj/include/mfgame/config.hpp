// Run configuration: one JSON document declaring the tree, the players'
// cost families, the price and exogenous processes, the admissible set,
// solver tolerances and output location. One seed drives all sampling.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgame/best_reply.hpp"
#include "mfgame/sdg.hpp"
#include "mfgame/topkis.hpp"

namespace mfgame {

/// Parse or semantic configuration problem; maps to the usage exit code.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TreeConfig {
    std::string kind = "binary"; // binary | chain | uniform
    int depth = 1;
    double dt = 1.0;
    double up_prob = 0.5;
    int branching = 2;
    int max_depth = ScenarioTree::default_max_depth;
};

struct ProcessConfig {
    std::string kind = "constant"; // constant | brownian | gbm
    std::vector<double> values;    // constant: one per coordinate or a single broadcast value
    double x0 = 1.0;
    double mu = 0.0;
    double sigma = 0.0;
    double drift = 0.0;
    double vol = 0.0;
};

struct AdmissibleConfig {
    std::string mode = "monotone"; // monotone | fuel | lipschitz
    std::optional<double> fuel_cap;
    std::optional<double> rate;
    std::vector<double> schedule;
};

struct ChecksConfig {
    std::string coercivity = "none"; // none | price
    double price_floor = 1e-6;
    int samples = 1000;
    double tol = 1e-8;
    SampleBox box;
};

struct SolverConfig {
    SolverOptions inner;
    double outer_tol = 1e-9;
    int max_outer = 500;
    double inner_tol_start = 1e-6;
    double certify_budget = 1e-6;
};

struct SdgConfig {
    std::vector<SdgPlayer> players;
    std::string noise = "shared"; // shared | independent
};

struct RunConfig {
    std::uint64_t seed = 1;
    TreeConfig tree;
    int num_players = 1;
    int control_dim = 1;
    std::vector<CostFamily> running;
    std::vector<CostFamily> terminal;
    ProcessConfig price;
    ProcessConfig exogenous;
    AdmissibleConfig admissible;
    ChecksConfig checks;
    SolverConfig solver;
    std::optional<SdgConfig> sdg;
    std::string out_dir = "out";
    bool sweep_warm_start = true;
    double payoff_tol = 1e-3;
    double pseudopath_tol = 1e-3;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

std::shared_ptr<const ScenarioTree> build_tree(const TreeConfig& cfg);
AdaptedProcess build_process(const ProcessConfig& cfg, const std::shared_ptr<const ScenarioTree>& tree,
                             int dims);
GameSpec build_game(const RunConfig& cfg);
AdmissibleSet admissible_set(const RunConfig& cfg);
SdgSpec build_sdg(const RunConfig& cfg);
TopkisOptions topkis_options(const RunConfig& cfg);

} // namespace mfgame

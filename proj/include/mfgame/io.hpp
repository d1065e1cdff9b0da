// Serialization: trees to/from a self-describing JSON document, CSV tables
// for equilibria, iteration traces and sweeps, and stable float formatting
// so identical runs produce byte-identical artifacts.
#pragma once

#include <string>
#include <vector>

#include "mfgame/diagnostics.hpp"
#include "mfgame/sweep.hpp"
#include "mfgame/topkis.hpp"

namespace mfgame {

/// %.12g rendering used by every table writer.
std::string format_double(double v);

/// One object per node: id, parent id, time index, branch probability.
std::string tree_to_json(const ScenarioTree& tree);
std::shared_ptr<const ScenarioTree> tree_from_json(const std::string& text);

/// Long-format equilibrium table: node_id,time,player,coord,value,increment.
std::string equilibrium_csv(const ScenarioTree& tree, const Profile& profile);

/// outer,player,sup_change,cost rows of a fixed-point iteration.
std::string trace_csv(const std::vector<TraceRow>& trace);

/// rate,player,cost,eps_nash_gap,neg_part_mass,pseudopath_dist per point.
std::string sweep_csv(const SweepReport& report);

/// player,min_subgradient,slackness,neg_part_mass,identity_gap rows.
std::string foc_csv(const FocReport& report);

void write_file(const std::string& path, const std::string& content);

} // namespace mfgame

#include "mfgame/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mfgame {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string tree_to_json(const ScenarioTree& tree) {
    nlohmann::ordered_json doc;
    doc["format"] = "scenario_tree";
    doc["times"] = tree.times();
    nlohmann::ordered_json nodes = nlohmann::json::array();
    for (int n = 0; n < tree.num_nodes(); ++n) {
        const TreeNode& nd = tree.node(n);
        nodes.push_back({{"id", n},
                         {"parent", nd.parent},
                         {"time_index", nd.depth},
                         {"branch_prob", nd.branch_prob}});
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

std::shared_ptr<const ScenarioTree> tree_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (!doc.contains("times") || !doc.contains("nodes"))
        throw std::invalid_argument("tree document: missing times or nodes");
    std::vector<double> times = doc["times"].get<std::vector<double>>();

    // Accept arbitrary ids; remap to file order, then let the builder
    // re-derive depths and breadth-first layout.
    std::vector<long long> ids;
    std::vector<long long> parents_raw;
    std::vector<double> probs;
    for (const auto& nd : doc["nodes"]) {
        ids.push_back(nd.at("id").get<long long>());
        parents_raw.push_back(nd.at("parent").get<long long>());
        probs.push_back(nd.at("branch_prob").get<double>());
    }
    std::vector<int> parents(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (parents_raw[i] == -1) {
            parents[i] = -1;
            continue;
        }
        int found = -1;
        for (size_t j = 0; j < ids.size(); ++j)
            if (ids[j] == parents_raw[i]) {
                found = static_cast<int>(j);
                break;
            }
        if (found < 0) throw std::invalid_argument("tree document: dangling parent id");
        parents[i] = found;
    }
    return ScenarioTree::build(std::move(times), parents, probs);
}

std::string equilibrium_csv(const ScenarioTree& tree, const Profile& profile) {
    std::ostringstream out;
    out << "node_id,time,player,coord,value,increment\n";
    for (int n = 0; n < tree.num_nodes(); ++n) {
        const TreeNode& nd = tree.node(n);
        for (size_t i = 0; i < profile.size(); ++i) {
            const AdaptedProcess& a = profile[i];
            for (int k = 0; k < a.dims(); ++k) {
                const double da = (nd.parent == -1) ? a.at(n, k) : a.at(n, k) - a.at(nd.parent, k);
                out << n << ',' << format_double(tree.time(nd.depth)) << ',' << i << ',' << k << ','
                    << format_double(a.at(n, k)) << ',' << format_double(da) << '\n';
            }
        }
    }
    return out.str();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream out;
    out << "outer,player,sup_change,cost\n";
    for (const TraceRow& r : trace)
        out << r.outer << ',' << r.player << ',' << format_double(r.sup_change) << ','
            << format_double(r.cost) << '\n';
    return out.str();
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "rate,player,cost,eps_nash_gap,neg_part_mass,pseudopath_dist,certified\n";
    for (const SweepPoint& pt : report.points) {
        if (!pt.solved) {
            out << format_double(pt.rate) << ",,,,,," << "error\n";
            continue;
        }
        for (size_t i = 0; i < pt.costs.size(); ++i)
            out << format_double(pt.rate) << ',' << i << ',' << format_double(pt.costs[i]) << ','
                << format_double(pt.eps_nash_gaps[i]) << ','
                << format_double(pt.foc.players[i].neg_part_mass) << ','
                << format_double(pt.pseudopath_prev) << ',' << (pt.certified ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string foc_csv(const FocReport& report) {
    std::ostringstream out;
    out << "player,min_subgradient,slackness,neg_part_mass,identity_gap\n";
    for (size_t i = 0; i < report.players.size(); ++i) {
        const FocPlayerReport& p = report.players[i];
        out << i << ',' << format_double(p.min_subgradient) << ',' << format_double(p.slackness)
            << ',' << format_double(p.neg_part_mass) << ','
            << (p.lipschitz_identity_gap ? format_double(*p.lipschitz_identity_gap) : "") << '\n';
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace mfgame

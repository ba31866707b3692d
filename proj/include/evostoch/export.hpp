#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "evostoch/cluster.hpp"
#include "evostoch/distributions.hpp"
#include "evostoch/ea.hpp"
#include "evostoch/portfolio.hpp"
#include "evostoch/risk.hpp"
#include "evostoch/tree.hpp"

namespace evostoch {

/// Version stamp of every JSON report this tool emits.
inline constexpr int kReportFormatVersion = 1;

using json = nlohmann::ordered_json;

inline json log_to_json(const std::vector<GenerationRecord>& log) {
    json rows = json::array();
    for (const auto& r : log) {
        rows.push_back({{"generation", r.generation},
                        {"best", r.best},
                        {"mean", r.mean},
                        {"invalid_count", r.invalid_count}});
    }
    return rows;
}

inline json portfolio_report(const PortfolioRunResult& result, const ScenarioSet& scenarios,
                             const ObjectiveSpec& spec) {
    const LossDistribution loss = loss_distribution(result.portfolio.weights, scenarios);
    json report;
    report["format_version"] = kReportFormatVersion;
    report["weights"] = result.portfolio.weights;
    report["expectation"] = expectation(loss);
    report["risk"] = risk(spec, loss);
    report["objective"] = weighted_objective(spec, loss);
    report["fitness"] = result.fitness;
    report["log"] = log_to_json(result.log);
    return report;
}

inline json scenario_set_to_json(const ScenarioSet& scenarios) {
    json rows = json::array();
    for (std::size_t i = 0; i < scenarios.scenario_count(); ++i) {
        rows.push_back({{"values", scenarios.values()[i]},
                        {"probability", scenarios.probabilities()[i]}});
    }
    return rows;
}

inline json cluster_report(const ClusterRunResult& result) {
    json report;
    report["format_version"] = kReportFormatVersion;
    report["objective"] = result.objective;
    report["cluster_distances"] = result.cluster_distances;
    report["scenarios"] = scenario_set_to_json(result.scenarios);
    report["log"] = log_to_json(result.log);
    return report;
}

/// Nodes are listed by (stage, index); ids are global and parents refer to
/// them, null for the root.
inline json tree_to_json(const ScenarioTree& tree) {
    json nodes = json::array();
    std::vector<std::size_t> stage_base(tree.stage_count(), 0);
    std::size_t next_id = 0;
    for (std::size_t t = 0; t < tree.stage_count(); ++t) {
        stage_base[t] = next_id;
        next_id += tree.stages[t].size();
    }
    for (std::size_t t = 0; t < tree.stage_count(); ++t) {
        for (std::size_t j = 0; j < tree.stages[t].size(); ++j) {
            const TreeNode& node = tree.stages[t][j];
            json entry;
            entry["id"] = stage_base[t] + j;
            entry["stage"] = t + 1;
            entry["index"] = j;
            entry["value"] = node.value;
            entry["probability"] = node.probability;
            if (t == 0) {
                entry["parent"] = nullptr;
            } else {
                entry["parent"] = stage_base[t - 1] + node.parent;
            }
            nodes.push_back(std::move(entry));
        }
    }
    return nodes;
}

inline json tree_report(const TreeRunResult& result) {
    json report;
    report["format_version"] = kReportFormatVersion;
    report["objective"] = result.objective;
    json counts = json::array();
    for (const auto& stage : result.tree.stages) counts.push_back(stage.size());
    report["stage_node_counts"] = counts;
    report["nodes"] = tree_to_json(result.tree);
    report["log"] = log_to_json(result.log);
    return report;
}

/// Graphviz rendering of a tree: nodes ranked per stage and ordered by
/// (stage, index), edges labelled with the conditional probability of the
/// child given its parent, rounded to three decimals.
inline std::string tree_to_dot(const ScenarioTree& tree) {
    char buf[64];
    auto node_id = [](std::size_t stage, std::size_t index) {
        return "s" + std::to_string(stage + 1) + "_" + std::to_string(index);
    };

    std::string dot;
    dot += "digraph scenario_tree {\n";
    dot += "  rankdir=LR;\n";
    dot += "  node [shape=ellipse];\n";
    for (std::size_t t = 0; t < tree.stage_count(); ++t) {
        dot += "  { rank=same;";
        for (std::size_t j = 0; j < tree.stages[t].size(); ++j) {
            std::snprintf(buf, sizeof(buf), " %s [label=\"%.4f\"];", node_id(t, j).c_str(),
                          tree.stages[t][j].value);
            dot += buf;
        }
        dot += " }\n";
    }
    for (std::size_t t = 1; t < tree.stage_count(); ++t) {
        for (std::size_t j = 0; j < tree.stages[t].size(); ++j) {
            const TreeNode& node = tree.stages[t][j];
            const double parent_probability = tree.stages[t - 1][node.parent].probability;
            std::snprintf(buf, sizeof(buf), "  %s -> %s [label=\"%.3f\"];\n",
                          node_id(t - 1, node.parent).c_str(), node_id(t, j).c_str(),
                          node.probability / parent_probability);
            dot += buf;
        }
    }
    dot += "}\n";
    return dot;
}

}  // namespace evostoch

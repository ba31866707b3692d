#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evostoch/distributions.hpp"
#include "evostoch/ea.hpp"
#include "evostoch/metrics.hpp"
#include "evostoch/variation.hpp"

namespace evostoch {

/// Prescribed number of nodes per stage 2..T (the root is implicit).
struct TreeShape {
    std::vector<std::size_t> node_counts;

    /// Total number of stages T, root included.
    std::size_t stage_count() const { return node_counts.size() + 1; }
    std::size_t terminal_count() const { return node_counts.back(); }
    /// Nodes at stage t, t in 2..T.
    std::size_t nodes_at(std::size_t t) const { return node_counts[t - 2]; }

    void validate(std::size_t path_count) const {
        if (node_counts.size() < 2) {
            throw std::invalid_argument("tree shape needs at least two stages beyond the root");
        }
        for (std::size_t n : node_counts) {
            if (n == 0) throw std::invalid_argument("every stage needs at least one node");
            if (n > path_count) {
                throw std::invalid_argument("stage node count " + std::to_string(n) +
                                            " exceeds the " + std::to_string(path_count) +
                                            " input paths");
            }
        }
    }
};

/// Chromosome length for a shape over s input paths: one gene per path
/// (terminal routing) plus one gene per node of stages 3..T (parent
/// routing). For T = 3 this is s + n_T.
inline std::size_t tree_chromosome_length(const TreeShape& shape, std::size_t path_count) {
    const std::size_t parent_genes =
        std::accumulate(shape.node_counts.begin() + 1, shape.node_counts.end(), std::size_t{0});
    return path_count + parent_genes;
}

/// A scenario tree plus the routing that produced it: path_terminal[i] is
/// the terminal-stage node index input path i was mapped to.
struct MappedTree {
    ScenarioTree tree;
    std::vector<std::size_t> path_terminal;
};

/// Maps a chromosome onto a tree of the prescribed shape. Genes 1..s route
/// each path to a terminal node; the following blocks, one per stage from T
/// down to 3, route each stage-t node to a parent at stage t-1. Node values
/// are the center (median by default) of the routed paths' stage values,
/// node probabilities the sum of routed path probabilities. Returns nullopt
/// when any stage realizes fewer nodes than prescribed.
inline std::optional<MappedTree> map_to_tree(const std::vector<double>& genes,
                                             const ScenarioPathMatrix& paths,
                                             const TreeShape& shape,
                                             Center center = Center::median) {
    shape.validate(paths.path_count());
    const std::size_t s = paths.path_count();
    const std::size_t T = shape.stage_count();
    if (paths.stage_count() != T) {
        throw std::invalid_argument("shape prescribes " + std::to_string(T) +
                                    " stages but paths have " +
                                    std::to_string(paths.stage_count()));
    }
    if (genes.size() != tree_chromosome_length(shape, s)) {
        throw std::invalid_argument("chromosome length " + std::to_string(genes.size()) +
                                    " does not match required " +
                                    std::to_string(tree_chromosome_length(shape, s)));
    }

    std::vector<std::size_t> terminal_of_path(s);
    for (std::size_t i = 0; i < s; ++i) {
        terminal_of_path[i] = bucket_index(genes[i], shape.terminal_count());
    }

    // parent_of[t] maps stage-t node index -> stage-(t-1) node index; gene
    // blocks are laid out from the terminal stage downwards.
    std::vector<std::vector<std::size_t>> parent_of(T + 1);
    std::size_t offset = s;
    for (std::size_t t = T; t >= 3; --t) {
        const std::size_t nodes = shape.nodes_at(t);
        const std::size_t parents = shape.nodes_at(t - 1);
        parent_of[t].resize(nodes);
        for (std::size_t j = 0; j < nodes; ++j) {
            parent_of[t][j] = bucket_index(genes[offset + j], parents);
        }
        offset += nodes;
    }

    // ancestor_of_terminal[j][t-2] = stage-t ancestor of terminal node j
    std::vector<std::vector<std::size_t>> ancestor_of_terminal(shape.terminal_count(),
                                                               std::vector<std::size_t>(T - 1));
    for (std::size_t j = 0; j < shape.terminal_count(); ++j) {
        std::size_t node = j;
        ancestor_of_terminal[j][T - 2] = node;
        for (std::size_t t = T; t >= 3; --t) {
            node = parent_of[t][node];
            ancestor_of_terminal[j][t - 3] = node;
        }
    }

    // Per-stage occupancy and membership of every node slot.
    std::vector<std::vector<std::vector<std::size_t>>> node_members(T + 1);
    for (std::size_t t = 2; t <= T; ++t) node_members[t].resize(shape.nodes_at(t));
    for (std::size_t i = 0; i < s; ++i) {
        const auto& ancestors = ancestor_of_terminal[terminal_of_path[i]];
        for (std::size_t t = 2; t <= T; ++t) {
            node_members[t][ancestors[t - 2]].push_back(i);
        }
    }
    for (std::size_t t = 2; t <= T; ++t) {
        for (const auto& member_list : node_members[t]) {
            if (member_list.empty()) return std::nullopt;
        }
    }

    MappedTree mapped;
    mapped.path_terminal = std::move(terminal_of_path);
    mapped.tree.stages.resize(T);
    mapped.tree.stages[0] = {TreeNode{paths.root_value(), 1.0, TreeNode::no_parent}};
    for (std::size_t t = 2; t <= T; ++t) {
        auto& stage_nodes = mapped.tree.stages[t - 1];
        stage_nodes.resize(shape.nodes_at(t));
        for (std::size_t j = 0; j < stage_nodes.size(); ++j) {
            std::vector<double> values;
            values.reserve(node_members[t][j].size());
            double probability = 0.0;
            for (std::size_t i : node_members[t][j]) {
                values.push_back(paths.value_at(i, t));
                probability += paths.probabilities()[i];
            }
            stage_nodes[j].value = central_value(values, center);
            stage_nodes[j].probability = probability;
            stage_nodes[j].parent = t == 2 ? std::size_t{0} : parent_of[t][j];
        }
    }
    return mapped;
}

/// Distance between the input paths and the tree they were mapped onto:
/// for each path, the per-stage distance to the node values along its
/// routed trajectory, summed over stages 2..T and (by default) weighted by
/// the path probability.
inline double tree_distance(const MappedTree& mapped, const ScenarioPathMatrix& paths,
                            Distance distance, bool probability_weighted = true) {
    const std::size_t T = mapped.tree.stage_count();
    if (paths.stage_count() != T) {
        throw std::invalid_argument("tree and path matrix disagree on stage count");
    }
    if (mapped.path_terminal.size() != paths.path_count()) {
        throw std::invalid_argument("tree routing does not cover every path");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < paths.path_count(); ++i) {
        std::size_t node = mapped.path_terminal[i];
        if (node >= mapped.tree.stages[T - 1].size()) {
            throw std::logic_error("path routed to a node outside the terminal stage");
        }
        double path_total = 0.0;
        for (std::size_t t = T; t >= 2; --t) {
            const TreeNode& tree_node = mapped.tree.stages[t - 1][node];
            const double path_value = paths.value_at(i, t);
            const double node_value = tree_node.value;
            path_total += distance == Distance::l1
                              ? std::abs(path_value - node_value)
                              : (path_value - node_value) * (path_value - node_value);
            node = tree_node.parent;
        }
        total += probability_weighted ? paths.probabilities()[i] * path_total : path_total;
    }
    return total;
}

struct TreeSpec {
    Distance distance = Distance::l1;
    Center center = Center::median;
    bool probability_weighted = true;
};

/// EA problem over tree chromosomes; invalid trees evaluate to nullopt and
/// fall to the back of the selection order.
class TreeProblem {
public:
    using Genotype = std::vector<double>;

    TreeProblem(ScenarioPathMatrix paths, TreeShape shape, TreeSpec spec)
        : paths_(std::move(paths)), shape_(std::move(shape)), spec_(spec) {
        shape_.validate(paths_.path_count());
        if (paths_.stage_count() != shape_.stage_count()) {
            throw std::invalid_argument("shape prescribes " + std::to_string(shape_.stage_count()) +
                                        " stages but paths have " +
                                        std::to_string(paths_.stage_count()));
        }
    }

    Goal goal() const { return Goal::minimize; }

    Genotype generate(Rng& rng) const {
        return random_unit_genes(tree_chromosome_length(shape_, paths_.path_count()), rng);
    }

    std::optional<double> evaluate(const Genotype& genes) const {
        const auto mapped = map_to_tree(genes, paths_, shape_, spec_.center);
        if (!mapped) return std::nullopt;
        return tree_distance(*mapped, paths_, spec_.distance, spec_.probability_weighted);
    }

    Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
        return uniform_crossover(a, b, rng);
    }

    void mutate(Genotype& genes, double rate, Rng& rng) const {
        mutate_unit_genes(genes, rate, rng);
    }

private:
    ScenarioPathMatrix paths_;
    TreeShape shape_;
    TreeSpec spec_;
};

struct TreeRunResult {
    ScenarioTree tree;
    double objective = 0.0;
    std::vector<GenerationRecord> log;
};

/// Evolutionary multi-stage scenario tree generation: approximates the
/// sampled paths by a tree of the prescribed shape, minimizing the
/// path-to-tree distance.
inline TreeRunResult generate_tree(const ScenarioPathMatrix& paths, const TreeShape& shape,
                                   const TreeSpec& spec, const EAConfig& ea_config) {
    TreeProblem problem(paths, shape, spec);
    EAResult<std::vector<double>> ea;
    try {
        ea = run(ea_config, problem);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "no valid tree found; the shape is too demanding for the input paths, try fewer "
            "nodes per stage");
    }
    const auto mapped = map_to_tree(ea.best.genotype, paths, shape, spec.center);
    if (!ea.best.valid() || !mapped) {
        throw std::runtime_error(
            "no valid tree found; the shape is too demanding for the input paths, try fewer "
            "nodes per stage");
    }
    return TreeRunResult{std::move(mapped->tree), *ea.best.fitness, std::move(ea.log)};
}

}  // namespace evostoch

#include <catch2/catch.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "evostoch/tree.hpp"

using namespace evostoch;

namespace {

// Six two-stage paths, also committed as data/paths6.csv.
ScenarioPathMatrix six_paths(double root = 15.0) {
    return ScenarioPathMatrix::with_uniform_probabilities(
        {{10, 12}, {10, 8}, {11, 13}, {20, 22}, {21, 25}, {19, 16}}, root);
}

// Routes paths (1,2),(3,4),(5,6) to the three terminals and hangs terminal
// 1 under the first stage-2 node, terminals 2 and 3 under the second.
const std::vector<double> kFixtureChromosome{0.1, 0.2, 0.4, 0.5, 0.7, 0.8, 0.2, 0.6, 0.9};

EAConfig tree_config(std::uint64_t seed, std::size_t generations = 300) {
    EAConfig config;
    config.population_size = 50;
    config.offspring_count = 50;
    config.max_generations = generations;
    config.stagnation_limit = generations;
    config.mutation_rate = 0.25;
    config.crossover_rate = 0.9;
    config.master_seed = seed;
    return config;
}

double oracle_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Exhaustive three-stage oracle: every terminal assignment times every
// parent map, medians and distances computed with its own arithmetic.
double brute_force_tree_objective(const ScenarioPathMatrix& paths, std::size_t stage2_nodes,
                                  std::size_t terminals, Distance distance) {
    const std::size_t s = paths.path_count();
    std::size_t assignment_count = 1;
    for (std::size_t i = 0; i < s; ++i) assignment_count *= terminals;
    std::size_t parent_map_count = 1;
    for (std::size_t j = 0; j < terminals; ++j) parent_map_count *= stage2_nodes;

    double best = 1e300;
    for (std::size_t a = 0; a < assignment_count; ++a) {
        std::vector<std::size_t> terminal_of(s);
        std::size_t acc = a;
        for (std::size_t i = 0; i < s; ++i) {
            terminal_of[i] = acc % terminals;
            acc /= terminals;
        }
        for (std::size_t m = 0; m < parent_map_count; ++m) {
            std::vector<std::size_t> parent_of(terminals);
            std::size_t macc = m;
            for (std::size_t j = 0; j < terminals; ++j) {
                parent_of[j] = macc % stage2_nodes;
                macc /= stage2_nodes;
            }

            std::vector<std::vector<double>> terminal_values(terminals);
            std::vector<std::vector<double>> stage2_values(stage2_nodes);
            for (std::size_t i = 0; i < s; ++i) {
                terminal_values[terminal_of[i]].push_back(paths.paths()[i][1]);
                stage2_values[parent_of[terminal_of[i]]].push_back(paths.paths()[i][0]);
            }
            bool valid = true;
            for (const auto& members : terminal_values) valid = valid && !members.empty();
            for (const auto& members : stage2_values) valid = valid && !members.empty();
            if (!valid) continue;

            std::vector<double> terminal_median(terminals);
            for (std::size_t j = 0; j < terminals; ++j) {
                terminal_median[j] = oracle_median(terminal_values[j]);
            }
            std::vector<double> stage2_median(stage2_nodes);
            for (std::size_t j = 0; j < stage2_nodes; ++j) {
                stage2_median[j] = oracle_median(stage2_values[j]);
            }

            double objective = 0.0;
            for (std::size_t i = 0; i < s; ++i) {
                const double d2 = paths.paths()[i][0] - stage2_median[parent_of[terminal_of[i]]];
                const double d3 = paths.paths()[i][1] - terminal_median[terminal_of[i]];
                const double path_distance = distance == Distance::l1
                                                 ? std::abs(d2) + std::abs(d3)
                                                 : d2 * d2 + d3 * d3;
                objective += paths.probabilities()[i] * path_distance;
            }
            best = std::min(best, objective);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("chromosome length is path count plus nodes of stages 3..T") {
    CHECK(tree_chromosome_length(TreeShape{{2, 3}}, 6) == 9);
    CHECK(tree_chromosome_length(TreeShape{{10, 40}}, 200) == 240);
    CHECK(tree_chromosome_length(TreeShape{{1, 2, 2}}, 4) == 8);
}

TEST_CASE("distinct terminals embed the paths exactly") {
    const auto paths =
        ScenarioPathMatrix::with_uniform_probabilities({{5, 1}, {5, 2}, {8, 3}, {8, 4}}, 6.0);
    const std::vector<double> genes{0.125, 0.375, 0.625, 0.875, 0.25, 0.25, 0.75, 0.75};
    const auto mapped = map_to_tree(genes, paths, TreeShape{{2, 4}});
    REQUIRE(mapped.has_value());
    mapped->tree.check();

    const auto& terminals = mapped->tree.stages[2];
    CHECK(terminals[0].value == 1.0);
    CHECK(terminals[1].value == 2.0);
    CHECK(terminals[2].value == 3.0);
    CHECK(terminals[3].value == 4.0);
    CHECK(mapped->tree.stages[1][0].value == 5.0);
    CHECK(mapped->tree.stages[1][1].value == 8.0);
    CHECK(tree_distance(*mapped, paths, Distance::l1) == Approx(0.0).margin(1e-12));
    CHECK(tree_distance(*mapped, paths, Distance::l2) == Approx(0.0).margin(1e-12));
}

TEST_CASE("starved node slots invalidate the chromosome") {
    const auto paths =
        ScenarioPathMatrix::with_uniform_probabilities({{5, 1}, {5, 2}, {8, 3}, {8, 4}});
    // every path lands in terminal 1, three terminals stay empty
    const std::vector<double> genes{0.1, 0.1, 0.1, 0.1, 0.25, 0.25, 0.75, 0.75};
    CHECK_FALSE(map_to_tree(genes, paths, TreeShape{{2, 4}}).has_value());
}

TEST_CASE("chromosome length mismatches are errors, not invalid markers") {
    const auto paths = six_paths();
    CHECK_THROWS_AS(map_to_tree({0.1, 0.2}, paths, TreeShape{{2, 3}}), std::invalid_argument);
}

TEST_CASE("fixture tree: hand-computed medians, probabilities and distance") {
    const auto paths = six_paths();
    const auto mapped = map_to_tree(kFixtureChromosome, paths, TreeShape{{2, 3}});
    REQUIRE(mapped.has_value());
    mapped->tree.check();

    const auto& root = mapped->tree.stages[0];
    REQUIRE(root.size() == 1);
    CHECK(root[0].value == 15.0);
    CHECK(root[0].probability == 1.0);

    const auto& stage2 = mapped->tree.stages[1];
    REQUIRE(stage2.size() == 2);
    CHECK(stage2[0].value == Approx(10.0).margin(1e-12));
    CHECK(stage2[1].value == Approx(19.5).margin(1e-12));
    CHECK(stage2[0].probability == Approx(2.0 / 6.0).margin(1e-12));
    CHECK(stage2[1].probability == Approx(4.0 / 6.0).margin(1e-12));

    const auto& stage3 = mapped->tree.stages[2];
    REQUIRE(stage3.size() == 3);
    CHECK(stage3[0].value == Approx(10.0).margin(1e-12));
    CHECK(stage3[1].value == Approx(17.5).margin(1e-12));
    CHECK(stage3[2].value == Approx(20.5).margin(1e-12));
    CHECK(stage3[0].parent == 0);
    CHECK(stage3[1].parent == 1);
    CHECK(stage3[2].parent == 1);
    for (const auto& node : stage3) CHECK(node.probability == Approx(1.0 / 6.0 * 2).margin(1e-12));

    CHECK(tree_distance(*mapped, paths, Distance::l1) == Approx(5.5).margin(1e-12));
    CHECK(tree_distance(*mapped, paths, Distance::l1, false) == Approx(33.0).margin(1e-12));
}

TEST_CASE("mean centers replace the medians when requested") {
    const auto paths = six_paths();
    const auto mapped = map_to_tree(kFixtureChromosome, paths, TreeShape{{2, 3}}, Center::mean);
    REQUIRE(mapped.has_value());
    // stage-2 node 2 pools paths 3..6: mean(11,20,21,19) = 17.75 vs median 19.5
    CHECK(mapped->tree.stages[1][0].value == Approx(10.0).margin(1e-12));
    CHECK(mapped->tree.stages[1][1].value == Approx(17.75).margin(1e-12));
    CHECK(mapped->tree.stages[2][1].value == Approx(17.5).margin(1e-12));
    CHECK(mapped->tree.stages[2][2].value == Approx(20.5).margin(1e-12));
}

TEST_CASE("four-stage chromosome blocks route stage by stage") {
    const auto paths = ScenarioPathMatrix::with_uniform_probabilities(
        {{1, 10, 100}, {2, 20, 200}, {3, 30, 300}, {4, 40, 400}}, 0.0);
    const std::vector<double> genes{0.2, 0.2, 0.7, 0.7,   // paths -> terminals (0,0,1,1)
                                    0.2, 0.8,             // terminals -> stage-3 nodes (0,1)
                                    0.3, 0.6};            // stage-3 nodes -> the single stage-2 node
    const auto mapped = map_to_tree(genes, paths, TreeShape{{1, 2, 2}});
    REQUIRE(mapped.has_value());
    mapped->tree.check();

    CHECK(mapped->tree.stages[1][0].value == Approx(2.5).margin(1e-12));
    CHECK(mapped->tree.stages[1][0].probability == Approx(1.0).margin(1e-12));
    CHECK(mapped->tree.stages[2][0].value == Approx(15.0).margin(1e-12));
    CHECK(mapped->tree.stages[2][1].value == Approx(35.0).margin(1e-12));
    CHECK(mapped->tree.stages[3][0].value == Approx(150.0).margin(1e-12));
    CHECK(mapped->tree.stages[3][1].value == Approx(350.0).margin(1e-12));
    // per path: stage-2 deviations (1.5, 0.5, 0.5, 1.5), then 5 and 50
    CHECK(tree_distance(*mapped, paths, Distance::l1) == Approx(56.0).margin(1e-12));
}

TEST_CASE("single-path chains have zero distance to themselves") {
    const auto paths = ScenarioPathMatrix({{7.0, 7.0}}, {1.0}, 7.0);
    const auto mapped = map_to_tree({0.5, 0.5}, paths, TreeShape{{1, 1}});
    REQUIRE(mapped.has_value());
    CHECK(tree_distance(*mapped, paths, Distance::l1) == Approx(0.0).margin(1e-12));

    // shifting the stage-2 node by one costs exactly the path probability
    auto shifted = *mapped;
    shifted.tree.stages[1][0].value += 1.0;
    CHECK(tree_distance(shifted, paths, Distance::l1) == Approx(1.0).margin(1e-12));
}

TEST_CASE("identical paths collapse to a chain of the path itself") {
    const auto paths = ScenarioPathMatrix::with_uniform_probabilities(
        {{3.0, 9.0}, {3.0, 9.0}, {3.0, 9.0}}, 1.0);
    const auto result = generate_tree(paths, TreeShape{{1, 1}}, TreeSpec{}, tree_config(5, 30));
    CHECK(result.objective == Approx(0.0).margin(1e-12));
    CHECK(result.tree.stages[1][0].value == Approx(3.0).margin(1e-12));
    CHECK(result.tree.stages[2][0].value == Approx(9.0).margin(1e-12));
}

TEST_CASE("EA equals the exhaustive optimum on a small instance") {
    const auto paths =
        ScenarioPathMatrix::with_uniform_probabilities({{5, 1}, {6, 2}, {8, 7}, {9, 8}}, 4.0);
    for (Distance distance : {Distance::l1, Distance::l2}) {
        TreeSpec spec;
        spec.distance = distance;
        const double oracle = brute_force_tree_objective(paths, 2, 2, distance);
        const auto result = generate_tree(paths, TreeShape{{2, 2}}, spec, tree_config(21));
        CHECK(result.objective == Approx(oracle).margin(1e-9));
    }
}

TEST_CASE("mapped trees satisfy the structural invariants") {
    Rng rng(8080);
    const auto paths = six_paths();
    const TreeShape shape{{2, 3}};
    std::size_t valid_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> genes(tree_chromosome_length(shape, paths.path_count()));
        for (double& g : genes) g = rng.uniform01();
        const auto mapped = map_to_tree(genes, paths, shape);
        if (!mapped) continue;
        ++valid_count;
        CHECK_NOTHROW(mapped->tree.check());
        CHECK(mapped->tree.stages[1].size() == 2);
        CHECK(mapped->tree.stages[2].size() == 3);
        CHECK(tree_distance(*mapped, paths, Distance::l1) >= 0.0);
    }
    CHECK(valid_count > 0);
}

TEST_CASE("a shape larger than the path count is a configuration error") {
    const auto paths = ScenarioPathMatrix::with_uniform_probabilities({{1, 2}, {3, 4}});
    CHECK_THROWS_AS(generate_tree(paths, TreeShape{{2, 3}}, TreeSpec{}, tree_config(1, 10)),
                    std::invalid_argument);
}

TEST_CASE("a shape random search cannot fill aborts with advice") {
    // 14 paths onto 14 terminals needs a perfect permutation; a tiny
    // population will not stumble onto one in 100 regenerations
    Rng rng(4004);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 14; ++i) rows.push_back({rng.gauss(), rng.gauss()});
    const auto paths = ScenarioPathMatrix::with_uniform_probabilities(rows);
    auto config = tree_config(3, 5);
    config.population_size = 2;
    config.offspring_count = 2;
    CHECK_THROWS_WITH(generate_tree(paths, TreeShape{{14, 14}}, TreeSpec{}, config),
                      Catch::Contains("fewer nodes"));
}

TEST_CASE("tree generation is seed-deterministic") {
    const auto paths = six_paths();
    const auto a = generate_tree(paths, TreeShape{{2, 3}}, TreeSpec{}, tree_config(77, 50));
    const auto b = generate_tree(paths, TreeShape{{2, 3}}, TreeSpec{}, tree_config(77, 50));
    CHECK(a.objective == b.objective);
    REQUIRE(a.tree.stage_count() == b.tree.stage_count());
    for (std::size_t t = 0; t < a.tree.stage_count(); ++t) {
        for (std::size_t j = 0; j < a.tree.stages[t].size(); ++j) {
            CHECK(a.tree.stages[t][j].value == b.tree.stages[t][j].value);
            CHECK(a.tree.stages[t][j].probability == b.tree.stages[t][j].probability);
        }
    }
}

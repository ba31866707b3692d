#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evostoch/cluster.hpp"
#include "evostoch/csv.hpp"
#include "evostoch/errors.hpp"
#include "evostoch/export.hpp"
#include "evostoch/portfolio.hpp"
#include "evostoch/tree.hpp"

namespace evostoch {

namespace cli_detail {

struct CommonOptions {
    std::string input;
    std::string out;
    std::uint64_t seed = 1;
    std::size_t generations = 500;
    std::size_t population = 100;
    std::size_t offspring = 0;  // 0 = same as population
    std::size_t stagnation = 100;
    double mutation_rate = 0.2;
    double crossover_rate = 0.9;
    bool verbose = false;

    EAConfig ea_config() const {
        EAConfig config;
        config.population_size = population;
        config.offspring_count = offspring == 0 ? population : offspring;
        config.max_generations = generations;
        config.stagnation_limit = stagnation;
        config.mutation_rate = mutation_rate;
        config.crossover_rate = crossover_rate;
        config.master_seed = seed;
        config.validate();
        return config;
    }
};

inline void add_common_options(CLI::App* cmd, CommonOptions& opts, const std::string& input_flag,
                               const std::string& input_help) {
    cmd->add_option(input_flag, opts.input, input_help)->required();
    cmd->add_option("--out", opts.out, "output JSON path (stdout when omitted)");
    cmd->add_option("--seed", opts.seed, "master random seed");
    cmd->add_option("--generations", opts.generations, "generation limit");
    cmd->add_option("--pop", opts.population, "population size");
    cmd->add_option("--offspring", opts.offspring, "offspring per generation (default: --pop)");
    cmd->add_option("--stagnation", opts.stagnation,
                    "stop after this many generations without improvement");
    cmd->add_option("--mutation-rate", opts.mutation_rate, "per-gene mutation probability");
    cmd->add_option("--crossover-rate", opts.crossover_rate, "per-offspring crossover probability");
    cmd->add_flag("--verbose", opts.verbose, "print the generation log to stderr");
}

inline void write_text_file(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError(path + ": cannot open for writing");
    file << text;
    if (!file) throw DataError(path + ": write failed");
}

inline void print_log(const std::vector<GenerationRecord>& log) {
    std::cerr << "generation,best,mean,invalid_count\n";
    for (const auto& record : log) std::cerr << format_log_line(record) << '\n';
}

inline std::vector<std::size_t> parse_shape(const std::string& text) {
    std::vector<std::size_t> counts;
    std::string token;
    std::stringstream stream(text);
    while (std::getline(stream, token, ',')) {
        try {
            const long value = std::stol(token);
            if (value <= 0) throw std::invalid_argument("non-positive");
            counts.push_back(static_cast<std::size_t>(value));
        } catch (const std::exception&) {
            throw UsageError("--shape expects positive integers like '10,40', got '" + text + "'");
        }
    }
    if (counts.size() < 2) {
        throw UsageError("--shape needs at least two stages beyond the root, e.g. '10,40'");
    }
    return counts;
}

struct PortfolioOptions {
    CommonOptions common;
    double kappa = 0.0;
    std::string risk_measure = "stddev";
    double alpha = 0.05;
    std::size_t buckets = 10;
    std::size_t cardinality = 0;  // 0 = unconstrained
    std::size_t stability_runs = 0;
};

inline int run_portfolio(const PortfolioOptions& opts) {
    ObjectiveSpec spec;
    spec.risk_measure = risk_measure_from_string(opts.risk_measure);
    spec.kappa = opts.kappa;
    spec.cvar_alpha = opts.alpha;
    spec.validate();

    const ScenarioSet scenarios = read_scenario_set(opts.common.input);
    const EAConfig ea_config = opts.common.ea_config();
    const std::optional<std::size_t> cardinality =
        opts.cardinality == 0 ? std::optional<std::size_t>{} : std::optional{opts.cardinality};

    const PortfolioRunResult result =
        optimize_portfolio(scenarios, spec, ConstraintSet{}, ea_config, opts.buckets, cardinality);
    if (opts.common.verbose) print_log(result.log);

    json report = portfolio_report(result, scenarios, spec);
    if (opts.stability_runs >= 2) {
        // rerun across consecutive seeds and report how far the optima spread
        std::vector<std::vector<double>> weight_sets;
        for (std::size_t r = 0; r < opts.stability_runs; ++r) {
            EAConfig rerun_config = ea_config;
            rerun_config.master_seed = ea_config.master_seed + r;
            weight_sets.push_back(optimize_portfolio(scenarios, spec, ConstraintSet{}, rerun_config,
                                                     opts.buckets, cardinality)
                                      .portfolio.weights);
        }
        double mean_l1 = 0.0;
        double max_l1 = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < weight_sets.size(); ++i) {
            for (std::size_t j = i + 1; j < weight_sets.size(); ++j) {
                double l1 = 0.0;
                for (std::size_t d = 0; d < weight_sets[i].size(); ++d) {
                    l1 += std::abs(weight_sets[i][d] - weight_sets[j][d]);
                }
                mean_l1 += l1;
                max_l1 = std::max(max_l1, l1);
                ++pairs;
            }
        }
        report["stability"] = {{"runs", opts.stability_runs},
                               {"mean_pairwise_l1", mean_l1 / static_cast<double>(pairs)},
                               {"max_pairwise_l1", max_l1}};
    }
    write_text_file(opts.common.out, report.dump(2) + "\n");
    return 0;
}

struct ClusterOptions {
    CommonOptions common;
    std::size_t k = 2;
    std::string distance = "l1";
    std::string center = "mean";
    bool weighted = false;
    std::string csv_out;
};

inline int run_cluster(const ClusterOptions& opts) {
    ClusteringSpec spec;
    spec.k = opts.k;
    spec.distance = distance_from_string(opts.distance);
    spec.center = center_from_string(opts.center);
    spec.probability_weighted = opts.weighted;

    const ScenarioSet scenarios = read_scenario_set(opts.common.input);
    spec.validate(scenarios.scenario_count(), scenarios.dimension());

    const ClusterRunResult result = generate_scenarios(scenarios, spec, opts.common.ea_config());
    if (opts.common.verbose) print_log(result.log);

    write_text_file(opts.common.out, cluster_report(result).dump(2) + "\n");
    if (!opts.csv_out.empty()) {
        std::ofstream csv(opts.csv_out, std::ios::binary);
        if (!csv) throw DataError(opts.csv_out + ": cannot open for writing");
        write_scenario_csv(csv, result.scenarios);
    }
    return 0;
}

struct TreeOptions {
    CommonOptions common;
    std::string shape;
    std::string distance = "l1";
    std::string center = "median";
    bool unweighted = false;
    std::string dot_out;
    double root = 0.0;
};

inline int run_tree(const TreeOptions& opts) {
    TreeSpec spec;
    spec.distance = distance_from_string(opts.distance);
    spec.center = center_from_string(opts.center);
    spec.probability_weighted = !opts.unweighted;
    const TreeShape shape{parse_shape(opts.shape)};

    const ScenarioPathMatrix paths = read_path_matrix(opts.common.input, opts.root);
    const TreeRunResult result = generate_tree(paths, shape, spec, opts.common.ea_config());
    if (opts.common.verbose) print_log(result.log);

    write_text_file(opts.common.out, tree_report(result).dump(2) + "\n");
    if (!opts.dot_out.empty()) write_text_file(opts.dot_out, tree_to_dot(result.tree));
    return 0;
}

}  // namespace cli_detail

/// Entry point behind the evostoch binary; `args` excludes the program
/// name. Returns 0 on success, 1 on data errors, 2 on usage errors.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"evolutionary solvers for stochastic programming subproblems", "evostoch"};
    app.require_subcommand(1);

    cli_detail::PortfolioOptions portfolio_opts;
    CLI::App* portfolio =
        app.add_subcommand("portfolio", "risk-return portfolio selection over a scenario set");
    cli_detail::add_common_options(portfolio, portfolio_opts.common, "--scenarios",
                                   "scenario CSV (rows = scenarios, optional prob column)");
    portfolio->add_option("--kappa", portfolio_opts.kappa, "risk aversion weight");
    portfolio->add_option("--risk-measure", portfolio_opts.risk_measure,
                          "stddev, variance, mad or cvar");
    portfolio->add_option("--alpha", portfolio_opts.alpha, "cvar tail level in (0,1)");
    portfolio->add_option("--buckets", portfolio_opts.buckets, "budget quanta in the genotype");
    portfolio->add_option("--cardinality", portfolio_opts.cardinality,
                          "fixed number of assets to pick (0 = free)");
    portfolio->add_option("--stability-runs", portfolio_opts.stability_runs,
                          "rerun across this many consecutive seeds and report dispersion");

    cli_detail::ClusterOptions cluster_opts;
    CLI::App* cluster =
        app.add_subcommand("cluster", "reduce a scenario set to k representative scenarios");
    cli_detail::add_common_options(cluster, cluster_opts.common, "--scenarios",
                                   "scenario CSV (rows = scenarios, optional prob column)");
    cluster->add_option("--k", cluster_opts.k, "number of output scenarios");
    cluster->add_option("--distance", cluster_opts.distance, "l1 or l2");
    cluster->add_option("--center", cluster_opts.center, "mean or median");
    cluster->add_flag("--weighted", cluster_opts.weighted,
                      "weight cluster distances by output probability");
    cluster->add_option("--csv", cluster_opts.csv_out, "also write the output scenarios as CSV");

    cli_detail::TreeOptions tree_opts;
    CLI::App* tree =
        app.add_subcommand("tree", "build a multi-stage scenario tree from sampled paths");
    cli_detail::add_common_options(tree, tree_opts.common, "--paths",
                                   "path CSV (columns stage2..stageT, optional prob column)");
    tree->add_option("--shape", tree_opts.shape, "nodes per stage beyond the root, e.g. 10,40")
        ->required();
    tree->add_option("--distance", tree_opts.distance, "l1 or l2");
    tree->add_option("--center", tree_opts.center, "mean or median");
    tree->add_flag("--unweighted", tree_opts.unweighted,
                   "drop the path-probability factor from the objective");
    tree->add_option("--dot", tree_opts.dot_out, "also write a Graphviz rendering here");
    tree->add_option("--root", tree_opts.root, "value of the deterministic root node");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
        if (app.got_subcommand(portfolio)) return cli_detail::run_portfolio(portfolio_opts);
        if (app.got_subcommand(cluster)) return cli_detail::run_cluster(cluster_opts);
        if (app.got_subcommand(tree)) return cli_detail::run_tree(tree_opts);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace evostoch

#pragma once

#include <cstddef>
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

/// Options of the evolutionary scenario-reduction step: target cluster
/// count, per-point distance, center statistic, whether cluster distances
/// are weighted by the output probability, and optional per-dimension
/// weights for multivariate inputs (empty = all ones).
struct ClusteringSpec {
    std::size_t k = 2;
    Distance distance = Distance::l1;
    Center center = Center::mean;
    bool probability_weighted = false;
    std::vector<double> dimension_weights;

    void validate(std::size_t scenario_count, std::size_t dimension) const {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
        if (k > scenario_count) {
            throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " +
                                        std::to_string(scenario_count) + " input scenarios");
        }
        if (!dimension_weights.empty() && dimension_weights.size() != dimension) {
            throw std::invalid_argument("dimension weight count does not match input dimension");
        }
    }
};

/// Maps each unit-interval gene to a cluster id in 1..k.
inline std::vector<std::size_t> assign_clusters(const std::vector<double>& genes, std::size_t k) {
    std::vector<std::size_t> ids;
    ids.reserve(genes.size());
    for (double gene : genes) ids.push_back(bucket_index(gene, k) + 1);
    return ids;
}

/// Flip-mutation: gene <- 1 - gene at `index`, all other genes unchanged.
inline std::vector<double> flip_mutate(std::vector<double> chromosome, std::size_t index) {
    if (index >= chromosome.size()) {
        throw std::out_of_range("flip_mutate index " + std::to_string(index) + " out of range");
    }
    chromosome[index] = 1.0 - chromosome[index];
    return chromosome;
}

struct ClusterOutput {
    ScenarioSet scenarios;
    std::vector<double> cluster_distances;
    double objective = 0.0;
};

/// Builds the k output scenarios for a membership vector: per-dimension
/// center of each cluster's members, cluster probability = sum of member
/// probabilities, objective = sum of in-cluster distances (optionally
/// weighted by cluster probability). Returns nullopt when a cluster is
/// empty; the EA discards such chromosomes.
inline std::optional<ClusterOutput> build_output(const ScenarioSet& scenarios,
                                                 const std::vector<std::size_t>& ids,
                                                 const ClusteringSpec& spec) {
    spec.validate(scenarios.scenario_count(), scenarios.dimension());
    if (ids.size() != scenarios.scenario_count()) {
        throw std::invalid_argument("membership vector length does not match scenario count");
    }
    std::vector<std::vector<std::size_t>> members(spec.k);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 1 || ids[i] > spec.k) {
            throw std::invalid_argument("cluster id " + std::to_string(ids[i]) + " out of 1.." +
                                        std::to_string(spec.k));
        }
        members[ids[i] - 1].push_back(i);
    }
    for (const auto& cluster : members) {
        if (cluster.empty()) return std::nullopt;
    }

    const std::size_t dim = scenarios.dimension();
    std::vector<std::vector<double>> centers(spec.k, std::vector<double>(dim, 0.0));
    std::vector<double> cluster_probabilities(spec.k, 0.0);
    for (std::size_t c = 0; c < spec.k; ++c) {
        std::vector<double> column(members[c].size());
        for (std::size_t d = 0; d < dim; ++d) {
            for (std::size_t m = 0; m < members[c].size(); ++m) {
                column[m] = scenarios.values()[members[c][m]][d];
            }
            centers[c][d] = central_value(column, spec.center);
        }
        for (std::size_t m : members[c]) cluster_probabilities[c] += scenarios.probabilities()[m];
    }

    std::vector<double> distances(spec.k, 0.0);
    for (std::size_t c = 0; c < spec.k; ++c) {
        for (std::size_t m : members[c]) {
            distances[c] += point_distance(scenarios.values()[m], centers[c], spec.distance,
                                           spec.dimension_weights);
        }
    }
    double objective = 0.0;
    for (std::size_t c = 0; c < spec.k; ++c) {
        objective += spec.probability_weighted ? cluster_probabilities[c] * distances[c]
                                               : distances[c];
    }
    return ClusterOutput{ScenarioSet(std::move(centers), std::move(cluster_probabilities)),
                         std::move(distances), objective};
}

/// EA problem over membership chromosomes: one unit-interval gene per input
/// scenario, uniform crossover, flip/Gaussian mutation, minimizing the
/// clustering objective.
class ClusterProblem {
public:
    using Genotype = std::vector<double>;

    ClusterProblem(ScenarioSet scenarios, ClusteringSpec spec)
        : scenarios_(std::move(scenarios)), spec_(std::move(spec)) {
        spec_.validate(scenarios_.scenario_count(), scenarios_.dimension());
    }

    Goal goal() const { return Goal::minimize; }

    Genotype generate(Rng& rng) const {
        return random_unit_genes(scenarios_.scenario_count(), rng);
    }

    std::optional<double> evaluate(const Genotype& genes) const {
        const auto output = build_output(scenarios_, assign_clusters(genes, spec_.k), spec_);
        if (!output) return std::nullopt;
        return output->objective;
    }

    Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
        return uniform_crossover(a, b, rng);
    }

    void mutate(Genotype& genes, double rate, Rng& rng) const {
        mutate_unit_genes(genes, rate, rng);
    }

private:
    ScenarioSet scenarios_;
    ClusteringSpec spec_;
};

struct ClusterRunResult {
    ScenarioSet scenarios;
    std::vector<double> cluster_distances;
    double objective = 0.0;
    std::vector<GenerationRecord> log;
};

/// Evolutionary single-stage scenario generation: approximates the input
/// distribution by k scenarios minimizing the in-cluster distance sum.
inline ClusterRunResult generate_scenarios(const ScenarioSet& scenarios,
                                           const ClusteringSpec& spec, const EAConfig& ea_config) {
    ClusterProblem problem(scenarios, spec);
    EAResult<std::vector<double>> ea = run(ea_config, problem);
    auto output = build_output(scenarios, assign_clusters(ea.best.genotype, spec.k), spec);
    if (!ea.best.valid() || !output) {
        throw std::runtime_error("clustering search ended without a valid partition");
    }
    return ClusterRunResult{std::move(output->scenarios), std::move(output->cluster_distances),
                            output->objective, std::move(ea.log)};
}

}  // namespace evostoch

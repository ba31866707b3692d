#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evostoch/distributions.hpp"
#include "evostoch/ea.hpp"
#include "evostoch/metrics.hpp"
#include "evostoch/risk.hpp"
#include "evostoch/variation.hpp"

namespace evostoch {

/// Two-part portfolio chromosome. `buckets` (g1) splits the budget into
/// equal quanta, `picks` (g2) is the asset selection bit-string.
struct PortfolioGenotype {
    std::vector<double> buckets;
    std::vector<std::uint8_t> picks;
};

/// Budget-normalized weight vector: w >= 0, sum(w) = 1.
struct Portfolio {
    std::vector<double> weights;
};

/// Soft constraints, handled as penalties inside the fitness. Each entry
/// maps a portfolio to a violation magnitude (0 = satisfied).
struct ConstraintSet {
    std::vector<std::function<double(const Portfolio&)>> violations;
    double penalty_weight = 1.0;

    double total_violation(const Portfolio& p) const {
        double total = 0.0;
        for (const auto& violation : violations) total += violation(p);
        return total;
    }
};

/// Violation = number of invested assets beyond `limit`.
inline std::function<double(const Portfolio&)> cardinality_at_most(std::size_t limit) {
    return [limit](const Portfolio& p) {
        std::size_t invested = 0;
        for (double w : p.weights) {
            if (w > 0.0) ++invested;
        }
        return invested > limit ? static_cast<double>(invested - limit) : 0.0;
    };
}

/// Violation = total weight mass above the per-asset cap.
inline std::function<double(const Portfolio&)> weight_cap(double cap) {
    return [cap](const Portfolio& p) {
        double excess = 0.0;
        for (double w : p.weights) {
            if (w > cap) excess += w - cap;
        }
        return excess;
    };
}

/// Decodes the two-part chromosome into a portfolio. With m = popcount(g2)
/// selected assets (ordered by index), each bucket value v lands on slot
/// floor(v*m), clamped; a selected asset's weight is its bucket count over
/// b. Returns nullopt when no asset is selected.
inline std::optional<Portfolio> decode(const PortfolioGenotype& genotype) {
    const std::size_t bucket_count = genotype.buckets.size();
    if (bucket_count == 0) throw std::invalid_argument("genotype has no buckets");

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < genotype.picks.size(); ++i) {
        if (genotype.picks[i]) selected.push_back(i);
    }
    if (selected.empty()) return std::nullopt;

    std::vector<std::size_t> slot_counts(selected.size(), 0);
    for (double v : genotype.buckets) {
        ++slot_counts[bucket_index(v, selected.size())];
    }

    Portfolio portfolio;
    portfolio.weights.assign(genotype.picks.size(), 0.0);
    for (std::size_t slot = 0; slot < selected.size(); ++slot) {
        portfolio.weights[selected[slot]] =
            static_cast<double>(slot_counts[slot]) / static_cast<double>(bucket_count);
    }
    return portfolio;
}

/// Penalized fitness of a genotype (to maximize); nullopt when undecodable.
inline std::optional<double> evaluate_genotype(const PortfolioGenotype& genotype,
                                               const ScenarioSet& scenarios,
                                               const ObjectiveSpec& spec,
                                               const ConstraintSet& constraints) {
    const auto portfolio = decode(genotype);
    if (!portfolio) return std::nullopt;
    const double objective = weighted_objective(spec, loss_distribution(portfolio->weights, scenarios));
    return objective - constraints.penalty_weight * constraints.total_violation(*portfolio);
}

/// EA problem wrapper around the portfolio encoding. Fixing `cardinality`
/// switches g2 mutation to popcount-preserving pair swaps and repairs any
/// crossover child whose popcount drifted.
class PortfolioProblem {
public:
    using Genotype = PortfolioGenotype;

    PortfolioProblem(ScenarioSet scenarios, ObjectiveSpec spec, ConstraintSet constraints,
                     std::size_t bucket_count, std::optional<std::size_t> cardinality)
        : scenarios_(std::move(scenarios)),
          spec_(spec),
          constraints_(std::move(constraints)),
          bucket_count_(bucket_count),
          cardinality_(cardinality) {
        spec_.validate();
        if (bucket_count_ == 0) throw std::invalid_argument("bucket count must be >= 1");
        if (cardinality_) {
            if (*cardinality_ == 0 || *cardinality_ > scenarios_.dimension()) {
                throw std::invalid_argument("cardinality " + std::to_string(*cardinality_) +
                                            " is infeasible for " +
                                            std::to_string(scenarios_.dimension()) + " assets");
            }
        }
    }

    Goal goal() const { return Goal::maximize; }

    Genotype generate(Rng& rng) const {
        Genotype g;
        g.buckets = random_unit_genes(bucket_count_, rng);
        g.picks.assign(scenarios_.dimension(), 0);
        if (cardinality_) {
            // uniform K-subset via partial Fisher-Yates
            std::vector<std::size_t> order(g.picks.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            for (std::size_t i = 0; i < *cardinality_; ++i) {
                const std::size_t j = i + rng.uniform_int(order.size() - i);
                std::swap(order[i], order[j]);
                g.picks[order[i]] = 1;
            }
        } else {
            bool any = false;
            while (!any) {
                for (auto& bit : g.picks) {
                    bit = rng.bernoulli(0.5) ? 1 : 0;
                    any = any || bit;
                }
            }
        }
        return g;
    }

    std::optional<double> evaluate(const Genotype& g) const {
        return evaluate_genotype(g, scenarios_, spec_, constraints_);
    }

    Genotype crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
        Genotype child;
        child.buckets = uniform_crossover(a.buckets, b.buckets, rng);
        child.picks.resize(a.picks.size());
        for (std::size_t i = 0; i < child.picks.size(); ++i) {
            child.picks[i] = rng.bernoulli(0.5) ? a.picks[i] : b.picks[i];
        }
        if (cardinality_) repair_cardinality(child.picks, rng);
        return child;
    }

    void mutate(Genotype& g, double rate, Rng& rng) const {
        mutate_unit_genes(g.buckets, rate, rng);
        if (cardinality_) {
            if (rng.bernoulli(rate)) swap_one_pick(g.picks, rng);
        } else {
            for (auto& bit : g.picks) {
                if (rng.bernoulli(rate)) bit = bit ? 0 : 1;
            }
        }
    }

private:
    void repair_cardinality(std::vector<std::uint8_t>& picks, Rng& rng) const {
        auto indices_with = [&picks](std::uint8_t wanted) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < picks.size(); ++i) {
                if (picks[i] == wanted) idx.push_back(i);
            }
            return idx;
        };
        auto set_bits = indices_with(1);
        while (set_bits.size() > *cardinality_) {
            const std::size_t drop = rng.uniform_int(set_bits.size());
            picks[set_bits[drop]] = 0;
            set_bits.erase(set_bits.begin() + static_cast<std::ptrdiff_t>(drop));
        }
        if (set_bits.size() < *cardinality_) {
            auto clear_bits = indices_with(0);
            while (set_bits.size() < *cardinality_) {
                const std::size_t add = rng.uniform_int(clear_bits.size());
                picks[clear_bits[add]] = 1;
                set_bits.push_back(clear_bits[add]);
                clear_bits.erase(clear_bits.begin() + static_cast<std::ptrdiff_t>(add));
            }
        }
    }

    /// Swaps one selected and one unselected asset; a no-op when every
    /// asset is already selected.
    static void swap_one_pick(std::vector<std::uint8_t>& picks, Rng& rng) {
        std::vector<std::size_t> set_bits;
        std::vector<std::size_t> clear_bits;
        for (std::size_t i = 0; i < picks.size(); ++i) {
            (picks[i] ? set_bits : clear_bits).push_back(i);
        }
        if (set_bits.empty() || clear_bits.empty()) return;
        picks[set_bits[rng.uniform_int(set_bits.size())]] = 0;
        picks[clear_bits[rng.uniform_int(clear_bits.size())]] = 1;
    }

    ScenarioSet scenarios_;
    ObjectiveSpec spec_;
    ConstraintSet constraints_;
    std::size_t bucket_count_;
    std::optional<std::size_t> cardinality_;
};

struct PortfolioRunResult {
    Portfolio portfolio;
    double fitness = 0.0;
    std::vector<GenerationRecord> log;
};

/// EA-driven maximization of the scalarized risk-return objective.
inline PortfolioRunResult optimize_portfolio(const ScenarioSet& scenarios,
                                             const ObjectiveSpec& spec,
                                             const ConstraintSet& constraints,
                                             const EAConfig& ea_config, std::size_t bucket_count,
                                             std::optional<std::size_t> cardinality = {}) {
    PortfolioProblem problem(scenarios, spec, constraints, bucket_count, cardinality);
    EAResult<PortfolioGenotype> ea = run(ea_config, problem);
    const auto portfolio = decode(ea.best.genotype);
    if (!ea.best.valid() || !portfolio) {
        throw std::runtime_error("portfolio search ended without a decodable solution");
    }
    return PortfolioRunResult{*portfolio, *ea.best.fitness, std::move(ea.log)};
}

}  // namespace evostoch

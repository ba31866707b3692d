#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evostoch {

/// Probability vectors must sum to one within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-9;

namespace detail {

inline void check_probabilities(const std::vector<double>& probabilities) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        if (!(p >= 0.0)) {
            throw std::invalid_argument("probability at index " + std::to_string(i) +
                                        " is negative or NaN");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        throw std::invalid_argument("probabilities sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-9");
    }
}

inline void check_finite_rows(const std::vector<std::vector<double>>& rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (double v : rows[r]) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("non-finite value in row " + std::to_string(r));
            }
        }
    }
}

inline std::vector<double> uniform_probabilities(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace detail

/// Discrete multivariate distribution: one row per scenario, one column per
/// asset (dimension), plus a probability per scenario. Immutable once built.
class ScenarioSet {
public:
    ScenarioSet(std::vector<std::vector<double>> values, std::vector<double> probabilities)
        : values_(std::move(values)), probabilities_(std::move(probabilities)) {
        if (values_.empty()) throw std::invalid_argument("scenario set needs at least one scenario");
        dimension_ = values_.front().size();
        if (dimension_ == 0) throw std::invalid_argument("scenario set needs at least one dimension");
        for (const auto& row : values_) {
            if (row.size() != dimension_) throw std::invalid_argument("ragged scenario matrix");
        }
        detail::check_finite_rows(values_);
        if (probabilities_.size() != values_.size()) {
            throw std::invalid_argument("probability count does not match scenario count");
        }
        detail::check_probabilities(probabilities_);
    }

    static ScenarioSet with_uniform_probabilities(std::vector<std::vector<double>> values) {
        const std::size_t n = values.size();
        return ScenarioSet(std::move(values), detail::uniform_probabilities(n));
    }

    std::size_t scenario_count() const { return values_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::vector<std::vector<double>>& values() const { return values_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

private:
    std::vector<std::vector<double>> values_;
    std::vector<double> probabilities_;
    std::size_t dimension_ = 0;
};

/// Discrete P&L distribution of a portfolio: one outcome per scenario, with
/// the scenario probabilities carried over unchanged.
class LossDistribution {
public:
    LossDistribution(std::vector<double> outcomes, std::vector<double> probabilities)
        : outcomes_(std::move(outcomes)), probabilities_(std::move(probabilities)) {
        if (outcomes_.empty()) throw std::invalid_argument("empty loss distribution");
        if (outcomes_.size() != probabilities_.size()) {
            throw std::invalid_argument("outcome/probability length mismatch");
        }
        for (double v : outcomes_) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite outcome");
        }
        detail::check_probabilities(probabilities_);
    }

    std::size_t size() const { return outcomes_.size(); }
    const std::vector<double>& outcomes() const { return outcomes_; }
    const std::vector<double>& probabilities() const { return probabilities_; }

private:
    std::vector<double> outcomes_;
    std::vector<double> probabilities_;
};

/// P&L distribution of `portfolio` under `scenarios`: outcome_j = <x, S_j>.
inline LossDistribution loss_distribution(const std::vector<double>& portfolio,
                                          const ScenarioSet& scenarios) {
    if (portfolio.size() != scenarios.dimension()) {
        throw std::invalid_argument("portfolio has " + std::to_string(portfolio.size()) +
                                    " weights, scenario set has " +
                                    std::to_string(scenarios.dimension()) + " assets");
    }
    double weight_sum = 0.0;
    for (double w : portfolio) weight_sum += w;
    if (std::abs(weight_sum - 1.0) > kProbabilityTolerance) {
        throw std::invalid_argument("portfolio weights sum to " + std::to_string(weight_sum) +
                                    ", expected 1");
    }
    std::vector<double> outcomes;
    outcomes.reserve(scenarios.scenario_count());
    for (const auto& row : scenarios.values()) {
        double dot = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) dot += portfolio[i] * row[i];
        outcomes.push_back(dot);
    }
    return LossDistribution(std::move(outcomes), scenarios.probabilities());
}

/// Sampled multi-stage paths: s rows, one column per stage 2..T. Stage 1 is
/// the deterministic root and lives in root_value.
class ScenarioPathMatrix {
public:
    ScenarioPathMatrix(std::vector<std::vector<double>> paths, std::vector<double> probabilities,
                       double root_value = 0.0)
        : paths_(std::move(paths)), probabilities_(std::move(probabilities)), root_value_(root_value) {
        if (paths_.empty()) throw std::invalid_argument("path matrix needs at least one path");
        stage_columns_ = paths_.front().size();
        if (stage_columns_ < 2) {
            throw std::invalid_argument("path matrix needs at least two stage columns (T >= 3)");
        }
        for (const auto& row : paths_) {
            if (row.size() != stage_columns_) throw std::invalid_argument("ragged path matrix");
        }
        detail::check_finite_rows(paths_);
        if (!std::isfinite(root_value_)) throw std::invalid_argument("non-finite root value");
        if (probabilities_.size() != paths_.size()) {
            throw std::invalid_argument("probability count does not match path count");
        }
        detail::check_probabilities(probabilities_);
    }

    static ScenarioPathMatrix with_uniform_probabilities(std::vector<std::vector<double>> paths,
                                                         double root_value = 0.0) {
        const std::size_t n = paths.size();
        return ScenarioPathMatrix(std::move(paths), detail::uniform_probabilities(n), root_value);
    }

    std::size_t path_count() const { return paths_.size(); }
    /// Total number of stages T, root included.
    std::size_t stage_count() const { return stage_columns_ + 1; }
    const std::vector<std::vector<double>>& paths() const { return paths_; }
    const std::vector<double>& probabilities() const { return probabilities_; }
    double root_value() const { return root_value_; }

    /// Value of path `i` at stage `t`, t in 2..T.
    double value_at(std::size_t i, std::size_t t) const { return paths_[i][t - 2]; }

private:
    std::vector<std::vector<double>> paths_;
    std::vector<double> probabilities_;
    double root_value_ = 0.0;
    std::size_t stage_columns_ = 0;
};

/// One node of a scenario tree. `parent` indexes into the previous stage;
/// the root carries TreeNode::no_parent.
struct TreeNode {
    double value = 0.0;
    double probability = 0.0;
    std::size_t parent = no_parent;

    static constexpr std::size_t no_parent = std::numeric_limits<std::size_t>::max();
};

/// Stage-indexed scenario tree. stages[0] is the root stage. Every non-root
/// node has exactly one parent, so each node's history is its unique root
/// path and non-anticipativity holds by construction.
struct ScenarioTree {
    std::vector<std::vector<TreeNode>> stages;

    std::size_t stage_count() const { return stages.size(); }

    std::size_t node_count() const {
        std::size_t n = 0;
        for (const auto& stage : stages) n += stage.size();
        return n;
    }

    /// Throws if any structural invariant is broken.
    void check() const {
        if (stages.empty()) throw std::runtime_error("tree has no stages");
        if (stages.front().size() != 1) throw std::runtime_error("root stage must hold one node");
        if (std::abs(stages.front().front().probability - 1.0) > kProbabilityTolerance) {
            throw std::runtime_error("root probability must be 1");
        }
        if (stages.front().front().parent != TreeNode::no_parent) {
            throw std::runtime_error("root must not have a parent");
        }
        for (std::size_t t = 1; t < stages.size(); ++t) {
            const auto& stage = stages[t];
            if (stage.empty()) throw std::runtime_error("empty stage " + std::to_string(t + 1));
            double stage_sum = 0.0;
            std::vector<double> child_sum(stages[t - 1].size(), 0.0);
            for (const auto& node : stage) {
                if (!(node.probability >= 0.0)) throw std::runtime_error("negative node probability");
                if (!std::isfinite(node.value)) throw std::runtime_error("non-finite node value");
                if (node.parent >= stages[t - 1].size()) {
                    throw std::runtime_error("dangling parent link at stage " + std::to_string(t + 1));
                }
                stage_sum += node.probability;
                child_sum[node.parent] += node.probability;
            }
            if (std::abs(stage_sum - 1.0) > kProbabilityTolerance) {
                throw std::runtime_error("stage " + std::to_string(t + 1) +
                                         " probabilities sum to " + std::to_string(stage_sum));
            }
            for (std::size_t p = 0; p < child_sum.size(); ++p) {
                if (std::abs(child_sum[p] - stages[t - 1][p].probability) > kProbabilityTolerance) {
                    throw std::runtime_error("probability not conserved under node " +
                                             std::to_string(p) + " of stage " + std::to_string(t));
                }
            }
        }
    }

    bool is_valid() const {
        try {
            check();
            return true;
        } catch (const std::runtime_error&) {
            return false;
        }
    }
};

}  // namespace evostoch

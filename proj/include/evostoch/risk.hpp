#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "evostoch/distributions.hpp"

namespace evostoch {

enum class RiskMeasure { stddev, variance, mad, cvar };

inline RiskMeasure risk_measure_from_string(const std::string& name) {
    if (name == "stddev") return RiskMeasure::stddev;
    if (name == "variance") return RiskMeasure::variance;
    if (name == "mad") return RiskMeasure::mad;
    if (name == "cvar") return RiskMeasure::cvar;
    throw std::invalid_argument("unknown risk measure '" + name +
                                "' (expected stddev, variance, mad or cvar)");
}

inline std::string to_string(RiskMeasure m) {
    switch (m) {
        case RiskMeasure::stddev: return "stddev";
        case RiskMeasure::variance: return "variance";
        case RiskMeasure::mad: return "mad";
        case RiskMeasure::cvar: return "cvar";
    }
    return "?";
}

/// Scalarized risk-return objective: expectation minus kappa times risk.
struct ObjectiveSpec {
    RiskMeasure risk_measure = RiskMeasure::stddev;
    double kappa = 0.0;
    double cvar_alpha = 0.05;

    void validate() const {
        if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
        if (risk_measure == RiskMeasure::cvar && !(cvar_alpha > 0.0 && cvar_alpha < 1.0)) {
            throw std::invalid_argument("cvar alpha must lie in (0,1)");
        }
    }
};

inline double expectation(const LossDistribution& l) {
    double sum = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        sum += l.probabilities()[j] * l.outcomes()[j];
    }
    return sum;
}

namespace detail {

inline double probability_weighted_variance(const LossDistribution& l) {
    const double mean = expectation(l);
    double var = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        const double d = l.outcomes()[j] - mean;
        var += l.probabilities()[j] * d * d;
    }
    return var;
}

inline double mean_absolute_deviation(const LossDistribution& l) {
    const double mean = expectation(l);
    double mad = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
        mad += l.probabilities()[j] * std::abs(l.outcomes()[j] - mean);
    }
    return mad;
}

/// Discrete CVaR of the loss -l at level alpha: outcomes are sorted
/// ascending (worst P&L first) and the alpha-tail is averaged, splitting the
/// boundary atom fractionally so the tail mass is exactly alpha.
inline double conditional_value_at_risk(const LossDistribution& l, double alpha) {
    std::vector<std::size_t> order(l.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (l.outcomes()[a] != l.outcomes()[b]) return l.outcomes()[a] < l.outcomes()[b];
        return a < b;
    });
    double remaining = alpha;
    double tail_loss = 0.0;
    for (std::size_t idx : order) {
        const double mass = std::min(l.probabilities()[idx], remaining);
        tail_loss += mass * -l.outcomes()[idx];
        remaining -= mass;
        if (remaining <= 0.0) break;
    }
    return tail_loss / alpha;
}

}  // namespace detail

/// Risk of the P&L distribution under the configured measure. CVaR and MAD
/// follow the documented sign convention: losses are the negated outcomes.
inline double risk(const ObjectiveSpec& spec, const LossDistribution& l) {
    spec.validate();
    switch (spec.risk_measure) {
        case RiskMeasure::variance: return detail::probability_weighted_variance(l);
        case RiskMeasure::stddev: return std::sqrt(detail::probability_weighted_variance(l));
        case RiskMeasure::mad: return detail::mean_absolute_deviation(l);
        case RiskMeasure::cvar: return detail::conditional_value_at_risk(l, spec.cvar_alpha);
    }
    throw std::logic_error("unreachable risk measure");
}

/// E(l) - kappa * rho(l); larger is better.
inline double weighted_objective(const ObjectiveSpec& spec, const LossDistribution& l) {
    return expectation(l) - spec.kappa * risk(spec, l);
}

}  // namespace evostoch

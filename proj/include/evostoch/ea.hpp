#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "evostoch/rng.hpp"

namespace evostoch {

enum class Goal { minimize, maximize };

/// Best-fitness improvements at or below this threshold count as stagnation.
inline constexpr double kImprovementEpsilon = 1e-12;

struct EAConfig {
    std::size_t population_size = 100;
    std::size_t offspring_count = 100;
    std::size_t max_generations = 500;
    std::size_t stagnation_limit = 100;
    double mutation_rate = 0.2;
    double crossover_rate = 0.9;
    std::uint64_t master_seed = 1;

    void validate() const {
        if (population_size < 2) throw std::invalid_argument("population_size must be >= 2");
        if (offspring_count < 1) throw std::invalid_argument("offspring_count must be >= 1");
        if (stagnation_limit < 1) throw std::invalid_argument("stagnation_limit must be >= 1");
        if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
            throw std::invalid_argument("mutation_rate must be in [0,1]");
        }
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
            throw std::invalid_argument("crossover_rate must be in [0,1]");
        }
    }
};

/// A genotype with its fitness. No fitness value means the individual is
/// invalid (undecodable genotype, empty cluster, broken tree, ...); such
/// individuals rank behind every valid one and are discarded by selection.
template <typename G>
struct Individual {
    G genotype;
    std::optional<double> fitness;
    std::size_t birth_generation = 0;
    std::size_t insertion_index = 0;

    bool valid() const { return fitness.has_value(); }
};

struct GenerationRecord {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
    std::size_t invalid_count = 0;
};

/// One newline-delimited log record: generation, best, mean, invalid_count.
inline std::string format_log_line(const GenerationRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%zu", r.generation, r.best, r.mean,
                  r.invalid_count);
    return buf;
}

/// True when fitness `a` beats fitness `b`. Invalid never beats anything;
/// anything valid beats invalid.
inline bool fitness_better(const std::optional<double>& a, const std::optional<double>& b,
                           Goal goal) {
    if (!a) return false;
    if (!b) return true;
    return goal == Goal::maximize ? *a > *b : *a < *b;
}

/// Full selection order: valid before invalid, then better fitness, then
/// older generation, then lower insertion index.
template <typename G>
bool precedes(const Individual<G>& a, const Individual<G>& b, Goal goal) {
    if (a.valid() != b.valid()) return a.valid();
    if (a.valid() && *a.fitness != *b.fitness) {
        return goal == Goal::maximize ? *a.fitness > *b.fitness : *a.fitness < *b.fitness;
    }
    if (a.birth_generation != b.birth_generation) return a.birth_generation < b.birth_generation;
    return a.insertion_index < b.insertion_index;
}

/// Elitist truncation: keeps the `population_size` best of the combined
/// parent+offspring pool. Returns everything when the pool is smaller.
template <typename G>
std::vector<Individual<G>> select(std::vector<Individual<G>> candidates,
                                  std::size_t population_size, Goal goal) {
    std::sort(candidates.begin(), candidates.end(),
              [goal](const Individual<G>& a, const Individual<G>& b) { return precedes(a, b, goal); });
    if (candidates.size() > population_size) candidates.resize(population_size);
    return candidates;
}

template <typename P>
concept EvolutionaryProblem =
    requires(const P& p, typename P::Genotype& g, const typename P::Genotype& cg, Rng& rng) {
        { p.goal() } -> std::convertible_to<Goal>;
        { p.generate(rng) } -> std::convertible_to<typename P::Genotype>;
        { p.evaluate(cg) } -> std::convertible_to<std::optional<double>>;
        { p.crossover(cg, cg, rng) } -> std::convertible_to<typename P::Genotype>;
        p.mutate(g, 0.5, rng);
    };

template <typename G>
struct EAResult {
    Individual<G> best;
    std::vector<GenerationRecord> log;
};

namespace detail {

/// Evaluates every unevaluated individual. evaluate() must be pure, so the
/// offspring set can be split across threads without changing any result;
/// non-finite fitness values are coerced to invalid.
template <EvolutionaryProblem P>
void evaluate_all(const P& problem, std::vector<Individual<typename P::Genotype>>& pool) {
    auto evaluate_one = [&problem](Individual<typename P::Genotype>& ind) {
        if (ind.fitness) return;
        std::optional<double> f = problem.evaluate(ind.genotype);
        ind.fitness = (f && std::isfinite(*f)) ? f : std::nullopt;
    };

    const std::size_t hardware = std::thread::hardware_concurrency();
    if (pool.size() < 64 || hardware < 2) {
        for (auto& ind : pool) evaluate_one(ind);
        return;
    }
    const std::size_t worker_count = std::min<std::size_t>(hardware, 8);
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&, w]() {
            for (std::size_t i = w; i < pool.size(); i += worker_count) evaluate_one(pool[i]);
        });
    }
    for (auto& worker : workers) worker.join();
}

template <typename G>
GenerationRecord summarize(std::size_t generation, const std::vector<Individual<G>>& population) {
    GenerationRecord record;
    record.generation = generation;
    double sum = 0.0;
    std::size_t valid_count = 0;
    std::optional<double> best;
    for (const auto& ind : population) {
        if (!ind.valid()) {
            ++record.invalid_count;
            continue;
        }
        ++valid_count;
        sum += *ind.fitness;
    }
    record.mean = valid_count > 0 ? sum / static_cast<double>(valid_count)
                                  : std::numeric_limits<double>::quiet_NaN();
    // population is kept sorted, so the front is the current best
    record.best = population.front().valid() ? *population.front().fitness
                                             : std::numeric_limits<double>::quiet_NaN();
    return record;
}

}  // namespace detail

/// Runs the evolutionary loop: recombine, mutate, evaluate the offspring,
/// then truncation-select the survivors from parents plus offspring.
/// Deterministic for a fixed (config, problem): every individual draws all
/// of its randomness from an own stream derived from master_seed and a
/// running creation counter.
///
/// Termination: max_generations, or stagnation_limit consecutive
/// generations without a best-fitness improvement above 1e-12.
template <EvolutionaryProblem P>
EAResult<typename P::Genotype> run(const EAConfig& config, const P& problem) {
    using G = typename P::Genotype;
    config.validate();
    const Goal goal = problem.goal();

    std::size_t next_index = 0;
    auto spawn = [&](std::size_t birth_generation) {
        Rng rng(derive_seed(config.master_seed, next_index));
        Individual<G> ind{problem.generate(rng), std::nullopt, birth_generation, next_index};
        ++next_index;
        return ind;
    };

    // Initial population; regenerate wholesale if the problem managed to
    // invalidate every single individual.
    constexpr std::size_t max_init_attempts = 100;
    std::vector<Individual<G>> population;
    for (std::size_t attempt = 0;; ++attempt) {
        population.clear();
        population.reserve(config.population_size);
        for (std::size_t i = 0; i < config.population_size; ++i) {
            population.push_back(spawn(0));
        }
        detail::evaluate_all(problem, population);
        const bool any_valid =
            std::any_of(population.begin(), population.end(), [](const auto& i) { return i.valid(); });
        if (any_valid) break;
        if (attempt + 1 == max_init_attempts) {
            throw std::runtime_error("no valid individual in " +
                                     std::to_string(max_init_attempts) +
                                     " initial populations");
        }
    }
    population = select(std::move(population), config.population_size, goal);

    EAResult<G> result;
    result.best = population.front();
    result.log.push_back(detail::summarize(std::size_t{0}, population));

    std::size_t stagnant_generations = 0;
    for (std::size_t generation = 1; generation <= config.max_generations; ++generation) {
        std::vector<Individual<G>> offspring;
        offspring.reserve(config.offspring_count);
        for (std::size_t j = 0; j < config.offspring_count; ++j) {
            Rng rng(derive_seed(config.master_seed, next_index));
            const std::size_t first = rng.uniform_int(population.size());
            const std::size_t second =
                (first + 1 + rng.uniform_int(population.size() - 1)) % population.size();
            G child = rng.uniform01() < config.crossover_rate
                          ? problem.crossover(population[first].genotype,
                                              population[second].genotype, rng)
                          : population[first].genotype;
            problem.mutate(child, config.mutation_rate, rng);
            offspring.push_back(Individual<G>{std::move(child), std::nullopt, generation, next_index});
            ++next_index;
        }
        detail::evaluate_all(problem, offspring);

        std::move(offspring.begin(), offspring.end(), std::back_inserter(population));
        population = select(std::move(population), config.population_size, goal);

        const auto& front = population.front();
        bool improved = false;
        if (front.valid()) {
            if (!result.best.valid()) {
                improved = true;
            } else {
                const double delta = goal == Goal::maximize ? *front.fitness - *result.best.fitness
                                                            : *result.best.fitness - *front.fitness;
                improved = delta > kImprovementEpsilon;
            }
        }
        if (improved) {
            result.best = front;
            stagnant_generations = 0;
        } else {
            ++stagnant_generations;
        }

        result.log.push_back(detail::summarize(generation, population));
        if (stagnant_generations >= config.stagnation_limit) break;
    }
    return result;
}

}  // namespace evostoch

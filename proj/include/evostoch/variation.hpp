#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "evostoch/rng.hpp"

namespace evostoch {

/// Sigma of the Gaussian gene perturbation used by every real-coded solver.
inline constexpr double kGaussianMutationSigma = 0.1;

/// Per-gene uniform crossover of two equal-length real chromosomes.
inline std::vector<double> uniform_crossover(const std::vector<double>& a,
                                             const std::vector<double>& b, Rng& rng) {
    std::vector<double> child(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        child[i] = rng.bernoulli(0.5) ? a[i] : b[i];
    }
    return child;
}

/// Mutates unit-interval genes in place. Each gene is touched with
/// probability `rate`; a touched gene is either flipped (v -> 1-v) or
/// perturbed by clipped Gaussian noise, 50/50.
inline void mutate_unit_genes(std::vector<double>& genes, double rate, Rng& rng) {
    for (double& gene : genes) {
        if (!rng.bernoulli(rate)) continue;
        if (rng.bernoulli(0.5)) {
            gene = 1.0 - gene;
        } else {
            gene = std::clamp(gene + kGaussianMutationSigma * rng.gauss(), 0.0, 1.0);
        }
    }
}

inline std::vector<double> random_unit_genes(std::size_t length, Rng& rng) {
    std::vector<double> genes(length);
    for (double& gene : genes) gene = rng.uniform01();
    return genes;
}

}  // namespace evostoch

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evostoch {

enum class Distance { l1, l2 };
enum class Center { mean, median };

/// Maps a unit-interval gene onto one of k buckets (0-based). The same rule
/// drives portfolio budget slots, cluster membership and tree node routing:
/// bucket = floor(gene * k), with gene == 1 clamped into the last bucket.
inline std::size_t bucket_index(double gene, std::size_t k) {
    const auto raw = static_cast<std::size_t>(gene * static_cast<double>(k));
    return std::min(raw, k - 1);
}

/// Distance between two points; l2 means squared distance, which keeps the
/// mean the in-cluster optimum. Empty `weights` means unit weights.
inline double point_distance(std::span<const double> a, std::span<const double> b,
                             Distance distance, std::span<const double> weights = {}) {
    double total = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double w = weights.empty() ? 1.0 : weights[d];
        const double diff = a[d] - b[d];
        total += distance == Distance::l1 ? w * std::abs(diff) : w * diff * diff;
    }
    return total;
}

/// Median with midpoint averaging for even counts. Copies its argument.
inline double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

inline double central_value(const std::vector<double>& values, Center center) {
    return center == Center::mean ? mean_of(values) : median_of(values);
}

inline Distance distance_from_string(const std::string& name) {
    if (name == "l1") return Distance::l1;
    if (name == "l2") return Distance::l2;
    throw std::invalid_argument("unknown distance '" + name + "' (expected l1 or l2)");
}

inline Center center_from_string(const std::string& name) {
    if (name == "mean") return Center::mean;
    if (name == "median") return Center::median;
    throw std::invalid_argument("unknown center '" + name + "' (expected mean or median)");
}

inline std::string to_string(Distance d) { return d == Distance::l1 ? "l1" : "l2"; }
inline std::string to_string(Center c) { return c == Center::mean ? "mean" : "median"; }

}  // namespace evostoch

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evostoch/distributions.hpp"
#include "evostoch/errors.hpp"

namespace evostoch {

/// Inputs whose probability column is off by at most this much are
/// renormalized with a warning; anything worse is rejected.
inline constexpr double kRenormalizationThreshold = 1e-6;

namespace csv_detail {

inline std::string trim(std::string_view field) {
    const auto begin = field.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = field.find_last_not_of(" \t\r");
    return std::string(field.substr(begin, end - begin + 1));
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    std::stringstream stream(line);
    while (std::getline(stream, current, ',')) fields.push_back(trim(current));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline bool parse_double(const std::string& field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto result = std::from_chars(begin, end, out);
    return result.ec == std::errc{} && result.ptr == end && !field.empty();
}

}  // namespace csv_detail

struct CsvTable {
    std::vector<std::string> column_names;  // empty when the file has no header
    std::vector<std::vector<double>> rows;

    bool has_header() const { return !column_names.empty(); }
};

/// Reads a comma-separated numeric table. The header row is optional and
/// detected by its first line failing to parse as numbers. Blank lines are
/// skipped; ragged or non-numeric data rows are rejected with the file name
/// and 1-based line number.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw DataError(path + ": cannot open file");

    CsvTable table;
    std::string line;
    std::size_t line_number = 0;
    std::size_t column_count = 0;
    while (std::getline(file, line)) {
        ++line_number;
        if (csv_detail::trim(line).empty()) continue;
        const auto fields = csv_detail::split_line(line);

        if (table.rows.empty() && table.column_names.empty() && column_count == 0) {
            // first content line: header iff any field is non-numeric
            bool all_numeric = true;
            double ignored = 0.0;
            for (const auto& field : fields) {
                if (!csv_detail::parse_double(field, ignored)) {
                    all_numeric = false;
                    break;
                }
            }
            column_count = fields.size();
            if (!all_numeric) {
                table.column_names = fields;
                continue;
            }
        }

        if (fields.size() != column_count) {
            throw DataError(path + ":" + std::to_string(line_number) + ": expected " +
                            std::to_string(column_count) + " columns, found " +
                            std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!csv_detail::parse_double(fields[c], row[c])) {
                throw DataError(path + ":" + std::to_string(line_number) + ": '" + fields[c] +
                                "' is not a number");
            }
            if (!std::isfinite(row[c])) {
                throw DataError(path + ":" + std::to_string(line_number) +
                                ": non-finite value in column " + std::to_string(c + 1));
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw DataError(path + ": no data rows");
    return table;
}

/// Validates an ingested probability column. Sums within 1e-9 of one pass
/// through; sums within the renormalization threshold are rescaled with a
/// warning on stderr; anything else is rejected.
inline std::vector<double> normalize_probabilities(std::vector<double> probabilities,
                                                   const std::string& context) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (!(probabilities[i] >= 0.0)) {
            throw DataError(context + ": negative probability in row " + std::to_string(i + 1));
        }
        sum += probabilities[i];
    }
    if (std::abs(sum - 1.0) <= kProbabilityTolerance) return probabilities;
    if (std::abs(sum - 1.0) <= kRenormalizationThreshold) {
        std::cerr << "warning: " << context << ": probabilities sum to " << sum
                  << ", renormalizing\n";
        for (double& p : probabilities) p /= sum;
        return probabilities;
    }
    throw DataError(context + ": probabilities sum to " + std::to_string(sum) +
                    "; offsets beyond " + std::to_string(kRenormalizationThreshold) +
                    " are rejected, up to that they are renormalized");
}

namespace csv_detail {

inline bool last_column_is_probability(const CsvTable& table) {
    return table.has_header() && !table.column_names.empty() && table.column_names.back() == "prob";
}

inline std::pair<std::vector<std::vector<double>>, std::vector<double>> split_probability_column(
    const CsvTable& table, const std::string& path) {
    const bool has_prob = last_column_is_probability(table);
    const std::size_t value_columns = table.rows.front().size() - (has_prob ? 1 : 0);
    if (value_columns == 0) throw DataError(path + ": no value columns");

    std::vector<std::vector<double>> values;
    values.reserve(table.rows.size());
    std::vector<double> probabilities;
    for (const auto& row : table.rows) {
        values.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(value_columns));
        if (has_prob) probabilities.push_back(row.back());
    }
    if (!has_prob) {
        probabilities.assign(values.size(), 1.0 / static_cast<double>(values.size()));
        return {std::move(values), std::move(probabilities)};
    }
    return {std::move(values), normalize_probabilities(std::move(probabilities), path)};
}

}  // namespace csv_detail

/// Loads a single-stage scenario set: one scenario per row, one column per
/// asset, optional trailing `prob` column (uniform when absent).
inline ScenarioSet read_scenario_set(const std::string& path) {
    const CsvTable table = read_csv(path);
    auto [values, probabilities] = csv_detail::split_probability_column(table, path);
    try {
        return ScenarioSet(std::move(values), std::move(probabilities));
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Loads a multi-stage path matrix: columns stage2..stageT (checked when a
/// header is present), optional trailing `prob` column. The deterministic
/// root value is not part of the file; it is supplied by the caller.
inline ScenarioPathMatrix read_path_matrix(const std::string& path, double root_value = 0.0) {
    const CsvTable table = read_csv(path);
    if (table.has_header()) {
        const std::size_t stage_columns =
            table.column_names.size() - (csv_detail::last_column_is_probability(table) ? 1 : 0);
        for (std::size_t c = 0; c < stage_columns; ++c) {
            const std::string expected = "stage" + std::to_string(c + 2);
            if (table.column_names[c] != expected) {
                throw DataError(path + ": column " + std::to_string(c + 1) + " is named '" +
                                table.column_names[c] + "', expected '" + expected + "'");
            }
        }
    }
    auto [values, probabilities] = csv_detail::split_probability_column(table, path);
    try {
        return ScenarioPathMatrix(std::move(values), std::move(probabilities), root_value);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Writes a scenario set as CSV: columns x1..xa plus prob.
inline void write_scenario_csv(std::ostream& out, const ScenarioSet& scenarios) {
    for (std::size_t d = 0; d < scenarios.dimension(); ++d) {
        out << 'x' << (d + 1) << ',';
    }
    out << "prob\n";
    char buf[64];
    for (std::size_t i = 0; i < scenarios.scenario_count(); ++i) {
        for (double v : scenarios.values()[i]) {
            std::snprintf(buf, sizeof(buf), "%.12g", v);
            out << buf << ',';
        }
        std::snprintf(buf, sizeof(buf), "%.12g", scenarios.probabilities()[i]);
        out << buf << '\n';
    }
}

}  // namespace evostoch

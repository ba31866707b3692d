#pragma once

#include <stdexcept>
#include <string>

namespace evostoch {

/// Problem with an input file or its contents; maps to CLI exit code 1.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Misuse of the command line or an option value; maps to CLI exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evostoch

#pragma once

#include <stdexcept>
#include <string>

namespace sera {

// Bad arguments: length mismatches, out-of-range values, schema mismatches.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Target sample cannot support a relevance function (e.g. zero IQR).
struct DegenerateDistribution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A normalizing score is zero where the protocol divides by it.
struct DegenerateScore : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (CSV/JSON).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sera

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sera/matrix.hpp"

namespace sera {

enum class MissingPolicy { Error, DropRows };

// Encoded feature matrix plus continuous target. Nominal columns arrive
// one-hot encoded; the original column names map to their emitted columns.
struct Dataset {
    Matrix features;
    std::vector<double> target;
    std::vector<std::string> feature_names;
    std::map<std::string, std::vector<std::string>> nominal_map;
    std::size_t n_numeric_features = 0; // original numeric feature columns
    std::size_t dropped_rows = 0;

    std::size_t n_rows() const { return target.size(); }
};

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 MissingPolicy on_missing = MissingPolicy::Error);

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows);

} // namespace sera

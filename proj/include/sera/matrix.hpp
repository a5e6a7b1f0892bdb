#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sera/errors.hpp"

namespace sera {

// Row-major dense matrix of binary64 values.
struct Matrix {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : values(r * c, fill), rows(r), cols(c) {}

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
};

} // namespace sera

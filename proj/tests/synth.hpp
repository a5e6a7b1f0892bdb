#pragma once

// Synthetic data generators shared by the test suites. mt19937_64 output is
// fixed by the standard, so every fixture is reproducible byte for byte.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sera/dataset.hpp"
#include "sera/io_util.hpp"

namespace synth {

inline double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal(std::mt19937_64& rng) {
    double u1 = uniform(rng);
    while (u1 <= 0.0) u1 = uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793 * uniform(rng));
}

// Right-skewed regression benchmark: five informative features driving a
// log-normal target. Extremes are predictable from the features.
inline sera::Dataset lognormal_benchmark(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    sera::Dataset ds;
    ds.features = sera::Matrix(n, 5);
    ds.feature_names = {"x1", "x2", "x3", "x4", "x5"};
    ds.n_numeric_features = 5;
    ds.target.resize(n);
    const double w[5] = {1.0, 0.8, 0.6, 0.4, 0.2};
    for (std::size_t i = 0; i < n; ++i) {
        double z = 0.3 * normal(rng);
        for (std::size_t j = 0; j < 5; ++j) {
            const double x = normal(rng);
            ds.features.at(i, j) = x;
            z += w[j] * x;
        }
        ds.target[i] = std::exp(1.5 + 0.6 * z);
    }
    return ds;
}

inline void write_csv(const sera::Dataset& ds, const std::string& path,
                      const std::string& target_name = "y") {
    std::string out;
    for (const auto& name : ds.feature_names) out += name + ",";
    out += target_name + "\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.features.cols; ++j)
            out += sera::fmt_g17(ds.features.at(i, j)) + ",";
        out += sera::fmt_g17(ds.target[i]) + "\n";
    }
    sera::atomic_write_file(path, out);
}

} // namespace synth

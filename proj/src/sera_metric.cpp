#include "sera/sera_metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sera {

namespace {

void check_grid(const RelevanceGrid& grid) {
    if (grid.steps < 1)
        throw InvalidInput("RelevanceGrid: steps must be >= 1, got " +
                           std::to_string(grid.steps));
}

void check_lengths(std::size_t a, std::size_t b, const char* op) {
    if (a != b)
        throw InvalidInput(std::string(op) + ": length mismatch (" +
                           std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void check_relevances(std::span<const double> relevances, const char* op) {
    for (double r : relevances)
        if (!(r >= 0.0 && r <= 1.0))
            throw InvalidInput(std::string(op) + ": relevance outside [0,1]");
}

} // namespace

std::vector<double> RelevanceGrid::cutoffs() const {
    std::vector<double> ts(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) ts[static_cast<std::size_t>(k)] = cutoff(k);
    return ts;
}

double ser_t(std::span<const double> y, std::span<const double> y_hat,
             std::span<const double> relevances, double t) {
    check_lengths(y.size(), y_hat.size(), "ser_t");
    check_lengths(y.size(), relevances.size(), "ser_t");
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidInput("ser_t: cutoff t must lie in [0,1]");

    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (relevances[i] >= t) {
            const double r = y_hat[i] - y[i];
            sum += r * r;
        }
    }
    return sum;
}

double sera_trapezoid(std::span<const double> y, std::span<const double> y_hat,
                      std::span<const double> relevances, const RelevanceGrid& grid) {
    check_lengths(y.size(), y_hat.size(), "sera_trapezoid");
    check_lengths(y.size(), relevances.size(), "sera_trapezoid");
    check_grid(grid);

    const int T = grid.steps;
    double sum = 0.5 * ser_t(y, y_hat, relevances, grid.cutoff(0));
    for (int k = 1; k < T; ++k) sum += ser_t(y, y_hat, relevances, grid.cutoff(k));
    sum += 0.5 * ser_t(y, y_hat, relevances, grid.cutoff(T));
    return sum / T;
}

double sera_analytic(std::span<const double> y, std::span<const double> y_hat,
                     std::span<const double> relevances) {
    check_lengths(y.size(), y_hat.size(), "sera_analytic");
    check_lengths(y.size(), relevances.size(), "sera_analytic");

    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y_hat[i] - y[i];
        sum += relevances[i] * r * r;
    }
    return sum;
}

SeraWeights sera_weights(std::span<const double> relevances, const RelevanceGrid& grid) {
    check_grid(grid);
    check_relevances(relevances, "sera_weights");

    const int T = grid.steps;
    const std::vector<double> ts = grid.cutoffs();
    const double top = ts.back();

    SeraWeights out;
    out.grid_steps = T;
    out.relevances.assign(relevances.begin(), relevances.end());
    out.weights.reserve(relevances.size());
    out.n_counts.reserve(relevances.size());
    for (double phi : relevances) {
        // n_j = |{k in 1..T-1 : phi >= t_k}| on the exact grid values.
        const auto first = ts.begin() + 1;
        const auto last = ts.begin() + T;
        const auto n = static_cast<int>(std::upper_bound(first, last, phi) - first);
        const int at_top = phi >= top ? 1 : 0;
        out.n_counts.push_back(n);
        out.weights.push_back((1.0 + 2.0 * n + at_top) / T);
    }
    return out;
}

std::vector<double> sera_gradient(std::span<const double> y,
                                  std::span<const double> y_hat,
                                  const SeraWeights& weights) {
    check_lengths(y.size(), y_hat.size(), "sera_gradient");
    check_lengths(y.size(), weights.size(), "sera_gradient");

    std::vector<double> g(y.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        g[j] = weights.weights[j] * (y_hat[j] - y[j]);
    return g;
}

std::vector<double> sera_hessian(const SeraWeights& weights) {
    return weights.weights;
}

std::vector<double> sera_gradient_direct(std::span<const double> y,
                                         std::span<const double> y_hat,
                                         std::span<const double> relevances,
                                         const RelevanceGrid& grid) {
    check_lengths(y.size(), y_hat.size(), "sera_gradient_direct");
    check_lengths(y.size(), relevances.size(), "sera_gradient_direct");
    check_grid(grid);

    const int T = grid.steps;
    std::vector<double> g(y.size(), 0.0);
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double r = y_hat[j] - y[j];
        double acc = relevances[j] >= grid.cutoff(0) ? 0.5 * r : 0.0;
        for (int k = 1; k < T; ++k)
            if (relevances[j] >= grid.cutoff(k)) acc += r;
        if (relevances[j] >= grid.cutoff(T)) acc += 0.5 * r;
        g[j] = 2.0 * acc / T;
    }
    return g;
}

std::vector<double> sera_hessian_direct(std::span<const double> relevances,
                                        const RelevanceGrid& grid) {
    check_grid(grid);
    check_relevances(relevances, "sera_hessian_direct");

    const int T = grid.steps;
    std::vector<double> h(relevances.size(), 0.0);
    for (std::size_t j = 0; j < relevances.size(); ++j) {
        double acc = relevances[j] >= grid.cutoff(0) ? 0.5 : 0.0;
        for (int k = 1; k < T; ++k)
            if (relevances[j] >= grid.cutoff(k)) acc += 1.0;
        if (relevances[j] >= grid.cutoff(T)) acc += 0.5;
        h[j] = 2.0 * acc / T;
    }
    return h;
}

SeraCurve sera_curve(std::span<const double> y, std::span<const double> y_hat,
                     std::span<const double> relevances, const RelevanceGrid& grid) {
    check_lengths(y.size(), y_hat.size(), "sera_curve");
    check_lengths(y.size(), relevances.size(), "sera_curve");
    check_grid(grid);

    SeraCurve curve;
    curve.cutoffs = grid.cutoffs();
    curve.ser.reserve(curve.cutoffs.size());
    for (double t : curve.cutoffs) curve.ser.push_back(ser_t(y, y_hat, relevances, t));
    return curve;
}

} // namespace sera

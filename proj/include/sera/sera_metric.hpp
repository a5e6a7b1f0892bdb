#pragma once

#include <span>
#include <vector>

#include "sera/errors.hpp"

namespace sera {

// Uniform grid of cutoffs t_k = k/T over [0,1].
struct RelevanceGrid {
    int steps = 1000; // T

    double cutoff(int k) const { return static_cast<double>(k) / steps; }
    std::vector<double> cutoffs() const;
};

// Per-instance quantities that make SERA a weighted squared error:
//   w_j = (1/T) * (1 + 2*n_j + [phi(y_j) >= t_T])
// where n_j counts the interior cutoffs the instance qualifies for.
// They depend only on the targets' relevances, never on predictions,
// so they are computed once per training set and reused every round.
struct SeraWeights {
    std::vector<double> weights;
    std::vector<double> relevances;
    std::vector<int> n_counts;
    int grid_steps = 1000;

    std::size_t size() const { return weights.size(); }
};

struct SeraCurve {
    std::vector<double> cutoffs; // strictly increasing
    std::vector<double> ser;     // non-increasing
};

// Sum of squared errors over instances with phi(y_i) >= t.
double ser_t(std::span<const double> y, std::span<const double> y_hat,
             std::span<const double> relevances, double t);

// Trapezoidal approximation of the SERA integral:
//   (1/T) * (SER_{t_0}/2 + sum_{k=1}^{T-1} SER_{t_k} + SER_{t_T}/2)
double sera_trapezoid(std::span<const double> y, std::span<const double> y_hat,
                      std::span<const double> relevances,
                      const RelevanceGrid& grid = {});

// Exact integral: sum_i phi(y_i) * (yhat_i - y_i)^2. Test oracle for the
// trapezoid, not the training loss.
double sera_analytic(std::span<const double> y, std::span<const double> y_hat,
                     std::span<const double> relevances);

SeraWeights sera_weights(std::span<const double> relevances,
                         const RelevanceGrid& grid = {});

// Closed-form first derivative: g_j = w_j * (yhat_j - y_j).
std::vector<double> sera_gradient(std::span<const double> y,
                                  std::span<const double> y_hat,
                                  const SeraWeights& weights);

// Closed-form second derivative: h_j = w_j, constant in the prediction.
std::vector<double> sera_hessian(const SeraWeights& weights);

// Reference derivatives: the trapezoidal rule applied directly to the
// indicator-gated integrals, cutoff by cutoff.
std::vector<double> sera_gradient_direct(std::span<const double> y,
                                         std::span<const double> y_hat,
                                         std::span<const double> relevances,
                                         const RelevanceGrid& grid = {});
std::vector<double> sera_hessian_direct(std::span<const double> relevances,
                                        const RelevanceGrid& grid = {});

// SER_t sampled at every grid cutoff.
SeraCurve sera_curve(std::span<const double> y, std::span<const double> y_hat,
                     std::span<const double> relevances,
                     const RelevanceGrid& grid = {});

} // namespace sera

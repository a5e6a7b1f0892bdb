#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sera/errors.hpp"

namespace sera {

// Which side of the target distribution carries the extreme (rare) values.
enum class ExtremeType { Low, High, Both };

std::string to_string(ExtremeType type);
std::optional<ExtremeType> extreme_type_from_string(std::string_view name);

struct BoxplotStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double medcouple = 0.0;
    double lower_fence = 0.0;
    double upper_fence = 0.0;
};

struct ControlPoint {
    double y = 0.0;
    double relevance = 0.0;
    double slope = 0.0;
};

// Piecewise monotone cubic map phi: Y -> [0,1]. Immutable after construction;
// safe to evaluate from many threads.
class RelevanceFunction {
public:
    // Points must be strictly increasing in y, relevance in [0,1], >= 2 of them.
    RelevanceFunction(std::vector<ControlPoint> points, ExtremeType type);

    double operator()(double y) const;
    const std::vector<ControlPoint>& control_points() const { return points_; }
    ExtremeType extreme_type() const { return type_; }

private:
    std::vector<ControlPoint> points_;
    ExtremeType type_;
};

// Robust skewness statistic in [-1,1]; median of the pairwise kernel over
// points straddling the sample median. Naive O(n^2) evaluation.
double medcouple(std::span<const double> sample);

// Quartiles by type-7 linear interpolation plus medcouple-scaled fences.
BoxplotStats adjusted_boxplot(std::span<const double> sample);

ExtremeType infer_extreme_type(std::span<const double> sample, const BoxplotStats& stats);

RelevanceFunction build_relevance(std::span<const double> sample,
                                  std::optional<ExtremeType> type_override = std::nullopt);

double evaluate_relevance(const RelevanceFunction& phi, double y);
std::vector<double> evaluate_relevance(const RelevanceFunction& phi,
                                       std::span<const double> ys);

} // namespace sera

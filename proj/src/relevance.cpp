#include "sera/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace sera {

std::string to_string(ExtremeType type) {
    switch (type) {
    case ExtremeType::Low: return "low";
    case ExtremeType::High: return "high";
    case ExtremeType::Both: return "both";
    }
    return "both";
}

std::optional<ExtremeType> extreme_type_from_string(std::string_view name) {
    if (name == "low" || name == "L") return ExtremeType::Low;
    if (name == "high" || name == "H") return ExtremeType::High;
    if (name == "both" || name == "B") return ExtremeType::Both;
    return std::nullopt;
}

namespace {

std::vector<double> sorted_finite_copy(std::span<const double> sample, const char* op) {
    if (sample.size() < 3)
        throw InvalidInput(std::string(op) + ": need at least 3 values, got " +
                           std::to_string(sample.size()));
    std::vector<double> xs(sample.begin(), sample.end());
    for (double x : xs)
        if (!std::isfinite(x))
            throw InvalidInput(std::string(op) + ": sample contains non-finite values");
    std::sort(xs.begin(), xs.end());
    return xs;
}

double sorted_median(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Type-7 quantile: linear interpolation between order statistics.
double quantile_type7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

double medcouple(std::span<const double> sample) {
    const std::vector<double> xs = sorted_finite_copy(sample, "medcouple");
    const double m = sorted_median(xs);

    // left: values <= m, right: values >= m (median ties belong to both).
    const auto left_end = std::upper_bound(xs.begin(), xs.end(), m);
    const auto right_begin = std::lower_bound(xs.begin(), xs.end(), m);
    const std::size_t n_left = static_cast<std::size_t>(left_end - xs.begin());
    const std::size_t n_tied = static_cast<std::size_t>(left_end - right_begin);

    std::vector<double> kernels;
    kernels.reserve(n_left * (xs.size() - (n_left - n_tied)));
    for (std::size_t i = 0; i < n_left; ++i) {
        const double xi = xs[i];
        // 1-based position of xi inside the tied block, 0 if not tied.
        const std::size_t tie_i = xi == m ? i - (n_left - n_tied) + 1 : 0;
        for (std::size_t j = n_left - n_tied; j < xs.size(); ++j) {
            const double xj = xs[j];
            if (xi == m && xj == m) {
                // Sign kernel for pairs tied at the median.
                const std::size_t tie_j = j - (n_left - n_tied) + 1;
                const auto s = static_cast<std::ptrdiff_t>(tie_i + tie_j) - 1 -
                               static_cast<std::ptrdiff_t>(n_tied);
                kernels.push_back(s == 0 ? 0.0 : (s > 0 ? 1.0 : -1.0));
            } else {
                kernels.push_back(((xj - m) - (m - xi)) / (xj - xi));
            }
        }
    }

    std::sort(kernels.begin(), kernels.end());
    return sorted_median(kernels);
}

BoxplotStats adjusted_boxplot(std::span<const double> sample) {
    const std::vector<double> xs = sorted_finite_copy(sample, "adjusted_boxplot");

    BoxplotStats stats;
    stats.q1 = quantile_type7(xs, 0.25);
    stats.median = quantile_type7(xs, 0.50);
    stats.q3 = quantile_type7(xs, 0.75);
    stats.iqr = stats.q3 - stats.q1;
    stats.medcouple = medcouple(sample);

    const double mc = stats.medcouple;
    const double lo_scale = mc >= 0.0 ? std::exp(-4.0 * mc) : std::exp(-3.0 * mc);
    const double hi_scale = mc >= 0.0 ? std::exp(3.0 * mc) : std::exp(4.0 * mc);
    stats.lower_fence = stats.q1 - 1.5 * lo_scale * stats.iqr;
    stats.upper_fence = stats.q3 + 1.5 * hi_scale * stats.iqr;
    return stats;
}

ExtremeType infer_extreme_type(std::span<const double> sample, const BoxplotStats& stats) {
    bool below = false;
    bool above = false;
    for (double x : sample) {
        below = below || x < stats.lower_fence;
        above = above || x > stats.upper_fence;
    }
    if (below && !above) return ExtremeType::Low;
    if (above && !below) return ExtremeType::High;
    return ExtremeType::Both; // both sides, or no outliers at all
}

RelevanceFunction build_relevance(std::span<const double> sample,
                                  std::optional<ExtremeType> type_override) {
    const BoxplotStats stats = adjusted_boxplot(sample);
    if (stats.iqr <= 0.0)
        throw DegenerateDistribution("build_relevance: zero IQR, relevance undefined");

    const ExtremeType type =
        type_override ? *type_override : infer_extreme_type(sample, stats);

    std::vector<ControlPoint> points;
    if (type != ExtremeType::High)
        points.push_back({stats.lower_fence, 1.0, 0.0});
    points.push_back({stats.median, 0.0, 0.0});
    if (type != ExtremeType::Low)
        points.push_back({stats.upper_fence, 1.0, 0.0});
    return {std::move(points), type};
}

RelevanceFunction::RelevanceFunction(std::vector<ControlPoint> points, ExtremeType type)
    : points_(std::move(points)), type_(type) {
    if (points_.size() < 2)
        throw InvalidInput("RelevanceFunction: need at least 2 control points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].y) || points_[i].relevance < 0.0 ||
            points_[i].relevance > 1.0)
            throw InvalidInput("RelevanceFunction: control point out of range");
        if (i > 0 && !(points_[i - 1].y < points_[i].y))
            throw InvalidInput("RelevanceFunction: control point ys must be strictly increasing");
    }
}

double RelevanceFunction::operator()(double y) const {
    if (!std::isfinite(y))
        throw InvalidInput("evaluate_relevance: non-finite y");
    if (y <= points_.front().y) return points_.front().relevance;
    if (y >= points_.back().y) return points_.back().relevance;

    const auto it = std::upper_bound(
        points_.begin(), points_.end(), y,
        [](double v, const ControlPoint& p) { return v < p.y; });
    const ControlPoint& b = *it;
    const ControlPoint& a = *(it - 1);
    if (y == a.y) return a.relevance;

    // Cubic Hermite with zero end slopes: h(s) = 3s^2 - 2s^3, monotone on [0,1].
    const double s = (y - a.y) / (b.y - a.y);
    const double blend = s * s * (3.0 - 2.0 * s);
    const double v = a.relevance + (b.relevance - a.relevance) * blend;
    return std::clamp(v, 0.0, 1.0);
}

double evaluate_relevance(const RelevanceFunction& phi, double y) { return phi(y); }

std::vector<double> evaluate_relevance(const RelevanceFunction& phi,
                                       std::span<const double> ys) {
    std::vector<double> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(phi(y));
    return out;
}

} // namespace sera

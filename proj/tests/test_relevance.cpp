#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sera/relevance.hpp"

using namespace sera;

namespace {

// Fixed draws used across the distribution fixtures (mt19937_64 output is
// pinned by the standard, so these are stable).
std::vector<double> lognormal_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) {
        const double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double z =
            std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
        x = std::exp(z);
    }
    return xs;
}

std::vector<double> negate(std::vector<double> xs) {
    for (auto& x : xs) x = -x;
    return xs;
}

std::vector<double> mirrored_symmetric(std::size_t half, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> xs = {0.0};
    for (std::size_t i = 0; i < half; ++i) {
        const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 10.0;
        xs.push_back(v);
        xs.push_back(-v);
    }
    return xs;
}

} // namespace

TEST_CASE("medcouple on symmetric integer sample is exactly zero") {
    const std::vector<double> xs = {1, 2, 3, 4, 5};
    CHECK(medcouple(xs) == 0.0);
}

TEST_CASE("medcouple frozen values from the exact-arithmetic oracle") {
    // Values computed ahead of time with an exact rational brute-force
    // enumeration of the kernel (and cross-checked against statsmodels).
    // A single far outlier in n=7 does not move the statistic at all.
    const std::vector<double> spec7 = {0, 1, 2, 3, 4, 5, 100};
    CHECK(medcouple(spec7) == doctest::Approx(0.0).epsilon(1e-15));

    // Right-skewed sample with a 3-way tie at the median: 117/152.
    const std::vector<double> skew10 = {1, 2, 2, 3, 3, 3, 4, 10, 20, 50};
    CHECK(medcouple(skew10) == doctest::Approx(117.0 / 152.0).epsilon(1e-15));

    const std::vector<double> skew9 = {1, 1, 2, 2, 3, 4, 9, 20, 70};
    CHECK(medcouple(skew9) == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("medcouple antisymmetry: mc(-x) == -mc(x)") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 5 + rng() % 40;
        std::vector<double> xs(n);
        for (auto& x : xs)
            x = std::pow(static_cast<double>(rng() >> 11) * 0x1.0p-53, 3.0) * 50.0;
        const double mc = medcouple(xs);
        CHECK(medcouple(negate(xs)) == -mc);
        CHECK(mc >= -1.0);
        CHECK(mc <= 1.0);
    }
}

TEST_CASE("medcouple input validation") {
    CHECK_THROWS_AS(medcouple(std::vector<double>{1.0, 2.0}), InvalidInput);
    CHECK_THROWS_AS(medcouple(std::vector<double>{1.0, 2.0, std::nan("")}),
                    InvalidInput);
    CHECK_THROWS_AS(
        medcouple(std::vector<double>{1.0, 2.0, std::numeric_limits<double>::infinity()}),
        InvalidInput);
}

TEST_CASE("type-7 quantiles on 1..100") {
    std::vector<double> xs(100);
    for (int i = 0; i < 100; ++i) xs[static_cast<std::size_t>(i)] = i + 1;
    const BoxplotStats stats = adjusted_boxplot(xs);
    CHECK(stats.q1 == doctest::Approx(25.75).epsilon(1e-15));
    CHECK(stats.median == doctest::Approx(50.5).epsilon(1e-15));
    CHECK(stats.q3 == doctest::Approx(75.25).epsilon(1e-15));
    CHECK(stats.iqr == doctest::Approx(49.5).epsilon(1e-15));
}

TEST_CASE("symmetric samples fall back to Tukey fences") {
    const std::vector<double> xs = mirrored_symmetric(40, 11);
    const BoxplotStats stats = adjusted_boxplot(xs);
    CHECK(stats.medcouple == 0.0);
    CHECK(stats.lower_fence == doctest::Approx(stats.q1 - 1.5 * stats.iqr));
    CHECK(stats.upper_fence == doctest::Approx(stats.q3 + 1.5 * stats.iqr));
}

TEST_CASE("right-skewed sample widens the upper fence") {
    const std::vector<double> xs = lognormal_sample(500, 42);
    const BoxplotStats stats = adjusted_boxplot(xs);
    CHECK(stats.medcouple > 0.0);
    CHECK(stats.upper_fence - stats.q3 > stats.q1 - stats.lower_fence);
    CHECK(stats.lower_fence <= stats.q1);
    CHECK(stats.upper_fence >= stats.q3);
    CHECK(stats.q1 <= stats.median);
    CHECK(stats.median <= stats.q3);
}

TEST_CASE("extreme type inference") {
    const std::vector<double> high = lognormal_sample(500, 42);
    const BoxplotStats hs = adjusted_boxplot(high);
    REQUIRE(std::none_of(high.begin(), high.end(),
                         [&](double x) { return x < hs.lower_fence; }));
    REQUIRE(std::any_of(high.begin(), high.end(),
                        [&](double x) { return x > hs.upper_fence; }));
    CHECK(infer_extreme_type(high, hs) == ExtremeType::High);

    const std::vector<double> low = negate(high);
    CHECK(infer_extreme_type(low, adjusted_boxplot(low)) == ExtremeType::Low);

    SUBCASE("outliers on both sides") {
        std::vector<double> both = mirrored_symmetric(50, 3);
        both.push_back(1e6);
        both.push_back(-1e6);
        const BoxplotStats bs = adjusted_boxplot(both);
        CHECK(infer_extreme_type(both, bs) == ExtremeType::Both);
    }

    SUBCASE("no outliers defaults to both") {
        const std::vector<double> xs = {1, 2, 3, 4, 5};
        CHECK(infer_extreme_type(xs, adjusted_boxplot(xs)) == ExtremeType::Both);
    }

    SUBCASE("a value exactly on the fence is not an outlier") {
        const std::vector<double> xs = {1, 2, 3, 4, 5};
        const BoxplotStats stats = adjusted_boxplot(xs);
        std::vector<double> with_tie = xs;
        with_tie.push_back(stats.upper_fence);
        // Re-using the original stats: the tied value sits on the fence.
        CHECK(infer_extreme_type(with_tie, stats) == ExtremeType::Both);
    }
}

TEST_CASE("extreme type is invariant under positive affine maps") {
    std::mt19937_64 rng(5);
    const std::vector<double> base = lognormal_sample(300, 99);
    const ExtremeType expected = infer_extreme_type(base, adjusted_boxplot(base));
    for (int rep = 0; rep < 10; ++rep) {
        const double a = 0.1 + static_cast<double>(rng() >> 11) * 0x1.0p-53 * 5.0;
        const double b = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 100.0;
        std::vector<double> mapped = base;
        for (auto& x : mapped) x = a * x + b;
        CHECK(infer_extreme_type(mapped, adjusted_boxplot(mapped)) == expected);
    }
}

TEST_CASE("build_relevance control points per extreme type") {
    const std::vector<double> xs = lognormal_sample(400, 7);
    const BoxplotStats stats = adjusted_boxplot(xs);

    const RelevanceFunction both = build_relevance(xs, ExtremeType::Both);
    REQUIRE(both.control_points().size() == 3);
    CHECK(both.control_points()[0].y == stats.lower_fence);
    CHECK(both.control_points()[0].relevance == 1.0);
    CHECK(both.control_points()[1].y == stats.median);
    CHECK(both.control_points()[1].relevance == 0.0);
    CHECK(both.control_points()[2].y == stats.upper_fence);
    CHECK(both.control_points()[2].relevance == 1.0);
    for (const ControlPoint& p : both.control_points()) CHECK(p.slope == 0.0);

    const RelevanceFunction low = build_relevance(xs, ExtremeType::Low);
    REQUIRE(low.control_points().size() == 2);
    CHECK(low.control_points()[0].y == stats.lower_fence);
    CHECK(low.control_points()[1].y == stats.median);

    const RelevanceFunction high = build_relevance(xs, ExtremeType::High);
    REQUIRE(high.control_points().size() == 2);
    CHECK(high.control_points()[0].y == stats.median);
    CHECK(high.control_points()[1].y == stats.upper_fence);
}

TEST_CASE("build_relevance rejects degenerate samples") {
    const std::vector<double> flat = {3.0, 3.0, 3.0, 3.0, 3.0};
    CHECK_THROWS_AS(build_relevance(flat), DegenerateDistribution);
}

TEST_CASE("relevance evaluation hits knots, clamps, and interpolates") {
    const std::vector<double> xs = lognormal_sample(400, 7);
    const BoxplotStats stats = adjusted_boxplot(xs);
    const RelevanceFunction phi = build_relevance(xs, ExtremeType::Both);

    CHECK(phi(stats.median) == 0.0);
    CHECK(phi(stats.lower_fence) == 1.0);
    CHECK(phi(stats.upper_fence) == 1.0);
    CHECK(phi(stats.upper_fence + 10.0) == 1.0);
    CHECK(phi(stats.lower_fence - 10.0) == 1.0);

    // Midpoint of a 0 -> 1 Hermite segment with zero end slopes is exactly 1/2.
    const double mid = stats.median + 0.5 * (stats.upper_fence - stats.median);
    CHECK(phi(mid) == doctest::Approx(0.5).epsilon(1e-12));

    const RelevanceFunction high = build_relevance(xs, ExtremeType::High);
    const double v = high(mid);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(high(mid + 0.01 * stats.iqr) > v);

    CHECK_THROWS_AS(phi(std::nan("")), InvalidInput);
}

TEST_CASE("relevance stays in [0,1] and is side-monotone on fixtures") {
    const std::vector<std::vector<double>> fixtures = {
        mirrored_symmetric(60, 1),
        lognormal_sample(400, 2),
        negate(lognormal_sample(400, 3)),
        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
        [] {
            std::vector<double> xs = mirrored_symmetric(100, 4);
            xs.push_back(400.0);
            xs.push_back(-380.0);
            return xs;
        }(),
    };

    for (const auto& xs : fixtures) {
        const RelevanceFunction phi = build_relevance(xs);
        const BoxplotStats stats = adjusted_boxplot(xs);
        const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        const double span = *hi - *lo;
        double prev_above = -1.0;
        double prev_below = -1.0;
        for (int i = 0; i <= 2000; ++i) {
            const double y = *lo - span + (3.0 * span) * i / 2000.0;
            const double v = phi(y);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (y >= stats.median && phi.extreme_type() != ExtremeType::Low) {
                if (prev_above >= 0.0) CHECK(v >= prev_above);
                prev_above = v;
            }
            if (y <= stats.median && phi.extreme_type() != ExtremeType::High) {
                if (prev_below >= 0.0) CHECK(v <= prev_below);
                prev_below = v;
            }
        }
    }
}

TEST_CASE("relevance is continuous at interior control points") {
    const std::vector<double> xs = lognormal_sample(400, 8);
    const RelevanceFunction phi = build_relevance(xs, ExtremeType::Both);
    for (const ControlPoint& p : phi.control_points()) {
        const double eps = 1e-9 * std::max(1.0, std::fabs(p.y));
        CHECK(phi(p.y + eps) == doctest::Approx(p.relevance).epsilon(1e-6));
        CHECK(phi(p.y - eps) == doctest::Approx(p.relevance).epsilon(1e-6));
    }
}

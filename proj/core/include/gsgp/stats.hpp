#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsgp/engine.hpp"

namespace gsgp {

/// Middle order statistic; mean of the two middle values for even lengths.
/// Throws std::invalid_argument on an empty list.
double median(std::span<const double> values);

/// Quantile by linear interpolation between closest ranks (the convention
/// where the q-th quantile of n sorted values sits at position q*(n-1)).
/// Requires sorted non-empty input and q in [0, 1].
double quantile_linear(std::span<const double> sorted_values, double q);

enum class wilcoxon_mode : std::uint8_t { exact, normal_approx };

/// Two-sided Wilcoxon rank-sum p-value in (0, 1]. Ties take midranks in
/// both modes. Exact mode enumerates every assignment of the pooled ranks
/// (requires |a| + |b| <= 20, otherwise throws directing to normal_approx);
/// approx mode uses the normal approximation with tie-corrected variance
/// and a 0.5 continuity correction.
double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                         wilcoxon_mode mode);

/// Five-number summary with Tukey whiskers: each whisker is the most extreme
/// datum still within 1.5 * IQR of its quartile; data beyond are outliers.
struct box_summary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;   // ascending
};

/// Requires at least 4 values.
box_summary summarize_box(std::span<const double> values);

/// Per-generation medians and quartiles of best train/test RMSE across runs.
struct curve_summary {
    std::vector<double> median_train;
    std::vector<double> median_test;
    std::vector<double> q1_train;
    std::vector<double> q3_train;
    std::vector<double> q1_test;
    std::vector<double> q3_test;

    std::size_t generations() const noexcept { return median_train.size(); }
};

/// Requires >= 1 traces of equal record counts.
curve_summary summarize_curves(const std::vector<run_trace>& traces);

/// Last-record values of each trace, the per-run scalars the box plots and
/// rank-sum tests compare.
std::vector<double> final_train_rmse(const std::vector<run_trace>& traces);
std::vector<double> final_test_rmse(const std::vector<run_trace>& traces);

}

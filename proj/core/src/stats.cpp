#include "gsgp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsgp {

double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double quantile_linear(std::span<const double> sorted_values, double q) {
    if (sorted_values.empty()) throw std::invalid_argument("quantile_linear: empty list");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("quantile_linear: q must be in [0, 1]");
    const double h = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    if (lo == hi) return sorted_values[lo];
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

namespace {

// Midranks of the pooled sample (1-based; tied values share their average
// rank). Also reports the size of every tie group for variance correction.
std::vector<double> pooled_midranks(std::span<const double> a, std::span<const double> b,
                                    std::vector<std::size_t>& tie_groups) {
    const std::size_t total = a.size() + b.size();
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    const auto value = [&](std::size_t i) {
        return i < a.size() ? a[i] : b[i - a.size()];
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return value(x) < value(y); });

    std::vector<double> ranks(total);
    tie_groups.clear();
    std::size_t i = 0;
    while (i < total) {
        std::size_t j = i;
        while (j + 1 < total && value(order[j + 1]) == value(order[i])) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        tie_groups.push_back(j - i + 1);
        i = j + 1;
    }
    return ranks;
}

double exact_p(const std::vector<double>& ranks, std::size_t n, double observed_dev) {
    // Enumerates every n-subset of the pooled rank positions and counts the
    // assignments at least as extreme as the observed rank sum.
    const std::size_t total = ranks.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    const double mu =
        static_cast<double>(n) * static_cast<double>(total + 1) / 2.0;

    std::uint64_t extreme = 0;
    std::uint64_t count = 0;
    while (true) {
        double w = 0.0;
        for (const std::size_t i : idx) w += ranks[i];
        if (std::abs(w - mu) >= observed_dev - 1e-9) ++extreme;
        ++count;

        // next combination in lexicographic order
        std::size_t k = n;
        while (k > 0 && idx[k - 1] == total - n + (k - 1)) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t i = k; i < n; ++i) idx[i] = idx[i - 1] + 1;
    }
    return static_cast<double>(extreme) / static_cast<double>(count);
}

double approx_p(const std::vector<double>& ranks, std::size_t n,
                const std::vector<std::size_t>& tie_groups, double observed_dev) {
    const auto total = static_cast<double>(ranks.size());
    const auto nn = static_cast<double>(n);
    const double mm = total - nn;
    double tie_term = 0.0;
    for (const std::size_t t : tie_groups) {
        const auto td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double variance =
        nn * mm / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if (variance <= 0.0) return 1.0;   // every pooled value identical
    const double z = std::max(0.0, observed_dev - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}

double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                         wilcoxon_mode mode) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: both samples must be non-empty");
    const std::size_t total = a.size() + b.size();
    if (mode == wilcoxon_mode::exact && total > 20)
        throw std::invalid_argument(
            "wilcoxon_rank_sum: exact mode enumerates C(" + std::to_string(total) + ", " +
            std::to_string(a.size()) + ") assignments and is capped at 20 pooled values; " +
            "use normal_approx");

    std::vector<std::size_t> tie_groups;
    const std::vector<double> ranks = pooled_midranks(a, b, tie_groups);
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w += ranks[i];
    const double mu =
        static_cast<double>(a.size()) * static_cast<double>(total + 1) / 2.0;
    const double observed_dev = std::abs(w - mu);

    return mode == wilcoxon_mode::exact
               ? exact_p(ranks, a.size(), observed_dev)
               : approx_p(ranks, a.size(), tie_groups, observed_dev);
}

box_summary summarize_box(std::span<const double> values) {
    if (values.size() < 4)
        throw std::invalid_argument("summarize_box: need at least 4 values, got " +
                                    std::to_string(values.size()));
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    box_summary box;
    box.min = sorted.front();
    box.max = sorted.back();
    box.q1 = quantile_linear(sorted, 0.25);
    box.median = quantile_linear(sorted, 0.5);
    box.q3 = quantile_linear(sorted, 0.75);
    const double iqr = box.q3 - box.q1;
    const double lo_fence = box.q1 - 1.5 * iqr;
    const double hi_fence = box.q3 + 1.5 * iqr;

    box.whisker_low = box.q1;
    box.whisker_high = box.q3;
    for (const double v : sorted) {
        if (v >= lo_fence) {
            box.whisker_low = v;   // lowest datum inside the lower fence
            break;
        }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (*it <= hi_fence) {
            box.whisker_high = *it;
            break;
        }
    }
    for (const double v : sorted)
        if (v < lo_fence || v > hi_fence) box.outliers.push_back(v);
    return box;
}

curve_summary summarize_curves(const std::vector<run_trace>& traces) {
    if (traces.empty()) throw std::invalid_argument("summarize_curves: no traces");
    const std::size_t records = traces.front().records.size();
    for (const auto& t : traces)
        if (t.records.size() != records)
            throw std::invalid_argument("summarize_curves: traces have differing lengths (" +
                                        std::to_string(t.records.size()) + " vs " +
                                        std::to_string(records) + ")");

    curve_summary out;
    out.median_train.reserve(records);
    std::vector<double> train(traces.size()), test(traces.size());
    for (std::size_t g = 0; g < records; ++g) {
        for (std::size_t r = 0; r < traces.size(); ++r) {
            train[r] = traces[r].records[g].best_train_rmse;
            test[r] = traces[r].records[g].best_test_rmse;
        }
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        out.median_train.push_back(quantile_linear(train, 0.5));
        out.median_test.push_back(quantile_linear(test, 0.5));
        out.q1_train.push_back(quantile_linear(train, 0.25));
        out.q3_train.push_back(quantile_linear(train, 0.75));
        out.q1_test.push_back(quantile_linear(test, 0.25));
        out.q3_test.push_back(quantile_linear(test, 0.75));
    }
    return out;
}

namespace {

std::vector<double> finals(const std::vector<run_trace>& traces, bool test) {
    std::vector<double> out;
    out.reserve(traces.size());
    for (const auto& t : traces) {
        if (t.records.empty())
            throw std::invalid_argument("final RMSE: trace has no records");
        const auto& last = t.records.back();
        out.push_back(test ? last.best_test_rmse : last.best_train_rmse);
    }
    return out;
}

}

std::vector<double> final_train_rmse(const std::vector<run_trace>& traces) {
    return finals(traces, false);
}

std::vector<double> final_test_rmse(const std::vector<run_trace>& traces) {
    return finals(traces, true);
}

}

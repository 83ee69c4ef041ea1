#pragma once

// Test-side Monte Carlo helpers, kept independent of gmrf/diagnostics.hpp so
// that the library estimators are not used to check themselves.

#include <cmath>
#include <cstddef>
#include <vector>

namespace gmrf_test {

/// Standard error of the mean by non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
    const std::size_t len = x.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t t = 0; t < len; ++t) means[b] += x[b * len + t];
        means[b] /= static_cast<double>(len);
    }
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

inline double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Per-site Monte Carlo summary: mean and variance estimates with batch-means
/// standard errors for each.
struct SiteSummary {
    double mean = 0.0;
    double mean_se = 0.0;
    double var = 0.0;
    double var_se = 0.0;
};

inline SiteSummary summarize(const std::vector<double>& draws) {
    SiteSummary s;
    s.mean = mean_of(draws);
    s.mean_se = batch_means_se(draws);
    std::vector<double> sq(draws.size());
    for (std::size_t t = 0; t < draws.size(); ++t) sq[t] = (draws[t] - s.mean) * (draws[t] - s.mean);
    s.var = mean_of(sq);
    s.var_se = batch_means_se(sq);
    return s;
}

}  // namespace gmrf_test

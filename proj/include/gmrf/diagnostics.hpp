#pragma once

// Monte Carlo efficiency: autocorrelation, integrated autocorrelation time,
// effective sample size, cost per effective sample, and the Gelman-Rubin PSRF.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrf/errors.hpp"

namespace gmrf {

struct EfficiencyReport {
    double ess = 0.0;
    double iat = 0.0;
    double cpu_seconds = 0.0;
    double ces = 0.0;
    std::size_t n_retained = 0;
};

namespace detail {

/// Centered copy of the chain and its biased variance (divisor N).
inline double centered(std::span<const double> chain, std::vector<double>& out) {
    const double n = static_cast<double>(chain.size());
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
    out.resize(chain.size());
    double var = 0.0;
    for (std::size_t t = 0; t < chain.size(); ++t) {
        out[t] = chain[t] - mean;
        var += out[t] * out[t];
    }
    var /= n;
    if (!(var > 1e-300 * std::max(1.0, mean * mean))) {
        throw UndefinedVariance("chain has zero variance");
    }
    return var;
}

inline double autocovariance(const std::vector<double>& c, std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < c.size(); ++t) s += c[t] * c[t + lag];
    return s / static_cast<double>(c.size());
}

}  // namespace detail

/// Biased ACF estimates for lags 0..max_lag; element 0 is 1.
inline std::vector<double> acf(std::span<const double> chain, std::size_t max_lag) {
    if (chain.size() < 2) throw std::invalid_argument("acf: need at least two draws");
    if (max_lag >= chain.size()) throw std::invalid_argument("acf: max_lag must be below the chain length");
    std::vector<double> c;
    const double var = detail::centered(chain, c);
    std::vector<double> out(max_lag + 1);
    out[0] = 1.0;
    for (std::size_t l = 1; l <= max_lag; ++l) out[l] = detail::autocovariance(c, l) / var;
    return out;
}

inline constexpr std::size_t kIatMinLength = 50;

/// 1 + 2 sum_l rho(l), truncated by Geyer's initial positive sequence: pair
/// sums rho(2m) + rho(2m+1) are accumulated while they stay positive.
inline double iat(std::span<const double> chain) {
    if (chain.size() < kIatMinLength) {
        throw std::invalid_argument("iat: need at least " + std::to_string(kIatMinLength) + " draws");
    }
    std::vector<double> c;
    const double var = detail::centered(chain, c);
    double total = 0.0;
    for (std::size_t m = 0; 2 * m + 1 < c.size(); ++m) {
        const double r0 = m == 0 ? 1.0 : detail::autocovariance(c, 2 * m) / var;
        const double r1 = detail::autocovariance(c, 2 * m + 1) / var;
        const double pair = r0 + r1;
        if (!(pair > 0.0)) break;
        total += pair;
    }
    return 2.0 * total - 1.0;
}

inline double ess_from_iat(std::size_t n, double iat_value) {
    if (!(iat_value > 0.0)) throw std::invalid_argument("ess: iat must be positive");
    return static_cast<double>(n) / iat_value;
}

inline double ess(std::span<const double> chain) { return ess_from_iat(chain.size(), iat(chain)); }

/// Cost per effective sample: iat * T / N.
inline double ces(double cpu_seconds, std::size_t n_retained, double iat_value) {
    if (!(cpu_seconds > 0.0) || n_retained == 0 || !(iat_value > 0.0)) {
        throw std::invalid_argument("ces: all arguments must be positive");
    }
    return iat_value * cpu_seconds / static_cast<double>(n_retained);
}

inline EfficiencyReport efficiency_report(std::span<const double> chain, double cpu_seconds) {
    EfficiencyReport r;
    r.n_retained = chain.size();
    r.iat = iat(chain);
    r.ess = ess_from_iat(chain.size(), r.iat);
    r.cpu_seconds = cpu_seconds;
    r.ces = ces(cpu_seconds, chain.size(), r.iat);
    return r;
}

/// Monte Carlo standard error of the chain mean, sqrt(var * iat / N).
inline double mc_standard_error(std::span<const double> chain) {
    std::vector<double> c;
    const double var = detail::centered(chain, c);
    return std::sqrt(var * iat(chain) / static_cast<double>(chain.size()));
}

/// Potential scale reduction factor (Brooks & Gelman 1998, no chain splitting):
/// sqrt(V / W) with V = (n-1)/n W + (m+1)/(m n) B.
inline double gelman_rubin(std::span<const std::vector<double>> chains) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
    const std::size_t n = chains.front().size();
    if (n < 10) throw std::invalid_argument("gelman_rubin: chains must have at least 10 draws");
    for (const auto& c : chains) {
        if (c.size() != n) throw std::invalid_argument("gelman_rubin: chains must have equal length");
    }
    const double m = static_cast<double>(chains.size());
    const double nn = static_cast<double>(n);
    std::vector<double> means;
    double within = 0.0;
    for (const auto& c : chains) {
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / nn;
        double ss = 0.0;
        for (double v : c) ss += (v - mean) * (v - mean);
        within += ss / (nn - 1.0);
        means.push_back(mean);
    }
    within /= m;
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= nn / (m - 1.0);
    if (!(within > 0.0)) throw UndefinedVariance("gelman_rubin: zero within-chain variance");
    const double pooled = (nn - 1.0) / nn * within + (m + 1.0) / (m * nn) * between;
    return std::sqrt(pooled / within);
}

}  // namespace gmrf

#pragma once

// Polya-Gamma PG(b, z) variates for integer b.
//
// PG(1, z) uses Devroye's alternating-series rejection sampler on the
// exponentially tilted Jacobi density (Polson, Scott & Windle 2013): the
// proposal mixes a truncated inverse-Gaussian (left of t = 0.64) with a
// truncated exponential (right of t), and acceptance is decided by the
// alternating series of coefficients a_n(x). PG(b, z) for b <= 50 sums b
// independent PG(1, z) draws; larger b uses a normal with the exact moments.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gmrf/rng.hpp"

namespace gmrf {

struct PgParams {
    int b = 1;
    double z = 0.0;
};

/// Above this b, PG(b, z) is drawn from the moment-matched normal.
inline constexpr int kPgExactSumMax = 50;

/// E PG(b, z) = b tanh(z/2) / (2z), with limit b/4 at z = 0.
inline double pg_mean(double b, double z) {
    const double az = std::abs(z);
    if (az < 1e-6) {
        return b * (0.25 - az * az / 48.0);
    }
    return b * std::tanh(0.5 * az) / (2.0 * az);
}

/// Var PG(b, z) = b (sinh z - z) / (4 z^3 cosh^2(z/2)), with limit b/24 at z = 0.
inline double pg_variance(double b, double z) {
    const double az = std::abs(z);
    if (az < 1e-3) {
        // Taylor: b (1/24 - z^2/120 + ...)
        return b * (1.0 / 24.0 - az * az / 120.0);
    }
    const double c = std::cosh(0.5 * az);
    return b * (std::sinh(az) - az) / (4.0 * az * az * az * c * c);
}

namespace detail {

inline constexpr double kPgTrunc = 0.64;
inline constexpr double kPgBracket = 1e-12;

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// n-th coefficient of the alternating series for the J*(1, 0) density.
inline double pg_series_coef(int n, double x) {
    constexpr double pi = std::numbers::pi;
    const double k = n + 0.5;
    if (x > kPgTrunc) {
        return pi * k * std::exp(-0.5 * k * k * pi * pi * x);
    }
    return std::pow(2.0 / (pi * x), 1.5) * pi * k * std::exp(-2.0 * k * k / x);
}

// Probability of proposing from the exponential (right) piece, for z = |z|/2.
inline double pg_right_mass(double z) {
    constexpr double t = kPgTrunc;
    const double fz = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
    const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
    const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
    const double x0 = std::log(fz) + fz * t;
    const double xb = x0 - z + std::log(std_normal_cdf(b));
    const double xa = x0 + z + std::log(std_normal_cdf(a));
    const double q_over_p = 4.0 / std::numbers::pi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + q_over_p);
}

// Inverse-Gaussian(1/z, 1) truncated to (0, t).
inline double pg_truncated_inverse_gaussian(RngStream& s, double z) {
    constexpr double t = kPgTrunc;
    const double mu = 1.0 / z;
    double x = t + 1.0;
    if (mu > t) {
        double alpha = 0.0;
        while (s.uniform() > alpha) {
            double e1 = 0.0;
            double e2 = 0.0;
            do {
                e1 = s.exponential();
                e2 = s.exponential();
            } while (e1 * e1 > 2.0 * e2 / t);
            x = t / ((1.0 + t * e1) * (1.0 + t * e1));
            alpha = std::exp(-0.5 * z * z * x);
        }
    } else {
        while (x > t) {
            const double y = s.normal();
            const double y2 = y * y;
            const double half_mu = 0.5 * mu;
            x = mu + half_mu * mu * y2 - half_mu * std::sqrt(4.0 * mu * y2 + (mu * y2) * (mu * y2));
            if (s.uniform() > mu / (mu + x)) {
                x = mu * mu / x;
            }
        }
    }
    return x;
}

// One draw of J*(1, z); PG(1, 2z) has the law of J*(1, z) / 4.
inline double pg_jacobi_star(RngStream& s, double z) {
    constexpr double t = kPgTrunc;
    const double fz = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
    const double right_mass = pg_right_mass(z);
    for (;;) {
        double x = 0.0;
        if (s.uniform() < right_mass) {
            x = t + s.exponential() / fz;
        } else {
            x = pg_truncated_inverse_gaussian(s, z);
        }
        double sum = pg_series_coef(0, x);
        const double y = s.uniform() * sum;
        for (int n = 1;; ++n) {
            const double term = pg_series_coef(n, x);
            if (n % 2 == 1) {
                sum -= term;
                if (y <= sum) return x;
            } else {
                sum += term;
                if (y > sum) break;
            }
            if (term < kPgBracket * sum) {
                // bracket has collapsed; the partial sum decides
                if (y <= sum) return x;
                break;
            }
        }
    }
}

}  // namespace detail

/// One PG(1, z) variate.
inline double draw_pg1(RngStream& s, double z) {
    const double half = 0.5 * std::abs(z);
    return 0.25 * detail::pg_jacobi_star(s, half);
}

/// One PG(b, z) variate, b >= 1.
inline double draw_pg(RngStream& s, const PgParams& p) {
    if (p.b < 1) {
        throw std::invalid_argument("draw_pg: b must be >= 1");
    }
    if (p.b > kPgExactSumMax) {
        const double mean = pg_mean(p.b, p.z);
        const double sd = std::sqrt(pg_variance(p.b, p.z));
        for (;;) {
            const double x = mean + sd * s.normal();
            if (x > 0.0) return x;
        }
    }
    double total = 0.0;
    for (int i = 0; i < p.b; ++i) {
        total += draw_pg1(s, p.z);
    }
    return total;
}

}  // namespace gmrf

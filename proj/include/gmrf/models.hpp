#pragma once

// Gibbs samplers for two spatial models sharing a GMRF random effect gamma:
//
//  * Gaussian image model: y = 1 beta0 + gamma + eps, eps ~ N(0, sigma2 I),
//    intrinsic prior gamma ~ IAR with precision (D - W) / tau2, flat prior on
//    beta0, sigma2 and tau2 ~ InvGam(alpha, alpha).
//  * Binomial logit model: Y_i ~ Bin(m_i, logistic(beta0 + gamma_i)), proper
//    CAR prior gamma ~ N(0, tau2 (D - rho W)^{-1}), beta0 ~ N(0, 1000),
//    tau2 ~ InvGam(1, 1), with Polya-Gamma augmentation psi_i ~ PG(m_i, eta_i).
//
// The field update is delegated to a FieldKernel, which owns whatever the
// chosen strategy needs across iterations (coloring plan, worker pool, or the
// cached Cholesky factor).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrf/cholesky.hpp"
#include "gmrf/chromatic_pool.hpp"
#include "gmrf/field.hpp"
#include "gmrf/graph.hpp"
#include "gmrf/polya_gamma.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

enum class SamplerKind { single_site, chromatic, chromatic_parallel, block };

inline std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::single_site: return "single_site";
        case SamplerKind::chromatic: return "chromatic";
        case SamplerKind::chromatic_parallel: return "chromatic_parallel";
        case SamplerKind::block: return "block";
    }
    return "unknown";
}

inline SamplerKind parse_sampler_kind(const std::string& text) {
    if (text == "single_site") return SamplerKind::single_site;
    if (text == "chromatic") return SamplerKind::chromatic;
    if (text == "chromatic_parallel") return SamplerKind::chromatic_parallel;
    if (text == "block") return SamplerKind::block;
    throw std::invalid_argument("unknown sampler '" + text + "'");
}

inline bool is_chromatic(SamplerKind kind) {
    return kind == SamplerKind::chromatic || kind == SamplerKind::chromatic_parallel;
}

/// Strategy-specific resources for repeated draws of the field.
class FieldKernel {
public:
    FieldKernel(SamplerKind kind, const SparseMatrix& pattern, std::optional<Coloring> coloring = std::nullopt,
                std::size_t workers = 1, Ordering ordering = Ordering::rcm)
        : kind_(kind) {
        if (is_chromatic(kind) != coloring.has_value()) {
            throw std::invalid_argument("FieldKernel: a coloring is required for, and only for, chromatic samplers");
        }
        if (coloring) {
            plan_ = ChromaticPlan(pattern, *coloring);
            colors_ = plan_.colors();
        }
        if (kind == SamplerKind::chromatic_parallel && workers > 1) {
            pool_ = std::make_unique<ChromaticPool>(workers);
        }
        if (kind == SamplerKind::block) {
            cache_ = std::make_unique<CholeskyCache>(ordering);
        }
    }

    SamplerKind kind() const noexcept { return kind_; }
    std::size_t colors() const noexcept { return colors_; }

    void update(FieldState& state, const GmrfConditional& cond, const RngStream& base, std::uint64_t sweep) {
        switch (kind_) {
            case SamplerKind::single_site:
                single_site_sweep(state, cond, base, sweep);
                break;
            case SamplerKind::chromatic:
                chromatic_sweep(state, cond, plan_, base, sweep, nullptr);
                break;
            case SamplerKind::chromatic_parallel:
                chromatic_sweep(state, cond, plan_, base, sweep, pool_.get());
                break;
            case SamplerKind::block:
                block_sweep(state, cond, *cache_, base, sweep);
                break;
        }
    }

private:
    SamplerKind kind_;
    ChromaticPlan plan_;
    std::size_t colors_ = 0;
    std::unique_ptr<ChromaticPool> pool_;
    std::unique_ptr<CholeskyCache> cache_;
};

/// Wall-clock split of one Gibbs scan.
struct StepTimes {
    double field_seconds = 0.0;
    double hyper_seconds = 0.0;
};

struct NormalParams {
    double mean = 0.0;
    double sd = 1.0;
};

struct InvGammaParams {
    double shape = 1.0;
    double rate = 1.0;
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

struct ModelState {
    double beta0 = 0.0;
    FieldState gamma;
    double sigma2 = 1.0;  // Gaussian model only
    double tau2 = 1.0;
    std::vector<double> psi;  // binomial model only; 0 at unobserved sites
    std::uint64_t iteration = 0;
};

// ---------------------------------------------------------------------------
// Gaussian image model

struct GaussianImageModel {
    std::vector<double> y;
    MarkovGraph graph;
    double alpha = 0.001;

    SparseMatrix structure;  // D - W
    std::size_t rank = 0;    // n - number of connected components

    GaussianImageModel(std::vector<double> y_in, MarkovGraph graph_in, double alpha_in = 0.001)
        : y(std::move(y_in)), graph(std::move(graph_in)), alpha(alpha_in) {
        if (y.size() != graph.size()) {
            throw std::invalid_argument("GaussianImageModel: y and graph sizes differ");
        }
        if (!(alpha > 0.0)) throw std::invalid_argument("GaussianImageModel: alpha must be positive");
        structure = iar_structure(graph);
        rank = graph.size() - graph.connected_components();
    }

    std::size_t size() const noexcept { return y.size(); }
};

struct SimulatedImage {
    std::size_t side = 0;
    std::vector<double> truth;
    std::vector<double> observed;
};

/// p x p image of 5 exp(-|v|^2 / 2) / pi on pixel centers v evenly spaced over
/// [-3, 3]^2 (endpoints included), plus iid N(0, noise_sd^2) noise. Row-major.
inline SimulatedImage simulate_image(std::size_t p, double noise_sd, RngStream& s) {
    if (p < 2) throw std::invalid_argument("simulate_image: p must be at least 2");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("simulate_image: noise_sd must be nonnegative");
    SimulatedImage img;
    img.side = p;
    img.truth.resize(p * p);
    img.observed.resize(p * p);
    const double step = 6.0 / static_cast<double>(p - 1);
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            const double vr = -3.0 + step * static_cast<double>(r);
            const double vc = -3.0 + step * static_cast<double>(c);
            const double x = 5.0 * std::exp(-0.5 * (vr * vr + vc * vc)) / std::numbers::pi;
            img.truth[r * p + c] = x;
            img.observed[r * p + c] = noise_sd > 0.0 ? x + noise_sd * s.normal() : x;
        }
    }
    return img;
}

namespace detail {

inline std::vector<double> residual_without(std::span<const double> y, std::span<const double> gamma) {
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - gamma[i];
    return r;
}

}  // namespace detail

/// beta0 | y, gamma, sigma2 ~ N(1'(y - gamma) / n, sigma2 / n).
inline NormalParams beta0_conditional(const GaussianImageModel& m, std::span<const double> gamma, double sigma2) {
    const double nn = static_cast<double>(m.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) sum += m.y[i] - gamma[i];
    return {sum / nn, std::sqrt(sigma2 / nn)};
}

/// sigma2 | y, beta0, gamma ~ InvGam(alpha + n/2, alpha + |y - beta0 - gamma|^2 / 2).
inline InvGammaParams sigma2_conditional(const GaussianImageModel& m, double beta0, std::span<const double> gamma) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double e = m.y[i] - beta0 - gamma[i];
        rss += e * e;
    }
    return {m.alpha + 0.5 * static_cast<double>(m.size()), m.alpha + 0.5 * rss};
}

/// tau2 | gamma ~ InvGam(alpha + rank/2, alpha + gamma'(D - W)gamma / 2), where
/// rank = n - (number of connected components), i.e. n - 1 on a connected graph.
inline InvGammaParams tau2_conditional(const GaussianImageModel& m, std::span<const double> gamma) {
    const double smooth = std::max(quadratic_form(m.structure, gamma), 0.0);
    return {m.alpha + 0.5 * static_cast<double>(m.rank), m.alpha + 0.5 * smooth};
}

/// Holds the reusable conditional buffer and field kernel for one chain.
struct GaussianGibbs {
    const GaussianImageModel& model;
    FieldKernel kernel;
    GmrfConditional cond;
    std::vector<double> noise;
    std::vector<double> data;

    GaussianGibbs(const GaussianImageModel& m, SamplerKind kind, std::optional<Coloring> coloring = std::nullopt,
                  std::size_t workers = 1)
        : model(m), kernel(kind, m.structure, std::move(coloring), workers), noise(m.size()), data(m.size()) {
        std::vector<double> ones(m.size(), 1.0);
        cond = posterior_conditional(m.structure, 1.0, ones, ones);
    }
};

/// One scan: beta0, sigma2, tau2, then gamma with the kernel's strategy.
/// `chain` supplies the scalar draws; field draws come from substreams of `base`.
inline void gibbs_step_gaussian(ModelState& st, GaussianGibbs& g, RngStream& chain, const RngStream& base,
                                StepTimes* times = nullptr) {
    detail::Stopwatch clock;
    const auto& m = g.model;
    const std::size_t n = m.size();
    const auto& gamma = st.gamma.x;

    const auto b0 = beta0_conditional(m, gamma, st.sigma2);
    st.beta0 = draw_normal(chain, b0.mean, b0.sd);
    const auto s2 = sigma2_conditional(m, st.beta0, gamma);
    st.sigma2 = draw_inverse_gamma(chain, s2.shape, s2.rate);
    const auto t2 = tau2_conditional(m, gamma);
    st.tau2 = draw_inverse_gamma(chain, t2.shape, t2.rate);

    for (std::size_t i = 0; i < n; ++i) {
        g.noise[i] = 1.0 / st.sigma2;
        g.data[i] = (m.y[i] - st.beta0) / st.sigma2;
    }
    g.cond.update(m.structure, st.tau2, g.noise, g.data);
    const double hyper = clock.lap();
    g.kernel.update(st.gamma, g.cond, base, st.iteration);
    if (times != nullptr) {
        times->hyper_seconds = hyper;
        times->field_seconds = clock.lap();
    }
    ++st.iteration;
}

// ---------------------------------------------------------------------------
// Binomial logit model

struct BinomialLogitModel {
    std::vector<long> successes;
    std::vector<long> trials;
    std::vector<bool> observed;  // effective mask: false where missing or m_i = 0
    MarkovGraph graph;
    double rho = 0.995;
    double prior_var_beta = 1000.0;
    double tau_shape = 1.0;
    double tau_rate = 1.0;

    SparseMatrix structure;  // D - rho W

    BinomialLogitModel(std::vector<long> y, std::vector<long> m, std::vector<bool> obs, MarkovGraph g,
                       double rho_in = 0.995)
        : successes(std::move(y)), trials(std::move(m)), observed(std::move(obs)), graph(std::move(g)), rho(rho_in) {
        const std::size_t n = graph.size();
        if (successes.size() != n || trials.size() != n || observed.size() != n) {
            throw std::invalid_argument("BinomialLogitModel: data and graph sizes differ");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!observed[i]) continue;
            if (trials[i] < 0 || successes[i] < 0 || successes[i] > trials[i]) {
                throw std::invalid_argument("BinomialLogitModel: need 0 <= Y_i <= m_i at site " + std::to_string(i));
            }
            if (trials[i] == 0) observed[i] = false;
        }
        structure = proper_car_structure(graph, rho);
    }

    std::size_t size() const noexcept { return graph.size(); }

    /// kappa_i = Y_i - m_i / 2 at observed sites, 0 elsewhere.
    double kappa(std::size_t i) const {
        return observed[i] ? static_cast<double>(successes[i]) - 0.5 * static_cast<double>(trials[i]) : 0.0;
    }
};

struct SimulatedBinomial {
    std::vector<double> gamma;
    std::vector<long> successes;
    std::vector<long> trials;
    std::vector<bool> observed;
};

/// Draws gamma ~ N(0, tau2 (D - rho W)^{-1}) through a sparse Cholesky factor,
/// trial counts uniform on [0.75, 1.25] * mean_trials, and binomial successes.
/// Each site is missing independently with probability missing_fraction.
inline SimulatedBinomial simulate_binomial(const MarkovGraph& graph, double rho, double tau2, double beta0,
                                           long mean_trials, double missing_fraction, RngStream& s) {
    if (!(tau2 > 0.0) || mean_trials < 1 || missing_fraction < 0.0 || missing_fraction >= 1.0) {
        throw std::invalid_argument("simulate_binomial: invalid parameters");
    }
    const std::size_t n = graph.size();
    SparseMatrix q = proper_car_structure(graph, rho);
    for (double& v : q.values()) v /= tau2;
    const auto sym = symbolic_cholesky(q, Ordering::rcm);
    const auto factor = numeric_cholesky(sym, q);
    std::vector<double> z(n);
    for (auto& v : z) v = s.normal();
    solve_upper_in_place(factor, z);

    SimulatedBinomial out;
    out.gamma = unpermute(*sym, z);
    out.successes.resize(n);
    out.trials.resize(n);
    out.observed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = 0.75 + 0.5 * s.uniform();
        out.trials[i] = std::max<long>(1, std::lround(scale * static_cast<double>(mean_trials)));
        const double prob = 1.0 / (1.0 + std::exp(-(beta0 + out.gamma[i])));
        long y = 0;
        for (long t = 0; t < out.trials[i]; ++t) y += s.uniform() < prob ? 1 : 0;
        out.successes[i] = y;
        out.observed[i] = s.uniform() >= missing_fraction;
    }
    return out;
}

/// beta0 | psi, gamma under the N(0, prior_var_beta) prior: precision
/// 1/prior_var_beta + sum psi_i, mean sum(kappa_i - psi_i gamma_i) / precision,
/// sums over observed sites.
inline NormalParams beta0_conditional(const BinomialLogitModel& m, std::span<const double> psi,
                                      std::span<const double> gamma) {
    double precision = 1.0 / m.prior_var_beta;
    double linear = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.observed[i]) continue;
        precision += psi[i];
        linear += m.kappa(i) - psi[i] * gamma[i];
    }
    return {linear / precision, std::sqrt(1.0 / precision)};
}

/// tau2 | gamma ~ InvGam(shape + n/2, rate + gamma'(D - rho W)gamma / 2).
inline InvGammaParams tau2_conditional(const BinomialLogitModel& m, std::span<const double> gamma) {
    const double smooth = std::max(quadratic_form(m.structure, gamma), 0.0);
    return {m.tau_shape + 0.5 * static_cast<double>(m.size()), m.tau_rate + 0.5 * smooth};
}

struct BinomialGibbs {
    const BinomialLogitModel& model;
    FieldKernel kernel;
    GmrfConditional cond;
    std::vector<double> data;

    BinomialGibbs(const BinomialLogitModel& m, SamplerKind kind, std::optional<Coloring> coloring = std::nullopt,
                  std::size_t workers = 1)
        : model(m), kernel(kind, m.structure, std::move(coloring), workers), data(m.size()) {
        std::vector<double> ones(m.size(), 1.0);
        cond = posterior_conditional(m.structure, 1.0, ones, ones);
    }
};

/// One scan: psi, beta0, gamma, tau2.
inline void gibbs_step_binomial(ModelState& st, BinomialGibbs& g, RngStream& chain, const RngStream& base,
                                StepTimes* times = nullptr) {
    detail::Stopwatch clock;
    const auto& m = g.model;
    const std::size_t n = m.size();
    auto& gamma = st.gamma.x;
    st.psi.resize(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        if (!m.observed[i]) {
            st.psi[i] = 0.0;
            continue;
        }
        auto s = site_stream(base, StreamDomain::polya_gamma, st.iteration, i);
        st.psi[i] = draw_pg(s, {static_cast<int>(std::min<long>(m.trials[i], 1L << 30)), st.beta0 + gamma[i]});
    }

    const auto b0 = beta0_conditional(m, st.psi, gamma);
    st.beta0 = draw_normal(chain, b0.mean, b0.sd);

    for (std::size_t i = 0; i < n; ++i) {
        g.data[i] = m.observed[i] ? m.kappa(i) - st.psi[i] * st.beta0 : 0.0;
    }
    g.cond.update(m.structure, st.tau2, st.psi, g.data, /*allow_missing=*/true);
    double hyper = clock.lap();
    g.kernel.update(st.gamma, g.cond, base, st.iteration);
    const double field = clock.lap();

    const auto t2 = tau2_conditional(m, gamma);
    st.tau2 = draw_inverse_gamma(chain, t2.shape, t2.rate);
    hyper += clock.lap();
    if (times != nullptr) {
        times->hyper_seconds = hyper;
        times->field_seconds = field;
    }
    ++st.iteration;
}

}  // namespace gmrf

#pragma once

// Precision builders and the three field-update kernels: single-site Gibbs,
// chromatic Gibbs, and block sampling through a cached sparse Cholesky factor.
//
// Every kernel draws its standard normals from per-site substreams keyed by
// (sweep, index), so the draw used at a site does not depend on the order in
// which sites are visited or on which thread visits them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrf/cholesky.hpp"
#include "gmrf/chromatic_pool.hpp"
#include "gmrf/graph.hpp"
#include "gmrf/rng.hpp"
#include "gmrf/sparse_matrix.hpp"

namespace gmrf {

/// Substream domains. Field draws and Polya-Gamma draws never share a stream.
enum class StreamDomain : std::uint64_t { field = 1, polya_gamma = 2, hyper = 3, init = 4, data = 5 };

inline RngStream site_stream(const RngStream& base, StreamDomain domain, std::uint64_t sweep, std::size_t site) {
    return base.substream(static_cast<std::uint64_t>(domain), sweep, site);
}

struct KernelCounters {
    std::uint64_t symbolic_factorizations = 0;
    std::uint64_t numeric_factorizations = 0;
    std::uint64_t triangular_solves = 0;
    std::size_t factor_bytes = 0;  // peak bytes of Cholesky factor storage
};

/// D - W for the graph's weights. The diagonal is always stored, even where it is zero.
inline SparseMatrix iar_structure(const MarkovGraph& graph) {
    std::vector<Triplet> t;
    t.reserve(graph.size() + 2 * graph.num_edges());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        t.push_back({i, i, graph.weighted_degree(i)});
        const auto nb = graph.neighbors(i);
        const auto w = graph.weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            t.push_back({i, nb[k], -w[k]});
        }
    }
    return SparseMatrix::from_triplets(graph.size(), std::move(t));
}

/// D - rho W. Positive definiteness is not checked here; it surfaces as
/// NotPositiveDefinite when the matrix is factorized.
inline SparseMatrix proper_car_structure(const MarkovGraph& graph, double rho) {
    SparseMatrix q = iar_structure(graph);
    auto& v = q.values();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto cols = q.row_cols(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] != i) v[q.row_ptr()[i] + k] *= rho;
        }
    }
    return q;
}

/// Full conditional N(Qp^{-1} b, Qp^{-1}) of a GMRF.
class GmrfConditional {
public:
    GmrfConditional() = default;

    GmrfConditional(SparseMatrix precision, std::vector<double> b)
        : precision_(std::move(precision)), b_(std::move(b)) {
        if (b_.size() != precision_.size()) {
            throw std::invalid_argument("GmrfConditional: precision and b dimensions differ");
        }
        if (!precision_.structurally_symmetric()) {
            throw std::invalid_argument("GmrfConditional: precision must be symmetric");
        }
        locate_diagonal();
    }

    std::size_t size() const noexcept { return b_.size(); }
    const SparseMatrix& precision() const noexcept { return precision_; }
    const std::vector<double>& b() const noexcept { return b_; }
    std::span<const std::size_t> diagonal_positions() const noexcept { return diag_pos_; }
    double diagonal(std::size_t i) const { return precision_.values()[diag_pos_[i]]; }

    /// Rewrites values as diag(noise) + prior / prior_scale and b = data. `prior`
    /// must have this conditional's pattern (see posterior_conditional).
    void update(const SparseMatrix& prior, double prior_scale, std::span<const double> noise_diag,
                std::span<const double> data_vec, bool allow_missing = false) {
        if (!prior.same_pattern(precision_)) {
            throw std::invalid_argument("GmrfConditional::update: prior pattern differs");
        }
        check_inputs(prior.size(), prior_scale, noise_diag, data_vec, allow_missing);
        const double inv = 1.0 / prior_scale;
        const auto& pv = prior.values();
        auto& qv = precision_.values();
        for (std::size_t p = 0; p < qv.size(); ++p) qv[p] = pv[p] * inv;
        for (std::size_t i = 0; i < size(); ++i) qv[diag_pos_[i]] += noise_diag[i];
        std::copy(data_vec.begin(), data_vec.end(), b_.begin());
    }

    static void check_inputs(std::size_t n, double prior_scale, std::span<const double> noise_diag,
                             std::span<const double> data_vec, bool allow_missing) {
        if (noise_diag.size() != n || data_vec.size() != n) {
            throw std::invalid_argument("posterior_conditional: dimension mismatch");
        }
        if (!(prior_scale > 0.0)) {
            throw std::invalid_argument("posterior_conditional: prior_scale must be positive");
        }
        for (double d : noise_diag) {
            if (allow_missing ? !(d >= 0.0) : !(d > 0.0)) {
                throw std::invalid_argument(allow_missing
                                                ? "posterior_conditional: noise diagonal must be nonnegative"
                                                : "posterior_conditional: noise diagonal must be positive");
            }
        }
    }

private:
    void locate_diagonal() {
        diag_pos_.resize(size());
        for (std::size_t i = 0; i < size(); ++i) {
            diag_pos_[i] = precision_.find(i, i);
            if (diag_pos_[i] == precision_.nnz()) {
                throw std::invalid_argument("GmrfConditional: missing diagonal entry " + std::to_string(i));
            }
        }
    }

    SparseMatrix precision_;
    std::vector<double> b_;
    std::vector<std::size_t> diag_pos_;
};

/// Qp = diag(noise_diag) + prior / prior_scale, b = data_vec. The pattern of Qp
/// is the prior pattern plus the diagonal. Noise entries must be positive unless
/// `allow_missing` is set, in which case zeros mark sites without data.
inline GmrfConditional posterior_conditional(const SparseMatrix& prior, double prior_scale,
                                             std::span<const double> noise_diag, std::span<const double> data_vec,
                                             bool allow_missing = false) {
    GmrfConditional::check_inputs(prior.size(), prior_scale, noise_diag, data_vec, allow_missing);
    std::vector<Triplet> t;
    t.reserve(prior.nnz() + prior.size());
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const auto cols = prior.row_cols(i);
        const auto vals = prior.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) t.push_back({i, cols[k], vals[k] / prior_scale});
        t.push_back({i, i, noise_diag[i]});
    }
    return GmrfConditional(SparseMatrix::from_triplets(prior.size(), std::move(t)),
                           std::vector<double>(data_vec.begin(), data_vec.end()));
}

/// Conditional of the spatial effect in y = 1 beta0 + gamma + eps with an
/// intrinsic prior: Qp = I / sigma2 + structure / tau2, b = (y - beta0) / sigma2.
inline GmrfConditional gaussian_field_conditional(const SparseMatrix& structure, std::span<const double> y,
                                                  double beta0, double sigma2, double tau2) {
    if (!(sigma2 > 0.0) || !(tau2 > 0.0)) {
        throw std::invalid_argument("gaussian_field_conditional: variances must be positive");
    }
    std::vector<double> noise(y.size(), 1.0 / sigma2);
    std::vector<double> b(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) b[i] = (y[i] - beta0) / sigma2;
    return posterior_conditional(structure, tau2, noise, b);
}

/// Current field value with the per-site conditional variances and kernel counters.
struct FieldState {
    std::vector<double> x;
    std::vector<double> cond_var;
    KernelCounters counters;

    FieldState() = default;
    explicit FieldState(std::size_t n) : x(n, 0.0), cond_var(n, 1.0) {}
    explicit FieldState(std::vector<double> init) : x(std::move(init)), cond_var(x.size(), 1.0) {}

    std::size_t size() const noexcept { return x.size(); }
};

/// sigma_i^2 = 1 / (Qp)_ii. These depend only on the hyperparameters, so they are
/// refreshed once per sweep rather than per site.
inline void refresh_conditional_variances(FieldState& state, const GmrfConditional& cond) {
    if (state.size() != cond.size()) {
        throw std::invalid_argument("field state and conditional dimensions differ");
    }
    state.cond_var.resize(state.size());
    for (std::size_t i = 0; i < cond.size(); ++i) {
        const double q = cond.diagonal(i);
        if (!(q > 0.0)) {
            throw std::invalid_argument("nonpositive conditional precision at site " + std::to_string(i));
        }
        state.cond_var[i] = 1.0 / q;
    }
}

/// mu_i = sigma_i^2 (b_i - sum_{j != i} Q_ij x_j), computed as the full row
/// product minus the self term.
inline double conditional_mean(const GmrfConditional& cond, std::span<const double> x, std::size_t i, double var) {
    const auto& q = cond.precision();
    const auto& rp = q.row_ptr();
    const auto& ci = q.col_idx();
    const auto& v = q.values();
    double row = 0.0;
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) row += v[p] * x[ci[p]];
    row -= cond.diagonal(i) * x[i];
    return var * (cond.b()[i] - row);
}

namespace detail {

inline void update_site(FieldState& state, const GmrfConditional& cond, const RngStream& base,
                        std::uint64_t sweep, std::size_t i) {
    const double var = state.cond_var[i];
    const double mean = conditional_mean(cond, state.x, i, var);
    auto s = site_stream(base, StreamDomain::field, sweep, i);
    state.x[i] = mean + std::sqrt(var) * s.normal();
}

}  // namespace detail

/// One sequential scan over the sites in index order, each draw conditioned on
/// the latest values of its neighbors.
inline void single_site_sweep(FieldState& state, const GmrfConditional& cond, const RngStream& base,
                              std::uint64_t sweep) {
    refresh_conditional_variances(state, cond);
    for (std::size_t i = 0; i < cond.size(); ++i) {
        detail::update_site(state, cond, base, sweep, i);
    }
}

/// Coloring checked against a precision pattern, ready for repeated sweeps.
class ChromaticPlan {
public:
    ChromaticPlan() = default;

    ChromaticPlan(const SparseMatrix& pattern, const Coloring& coloring) : classes_(coloring.classes) {
        const std::size_t n = pattern.size();
        if (coloring.assignment.size() != n) {
            throw std::invalid_argument("chromatic_sweep: coloring size does not match the field");
        }
        std::vector<int> seen(n, 0);
        for (std::size_t j = 0; j < classes_.size(); ++j) {
            if (classes_[j].empty()) throw std::invalid_argument("chromatic_sweep: empty color class");
            for (std::size_t v : classes_[j]) {
                if (v >= n || seen[v] != 0 || coloring.assignment[v] != static_cast<int>(j + 1)) {
                    throw std::invalid_argument("chromatic_sweep: color classes inconsistent with assignment");
                }
                seen[v] = static_cast<int>(j + 1);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (seen[i] == 0) throw std::invalid_argument("chromatic_sweep: node without a color");
            for (std::size_t j : pattern.row_cols(i)) {
                if (j != i && seen[j] == seen[i]) {
                    throw std::invalid_argument("chromatic_sweep: coloring is not proper for this precision");
                }
            }
        }
    }

    const std::vector<std::vector<std::size_t>>& classes() const noexcept { return classes_; }
    std::size_t colors() const noexcept { return classes_.size(); }

private:
    std::vector<std::vector<std::size_t>> classes_;
};

/// One chromatic Gibbs scan: colors in ascending order, every site of a color
/// drawn from its conditional given the current field, all writes of a color
/// landing before the next color starts. With a pool the sites of each color
/// are split across workers; the result is bit-identical to the sequential scan.
inline void chromatic_sweep(FieldState& state, const GmrfConditional& cond, const ChromaticPlan& plan,
                            const RngStream& base, std::uint64_t sweep, ChromaticPool* pool = nullptr) {
    refresh_conditional_variances(state, cond);
    for (const auto& members : plan.classes()) {
        if (pool != nullptr && pool->workers() > 1) {
            pool->parallel_for(members.size(), [&](std::size_t begin, std::size_t end) {
                for (std::size_t q = begin; q < end; ++q) {
                    detail::update_site(state, cond, base, sweep, members[q]);
                }
            });
        } else {
            for (std::size_t i : members) {
                detail::update_site(state, cond, base, sweep, i);
            }
        }
    }
}

inline void chromatic_sweep(FieldState& state, const GmrfConditional& cond, const Coloring& coloring,
                            const RngStream& base, std::uint64_t sweep, ChromaticPool* pool = nullptr) {
    chromatic_sweep(state, cond, ChromaticPlan(cond.precision(), coloring), base, sweep, pool);
}

/// Exact draw from N(Qp^{-1} b, Qp^{-1}): one numeric factorization P Qp P' = L L',
/// then L w = P b, L' (P m) = w, L' (P v) = z with z ~ N(0, I); returns m + v.
inline std::vector<double> block_sample(const GmrfConditional& cond, CholeskyCache& cache, const RngStream& base,
                                        std::uint64_t sweep, KernelCounters* counters = nullptr) {
    const auto symbolic_before = cache.symbolic_count();
    const CholeskyFactor& factor = cache.factorize(cond.precision());
    const auto& sym = factor.symbolic();

    auto mean = permute(sym, cond.b());
    solve_lower_in_place(factor, mean);
    solve_upper_in_place(factor, mean);

    std::vector<double> dev(cond.size());
    for (std::size_t k = 0; k < dev.size(); ++k) {
        dev[k] = site_stream(base, StreamDomain::field, sweep, k).normal();
    }
    solve_upper_in_place(factor, dev);

    for (std::size_t k = 0; k < dev.size(); ++k) mean[k] += dev[k];

    if (counters != nullptr) {
        counters->symbolic_factorizations += cache.symbolic_count() - symbolic_before;
        counters->numeric_factorizations += 1;
        counters->triangular_solves += 3;
        counters->factor_bytes = std::max(counters->factor_bytes, cache.factor_bytes());
    }
    return unpermute(sym, mean);
}

inline void block_sweep(FieldState& state, const GmrfConditional& cond, CholeskyCache& cache, const RngStream& base,
                        std::uint64_t sweep) {
    if (state.size() != cond.size()) {
        throw std::invalid_argument("field state and conditional dimensions differ");
    }
    state.x = block_sample(cond, cache, base, sweep, &state.counters);
    refresh_conditional_variances(state, cond);
}

}  // namespace gmrf

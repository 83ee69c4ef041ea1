#pragma once

// Up-looking sparse Cholesky with an explicit symbolic/numeric split.
//
// The symbolic phase fixes the fill-reducing permutation P, the elimination tree
// of C = P A P', and the complete pattern of L. Numeric factorization of any
// matrix with the same pattern then only touches values.
//
// L is stored column-compressed (lower triangle, diagonal first in every
// column, row indices ascending), together with a row-wise index into the same
// value array that drives the up-looking sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmrf/errors.hpp"
#include "gmrf/ordering.hpp"
#include "gmrf/sparse_matrix.hpp"

namespace gmrf {

/// Relative pivot threshold: a pivot <= kPivotTolerance * max diagonal is rejected.
inline constexpr double kPivotTolerance = 1e-12;

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

struct SymbolicCholesky {
    std::size_t n = 0;
    std::vector<std::size_t> perm;      // perm[new] = old
    std::vector<std::size_t> inv_perm;  // inv_perm[old] = new
    std::vector<std::size_t> parent;    // elimination tree of C, kNoParent at roots

    std::vector<std::size_t> col_ptr;  // L pattern, column-compressed
    std::vector<std::size_t> row_idx;

    // Row k of L (off-diagonal part, ascending column) as (column, value position).
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> row_col;
    std::vector<std::size_t> row_pos;

    // Upper triangle of column k of C: (row in C, position in the source value array).
    std::vector<std::size_t> scatter_ptr;
    std::vector<std::size_t> scatter_row;
    std::vector<std::size_t> scatter_src;
    std::vector<std::size_t> diag_src;  // position of A(i, i) for each original i

    // Pattern of the analysed matrix, for reuse checks.
    std::vector<std::size_t> source_row_ptr;
    std::vector<std::size_t> source_col_idx;

    std::size_t nnz_l() const noexcept { return row_idx.size(); }

    bool matches(const SparseMatrix& a) const noexcept {
        return a.size() == n && a.row_ptr() == source_row_ptr && a.col_idx() == source_col_idx;
    }

    std::size_t bytes() const noexcept {
        const auto words = perm.size() + inv_perm.size() + parent.size() + col_ptr.size() + row_idx.size() +
                           row_ptr.size() + row_col.size() + row_pos.size() + scatter_ptr.size() +
                           scatter_row.size() + scatter_src.size() + diag_src.size() + source_row_ptr.size() +
                           source_col_idx.size();
        return words * sizeof(std::size_t);
    }
};

/// Fill pattern of L for P A P'. The pattern must be structurally symmetric and
/// every diagonal entry must be stored.
inline std::shared_ptr<const SymbolicCholesky> symbolic_cholesky(const SparseMatrix& pattern,
                                                                 Ordering ordering = Ordering::rcm) {
    if (!pattern.structurally_symmetric()) {
        throw std::invalid_argument("symbolic_cholesky: pattern is not structurally symmetric");
    }
    const std::size_t n = pattern.size();
    auto sym = std::make_shared<SymbolicCholesky>();
    sym->n = n;
    sym->perm = make_ordering(pattern, ordering);
    sym->inv_perm.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) sym->inv_perm[sym->perm[k]] = k;
    sym->source_row_ptr = pattern.row_ptr();
    sym->source_col_idx = pattern.col_idx();

    // Upper triangle of each column of C, gathered from row perm[k] of A.
    sym->scatter_ptr.assign(n + 1, 0);
    sym->diag_src.assign(n, pattern.nnz());
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t old = sym->perm[k];
        const auto cols = pattern.row_cols(old);
        for (std::size_t q = 0; q < cols.size(); ++q) {
            const std::size_t i = sym->inv_perm[cols[q]];
            if (i <= k) {
                sym->scatter_row.push_back(i);
                sym->scatter_src.push_back(pattern.row_ptr()[old] + q);
            }
            if (cols[q] == old) {
                sym->diag_src[old] = pattern.row_ptr()[old] + q;
            }
        }
        sym->scatter_ptr[k + 1] = sym->scatter_row.size();
        if (sym->diag_src[old] == pattern.nnz()) {
            throw std::invalid_argument("symbolic_cholesky: missing diagonal entry in row " + std::to_string(old));
        }
    }

    // Elimination tree with path compression.
    sym->parent.assign(n, kNoParent);
    std::vector<std::size_t> ancestor(n, kNoParent);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t p = sym->scatter_ptr[k]; p < sym->scatter_ptr[k + 1]; ++p) {
            std::size_t i = sym->scatter_row[p];
            while (i != kNoParent && i < k) {
                const std::size_t next = ancestor[i];
                ancestor[i] = k;
                if (next == kNoParent) sym->parent[i] = k;
                i = next;
            }
        }
    }

    // Row patterns of L: the reach of each column's upper entries in the etree.
    std::vector<std::size_t> flag(n, kNoParent);
    std::vector<std::size_t> row_pattern_ptr(n + 1, 0);
    std::vector<std::size_t> row_pattern;
    std::vector<std::size_t> col_count(n, 1);
    for (std::size_t k = 0; k < n; ++k) {
        flag[k] = k;
        const std::size_t start = row_pattern.size();
        for (std::size_t p = sym->scatter_ptr[k]; p < sym->scatter_ptr[k + 1]; ++p) {
            for (std::size_t i = sym->scatter_row[p]; flag[i] != k; i = sym->parent[i]) {
                flag[i] = k;
                row_pattern.push_back(i);
            }
        }
        std::sort(row_pattern.begin() + static_cast<std::ptrdiff_t>(start), row_pattern.end());
        for (std::size_t q = start; q < row_pattern.size(); ++q) ++col_count[row_pattern[q]];
        row_pattern_ptr[k + 1] = row_pattern.size();
    }

    sym->col_ptr.assign(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) sym->col_ptr[j + 1] = sym->col_ptr[j] + col_count[j];
    sym->row_idx.assign(sym->col_ptr[n], 0);
    std::vector<std::size_t> fill(n);
    for (std::size_t j = 0; j < n; ++j) {
        sym->row_idx[sym->col_ptr[j]] = j;
        fill[j] = sym->col_ptr[j] + 1;
    }
    sym->row_ptr = row_pattern_ptr;
    sym->row_col = row_pattern;
    sym->row_pos.resize(row_pattern.size());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t q = row_pattern_ptr[k]; q < row_pattern_ptr[k + 1]; ++q) {
            const std::size_t j = row_pattern[q];
            sym->row_idx[fill[j]] = k;
            sym->row_pos[q] = fill[j]++;
        }
    }
    return sym;
}

/// Numeric factor L with P A P' = L L'.
class CholeskyFactor {
public:
    CholeskyFactor() = default;
    CholeskyFactor(std::shared_ptr<const SymbolicCholesky> symbolic, std::vector<double> values)
        : symbolic_(std::move(symbolic)), values_(std::move(values)) {}

    /// Wraps an explicit lower-triangular matrix (natural ordering). Entries above
    /// the diagonal are rejected; a missing diagonal is stored as zero.
    static CholeskyFactor from_lower(const SparseMatrix& lower) {
        const std::size_t n = lower.size();
        auto sym = std::make_shared<SymbolicCholesky>();
        sym->n = n;
        sym->perm.resize(n);
        sym->inv_perm.resize(n);
        for (std::size_t i = 0; i < n; ++i) sym->perm[i] = sym->inv_perm[i] = i;
        std::vector<std::vector<std::pair<std::size_t, double>>> cols(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = lower.row_cols(i);
            const auto v = lower.row_values(i);
            for (std::size_t q = 0; q < c.size(); ++q) {
                if (c[q] > i) throw std::invalid_argument("CholeskyFactor::from_lower: entry above diagonal");
                if (c[q] < i) cols[c[q]].emplace_back(i, v[q]);
            }
        }
        std::vector<double> values;
        sym->col_ptr.assign(n + 1, 0);
        for (std::size_t j = 0; j < n; ++j) {
            sym->row_idx.push_back(j);
            values.push_back(lower(j, j));
            for (const auto& [i, v] : cols[j]) {
                sym->row_idx.push_back(i);
                values.push_back(v);
            }
            sym->col_ptr[j + 1] = sym->row_idx.size();
        }
        return CholeskyFactor(std::move(sym), std::move(values));
    }

    const SymbolicCholesky& symbolic() const { return *symbolic_; }
    const std::shared_ptr<const SymbolicCholesky>& symbolic_ptr() const { return symbolic_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return symbolic_ ? symbolic_->n : 0; }

    double diagonal(std::size_t j) const { return values_[symbolic_->col_ptr[j]]; }

    /// Bytes held by the numeric values array.
    std::size_t value_bytes() const noexcept { return values_.capacity() * sizeof(double); }

    /// L in row-compressed form (permuted index space).
    SparseMatrix lower() const {
        std::vector<Triplet> t;
        t.reserve(values_.size());
        const auto& s = *symbolic_;
        for (std::size_t j = 0; j < s.n; ++j) {
            for (std::size_t p = s.col_ptr[j]; p < s.col_ptr[j + 1]; ++p) {
                t.push_back({s.row_idx[p], j, values_[p]});
            }
        }
        return SparseMatrix::from_triplets(s.n, std::move(t));
    }

private:
    friend void numeric_cholesky_into(const SymbolicCholesky&, const SparseMatrix&, CholeskyFactor&);

    std::shared_ptr<const SymbolicCholesky> symbolic_;
    std::vector<double> values_;
};

/// Refactorizes `a` into `factor`, reusing its value storage when the pattern
/// already matches. Throws NotPositiveDefinite with the original row index of the
/// failing pivot.
inline void numeric_cholesky_into(const SymbolicCholesky& sym, const SparseMatrix& a, CholeskyFactor& factor) {
    if (!sym.matches(a)) {
        throw std::invalid_argument("numeric_cholesky: matrix pattern differs from the symbolic analysis");
    }
    const std::size_t n = sym.n;
    const auto& av = a.values();
    factor.values_.resize(sym.nnz_l());
    auto& lx = factor.values_;

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(av[sym.diag_src[i]]));
    const double threshold = kPivotTolerance * max_diag;

    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t p = sym.scatter_ptr[k]; p < sym.scatter_ptr[k + 1]; ++p) {
            x[sym.scatter_row[p]] = av[sym.scatter_src[p]];
        }
        double d = x[k];
        x[k] = 0.0;
        for (std::size_t q = sym.row_ptr[k]; q < sym.row_ptr[k + 1]; ++q) {
            const std::size_t j = sym.row_col[q];
            const std::size_t pos = sym.row_pos[q];
            const double lkj = x[j] / lx[sym.col_ptr[j]];
            x[j] = 0.0;
            for (std::size_t p = sym.col_ptr[j] + 1; p < pos; ++p) {
                x[sym.row_idx[p]] -= lx[p] * lkj;
            }
            d -= lkj * lkj;
            lx[pos] = lkj;
        }
        if (!(d > threshold)) {
            throw NotPositiveDefinite(sym.perm[k], d);
        }
        lx[sym.col_ptr[k]] = std::sqrt(d);
    }
}

inline CholeskyFactor numeric_cholesky(const std::shared_ptr<const SymbolicCholesky>& sym, const SparseMatrix& a) {
    CholeskyFactor f(sym, {});
    numeric_cholesky_into(*sym, a, f);
    return f;
}

/// Solves L x = b in place (permuted index space).
inline void solve_lower_in_place(const CholeskyFactor& f, std::span<double> x) {
    const auto& s = f.symbolic();
    if (x.size() != s.n) throw std::invalid_argument("solve_lower: dimension mismatch");
    const auto& lx = f.values();
    for (std::size_t j = 0; j < s.n; ++j) {
        const double d = lx[s.col_ptr[j]];
        if (d == 0.0) throw SingularFactor(j);
        x[j] /= d;
        const double xj = x[j];
        for (std::size_t p = s.col_ptr[j] + 1; p < s.col_ptr[j + 1]; ++p) {
            x[s.row_idx[p]] -= lx[p] * xj;
        }
    }
}

/// Solves L' x = b in place (permuted index space).
inline void solve_upper_in_place(const CholeskyFactor& f, std::span<double> x) {
    const auto& s = f.symbolic();
    if (x.size() != s.n) throw std::invalid_argument("solve_upper: dimension mismatch");
    const auto& lx = f.values();
    for (std::size_t j = s.n; j-- > 0;) {
        const double d = lx[s.col_ptr[j]];
        if (d == 0.0) throw SingularFactor(j);
        double sum = x[j];
        for (std::size_t p = s.col_ptr[j] + 1; p < s.col_ptr[j + 1]; ++p) {
            sum -= lx[p] * x[s.row_idx[p]];
        }
        x[j] = sum / d;
    }
}

inline std::vector<double> solve_lower(const CholeskyFactor& f, std::span<const double> b) {
    std::vector<double> x(b.begin(), b.end());
    solve_lower_in_place(f, x);
    return x;
}

inline std::vector<double> solve_upper(const CholeskyFactor& f, std::span<const double> b) {
    std::vector<double> x(b.begin(), b.end());
    solve_upper_in_place(f, x);
    return x;
}

/// out[new] = v[perm[new]].
inline std::vector<double> permute(const SymbolicCholesky& s, std::span<const double> v) {
    std::vector<double> out(s.n);
    for (std::size_t k = 0; k < s.n; ++k) out[k] = v[s.perm[k]];
    return out;
}

inline std::vector<double> unpermute(const SymbolicCholesky& s, std::span<const double> v) {
    std::vector<double> out(s.n);
    for (std::size_t k = 0; k < s.n; ++k) out[s.perm[k]] = v[k];
    return out;
}

/// x = A^{-1} b via P' L^{-T} L^{-1} P b.
inline std::vector<double> cholesky_solve(const CholeskyFactor& f, std::span<const double> b) {
    auto x = permute(f.symbolic(), b);
    solve_lower_in_place(f, x);
    solve_upper_in_place(f, x);
    return unpermute(f.symbolic(), x);
}

/// Holds one symbolic analysis and one value buffer and refactorizes matrices
/// sharing that pattern. The symbolic analysis runs on the first call only.
class CholeskyCache {
public:
    explicit CholeskyCache(Ordering ordering = Ordering::rcm) : ordering_(ordering) {}

    const CholeskyFactor& factorize(const SparseMatrix& a) {
        if (!symbolic_) {
            symbolic_ = symbolic_cholesky(a, ordering_);
            ++symbolic_count_;
            factor_ = CholeskyFactor(symbolic_, {});
        } else if (!symbolic_->matches(a)) {
            throw std::invalid_argument("CholeskyCache: matrix pattern changed after symbolic analysis");
        }
        numeric_cholesky_into(*symbolic_, a, factor_);
        ++numeric_count_;
        return factor_;
    }

    const CholeskyFactor& factor() const noexcept { return factor_; }
    bool has_symbolic() const noexcept { return static_cast<bool>(symbolic_); }

    std::uint64_t symbolic_count() const noexcept { return symbolic_count_; }
    std::uint64_t numeric_count() const noexcept { return numeric_count_; }

    /// Bytes of factor storage (symbolic pattern plus numeric values) currently held.
    std::size_t factor_bytes() const noexcept {
        return symbolic_ ? symbolic_->bytes() + factor_.value_bytes() : 0;
    }

private:
    Ordering ordering_;
    std::shared_ptr<const SymbolicCholesky> symbolic_;
    CholeskyFactor factor_;
    std::uint64_t symbolic_count_ = 0;
    std::uint64_t numeric_count_ = 0;
};

}  // namespace gmrf

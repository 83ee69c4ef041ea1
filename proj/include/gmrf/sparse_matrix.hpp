#pragma once

// Compressed sparse row storage for square (mostly symmetric) matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "gmrf/errors.hpp"

namespace gmrf {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square CSR matrix. Symmetric matrices store both triangles; column indices
/// are strictly increasing inside each row.
class SparseMatrix {
public:
    SparseMatrix() : row_ptr_(1, 0) {}

    SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
                 std::vector<double> values)
        : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
        check_structure();
    }

    /// Sums duplicate entries. Explicit zeros are kept as structural nonzeros.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> entries) {
        for (const auto& t : entries) {
            if (t.row >= n || t.col >= n) {
                throw std::invalid_argument("SparseMatrix: triplet index out of range");
            }
        }
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        std::vector<std::size_t> row_ptr(n + 1, 0);
        std::vector<std::size_t> col_idx;
        std::vector<double> values;
        col_idx.reserve(entries.size());
        values.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto& t = entries[k];
            if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
                values.back() += t.value;
                continue;
            }
            col_idx.push_back(t.col);
            values.push_back(t.value);
            ++row_ptr[t.row + 1];
        }
        std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
        return SparseMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
    }

    static SparseMatrix identity(std::size_t n, double scale = 1.0) {
        std::vector<std::size_t> row_ptr(n + 1);
        std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
        std::vector<std::size_t> col_idx(n);
        std::iota(col_idx.begin(), col_idx.end(), std::size_t{0});
        return SparseMatrix(n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, scale));
    }

    static SparseMatrix diagonal(std::span<const double> diag) {
        SparseMatrix m = identity(diag.size());
        std::copy(diag.begin(), diag.end(), m.values_.begin());
        return m;
    }

    /// Row-major dense input; zeros are dropped.
    static SparseMatrix from_dense(std::size_t n, std::span<const double> dense) {
        if (dense.size() != n * n) {
            throw std::invalid_argument("SparseMatrix::from_dense: expected n*n values");
        }
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (dense[i * n + j] != 0.0) {
                    t.push_back({i, j, dense[i * n + j]});
                }
            }
        }
        return from_triplets(n, std::move(t));
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return col_idx_.size(); }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    std::span<const std::size_t> row_cols(std::size_t i) const {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// Position of entry (i, j) in the value array, or nnz() if structurally zero.
    std::size_t find(std::size_t i, std::size_t j) const {
        const auto cols = row_cols(i);
        const auto it = std::lower_bound(cols.begin(), cols.end(), j);
        if (it == cols.end() || *it != j) {
            return nnz();
        }
        return row_ptr_[i] + static_cast<std::size_t>(it - cols.begin());
    }

    double operator()(std::size_t i, std::size_t j) const {
        const auto p = find(i, j);
        return p == nnz() ? 0.0 : values_[p];
    }

    bool same_pattern(const SparseMatrix& other) const noexcept {
        return n_ == other.n_ && row_ptr_ == other.row_ptr_ && col_idx_ == other.col_idx_;
    }

    bool structurally_symmetric() const {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j : row_cols(i)) {
                if (find(j, i) == nnz()) {
                    return false;
                }
            }
        }
        return true;
    }

    bool is_symmetric(double tol = 0.0) const {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                const auto q = find(col_idx_[p], i);
                if (q == nnz() || std::abs(values_[q] - values_[p]) > tol) {
                    return false;
                }
            }
        }
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<double> to_dense() const {
        std::vector<double> d(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                d[i * n_ + col_idx_[p]] = values_[p];
            }
        }
        return d;
    }

private:
    void check_structure() const {
        if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
            values_.size() != col_idx_.size()) {
            throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (row_ptr_[i] > row_ptr_[i + 1]) {
                throw std::invalid_argument("SparseMatrix: row_ptr must be nondecreasing");
            }
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                if (col_idx_[p] >= n_ || (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])) {
                    throw std::invalid_argument("SparseMatrix: column indices must be in range and strictly increasing");
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// y = A x. Cost O(nnz).
inline void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.size() || y.size() != a.size()) {
        throw std::invalid_argument("spmv: dimension mismatch");
    }
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double sum = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            sum += v[p] * x[ci[p]];
        }
        y[i] = sum;
    }
}

inline std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.size());
    spmv(a, x, y);
    return y;
}

/// x' A x.
inline double quadratic_form(const SparseMatrix& a, std::span<const double> x) {
    if (x.size() != a.size()) {
        throw std::invalid_argument("quadratic_form: dimension mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        double row = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            row += vals[k] * x[cols[k]];
        }
        total += x[i] * row;
    }
    return total;
}

// MatrixMarket coordinate format, "real general", all stored entries written.

inline void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.size() << ' ' << a.size() << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
        }
    }
}

inline SparseMatrix read_matrix_market(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    std::size_t line_no = 0;
    bool symmetric = false;
    if (!std::getline(in, line)) {
        throw ParseError(source, 1, "empty input");
    }
    ++line_no;
    if (line.rfind("%%MatrixMarket", 0) != 0) {
        throw ParseError(source, line_no, "missing %%MatrixMarket banner");
    }
    if (line.find("coordinate") == std::string::npos) {
        throw ParseError(source, line_no, "only coordinate format is supported");
    }
    symmetric = line.find("symmetric") != std::string::npos;

    std::size_t rows = 0, cols = 0, entries = 0;
    bool have_size = false;
    std::vector<Triplet> t;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        if (!have_size) {
            if (!(ls >> rows >> cols >> entries) || rows != cols) {
                throw ParseError(source, line_no, "expected square size line 'n n nnz'");
            }
            have_size = true;
            t.reserve(symmetric ? 2 * entries : entries);
            continue;
        }
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(ls >> i >> j >> v) || i == 0 || j == 0 || i > rows || j > cols) {
            throw ParseError(source, line_no, "bad entry line");
        }
        t.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) {
            t.push_back({j - 1, i - 1, v});
        }
    }
    if (!have_size) {
        throw ParseError(source, line_no, "missing size line");
    }
    return SparseMatrix::from_triplets(rows, std::move(t));
}

}  // namespace gmrf

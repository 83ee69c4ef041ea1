#pragma once

// Dense reference moments of a GMRF conditional, for tests and diagnostics on
// small problems. Independent of the sparse factorization path.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gmrf/errors.hpp"
#include "gmrf/field.hpp"

namespace gmrf {

inline constexpr std::size_t kDenseMomentsMaxSize = 2000;

struct DenseMoments {
    std::vector<double> mean;
    Eigen::MatrixXd covariance;
};

inline Eigen::MatrixXd to_eigen(const SparseMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
        }
    }
    return d;
}

/// Mean Qp^{-1} b and covariance Qp^{-1} by dense Cholesky.
inline DenseMoments exact_moments_dense(const GmrfConditional& cond) {
    const std::size_t n = cond.size();
    if (n > kDenseMomentsMaxSize) {
        throw std::invalid_argument("exact_moments_dense: dimension " + std::to_string(n) + " exceeds dense limit");
    }
    const Eigen::MatrixXd q = to_eigen(cond.precision());
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite(0, 0.0);
    }
    // LLT does not flag tiny pivots; apply the same relative threshold as the sparse path
    const Eigen::MatrixXd l = llt.matrixL();
    const double max_diag = q.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) * l(i, i) > kPivotTolerance * max_diag)) {
            throw NotPositiveDefinite(static_cast<std::size_t>(i), l(i, i) * l(i, i));
        }
    }
    const Eigen::Map<const Eigen::VectorXd> b(cond.b().data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd m = llt.solve(b);
    DenseMoments out;
    out.mean.assign(m.data(), m.data() + m.size());
    out.covariance = llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    return out;
}

}  // namespace gmrf

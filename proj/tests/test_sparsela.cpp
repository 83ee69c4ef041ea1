#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gmrf/cholesky.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/field.hpp"
#include "gmrf/graph.hpp"
#include "gmrf/ordering.hpp"
#include "gmrf/rng.hpp"
#include "gmrf/sparse_matrix.hpp"

using namespace gmrf;

namespace {

// Textbook dense Cholesky, row-major, lower triangle returned.
std::vector<double> dense_cholesky(std::vector<double> a, std::size_t n) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
        l[j * n + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = s / l[j * n + j];
        }
    }
    return l;
}

// Boolean elimination game on a dense pattern: number of nonzeros in L.
std::size_t dense_fill_count(const SparseMatrix& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : a.row_cols(i)) m[i][j] = true;
    }
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = k; i < n; ++i) count += m[i][k] ? 1 : 0;
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                if (m[i][k] && m[j][k]) m[i][j] = true;
            }
        }
    }
    return count;
}

// Random SPD matrix M'M + n I with M sparse-ish.
SparseMatrix random_spd(std::size_t n, double density, RngStream& s) {
    std::vector<double> m(n * n, 0.0);
    for (auto& v : m) {
        if (s.uniform() < density) v = s.normal();
    }
    std::vector<double> q(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += m[k * n + i] * m[k * n + j];
            q[i * n + j] = acc + (i == j ? static_cast<double>(n) : 0.0);
        }
    }
    return SparseMatrix::from_dense(n, q);
}

SparseMatrix arrow(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, static_cast<double>(n) + 1.0});
        if (i + 1 < n) {
            t.push_back({i, n - 1, 1.0});
            t.push_back({n - 1, i, 1.0});
        }
    }
    return SparseMatrix::from_triplets(n, t);
}

SparseMatrix tridiagonal(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, 4.0});
        if (i + 1 < n) {
            t.push_back({i, i + 1, -1.0});
            t.push_back({i + 1, i, -1.0});
        }
    }
    return SparseMatrix::from_triplets(n, t);
}

}  // namespace

TEST(Spmv, Examples) {
    const std::vector<double> x{1, 2, 3};
    EXPECT_EQ(spmv(SparseMatrix::identity(3), x), x);
    const auto a = SparseMatrix::from_dense(2, std::vector<double>{2, -1, -1, 2});
    EXPECT_EQ(spmv(a, std::vector<double>{1, 1}), (std::vector<double>{1, 1}));
    const auto iar = iar_structure(build_lattice(1, 3, Neighborhood::rook4));
    EXPECT_EQ(spmv(iar, std::vector<double>{1, 1, 1}), (std::vector<double>{0, 0, 0}));
}

TEST(Spmv, DimensionMismatch) {
    EXPECT_THROW(spmv(SparseMatrix::identity(3), std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(SparseMatrixType, TripletsSumDuplicatesAndValidate) {
    const auto a = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 1.0}});
    EXPECT_DOUBLE_EQ(a(0, 0), 3.0);
    EXPECT_EQ(a.nnz(), 2u);
    EXPECT_THROW(SparseMatrix::from_triplets(2, {{0, 2, 1.0}}), std::invalid_argument);
    EXPECT_THROW(SparseMatrix(2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
}

TEST(SparseMatrixType, MatrixMarketRoundTrip) {
    RngStream s(3, 0);
    const auto a = random_spd(8, 0.3, s);
    std::stringstream ss;
    write_matrix_market(ss, a);
    const auto b = read_matrix_market(ss);
    ASSERT_TRUE(a.same_pattern(b));
    for (std::size_t k = 0; k < a.nnz(); ++k) EXPECT_DOUBLE_EQ(a.values()[k], b.values()[k]);
}

TEST(SparseMatrixType, MatrixMarketReportsLine) {
    std::stringstream ss("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 1.0\n");
    try {
        read_matrix_market(ss, "bad.mtx");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(Symbolic, DiagonalHasNoFill) {
    const auto sym = symbolic_cholesky(SparseMatrix::identity(6), Ordering::natural);
    EXPECT_EQ(sym->nnz_l(), 6u);
}

TEST(Symbolic, TridiagonalIsBidiagonal) {
    const auto sym = symbolic_cholesky(tridiagonal(10), Ordering::natural);
    EXPECT_EQ(sym->nnz_l(), 19u);
}

TEST(Symbolic, ArrowHasNoExtraFill) {
    const auto a = arrow(4);
    const auto sym = symbolic_cholesky(a, Ordering::natural);
    EXPECT_EQ(sym->nnz_l(), 7u);
    EXPECT_EQ(sym->nnz_l(), dense_fill_count(a));
}

TEST(Symbolic, FillMatchesEliminationGameOnLattice) {
    const auto q = iar_structure(build_lattice(5, 6, Neighborhood::king8));
    const auto sym = symbolic_cholesky(q, Ordering::natural);
    EXPECT_EQ(sym->nnz_l(), dense_fill_count(q));
}

TEST(Symbolic, RejectsAsymmetricPattern) {
    const auto a = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 0.5}});
    EXPECT_THROW(symbolic_cholesky(a), std::invalid_argument);
}

TEST(Symbolic, Deterministic) {
    const auto q = iar_structure(build_lattice(8, 8, Neighborhood::king8));
    const auto a = symbolic_cholesky(q);
    const auto b = symbolic_cholesky(q);
    EXPECT_EQ(a->perm, b->perm);
    EXPECT_EQ(a->row_idx, b->row_idx);
}

TEST(Ordering, RcmIsPermutationAndReducesBandwidth) {
    // A wide lattice numbered row-major has bandwidth 20; RCM should find the
    // short direction.
    const auto q = iar_structure(build_lattice(5, 20, Neighborhood::rook4));
    const auto perm = reverse_cuthill_mckee(q);
    EXPECT_TRUE(is_permutation_of_nodes(perm, q.size()));
    std::vector<std::size_t> natural(q.size());
    std::iota(natural.begin(), natural.end(), std::size_t{0});
    EXPECT_EQ(bandwidth(q, natural), 20u);
    EXPECT_LE(bandwidth(q, perm), 6u);
}

TEST(Numeric, IdentityFactorIsIdentity) {
    const auto q = SparseMatrix::identity(4);
    const auto f = numeric_cholesky(symbolic_cholesky(q), q);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(f.diagonal(j), 1.0);
    EXPECT_EQ(f.values().size(), 4u);
}

TEST(Numeric, TwoByTwoClosedForm) {
    const auto q = SparseMatrix::from_dense(2, std::vector<double>{4, 2, 2, 3});
    const auto f = numeric_cholesky(symbolic_cholesky(q, Ordering::natural), q);
    const auto l = f.lower();
    EXPECT_DOUBLE_EQ(l(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(l(1, 0), 1.0);
    EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(l.find(0, 1), l.nnz());
}

TEST(Numeric, IntrinsicPrecisionIsNotPositiveDefinite) {
    const auto q = iar_structure(build_lattice(3, 3, Neighborhood::rook4));
    EXPECT_THROW(numeric_cholesky(symbolic_cholesky(q), q), NotPositiveDefinite);
}

TEST(Numeric, NotPositiveDefiniteCarriesPivot) {
    const auto q = SparseMatrix::from_dense(3, std::vector<double>{1, 0, 0, 0, 1, 2, 0, 2, 1});
    try {
        numeric_cholesky(symbolic_cholesky(q, Ordering::natural), q);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const NotPositiveDefinite& e) {
        EXPECT_EQ(e.pivot(), 2u);
    }
}

TEST(Numeric, PatternMismatchRejected) {
    const auto sym = symbolic_cholesky(SparseMatrix::identity(3));
    EXPECT_THROW(numeric_cholesky(sym, tridiagonal(3)), std::invalid_argument);
}

TEST(Numeric, DenseOracleEquivalence) {
    RngStream s(99, 0);
    for (std::size_t n : {1u, 2u, 5u, 12u, 20u}) {
        const auto q = random_spd(n, 0.25, s);
        for (Ordering ord : {Ordering::natural, Ordering::rcm}) {
            const auto sym = symbolic_cholesky(q, ord);
            const auto f = numeric_cholesky(sym, q);
            // dense oracle on P Q P'
            std::vector<double> pqp(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) pqp[i * n + j] = q(sym->perm[i], sym->perm[j]);
            }
            const auto l_ref = dense_cholesky(pqp, n);
            const auto l = f.lower().to_dense();
            for (std::size_t k = 0; k < n * n; ++k) EXPECT_NEAR(l[k], l_ref[k], 1e-9) << n;

            // reconstruction bound
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < n; ++k) acc += l[i * n + k] * l[j * n + k];
                    worst = std::max(worst, std::abs(acc - pqp[i * n + j]));
                }
            }
            EXPECT_LE(worst, 1e-10 * q.max_abs());
        }
    }
}

TEST(Solves, IdentityAndClosedForm) {
    const auto id = CholeskyFactor::from_lower(SparseMatrix::identity(3));
    const std::vector<double> b{3, -1, 2};
    EXPECT_EQ(solve_lower(id, b), b);
    EXPECT_EQ(solve_upper(id, b), b);

    const auto l = CholeskyFactor::from_lower(
        SparseMatrix::from_triplets(2, {{0, 0, 2.0}, {1, 0, 1.0}, {1, 1, std::sqrt(2.0)}}));
    const auto x = solve_lower(l, std::vector<double>{2.0, 1.0 + std::sqrt(2.0)});
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 1.0, 1e-15);

    const auto four = CholeskyFactor::from_lower(SparseMatrix::identity(3, 2.0));
    const auto y = solve_upper(four, b);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(y[i], b[i] / 2.0);
}

TEST(Solves, ZeroDiagonalIsSingular) {
    const auto l = CholeskyFactor::from_lower(SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 0, 1.0}}));
    EXPECT_THROW(solve_lower(l, std::vector<double>{1, 1}), SingularFactor);
    EXPECT_THROW(solve_upper(l, std::vector<double>{1, 1}), SingularFactor);
}

TEST(Solves, ResidualBound) {
    RngStream s(5, 0);
    const auto q = random_spd(30, 0.2, s);
    const auto f = numeric_cholesky(symbolic_cholesky(q), q);
    std::vector<double> b(30);
    for (auto& v : b) v = s.normal();
    const auto x = solve_lower(f, b);
    const auto lx = spmv(f.lower(), x);
    double res = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
        res = std::max(res, std::abs(lx[i] - b[i]));
        xmax = std::max(xmax, std::abs(x[i]));
    }
    EXPECT_LE(res, 1e-10 * f.lower().max_abs() * xmax);
}

TEST(Solves, RoundTripProperty) {
    RngStream s(1234, 0);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(s.next_u64() % 50);
        const auto q = random_spd(n, 0.15, s);
        const auto f = numeric_cholesky(symbolic_cholesky(q), q);
        std::vector<double> b(n);
        for (auto& v : b) v = s.normal();
        const auto back = spmv(q, cholesky_solve(f, b));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num = std::max(num, std::abs(back[i] - b[i]));
            den = std::max(den, std::abs(b[i]));
        }
        EXPECT_LE(num, 1e-8 * den) << "n=" << n;
    }
}

TEST(Cache, SymbolicAnalysisRunsOnce) {
    const auto pattern = iar_structure(build_lattice(6, 6, Neighborhood::king8));
    CholeskyCache cache;
    RngStream s(8, 0);
    for (int rep = 0; rep < 100; ++rep) {
        SparseMatrix q = pattern;
        const double tau = 0.5 + s.uniform();
        for (double& v : q.values()) v /= tau;
        for (std::size_t i = 0; i < q.size(); ++i) q.values()[q.find(i, i)] += 0.1 + s.uniform();
        const auto& f = cache.factorize(q);
        const auto x = cholesky_solve(f, std::vector<double>(q.size(), 1.0));
        const auto back = spmv(q, x);
        for (double v : back) ASSERT_NEAR(v, 1.0, 1e-10);
    }
    EXPECT_EQ(cache.symbolic_count(), 1u);
    EXPECT_EQ(cache.numeric_count(), 100u);
    EXPECT_GT(cache.factor_bytes(), 0u);
    EXPECT_THROW(cache.factorize(SparseMatrix::identity(36)), std::invalid_argument);
}

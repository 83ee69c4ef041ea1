#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "gmrf/sparse_matrix.hpp"

namespace gmrf {

enum class Ordering { natural, rcm };

namespace detail {

// BFS levels from `root` over nodes not yet placed; returns the last level and
// writes the eccentricity to `depth`. `seen` must be all-false on entry and is
// restored before returning.
inline std::vector<std::size_t> last_level(const SparseMatrix& a, std::size_t root,
                                           const std::vector<bool>& placed, std::vector<bool>& seen,
                                           std::size_t& depth) {
    std::vector<std::size_t> touched{root};
    std::vector<std::size_t> level{root};
    seen[root] = true;
    depth = 0;
    for (;;) {
        std::vector<std::size_t> next;
        for (std::size_t u : level) {
            for (std::size_t v : a.row_cols(u)) {
                if (!placed[v] && !seen[v]) {
                    seen[v] = true;
                    touched.push_back(v);
                    next.push_back(v);
                }
            }
        }
        if (next.empty()) {
            for (std::size_t v : touched) seen[v] = false;
            return level;
        }
        ++depth;
        level = std::move(next);
    }
}

}  // namespace detail

/// Reverse Cuthill-McKee permutation of a structurally symmetric pattern.
/// Returns perm with perm[new] = old. Each connected component starts from a
/// pseudo-peripheral node (George-Liu); neighbors are queued by ascending degree,
/// ties broken by index so the result is deterministic.
inline std::vector<std::size_t> reverse_cuthill_mckee(const SparseMatrix& a) {
    const std::size_t n = a.size();
    std::vector<std::size_t> degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        degree[i] = a.row_cols(i).size();
    }
    std::vector<bool> placed(n, false);
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> order;
    order.reserve(n);

    std::vector<std::size_t> by_degree(n);
    std::iota(by_degree.begin(), by_degree.end(), std::size_t{0});
    std::stable_sort(by_degree.begin(), by_degree.end(),
                     [&](std::size_t x, std::size_t y) { return degree[x] < degree[y]; });

    for (std::size_t seed : by_degree) {
        if (placed[seed]) continue;

        std::size_t root = seed;
        std::size_t depth = 0;
        auto level = detail::last_level(a, root, placed, seen, depth);
        for (;;) {
            const auto next_root = *std::min_element(level.begin(), level.end(), [&](std::size_t x, std::size_t y) {
                return degree[x] < degree[y] || (degree[x] == degree[y] && x < y);
            });
            std::size_t next_depth = 0;
            auto next_level = detail::last_level(a, next_root, placed, seen, next_depth);
            if (next_depth <= depth) break;
            root = next_root;
            depth = next_depth;
            level = std::move(next_level);
        }

        std::size_t head = order.size();
        order.push_back(root);
        placed[root] = true;
        std::vector<std::size_t> fresh;
        while (head < order.size()) {
            const std::size_t u = order[head++];
            fresh.clear();
            for (std::size_t v : a.row_cols(u)) {
                if (!placed[v]) {
                    placed[v] = true;
                    fresh.push_back(v);
                }
            }
            std::stable_sort(fresh.begin(), fresh.end(),
                             [&](std::size_t x, std::size_t y) { return degree[x] < degree[y]; });
            order.insert(order.end(), fresh.begin(), fresh.end());
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

inline std::vector<std::size_t> make_ordering(const SparseMatrix& a, Ordering ordering) {
    if (ordering == Ordering::rcm) {
        return reverse_cuthill_mckee(a);
    }
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    return perm;
}

/// Half-bandwidth max |i - j| over stored entries after applying perm (perm[new] = old).
inline std::size_t bandwidth(const SparseMatrix& a, const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> inv(a.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
    std::size_t bw = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j : a.row_cols(i)) {
            const auto pi = inv[i];
            const auto pj = inv[j];
            bw = std::max(bw, pi > pj ? pi - pj : pj - pi);
        }
    }
    return bw;
}

}  // namespace gmrf

#pragma once

// Undirected Markov graphs and greedy colorings.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gmrf/rng.hpp"

namespace gmrf {

enum class Neighborhood { rook4, king8 };

struct WeightedEdge {
    std::size_t i;
    std::size_t j;
    double weight = 1.0;
};

/// Symmetric adjacency in compressed form. Neighbor lists are sorted and
/// duplicate-free; w_ij is stored on both (i, j) and (j, i).
class MarkovGraph {
public:
    MarkovGraph() : offsets_(1, 0) {}

    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::span<const double> weights(std::size_t i) const {
        return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

    /// D_ii = sum_j w_ij.
    double weighted_degree(std::size_t i) const {
        const auto w = weights(i);
        return std::accumulate(w.begin(), w.end(), 0.0);
    }

    std::size_t max_degree() const {
        std::size_t best = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            best = std::max(best, degree(i));
        }
        return best;
    }

    bool adjacent(std::size_t i, std::size_t j) const {
        const auto nb = neighbors(i);
        return std::binary_search(nb.begin(), nb.end(), j);
    }

    /// Unique edges with i < j, in lexicographic order.
    std::vector<WeightedEdge> edges() const {
        std::vector<WeightedEdge> out;
        out.reserve(num_edges());
        for (std::size_t i = 0; i < size(); ++i) {
            const auto nb = neighbors(i);
            const auto w = weights(i);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                if (i < nb[k]) {
                    out.push_back({i, nb[k], w[k]});
                }
            }
        }
        return out;
    }

    std::size_t connected_components() const {
        std::vector<std::size_t> parent(size());
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t v) {
            while (parent[v] != v) {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            return v;
        };
        std::size_t components = size();
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j : neighbors(i)) {
                const auto a = find(i);
                const auto b = find(j);
                if (a != b) {
                    parent[a] = b;
                    --components;
                }
            }
        }
        return components;
    }

    friend MarkovGraph from_edge_list(std::size_t n, std::span<const WeightedEdge> edges);

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbors_;
    std::vector<double> weights_;
};

/// Builds a graph from (i, j[, w]) pairs. Reversed and repeated pairs collapse to
/// one edge; repeated pairs must agree on weight.
inline MarkovGraph from_edge_list(std::size_t n, std::span<const WeightedEdge> edges) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> directed;
    directed.reserve(2 * edges.size());
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n) {
            throw std::invalid_argument("from_edge_list: edge (" + std::to_string(e.i) + ", " +
                                        std::to_string(e.j) + ") out of range for n = " +
                                        std::to_string(n));
        }
        if (e.i == e.j) {
            throw std::invalid_argument("from_edge_list: self-loop at node " + std::to_string(e.i));
        }
        directed.emplace_back(e.i, e.j, e.weight);
        directed.emplace_back(e.j, e.i, e.weight);
    }
    std::sort(directed.begin(), directed.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });

    MarkovGraph g;
    g.offsets_.assign(n + 1, 0);
    for (std::size_t k = 0; k < directed.size(); ++k) {
        const auto [i, j, w] = directed[k];
        if (k > 0 && std::get<0>(directed[k - 1]) == i && std::get<1>(directed[k - 1]) == j) {
            if (std::get<2>(directed[k - 1]) != w) {
                throw std::invalid_argument("from_edge_list: conflicting weights for edge (" +
                                            std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            continue;
        }
        g.neighbors_.push_back(j);
        g.weights_.push_back(w);
        ++g.offsets_[i + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    return g;
}

inline MarkovGraph from_edge_list(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<WeightedEdge> edges;
    edges.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        edges.push_back({i, j, 1.0});
    }
    return from_edge_list(n, std::span<const WeightedEdge>(edges));
}

inline MarkovGraph from_edge_list(std::size_t n,
                                  std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    return from_edge_list(n, std::span<const std::pair<std::size_t, std::size_t>>(pairs.begin(), pairs.size()));
}

/// rows x cols pixel lattice, row-major node ids, no wrap-around at the border.
inline MarkovGraph build_lattice(std::size_t rows, std::size_t cols, Neighborhood hood) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("build_lattice: dimensions must be positive");
    }
    std::vector<WeightedEdge> edges;
    edges.reserve(rows * cols * (hood == Neighborhood::king8 ? 4 : 2));
    auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
            if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
            if (hood == Neighborhood::king8 && r + 1 < rows) {
                if (c + 1 < cols) edges.push_back({id(r, c), id(r + 1, c + 1)});
                if (c > 0) edges.push_back({id(r, c), id(r + 1, c - 1)});
            }
        }
    }
    return from_edge_list(rows * cols, std::span<const WeightedEdge>(edges));
}

/// A proper k-coloring. Colors are 1-based; classes[j] lists the nodes with
/// color j + 1 in ascending order.
struct Coloring {
    std::vector<int> assignment;
    int k = 0;
    std::vector<std::vector<std::size_t>> classes;

    static Coloring from_assignment(std::vector<int> assignment) {
        Coloring c;
        for (int color : assignment) {
            if (color < 1) {
                throw std::invalid_argument("Coloring: colors must be >= 1");
            }
            c.k = std::max(c.k, color);
        }
        c.classes.assign(static_cast<std::size_t>(c.k), {});
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            c.classes[static_cast<std::size_t>(assignment[i] - 1)].push_back(i);
        }
        c.assignment = std::move(assignment);
        return c;
    }
};

inline bool is_permutation_of_nodes(std::span<const std::size_t> order, std::size_t n) {
    if (order.size() != n) {
        return false;
    }
    std::vector<bool> seen(n, false);
    for (std::size_t v : order) {
        if (v >= n || seen[v]) {
            return false;
        }
        seen[v] = true;
    }
    return true;
}

/// Visits nodes in `order`, giving each the smallest color not already used by a
/// colored neighbor. Edge weights are ignored.
inline Coloring greedy_color(const MarkovGraph& graph, std::span<const std::size_t> order) {
    const std::size_t n = graph.size();
    if (!is_permutation_of_nodes(order, n)) {
        throw std::invalid_argument("greedy_color: order is not a permutation of the nodes");
    }
    std::vector<int> color(n, 0);
    // forbidden[c] == v marks color c as taken while visiting v
    std::vector<std::size_t> forbidden(graph.max_degree() + 2, n);
    for (std::size_t v : order) {
        for (std::size_t u : graph.neighbors(v)) {
            if (color[u] > 0) {
                forbidden[static_cast<std::size_t>(color[u])] = v;
            }
        }
        int c = 1;
        while (forbidden[static_cast<std::size_t>(c)] == v) {
            ++c;
        }
        color[v] = c;
    }
    return Coloring::from_assignment(std::move(color));
}

inline Coloring greedy_color(const MarkovGraph& graph) {
    std::vector<std::size_t> order(graph.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return greedy_color(graph, order);
}

/// True iff the assignment is proper and the classes partition the nodes consistently.
inline bool validate_coloring(const MarkovGraph& graph, const Coloring& coloring) {
    const std::size_t n = graph.size();
    if (coloring.assignment.size() != n) {
        throw std::invalid_argument("validate_coloring: coloring covers " +
                                    std::to_string(coloring.assignment.size()) + " nodes, graph has " +
                                    std::to_string(n));
    }
    if (coloring.k < 0 || coloring.classes.size() != static_cast<std::size_t>(coloring.k)) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int c = coloring.assignment[i];
        if (c < 1 || c > coloring.k) {
            return false;
        }
        for (std::size_t j : graph.neighbors(i)) {
            if (coloring.assignment[j] == c) {
                return false;
            }
        }
    }
    std::vector<bool> seen(n, false);
    std::size_t covered = 0;
    for (std::size_t j = 0; j < coloring.classes.size(); ++j) {
        if (coloring.classes[j].empty()) {
            return false;
        }
        for (std::size_t v : coloring.classes[j]) {
            if (v >= n || seen[v] || coloring.assignment[v] != static_cast<int>(j + 1)) {
                return false;
            }
            seen[v] = true;
            ++covered;
        }
    }
    return covered == n;
}

enum class ColorOrderKind { natural, random, degree_desc };

struct ColorOrder {
    ColorOrderKind kind = ColorOrderKind::natural;
    std::uint64_t seed = 0;

    /// Parses "natural", "random:<seed>" or "degree-desc".
    static ColorOrder parse(const std::string& text) {
        if (text == "natural") return {ColorOrderKind::natural, 0};
        if (text == "degree-desc") return {ColorOrderKind::degree_desc, 0};
        if (text.rfind("random:", 0) == 0) {
            try {
                std::size_t used = 0;
                const auto seed = std::stoull(text.substr(7), &used);
                if (used == text.size() - 7) {
                    return {ColorOrderKind::random, seed};
                }
            } catch (const std::exception&) {
            }
        }
        throw std::invalid_argument("unknown color order '" + text +
                                    "' (expected natural, random:<seed>, degree-desc)");
    }
};

inline std::vector<std::size_t> make_color_order(const MarkovGraph& graph, const ColorOrder& spec) {
    std::vector<std::size_t> order(graph.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    switch (spec.kind) {
        case ColorOrderKind::natural:
            break;
        case ColorOrderKind::random: {
            RngStream s(spec.seed, 0x636F6C6F72ULL);
            for (std::size_t i = order.size(); i > 1; --i) {
                const auto j = static_cast<std::size_t>(s.next_u64() % i);
                std::swap(order[i - 1], order[j]);
            }
            break;
        }
        case ColorOrderKind::degree_desc:
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return graph.degree(a) > graph.degree(b);
            });
            break;
    }
    return order;
}

/// Irregular "areal" graph: n uniform points in the unit square, each joined to
/// its k nearest neighbors (symmetrized). Every node has degree >= k.
inline MarkovGraph random_knn_graph(std::size_t n, std::size_t k, RngStream& s) {
    if (k == 0 || k >= n) {
        throw std::invalid_argument("random_knn_graph: need 0 < k < n");
    }
    std::vector<double> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
        px[i] = s.uniform();
        py[i] = s.uniform();
    }
    std::vector<WeightedEdge> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = px[i] - px[j];
            const double dy = py[i] - py[j];
            dist[j] = {j == i ? 1e300 : dx * dx + dy * dy, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t q = 0; q < k; ++q) {
            edges.push_back({i, dist[q].second});
        }
    }
    return from_edge_list(n, std::span<const WeightedEdge>(edges));
}

}  // namespace gmrf

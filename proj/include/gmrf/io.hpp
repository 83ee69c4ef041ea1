#pragma once

// Plain-text formats: edge lists, colorings, dense matrices, binomial data and
// key=value metadata. Readers report malformed input as ParseError with the
// 1-based line number.

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrf/errors.hpp"
#include "gmrf/graph.hpp"

namespace gmrf {

namespace detail {

inline std::string strip_comment(const std::string& line) {
    const auto hash = line.find('#');
    std::string s = hash == std::string::npos ? line : line.substr(0, hash);
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_double(const std::string& text, const std::string& source, std::size_t line) {
    if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(source, line, "expected a number, got '" + text + "'");
}

inline long parse_long(const std::string& text, const std::string& source, std::size_t line) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(source, line, "expected an integer, got '" + text + "'");
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace detail

/// First non-comment line holds n; each further line is `i j [w]` with 0-based indices.
inline MarkovGraph read_edge_list(std::istream& in, const std::string& source = "<stream>") {
    std::string raw;
    std::size_t line = 0;
    std::size_t n = 0;
    bool have_n = false;
    std::vector<WeightedEdge> edges;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = detail::strip_comment(raw);
        if (text.empty()) continue;
        std::istringstream ss(text);
        std::vector<std::string> tokens;
        for (std::string t; ss >> t;) tokens.push_back(t);
        if (!have_n) {
            const long v = tokens.size() == 1 ? detail::parse_long(tokens[0], source, line) : -1;
            if (v < 0) throw ParseError(source, line, "first line must be the node count");
            n = static_cast<std::size_t>(v);
            have_n = true;
            continue;
        }
        if (tokens.size() != 2 && tokens.size() != 3) throw ParseError(source, line, "expected 'i j [w]'");
        const long i = detail::parse_long(tokens[0], source, line);
        const long j = detail::parse_long(tokens[1], source, line);
        const double w = tokens.size() == 3 ? detail::parse_double(tokens[2], source, line) : 1.0;
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
            throw ParseError(source, line, "node index out of range");
        }
        if (i == j) throw ParseError(source, line, "self-loop");
        edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
    }
    if (!have_n) throw ParseError(source, line, "missing node count");
    try {
        return from_edge_list(n, edges);
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, line, e.what());
    }
}

inline MarkovGraph read_edge_list_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_edge_list(in, path);
}

inline void write_edge_list(std::ostream& out, const MarkovGraph& g) {
    out << g.size() << '\n';
    for (const auto& e : g.edges()) {
        out << e.i << ' ' << e.j;
        if (e.weight != 1.0) out << ' ' << e.weight;
        out << '\n';
    }
}

inline void write_coloring_csv(std::ostream& out, const Coloring& c) {
    out << "node,color\n";
    for (std::size_t i = 0; i < c.assignment.size(); ++i) out << i << ',' << c.assignment[i] << '\n';
}

/// Rows of comma-separated numbers, no header.
inline void write_matrix_csv(std::ostream& out, std::span<const double> values, std::size_t rows, std::size_t cols) {
    if (rows * cols != values.size()) throw std::invalid_argument("write_matrix_csv: shape does not match data");
    out << std::setprecision(17);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c > 0) out << ',';
            out << values[r * cols + c];
        }
        out << '\n';
    }
}

struct DenseTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
};

/// Accepts comma- or whitespace-separated rows of equal length.
inline DenseTable read_matrix(std::istream& in, const std::string& source = "<stream>") {
    DenseTable t;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string text = detail::strip_comment(raw);
        if (text.empty()) continue;
        for (char& ch : text) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream ss(text);
        std::size_t count = 0;
        for (std::string tok; ss >> tok; ++count) t.values.push_back(detail::parse_double(tok, source, line));
        if (t.rows == 0) {
            t.cols = count;
        } else if (count != t.cols) {
            throw ParseError(source, line, "row has " + std::to_string(count) + " entries, expected " +
                                               std::to_string(t.cols));
        }
        ++t.rows;
    }
    return t;
}

struct BinomialData {
    std::vector<long> successes;
    std::vector<long> trials;
    std::vector<bool> observed;
};

/// CSV with header `node,Y,m`. Nodes not listed, or listed with empty Y/m, are unobserved.
inline BinomialData read_binomial_csv(std::istream& in, std::size_t n, const std::string& source = "<stream>") {
    BinomialData d{std::vector<long>(n, 0), std::vector<long>(n, 0), std::vector<bool>(n, false)};
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = detail::strip_comment(raw);
        if (text.empty()) continue;
        const auto cells = detail::split_csv(text);
        if (!header) {
            if (cells != std::vector<std::string>{"node", "Y", "m"}) {
                throw ParseError(source, line, "expected header 'node,Y,m'");
            }
            header = true;
            continue;
        }
        if (cells.size() != 3) throw ParseError(source, line, "expected three columns");
        const long node = detail::parse_long(cells[0], source, line);
        if (node < 0 || static_cast<std::size_t>(node) >= n) throw ParseError(source, line, "node out of range");
        if (cells[1].empty() || cells[2].empty()) continue;
        const auto i = static_cast<std::size_t>(node);
        d.successes[i] = detail::parse_long(cells[1], source, line);
        d.trials[i] = detail::parse_long(cells[2], source, line);
        if (d.successes[i] < 0 || d.successes[i] > d.trials[i]) {
            throw ParseError(source, line, "need 0 <= Y <= m");
        }
        d.observed[i] = true;
    }
    if (!header) throw ParseError(source, line, "empty file");
    return d;
}

inline void write_binomial_csv(std::ostream& out, const BinomialData& d) {
    out << "node,Y,m\n";
    for (std::size_t i = 0; i < d.successes.size(); ++i) {
        out << i << ',';
        if (d.observed[i]) out << d.successes[i] << ',' << d.trials[i];
        else out << ',';
        out << '\n';
    }
}

using Metadata = std::map<std::string, std::string>;

inline void write_metadata(std::ostream& out, const Metadata& meta) {
    for (const auto& [k, v] : meta) out << k << '=' << v << '\n';
}

inline Metadata read_metadata(std::istream& in, const std::string& source = "<stream>") {
    Metadata meta;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = detail::strip_comment(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError(source, line, "expected key=value");
        meta[text.substr(0, eq)] = text.substr(eq + 1);
    }
    return meta;
}

}  // namespace gmrf

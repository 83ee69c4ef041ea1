#pragma once

// Running a Gibbs chain end to end, and the chain CSV format.
//
// Random streams: RngStream(seed, stream_id) is the chain's base. Scalar draws
// (beta0, sigma2, tau2) use one sequential substream in the `hyper` domain;
// every field and Polya-Gamma site draw uses a counter-keyed substream
// (domain, sweep, site), so results do not depend on the update schedule or
// the number of worker threads.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrf/field.hpp"
#include "gmrf/graph.hpp"
#include "gmrf/io.hpp"
#include "gmrf/models.hpp"

namespace gmrf {

struct ChainOptions {
    std::uint64_t stream_id = 0;
    std::size_t workers = 1;   // chromatic_parallel only
    ColorOrder color_order{};  // chromatic samplers only
    double init_jitter = 0.0;  // spread of overdispersed starting values
};

struct ChainRecord {
    std::uint64_t iter = 0;
    double beta0 = 0.0;
    double sigma2 = std::numeric_limits<double>::quiet_NaN();
    double tau2 = 0.0;
    double level = 0.0;  // beta0 + mean(gamma), identified even when beta0 alone is not
    double seconds = 0.0;
    double field_seconds = 0.0;
    double hyper_seconds = 0.0;
};

struct ChainOutput {
    SamplerKind kind = SamplerKind::single_site;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::size_t iterations = 0;
    std::size_t burnin = 0;
    std::size_t colors = 0;  // k for chromatic samplers, 0 otherwise

    std::vector<ChainRecord> records;  // one per iteration, burn-in included
    std::size_t thin = 0;  // gamma kept every `thin` retained iterations; 0 keeps none
    std::vector<std::uint64_t> snapshot_iters;
    std::vector<std::vector<double>> gamma_snapshots;
    std::vector<double> field_mean;  // mean of gamma over retained iterations
    KernelCounters counters;

    std::size_t retained() const noexcept { return iterations - burnin; }

    std::vector<double> retained_values(double ChainRecord::*member) const {
        std::vector<double> out;
        out.reserve(retained());
        for (std::size_t t = burnin; t < records.size(); ++t) out.push_back(records[t].*member);
        return out;
    }

    /// Total wall-clock seconds spent in the retained iterations.
    double retained_seconds() const {
        double total = 0.0;
        for (std::size_t t = burnin; t < records.size(); ++t) total += records[t].seconds;
        return total;
    }

    double total_seconds() const {
        double total = 0.0;
        for (const auto& r : records) total += r.seconds;
        return total;
    }
};

namespace detail {

inline std::optional<Coloring> coloring_for(SamplerKind kind, const MarkovGraph& graph, const ColorOrder& order) {
    if (!is_chromatic(kind)) return std::nullopt;
    return greedy_color(graph, make_color_order(graph, order));
}

template <class Model, class Gibbs, class Step>
ChainOutput run_chain_impl(const Model& model, SamplerKind kind, std::size_t iterations, std::size_t burnin,
                           std::size_t thin, std::uint64_t seed, const ChainOptions& opt, ModelState state, Step step) {
    if (iterations == 0 || burnin >= iterations) {
        throw std::invalid_argument("run_chain: need 0 <= burnin < iterations");
    }
    const RngStream base(seed, opt.stream_id);
    RngStream hyper = base.substream(static_cast<std::uint64_t>(StreamDomain::hyper), 0);

    Gibbs gibbs(model, kind, coloring_for(kind, model.graph, opt.color_order), opt.workers);

    ChainOutput out;
    out.kind = kind;
    out.seed = seed;
    out.stream_id = opt.stream_id;
    out.iterations = iterations;
    out.burnin = burnin;
    out.thin = thin;
    out.colors = gibbs.kernel.colors();
    out.records.reserve(iterations);
    out.field_mean.assign(model.size(), 0.0);

    for (std::size_t t = 0; t < iterations; ++t) {
        StepTimes times;
        const auto start = std::chrono::steady_clock::now();
        step(state, gibbs, hyper, base, &times);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const auto& x = state.gamma.x;
        const double level = state.beta0 + std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        out.records.push_back({t, state.beta0, state.sigma2, state.tau2, level, secs, times.field_seconds,
                               times.hyper_seconds});
        if (t >= burnin) {
            const auto& g = state.gamma.x;
            for (std::size_t i = 0; i < g.size(); ++i) out.field_mean[i] += g[i];
            if (thin > 0 && (t - burnin) % thin == 0) {
                out.snapshot_iters.push_back(t);
                out.gamma_snapshots.push_back(g);
            }
        }
    }
    const double kept = static_cast<double>(iterations - burnin);
    for (double& v : out.field_mean) v /= kept;
    out.counters = state.gamma.counters;
    return out;
}

}  // namespace detail

/// Starting values: beta0 at the data mean, gamma at zero, sigma2 at the data
/// variance and tau2 = 1, each perturbed when init_jitter > 0.
inline ModelState initial_state(const GaussianImageModel& model, const RngStream& base, double jitter) {
    const std::size_t n = model.size();
    const double mean = std::accumulate(model.y.begin(), model.y.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : model.y) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 1.0;

    ModelState st;
    st.beta0 = mean;
    st.gamma = FieldState(n);
    st.sigma2 = var > 0.0 ? var : 1.0;
    st.tau2 = 1.0;
    if (jitter > 0.0) {
        RngStream s = base.substream(static_cast<std::uint64_t>(StreamDomain::init), 0);
        st.beta0 += jitter * std::sqrt(st.sigma2) * s.normal();
        st.sigma2 *= std::exp(jitter * s.normal());
        st.tau2 *= std::exp(jitter * s.normal());
        for (double& g : st.gamma.x) g = jitter * s.normal();
    }
    return st;
}

inline ModelState initial_state(const BinomialLogitModel& model, const RngStream& base, double jitter) {
    ModelState st;
    st.gamma = FieldState(model.size());
    st.psi.assign(model.size(), 0.0);
    st.tau2 = 1.0;
    if (jitter > 0.0) {
        RngStream s = base.substream(static_cast<std::uint64_t>(StreamDomain::init), 0);
        st.beta0 = jitter * s.normal();
        st.tau2 *= std::exp(jitter * s.normal());
        for (double& g : st.gamma.x) g = jitter * s.normal();
    }
    return st;
}

inline ChainOutput run_chain(const GaussianImageModel& model, SamplerKind kind, std::size_t iterations,
                             std::size_t burnin, std::size_t thin, std::uint64_t seed,
                             const ChainOptions& opt = {}) {
    auto init = initial_state(model, RngStream(seed, opt.stream_id), opt.init_jitter);
    return detail::run_chain_impl<GaussianImageModel, GaussianGibbs>(
        model, kind, iterations, burnin, thin, seed, opt, std::move(init),
        [](ModelState& st, GaussianGibbs& g, RngStream& hyper, const RngStream& base, StepTimes* times) {
            gibbs_step_gaussian(st, g, hyper, base, times);
        });
}

inline ChainOutput run_chain(const BinomialLogitModel& model, SamplerKind kind, std::size_t iterations,
                             std::size_t burnin, std::size_t thin, std::uint64_t seed,
                             const ChainOptions& opt = {}) {
    auto init = initial_state(model, RngStream(seed, opt.stream_id), opt.init_jitter);
    auto out = detail::run_chain_impl<BinomialLogitModel, BinomialGibbs>(
        model, kind, iterations, burnin, thin, seed, opt, std::move(init),
        [](ModelState& st, BinomialGibbs& g, RngStream& hyper, const RngStream& base, StepTimes* times) {
            gibbs_step_binomial(st, g, hyper, base, times);
        });
    for (auto& r : out.records) r.sigma2 = std::numeric_limits<double>::quiet_NaN();
    return out;
}

// ---------------------------------------------------------------------------
// Chain CSV: header `iter,beta0,sigma2,tau2,seconds`, one row per retained
// iteration. sigma2 is `nan` for models without a noise variance.

struct ChainTable {
    std::vector<std::uint64_t> iter;
    std::vector<double> beta0;
    std::vector<double> sigma2;
    std::vector<double> tau2;
    std::vector<double> seconds;

    std::size_t size() const noexcept { return iter.size(); }
};

inline void write_chain_csv(std::ostream& out, const ChainOutput& chain) {
    out << std::setprecision(17);
    out << "iter,beta0,sigma2,tau2,seconds\n";
    for (std::size_t t = chain.burnin; t < chain.records.size(); ++t) {
        const auto& r = chain.records[t];
        out << r.iter << ',' << r.beta0 << ',';
        if (std::isnan(r.sigma2)) out << "nan";
        else out << r.sigma2;
        out << ',' << r.tau2 << ',' << r.seconds << '\n';
    }
}

inline ChainTable read_chain_csv(std::istream& in, const std::string& source = "<stream>") {
    ChainTable t;
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = detail::strip_comment(raw);
        if (text.empty()) continue;
        const auto cells = detail::split_csv(text);
        if (!header) {
            if (cells != std::vector<std::string>{"iter", "beta0", "sigma2", "tau2", "seconds"}) {
                throw ParseError(source, line, "expected header 'iter,beta0,sigma2,tau2,seconds'");
            }
            header = true;
            continue;
        }
        if (cells.size() != 5) {
            throw ParseError(source, line, "expected 5 columns, found " + std::to_string(cells.size()));
        }
        const long it = detail::parse_long(cells[0], source, line);
        if (it < 0) throw ParseError(source, line, "negative iteration index");
        t.iter.push_back(static_cast<std::uint64_t>(it));
        t.beta0.push_back(detail::parse_double(cells[1], source, line));
        t.sigma2.push_back(detail::parse_double(cells[2], source, line));
        t.tau2.push_back(detail::parse_double(cells[3], source, line));
        t.seconds.push_back(detail::parse_double(cells[4], source, line));
    }
    if (!header) throw ParseError(source, line, "empty chain file");
    return t;
}

}  // namespace gmrf

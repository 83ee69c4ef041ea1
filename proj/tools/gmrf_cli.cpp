// Command-line harness: simulate data, run samplers, color graphs, and
// summarize chains.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmrf/gmrf.hpp"

namespace fs = std::filesystem;
using namespace gmrf;

namespace {

constexpr const char* kSeedHelp =
    "Master seed. A chain's base stream is Philox4x32-10 keyed by (seed, stream-id). "
    "Scalar draws (beta0, sigma2, tau2) come from one sequential substream in domain 3; "
    "each field site draw at sweep t uses the substream (1, t, site) and each Polya-Gamma "
    "draw uses (2, t, site); overdispersed starting values use domain 4 and simulated data "
    "domain 5. Results are therefore identical for any thread count.";

enum class ModelKind { gaussian_image, binomial_logit };

ModelKind parse_model(const std::string& s) {
    if (s == "gaussian_image") return ModelKind::gaussian_image;
    if (s == "binomial_logit") return ModelKind::binomial_logit;
    throw std::invalid_argument("unknown model '" + s + "' (expected gaussian_image or binomial_logit)");
}

Neighborhood parse_neighborhood(const std::string& s) {
    if (s == "king8") return Neighborhood::king8;
    if (s == "rook4") return Neighborhood::rook4;
    throw std::invalid_argument("unknown neighborhood '" + s + "' (expected king8 or rook4)");
}

struct GraphSpec {
    std::size_t p = 50;
    std::string graph_file;
    std::string neighborhood = "king8";

    void add_to(CLI::App* app) {
        app->add_option("--p", p, "Lattice side length; the graph is a p x p lattice unless --graph is given")
            ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
        app->add_option("--graph", graph_file, "Edge-list file: node count, then one 'i j [w]' per line");
        app->add_option("--neighborhood", neighborhood, "Lattice neighborhood: king8 or rook4")
            ->capture_default_str();
    }

    bool is_lattice() const { return graph_file.empty(); }

    MarkovGraph build() const {
        if (!is_lattice()) return read_edge_list_file(graph_file);
        return build_lattice(p, p, parse_neighborhood(neighborhood));
    }
};

RngStream data_stream(std::uint64_t seed) {
    return RngStream(seed, 0).substream(static_cast<std::uint64_t>(StreamDomain::data), 0);
}

fs::path prepare_dir(const std::string& out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& p) { return detail::open_output(p.string()); }

template <class T>
std::string str(const T& v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string model = "gaussian_image";
    GraphSpec graph;
    double noise_sd = 1.0;
    double rho = 0.995;
    double tau2 = 0.05;
    double beta0 = 0.5;
    long trials = 200;
    double missing = 0.0;
    std::uint64_t seed = 1;
    std::string out = ".";
};

void cmd_simulate(const SimulateArgs& a) {
    const auto dir = prepare_dir(a.out);
    auto s = data_stream(a.seed);
    if (parse_model(a.model) == ModelKind::gaussian_image) {
        if (!a.graph.is_lattice()) throw std::invalid_argument("simulate: the image model needs --p, not --graph");
        const auto img = simulate_image(a.graph.p, a.noise_sd, s);
        auto t = open_out(dir / "truth.csv");
        write_matrix_csv(t, img.truth, a.graph.p, a.graph.p);
        auto o = open_out(dir / "observed.csv");
        write_matrix_csv(o, img.observed, a.graph.p, a.graph.p);
        return;
    }
    const auto g = a.graph.build();
    const auto d = simulate_binomial(g, a.rho, a.tau2, a.beta0, a.trials, a.missing, s);
    auto t = open_out(dir / "truth.csv");
    write_matrix_csv(t, d.gamma, d.gamma.size(), 1);
    auto o = open_out(dir / "observed.csv");
    write_binomial_csv(o, BinomialData{d.successes, d.trials, d.observed});
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string model = "gaussian_image";
    std::string sampler = "chromatic";
    GraphSpec graph;
    std::string observed;
    std::string data;
    double noise_sd = 1.0;
    std::size_t iterations = 10000;
    std::size_t burnin = 2000;
    std::size_t thin = 0;
    std::uint64_t seed = 1;
    std::uint64_t stream_id = 0;
    double alpha = 0.001;
    double rho = 0.995;
    std::size_t workers = 1;
    std::string color_order = "natural";
    double jitter = 0.0;
    std::string out = ".";
};

std::vector<std::pair<std::string, double ChainRecord::*>> reported_parameters(ModelKind model) {
    if (model == ModelKind::gaussian_image) {
        return {{"sigma2", &ChainRecord::sigma2}, {"tau2", &ChainRecord::tau2}};
    }
    return {{"beta0", &ChainRecord::beta0}, {"tau2", &ChainRecord::tau2}};
}

void write_report(std::ostream& out, ModelKind model, const ChainOutput& chain) {
    out << std::setprecision(10);
    out << "sampler,parameter,cpu_seconds,ess,iat,ces\n";
    const double seconds = chain.total_seconds();
    for (const auto& [name, member] : reported_parameters(model)) {
        const auto x = chain.retained_values(member);
        out << to_string(chain.kind) << ',' << name << ',' << seconds << ',';
        try {
            const auto r = efficiency_report(x, seconds);
            out << r.ess << ',' << r.iat << ',' << r.ces << '\n';
        } catch (const std::exception&) {
            out << "nan,nan,nan\n";
        }
    }
}

void cmd_run(const RunArgs& a) {
    const auto model_kind = parse_model(a.model);
    const auto kind = parse_sampler_kind(a.sampler);
    if (a.burnin >= a.iterations) throw std::invalid_argument("run: --burnin must be below --iterations");
    if (a.workers == 0) throw std::invalid_argument("run: --workers must be at least 1");
    if (a.workers > 1 && kind != SamplerKind::chromatic_parallel) {
        throw std::invalid_argument("run: --workers > 1 requires --sampler chromatic_parallel");
    }

    ChainOptions opt;
    opt.stream_id = a.stream_id;
    opt.workers = a.workers;
    opt.color_order = ColorOrder::parse(a.color_order);
    opt.init_jitter = a.jitter;

    const auto graph = a.graph.build();
    const auto dir = prepare_dir(a.out);
    Metadata meta{{"model", a.model},
                  {"sampler", to_string(kind)},
                  {"seed", std::to_string(a.seed)},
                  {"stream_id", std::to_string(a.stream_id)},
                  {"iterations", std::to_string(a.iterations)},
                  {"burnin", std::to_string(a.burnin)},
                  {"thin", std::to_string(a.thin)},
                  {"workers", std::to_string(a.workers)},
                  {"color_order", a.color_order},
                  {"init_jitter", str(a.jitter)},
                  {"nodes", std::to_string(graph.size())},
                  {"graph", a.graph.is_lattice() ? "lattice:" + std::to_string(a.graph.p) + ":" + a.graph.neighborhood
                                                 : a.graph.graph_file}};

    ChainOutput chain;
    std::size_t rows = graph.size(), cols = 1;
    if (model_kind == ModelKind::gaussian_image) {
        std::vector<double> y;
        if (!a.observed.empty()) {
            auto in = detail::open_input(a.observed);
            auto table = read_matrix(in, a.observed);
            if (table.values.size() != graph.size()) {
                throw std::invalid_argument("run: observed image has " + std::to_string(table.values.size()) +
                                            " values but the graph has " + std::to_string(graph.size()) + " nodes");
            }
            rows = table.rows;
            cols = table.cols;
            y = std::move(table.values);
            meta["observed"] = a.observed;
        } else {
            if (!a.graph.is_lattice()) throw std::invalid_argument("run: --graph with the image model needs --observed");
            auto s = data_stream(a.seed);
            y = simulate_image(a.graph.p, a.noise_sd, s).observed;
            rows = cols = a.graph.p;
            meta["noise_sd"] = str(a.noise_sd);
        }
        meta["alpha"] = str(a.alpha);
        const GaussianImageModel m(std::move(y), graph, a.alpha);
        chain = run_chain(m, kind, a.iterations, a.burnin, a.thin, a.seed, opt);
    } else {
        if (a.data.empty()) throw std::invalid_argument("run: the binomial model needs --data node,Y,m CSV");
        auto in = detail::open_input(a.data);
        auto d = read_binomial_csv(in, graph.size(), a.data);
        meta["data"] = a.data;
        meta["rho"] = str(a.rho);
        const BinomialLogitModel m(std::move(d.successes), std::move(d.trials), std::move(d.observed), graph, a.rho);
        chain = run_chain(m, kind, a.iterations, a.burnin, a.thin, a.seed, opt);
    }

    double field = 0.0, hyper = 0.0;
    for (const auto& r : chain.records) {
        field += r.field_seconds;
        hyper += r.hyper_seconds;
    }
    meta["colors"] = std::to_string(chain.colors);
    meta["symbolic_factorizations"] = std::to_string(chain.counters.symbolic_factorizations);
    meta["numeric_factorizations"] = std::to_string(chain.counters.numeric_factorizations);
    meta["triangular_solves"] = std::to_string(chain.counters.triangular_solves);
    meta["factor_bytes"] = std::to_string(chain.counters.factor_bytes);
    meta["total_seconds"] = str(chain.total_seconds());
    meta["field_seconds"] = str(field);
    meta["hyper_seconds"] = str(hyper);

    {
        auto f = open_out(dir / "chain.csv");
        write_chain_csv(f, chain);
    }
    {
        auto f = open_out(dir / "field_mean.csv");
        write_matrix_csv(f, chain.field_mean, rows, cols);
    }
    if (!chain.gamma_snapshots.empty()) {
        auto f = open_out(dir / "gamma_samples.csv");
        std::vector<double> flat;
        for (const auto& g : chain.gamma_snapshots) flat.insert(flat.end(), g.begin(), g.end());
        write_matrix_csv(f, flat, chain.gamma_snapshots.size(), graph.size());
    }
    {
        auto f = open_out(dir / "report.csv");
        write_report(f, model_kind, chain);
    }
    {
        auto f = open_out(dir / "metadata.txt");
        write_metadata(f, meta);
    }
    std::cout << to_string(kind) << ": " << a.iterations << " iterations in " << std::setprecision(4)
              << chain.total_seconds() << " s, k = " << chain.colors << ", outputs in " << dir.string() << '\n';
}

// ---------------------------------------------------------------------------
// color

struct ColorArgs {
    GraphSpec graph;
    std::string color_order = "natural";
    std::string out;
};

void cmd_color(const ColorArgs& a) {
    const auto g = a.graph.build();
    const auto c = greedy_color(g, make_color_order(g, ColorOrder::parse(a.color_order)));
    std::cout << "k=" << c.k << '\n';
    std::cout << "max_degree=" << g.max_degree() << '\n';
    if (!a.out.empty()) {
        auto f = detail::open_output(a.out);
        write_coloring_csv(f, c);
    }
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    std::vector<std::string> files;
    std::size_t max_lag = 20;
    std::vector<double> ces_inputs;
};

void cmd_diagnose(const DiagnoseArgs& a) {
    if (!a.ces_inputs.empty()) {
        if (a.ces_inputs.size() != 3) throw std::invalid_argument("diagnose: --ces takes T,N,IAT");
        const double c = ces(a.ces_inputs[0], static_cast<std::size_t>(a.ces_inputs[1]), a.ces_inputs[2]);
        std::cout << "ces=" << std::setprecision(6) << c << '\n';
        if (a.files.empty()) return;
    }
    if (a.files.empty()) throw std::invalid_argument("diagnose: need at least one chain file");

    std::vector<ChainTable> tables;
    for (const auto& f : a.files) {
        auto in = detail::open_input(f);
        tables.push_back(read_chain_csv(in, f));
    }

    struct Param {
        const char* name;
        std::vector<double> ChainTable::*column;
    };
    const Param params[] = {{"beta0", &ChainTable::beta0}, {"sigma2", &ChainTable::sigma2}, {"tau2", &ChainTable::tau2}};

    std::cout << std::setprecision(6);
    for (std::size_t c = 0; c < tables.size(); ++c) {
        const auto& t = tables[c];
        double seconds = 0.0;
        for (double s : t.seconds) seconds += s;
        std::cout << "# chain " << a.files[c] << " (" << t.size() << " draws)\n";
        std::cout << "parameter,mean,iat,ess,ces";
        for (std::size_t l = 1; l <= a.max_lag; ++l) std::cout << ",acf" << l;
        std::cout << '\n';
        for (const auto& p : params) {
            const auto& x = t.*(p.column);
            if (x.empty() || std::isnan(x.front())) continue;
            double mean = 0.0;
            for (double v : x) mean += v;
            mean /= static_cast<double>(x.size());
            std::cout << p.name << ',' << mean;
            try {
                const double tau = iat(x);
                std::cout << ',' << tau << ',' << ess_from_iat(x.size(), tau) << ',';
                if (seconds > 0.0) std::cout << ces(seconds, x.size(), tau);
                else std::cout << "nan";
                const auto r = acf(x, std::min(a.max_lag, x.size() - 1));
                for (std::size_t l = 1; l <= a.max_lag; ++l) std::cout << ',' << (l < r.size() ? r[l] : NAN);
            } catch (const std::exception& e) {
                std::cout << ",nan,nan,nan";
                for (std::size_t l = 1; l <= a.max_lag; ++l) std::cout << ",nan";
                std::cerr << a.files[c] << ": " << p.name << ": " << e.what() << '\n';
            }
            std::cout << '\n';
        }
    }

    if (tables.size() >= 2) {
        std::size_t len = tables.front().size();
        for (const auto& t : tables) len = std::min(len, t.size());
        std::cout << "# potential scale reduction over " << tables.size() << " chains\n";
        std::cout << "parameter,psrf\n";
        for (const auto& p : params) {
            std::vector<std::vector<double>> chains;
            for (const auto& t : tables) {
                const auto& x = t.*(p.column);
                chains.emplace_back(x.end() - static_cast<std::ptrdiff_t>(len), x.end());
            }
            if (chains.front().empty() || std::isnan(chains.front().front())) continue;
            std::cout << p.name << ',' << gelman_rubin(chains) << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gibbs samplers for Gaussian Markov random fields"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic data set (truth.csv, observed.csv)");
    simulate->add_option("--model", sim.model, "gaussian_image or binomial_logit")->capture_default_str();
    sim.graph.add_to(simulate);
    simulate->add_option("--noise-sd", sim.noise_sd, "Image noise standard deviation")->capture_default_str();
    simulate->add_option("--rho", sim.rho, "Proper CAR dependence for the binomial field")->capture_default_str();
    simulate->add_option("--tau2", sim.tau2, "Binomial field variance scale")->capture_default_str();
    simulate->add_option("--beta0", sim.beta0, "Binomial intercept")->capture_default_str();
    simulate->add_option("--trials", sim.trials, "Mean number of binomial trials per site")->capture_default_str();
    simulate->add_option("--missing", sim.missing, "Fraction of unobserved binomial sites")->capture_default_str();
    simulate->add_option("--seed", sim.seed, kSeedHelp)->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();

    RunArgs run;
    auto* runc = app.add_subcommand("run", "Run one Gibbs chain and write chain, field mean, report and metadata");
    runc->add_option("--model", run.model, "gaussian_image or binomial_logit")->capture_default_str();
    runc->add_option("--sampler", run.sampler, "single_site, chromatic, chromatic_parallel or block")
        ->capture_default_str();
    run.graph.add_to(runc);
    runc->add_option("--observed", run.observed, "Observed image CSV; simulated from --noise-sd when omitted");
    runc->add_option("--data", run.data, "Binomial data CSV with header node,Y,m");
    runc->add_option("--noise-sd", run.noise_sd, "Noise level for the simulated image")->capture_default_str();
    runc->add_option("--iterations", run.iterations, "Total Gibbs iterations")->capture_default_str();
    runc->add_option("--burnin", run.burnin, "Iterations discarded before summaries")->capture_default_str();
    runc->add_option("--thin", run.thin, "Keep a field draw every this many retained iterations (0: none)")
        ->capture_default_str();
    runc->add_option("--seed", run.seed, kSeedHelp)->capture_default_str();
    runc->add_option("--stream-id", run.stream_id, "Independent stream index for parallel chains")
        ->capture_default_str();
    runc->add_option("--alpha", run.alpha, "Inverse-gamma shape and rate for sigma2 and tau2")->capture_default_str();
    runc->add_option("--rho", run.rho, "Proper CAR dependence for the binomial model")->capture_default_str();
    runc->add_option("--workers", run.workers, "Threads for chromatic_parallel")->capture_default_str();
    runc->add_option("--color-order", run.color_order, "Greedy order: natural, random:<seed> or degree-desc")
        ->capture_default_str();
    runc->add_option("--jitter", run.jitter, "Spread of overdispersed starting values")->capture_default_str();
    runc->add_option("--out", run.out, "Output directory")->capture_default_str();

    ColorArgs col;
    auto* color = app.add_subcommand("color", "Greedy-color a graph; prints k and optionally writes node,color CSV");
    col.graph.add_to(color);
    color->add_option("--color-order", col.color_order, "natural, random:<seed> or degree-desc")
        ->capture_default_str();
    color->add_option("--out", col.out, "Coloring CSV path");

    DiagnoseArgs diag;
    auto* diagnose = app.add_subcommand("diagnose", "ACF, IAT, ESS, CES per chain and PSRF across chains");
    diagnose->add_option("files", diag.files, "Chain CSV files");
    diagnose->add_option("--max-lag", diag.max_lag, "Largest ACF lag reported")->capture_default_str();
    diagnose->add_option("--ces", diag.ces_inputs, "Compute CES from T,N,IAT")->delimiter(',')->expected(3);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*simulate) cmd_simulate(sim);
        if (*runc) cmd_run(run);
        if (*color) cmd_color(col);
        if (*diagnose) cmd_diagnose(diag);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

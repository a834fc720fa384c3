#include "specloc/cli.hpp"

#include "specloc/errors.hpp"
#include "specloc/experiment.hpp"
#include "specloc/graph.hpp"
#include "specloc/io.hpp"
#include "specloc/lattice.hpp"
#include "specloc/parallel.hpp"
#include "specloc/propagation.hpp"
#include "specloc/rewiring.hpp"
#include "specloc/rng.hpp"
#include "specloc/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace specloc::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Output tables: CSV by default, the same rows as a JSON array on request.

class TableWriter {
public:
    TableWriter(std::vector<std::string> columns, bool as_json)
        : columns_(std::move(columns)), as_json_(as_json) {
        if (!as_json_) csv_.emplace(columns_);
    }

    TableWriter& cell(double v) {
        if (as_json_)
            row_[columns_[index_]] = v;
        else
            csv_->cell(v);
        ++index_;
        return *this;
    }
    TableWriter& cell(int v) {
        if (as_json_)
            row_[columns_[index_]] = v;
        else
            csv_->cell(v);
        ++index_;
        return *this;
    }
    TableWriter& cell(const std::string& v) {
        if (as_json_)
            row_[columns_[index_]] = v;
        else
            csv_->cell(v);
        ++index_;
        return *this;
    }

    void end_row() {
        if (as_json_) {
            rows_.push_back(row_);
            row_ = json::object();
        } else {
            csv_->end_row();
        }
        index_ = 0;
    }

    /// Write <stem>.csv or <stem>.json into dir; returns the filename.
    std::string write(const std::filesystem::path& dir, const std::string& stem) const {
        const std::string name = stem + (as_json_ ? ".json" : ".csv");
        const std::string body = as_json_ ? rows_.dump(2) + "\n" : csv_->text();
        io::write_text_atomic(dir / name, body);
        return name;
    }

private:
    std::vector<std::string> columns_;
    bool as_json_;
    std::optional<io::Csv> csv_;
    json rows_ = json::array();
    json row_ = json::object();
    std::size_t index_ = 0;
};

std::string xi_to_string(const LocalizationLength& xi) {
    if (!xi.bounded) return "inf";
    return io::format_double(xi.xi);
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Config files: every flag mirrors a JSON key; flags given on the command
// line win. A run manifest can be replayed directly because its "config"
// object uses the same keys.

json load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path.string() + "': " + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("command"))
        return j.at("config");
    if (!j.is_object())
        throw ValidationError("config '" + path.string() + "' must hold a JSON object");
    return j;
}

template <typename T>
void fill(const json& cfg, const CLI::App& sub, const std::string& flag, const char* key,
          T& out) {
    if (sub.count(flag) == 0 && cfg.contains(key)) {
        try {
            out = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// Graph sources shared by analyze/propagate.

struct GraphOptions {
    std::string input;
    std::string input_format = "whitespace";
    std::string generate;
    int n = 0;
    int rows = 0;
    int cols = 0;
    double p = 0.1;
    int m_attach = 2;
    bool allow_disconnected = false;
    int max_retries = 64;
};

void add_graph_options(CLI::App* sub, GraphOptions& g) {
    sub->add_option("--input", g.input, "edge-list file to analyze");
    sub->add_option("--input-format", g.input_format,
                    "edge-list field separator: whitespace|csv");
    sub->add_option("--generate", g.generate,
                    "synthetic graph kind: ring|path|complete|star|grid2d|erdos-renyi|barabasi-albert");
    sub->add_option("--n", g.n, "node count (side length for grid2d)");
    sub->add_option("--rows", g.rows, "grid2d rows");
    sub->add_option("--cols", g.cols, "grid2d cols");
    sub->add_option("--p", g.p, "erdos-renyi edge probability");
    sub->add_option("--m", g.m_attach, "barabasi-albert edges per new node");
    sub->add_flag("--allow-disconnected", g.allow_disconnected,
                  "accept disconnected random samples");
    sub->add_option("--max-retries", g.max_retries, "connectivity resample budget");
}

void merge_graph_config(const json& cfg, const CLI::App& sub, GraphOptions& g) {
    fill(cfg, sub, "--input", "input", g.input);
    fill(cfg, sub, "--input-format", "input_format", g.input_format);
    fill(cfg, sub, "--generate", "generate", g.generate);
    fill(cfg, sub, "--n", "n", g.n);
    fill(cfg, sub, "--rows", "rows", g.rows);
    fill(cfg, sub, "--cols", "cols", g.cols);
    fill(cfg, sub, "--p", "p", g.p);
    fill(cfg, sub, "--m", "m_attach", g.m_attach);
    fill(cfg, sub, "--allow-disconnected", "allow_disconnected", g.allow_disconnected);
    fill(cfg, sub, "--max-retries", "max_retries", g.max_retries);
}

json graph_config_json(const GraphOptions& g) {
    return {{"input", g.input},
            {"input_format", g.input_format},
            {"generate", g.generate},
            {"n", g.n},
            {"rows", g.rows},
            {"cols", g.cols},
            {"p", g.p},
            {"m_attach", g.m_attach},
            {"allow_disconnected", g.allow_disconnected},
            {"max_retries", g.max_retries}};
}

EdgeListFormat edge_list_format(const std::string& name) {
    if (name == "whitespace") return EdgeListFormat::whitespace;
    if (name == "csv") return EdgeListFormat::csv;
    throw ValidationError("unknown edge-list format '" + name + "'");
}

Graph resolve_graph(const GraphOptions& opts, std::uint64_t seed) {
    if (!opts.input.empty() && !opts.generate.empty())
        throw UsageError("--input and --generate are mutually exclusive");
    if (opts.input.empty() && opts.generate.empty())
        throw UsageError("need a graph source: --input PATH or --generate KIND");
    if (!opts.input.empty())
        return load_edge_list(opts.input, edge_list_format(opts.input_format));

    GeneratorParams params;
    params.n = opts.n;
    params.rows = opts.rows;
    params.cols = opts.cols;
    params.p = opts.p;
    params.m_attach = opts.m_attach;
    params.require_connected = !opts.allow_disconnected;
    params.max_retries = opts.max_retries;
    return generate(graph_kind_from_string(opts.generate), params,
                    rng::substream(seed, rng::tag("graph")));
}

// ---------------------------------------------------------------------------
// Manifest: replaying it (specloc <command> --config manifest.json --out DIR)
// reproduces the CSV outputs byte for byte.

void write_manifest(const std::filesystem::path& outdir, const std::string& command,
                    const json& config, std::uint64_t seed, const json& metadata,
                    const std::vector<std::string>& outputs) {
    json manifest = {{"command", command},
                     {"config", config},
                     {"seed", seed},
                     {"tool_version", kToolVersion},
                     {"timestamp", io::utc_timestamp()},
                     {"outputs", outputs}};
    if (!metadata.empty()) manifest["metadata"] = metadata;
    io::write_text_atomic(outdir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
    GraphOptions graph;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::string format = "csv";
    std::string config_file;
    bool export_graph = true;
};

int run_analyze(const CLI::App& sub, AnalyzeOptions opts) {
    if (!opts.config_file.empty()) {
        const json cfg = load_config(opts.config_file);
        merge_graph_config(cfg, sub, opts.graph);
        fill(cfg, sub, "--seed", "seed", opts.seed);
        fill(cfg, sub, "--format", "format", opts.format);
        fill(cfg, sub, "--export-graph", "export_graph", opts.export_graph);
    }
    const bool as_json = opts.format == "json";
    if (!as_json && opts.format != "csv")
        throw UsageError("--format must be csv or json");

    const Graph g = resolve_graph(opts.graph, opts.seed);
    std::filesystem::create_directories(opts.out);

    const Eigen::MatrixXd lap = normalized_laplacian(g);
    const SpectralBasis basis = eigendecompose(lap);
    const ParticipationSpectrum spectrum = eigenvector_participation_spectrum(basis);

    std::vector<std::string> outputs;
    TableWriter table({"band_index", "lambda", "eigvec_participation"}, as_json);
    for (int b = 0; b < basis.size(); ++b) {
        table.cell(b).cell(spectrum.values[b]).cell(spectrum.p[b]);
        table.end_row();
    }
    outputs.push_back(table.write(opts.out, "spectrum"));

    const DegreeStats stats = degree_stats(g);
    json degree_json = {{"n", g.n_nodes()},
                        {"n_edges", g.n_edges()},
                        {"mean_degree", stats.mean_degree},
                        {"degree_fluctuation", stats.fluctuation},
                        {"degree_stddev", stats.stddev},
                        {"min_degree", stats.degrees.minCoeff()},
                        {"max_degree", stats.degrees.maxCoeff()},
                        {"connected", g.is_connected()}};
    io::write_text_atomic(std::filesystem::path(opts.out) / "degree_stats.json",
                          degree_json.dump(2) + "\n");
    outputs.push_back("degree_stats.json");

    if (opts.export_graph) {
        json edges = json::array();
        for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.w});
        json graph_json = {{"n", g.n_nodes()}, {"edges", edges}};
        io::write_text_atomic(std::filesystem::path(opts.out) / "graph.json",
                              graph_json.dump() + "\n");
        outputs.push_back("graph.json");
    }

    json metadata;
    json clusters = json::array();
    for (const auto& [a, b] : degenerate_clusters(basis.eigenvalues))
        clusters.push_back({a, b});
    metadata["degenerate_bands"] = clusters;

    json config = graph_config_json(opts.graph);
    config["format"] = opts.format;
    config["seed"] = opts.seed;
    config["export_graph"] = opts.export_graph;
    write_manifest(opts.out, "analyze", config, opts.seed, metadata, outputs);
    return kOk;
}

// ---------------------------------------------------------------------------
// propagate / compare-rewire

struct PropagateOptions {
    GraphOptions graph;
    std::string signal = "random-gaussian";
    int channels = 4;
    int node = 0;
    std::string signal_file;
    int depth = 8;
    std::string op = "laplacian-complement";
    std::string nonlinearity = "none";
    int record_every = 1;
    bool check_decay = false;
    bool rewire = false;
    double alpha = 1.0;
    int trials = 16;
    std::string add_rule = "uniform-nonneighbor";
    bool rewire_once = false;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::string format = "csv";
    std::string config_file;
};

Eigen::MatrixXd parse_signal_file(const std::filesystem::path& path, int n_nodes) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open signal file '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<double> row;
        std::string token;
        while (fields >> token) {
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end != token.c_str() + token.size())
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": expected a number, got '" + token + "'");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != n_nodes)
        throw ValidationError("signal file has " + std::to_string(rows.size()) +
                              " rows for a graph of " + std::to_string(n_nodes) + " nodes");
    Eigen::MatrixXd signal(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows.front().size(); ++c) signal(i, c) = rows[i][c];
    return signal;
}

Eigen::MatrixXd make_signal(const Graph& g, const PropagateOptions& opts) {
    if (opts.signal == "random-gaussian") {
        if (opts.channels < 1) throw ValidationError("--channels must be >= 1");
        auto gen = rng::engine(opts.seed, rng::tag("signal"));
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd signal(g.n_nodes(), opts.channels);
        for (int i = 0; i < signal.rows(); ++i)
            for (int c = 0; c < signal.cols(); ++c) signal(i, c) = normal(gen);
        return signal;
    }
    if (opts.signal == "one-hot") {
        if (opts.node < 0 || opts.node >= g.n_nodes())
            throw ValidationError("one-hot node " + std::to_string(opts.node) +
                                  " out of range");
        Eigen::MatrixXd signal = Eigen::MatrixXd::Zero(g.n_nodes(), 1);
        signal(opts.node, 0) = 1.0;
        return signal;
    }
    if (opts.signal == "file") {
        if (opts.signal_file.empty()) throw UsageError("--signal file needs --signal-file");
        return parse_signal_file(opts.signal_file, g.n_nodes());
    }
    throw UsageError("unknown --signal '" + opts.signal + "'");
}

void merge_propagate_config(const json& cfg, const CLI::App& sub, PropagateOptions& o) {
    merge_graph_config(cfg, sub, o.graph);
    fill(cfg, sub, "--signal", "signal", o.signal);
    fill(cfg, sub, "--channels", "channels", o.channels);
    fill(cfg, sub, "--node", "node", o.node);
    fill(cfg, sub, "--signal-file", "signal_file", o.signal_file);
    fill(cfg, sub, "--depth", "depth", o.depth);
    fill(cfg, sub, "--operator", "operator", o.op);
    fill(cfg, sub, "--nonlinearity", "nonlinearity", o.nonlinearity);
    fill(cfg, sub, "--record-every", "record_every", o.record_every);
    fill(cfg, sub, "--check-decay", "check_decay", o.check_decay);
    fill(cfg, sub, "--rewire", "rewire", o.rewire);
    fill(cfg, sub, "--alpha", "alpha", o.alpha);
    fill(cfg, sub, "--trials", "trials", o.trials);
    fill(cfg, sub, "--add-rule", "add_rule", o.add_rule);
    fill(cfg, sub, "--rewire-once", "rewire_once", o.rewire_once);
    fill(cfg, sub, "--seed", "seed", o.seed);
    fill(cfg, sub, "--format", "format", o.format);
}

json propagate_config_json(const PropagateOptions& o) {
    json config = graph_config_json(o.graph);
    config["signal"] = o.signal;
    config["channels"] = o.channels;
    config["node"] = o.node;
    config["signal_file"] = o.signal_file;
    config["depth"] = o.depth;
    config["operator"] = o.op;
    config["nonlinearity"] = o.nonlinearity;
    config["record_every"] = o.record_every;
    config["check_decay"] = o.check_decay;
    config["rewire"] = o.rewire;
    config["alpha"] = o.alpha;
    config["trials"] = o.trials;
    config["add_rule"] = o.add_rule;
    config["rewire_once"] = o.rewire_once;
    config["seed"] = o.seed;
    config["format"] = o.format;
    return config;
}

json series_json(const Eigen::VectorXd& baseline, const SeriesSummary& summary) {
    return {{"baseline", vector_to_json(baseline)},
            {"mean", vector_to_json(summary.mean)},
            {"stderr", vector_to_json(summary.stderr_of_mean)}};
}

int run_propagate_impl(const CLI::App& sub, PropagateOptions opts, const char* command) {
    if (!opts.config_file.empty())
        merge_propagate_config(load_config(opts.config_file), sub, opts);
    const bool as_json = opts.format == "json";
    if (!as_json && opts.format != "csv")
        throw UsageError("--format must be csv or json");
    if (std::string(command) == "compare-rewire") opts.rewire = true;
    if (opts.check_decay && opts.rewire)
        throw UsageError("--check-decay does not apply to rewired runs");
    if (opts.check_decay && opts.nonlinearity != "none")
        throw UsageError("--check-decay does not apply to nonlinear runs");

    const Graph g = resolve_graph(opts.graph, opts.seed);
    const Eigen::MatrixXd signal0 = make_signal(g, opts);
    PropagationConfig cfg;
    cfg.op = operator_from_string(opts.op);
    cfg.depth = opts.depth;
    cfg.nonlinearity = nonlinearity_from_string(opts.nonlinearity);
    cfg.record_every = opts.record_every;

    std::filesystem::create_directories(opts.out);
    std::vector<std::string> outputs;
    json metadata;
    json config = propagate_config_json(opts);

    if (opts.rewire) {
        RewireConfig rcfg;
        rcfg.alpha = opts.alpha;
        rcfg.seed = rng::substream(opts.seed, rng::tag("rewire"));
        rcfg.add_rule = add_rule_from_string(opts.add_rule);
        rcfg.per_layer = !opts.rewire_once;
        const RewireExperimentReport report =
            disorder_reduction_experiment(g, signal0, cfg, rcfg, opts.trials);

        json verdict = json::array();
        for (const auto& row : report.verdict)
            verdict.push_back({{"metric", row.metric},
                               {"baseline", row.baseline},
                               {"rewired_mean", row.rewired_mean},
                               {"delta", row.delta},
                               {"stderr", row.stderr_of_mean},
                               {"ci95", {row.ci95_low, row.ci95_high}}});
        json report_json = {
            {"config", config},
            {"trials", report.trials},
            {"layers", report.layers},
            {"bipartite", report.bipartite},
            {"delta_k_effective", series_json(report.baseline_delta_k, report.delta_k)},
            {"feature_distance",
             series_json(report.baseline_feature_distance, report.feature_distance)},
            {"high_band_energy_fraction",
             series_json(report.baseline_high_band_fraction, report.high_band_fraction)},
            {"verdict", verdict},
            {"rewire_totals",
             {{"edges_dropped", report.rewire_totals.edges_dropped},
              {"edges_added", report.rewire_totals.edges_added},
              {"two_hop_fallbacks", report.rewire_totals.two_hop_fallbacks},
              {"add_candidates_exhausted", report.rewire_totals.add_candidates_exhausted}}}};
        io::write_text_atomic(std::filesystem::path(opts.out) / "rewire_report.json",
                              report_json.dump(2) + "\n");
        outputs.push_back("rewire_report.json");

        auto scalar_table = [&](const std::string& stem, const Eigen::VectorXd& baseline,
                                const SeriesSummary& s) {
            TableWriter t({"layer", "baseline", "rewired_mean", "rewired_stderr"}, as_json);
            for (std::size_t l = 0; l < report.layers.size(); ++l) {
                t.cell(report.layers[l])
                    .cell(baseline[static_cast<int>(l)])
                    .cell(s.mean[static_cast<int>(l)])
                    .cell(s.stderr_of_mean[static_cast<int>(l)]);
                t.end_row();
            }
            outputs.push_back(t.write(opts.out, stem));
        };
        scalar_table("rewire_delta_k", report.baseline_delta_k, report.delta_k);
        scalar_table("rewire_feature_distance", report.baseline_feature_distance,
                     report.feature_distance);
        scalar_table("rewire_high_band", report.baseline_high_band_fraction,
                     report.high_band_fraction);

        TableWriter bp({"layer", "lambda", "baseline_p", "rewired_p_mean", "rewired_p_stderr",
                        "rewired_present_fraction"},
                       as_json);
        for (std::size_t l = 0; l < report.layers.size(); ++l)
            for (int b = 0; b < report.eigenvalues.size(); ++b) {
                bp.cell(report.layers[l])
                    .cell(report.eigenvalues[b])
                    .cell(report.baseline_band_p(static_cast<int>(l), b))
                    .cell(report.band_p_mean(static_cast<int>(l), b))
                    .cell(report.band_p_stderr(static_cast<int>(l), b))
                    .cell(report.band_present_fraction(static_cast<int>(l), b));
                bp.end_row();
            }
        outputs.push_back(bp.write(opts.out, "rewire_band_p"));

        metadata["bipartite_warning"] = report.bipartite;
        json clusters = json::array();
        for (const auto& [a, b] : degenerate_clusters(report.eigenvalues))
            clusters.push_back({a, b});
        metadata["degenerate_bands"] = clusters;
        write_manifest(opts.out, command, config, opts.seed, metadata, outputs);
        return kOk;
    }

    const PropagationResult result = propagate(g, signal0, cfg, std::nullopt);

    TableWriter metrics({"layer", "lambda", "coeff_norm", "p_lambda", "dirichlet_energy",
                         "feature_distance"},
                        as_json);
    for (const LayerMetrics& m : result.metrics)
        for (int b = 0; b < result.basis.size(); ++b) {
            metrics.cell(m.layer)
                .cell(result.basis.eigenvalues[b])
                .cell(m.coeff_norms[b])
                .cell(m.band_p[b])
                .cell(m.dirichlet_energy)
                .cell(m.feature_distance);
            metrics.end_row();
        }
    outputs.push_back(metrics.write(opts.out, "metrics"));

    const LayerMetrics& last = result.metrics.back();
    TableWriter bands({"band_index", "lambda", "coeff_norm", "p_lambda", "present"}, as_json);
    for (int b = 0; b < result.basis.size(); ++b) {
        bands.cell(b)
            .cell(result.basis.eigenvalues[b])
            .cell(last.coeff_norms[b])
            .cell(last.band_p[b])
            .cell(last.band_present[b] ? 1 : 0);
        bands.end_row();
    }
    outputs.push_back(bands.write(opts.out, "band_participation"));

    metadata["bipartite_warning"] = result.bipartite;
    json clusters = json::array();
    for (const auto& [a, b] : degenerate_clusters(result.basis.eigenvalues))
        clusters.push_back({a, b});
    metadata["degenerate_bands"] = clusters;
    if (result.bipartite)
        std::cerr << "warning: graph is bipartite (lambda = 2); the top band oscillates"
                     " instead of decaying\n";

    if (opts.check_decay) {
        const DecayReport decay = coefficient_decay_check(result.basis, result);
        json decay_json = {{"ok", decay.ok},
                           {"max_residual_per_band", vector_to_json(decay.max_residual)},
                           {"worst_residual", decay.worst_residual},
                           {"worst_band", decay.worst_band},
                           {"worst_layer", decay.worst_layer}};
        io::write_text_atomic(std::filesystem::path(opts.out) / "decay_report.json",
                              decay_json.dump(2) + "\n");
        outputs.push_back("decay_report.json");
        if (!decay.ok) {
            write_manifest(opts.out, command, config, opts.seed, metadata, outputs);
            throw NumericError("decay law violated at band " +
                               std::to_string(decay.worst_band) + ", layer " +
                               std::to_string(decay.worst_layer) + " (residual " +
                               io::format_double(decay.worst_residual) + ")");
        }
    }

    write_manifest(opts.out, command, config, opts.seed, metadata, outputs);
    return kOk;
}

// ---------------------------------------------------------------------------
// lattice

struct LatticeOptions {
    std::string model = "anderson";
    int n = 256;
    double w = 0.0;
    double hopping = 1.0;
    double eps = 0.0;
    std::string dist = "bimodal";
    std::string boundary = "periodic";
    int bins = 64;
    std::string sweep;
    int seeds = 16;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::string format = "csv";
    std::string config_file;
};

struct LatticeSpectrum {
    Eigen::VectorXd values;  ///< omega, or energy for the tight-binding chain
    Eigen::MatrixXd vectors;
};

LatticeSpectrum solve_lattice(const LatticeOptions& opts, double disorder,
                              std::uint64_t member_seed) {
    if (opts.model == "anderson") {
        AndersonChain chain;
        chain.n_sites = opts.n;
        chain.hopping = opts.hopping;
        chain.disorder_w = disorder;
        chain.boundary = boundary_from_string(opts.boundary);
        chain.seed = member_seed;
        SpectralBasis basis = eigendecompose(anderson_hamiltonian(chain));
        return {std::move(basis.eigenvalues), std::move(basis.eigenvectors)};
    }
    if (opts.model == "spring1d" || opts.model == "spring2d") {
        SpringLattice lat;
        lat.dimension = opts.model == "spring1d" ? 1 : 2;
        lat.sites = opts.n;
        lat.disorder_eps = disorder;
        lat.dist = stiffness_dist_from_string(opts.dist);
        lat.boundary = boundary_from_string(opts.boundary);
        lat.seed = member_seed;
        VibrationModes modes = vibration_modes(spring_dynamical_matrix(lat));
        return {std::move(modes.omega), std::move(modes.modes)};
    }
    throw UsageError("unknown --model '" + opts.model + "'");
}

/// Per-mode localization length column; "nan" marks estimator failure or
/// a geometry (2d) it does not apply to.
std::string mode_xi(const LatticeSpectrum& spectrum, const LatticeOptions& opts, int mode) {
    if (opts.model == "spring2d") return "nan";
    const double period = boundary_from_string(opts.boundary) == Boundary::periodic
                              ? static_cast<double>(spectrum.vectors.rows())
                              : 0.0;
    try {
        return xi_to_string(localization_length(spectrum.vectors.col(mode), period));
    } catch (const ValidationError&) {
        return "nan";
    }
}

std::string write_spectrum_table(const LatticeSpectrum& spectrum, const LatticeOptions& opts,
                                 const std::string& stem, bool as_json) {
    TableWriter table({"mode_index", "omega", "participation", "xi_or_inf"}, as_json);
    for (int m = 0; m < spectrum.values.size(); ++m) {
        table.cell(m)
            .cell(spectrum.values[m])
            .cell(participation_ratio(spectrum.vectors.col(m)))
            .cell(mode_xi(spectrum, opts, m));
        table.end_row();
    }
    return table.write(opts.out, stem);
}

std::string write_dos_table(const Eigen::VectorXd& values, const LatticeOptions& opts,
                            const std::string& stem, bool as_json) {
    Histogram dos;
    if (opts.model == "anderson") {
        // tight-binding energies are not sign-definite; histogram the full support
        const double lo = values.minCoeff();
        const double hi = values.maxCoeff();
        dos = histogram(values, opts.bins, lo, hi > lo ? hi : lo + 1.0);
    } else {
        dos = density_of_states(values, opts.bins);
    }
    TableWriter table({"bin_left", "bin_right", "density"}, as_json);
    for (int b = 0; b < dos.density.size(); ++b) {
        table.cell(dos.bin_left[b]).cell(dos.bin_right[b]).cell(dos.density[b]);
        table.end_row();
    }
    return table.write(opts.out, stem);
}

/// Localization length of the sweep's reference mode: band center for the
/// tight-binding chain, the top (most localized) mode for spring chains.
double sweep_member_xi(const LatticeOptions& opts, double disorder,
                       std::uint64_t member_seed) {
    if (opts.model == "anderson") {
        AndersonChain chain;
        chain.n_sites = opts.n;
        chain.hopping = opts.hopping;
        chain.disorder_w = disorder;
        chain.boundary = boundary_from_string(opts.boundary);
        chain.seed = member_seed;
        return anderson_band_center_xi(chain).xi;
    }
    const LatticeSpectrum spectrum = solve_lattice(opts, disorder, member_seed);
    const double period = boundary_from_string(opts.boundary) == Boundary::periodic
                              ? static_cast<double>(spectrum.vectors.rows())
                              : 0.0;
    return localization_length(spectrum.vectors.col(spectrum.vectors.cols() - 1), period).xi;
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw UsageError("--sweep expects PARAM=v1,v2,... (e.g. w=1,2,4)");
    std::string param = spec.substr(0, eq);
    std::vector<double> values;
    std::stringstream list(spec.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("--sweep value '" + item + "' is not a number");
        }
    }
    if (values.size() < 3)
        throw UsageError("--sweep needs at least 3 values for the power-law fit");
    return {param, values};
}

int run_lattice(const CLI::App& sub, LatticeOptions opts) {
    if (!opts.config_file.empty()) {
        const json cfg = load_config(opts.config_file);
        fill(cfg, sub, "--model", "model", opts.model);
        fill(cfg, sub, "--n", "n", opts.n);
        fill(cfg, sub, "--w", "w", opts.w);
        fill(cfg, sub, "--t", "hopping", opts.hopping);
        fill(cfg, sub, "--eps", "eps", opts.eps);
        fill(cfg, sub, "--dist", "dist", opts.dist);
        fill(cfg, sub, "--boundary", "boundary", opts.boundary);
        fill(cfg, sub, "--bins", "bins", opts.bins);
        fill(cfg, sub, "--sweep", "sweep", opts.sweep);
        fill(cfg, sub, "--seeds", "seeds", opts.seeds);
        fill(cfg, sub, "--seed", "seed", opts.seed);
        fill(cfg, sub, "--format", "format", opts.format);
    }
    const bool as_json = opts.format == "json";
    if (!as_json && opts.format != "csv")
        throw UsageError("--format must be csv or json");

    std::filesystem::create_directories(opts.out);
    const std::uint64_t lattice_seed = rng::substream(opts.seed, rng::tag("lattice"));
    std::vector<std::string> outputs;
    json metadata;

    json config = {{"model", opts.model}, {"n", opts.n},           {"w", opts.w},
                   {"hopping", opts.hopping}, {"eps", opts.eps},   {"dist", opts.dist},
                   {"boundary", opts.boundary}, {"bins", opts.bins}, {"sweep", opts.sweep},
                   {"seeds", opts.seeds}, {"seed", opts.seed},     {"format", opts.format}};

    if (opts.sweep.empty()) {
        const double disorder = opts.model == "anderson" ? opts.w : opts.eps;
        const LatticeSpectrum spectrum = solve_lattice(opts, disorder, lattice_seed);
        outputs.push_back(write_spectrum_table(spectrum, opts, "spectrum", as_json));
        outputs.push_back(write_dos_table(spectrum.values, opts, "dos", as_json));
        write_manifest(opts.out, "lattice", config, opts.seed, metadata, outputs);
        return kOk;
    }

    const auto [param, values] = parse_sweep(opts.sweep);
    if (opts.model == "anderson" && param != "w")
        throw UsageError("anderson sweeps vary 'w'");
    if (opts.model == "spring1d" && param != "eps")
        throw UsageError("spring sweeps vary 'eps'");
    if (opts.model == "spring2d")
        throw UsageError("localization sweeps need a 1d geometry");
    if (opts.seeds < 1) throw UsageError("--seeds must be >= 1");

    Eigen::VectorXd medians(static_cast<int>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<double> xis(opts.seeds);
        parallel_for(opts.seeds, [&, i](int m) {
            const std::uint64_t member_seed =
                rng::substream(lattice_seed, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(m));
            xis[m] = sweep_member_xi(opts, values[i], member_seed);
        });
        medians[static_cast<int>(i)] = median(xis);

        const std::uint64_t probe_seed =
            rng::substream(lattice_seed, static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(0));
        const LatticeSpectrum probe = solve_lattice(opts, values[i], probe_seed);
        const std::string tag = std::to_string(i);
        outputs.push_back(write_spectrum_table(probe, opts, "spectrum_" + tag, as_json));
        outputs.push_back(write_dos_table(probe.values, opts, "dos_" + tag, as_json));
    }

    Eigen::VectorXd disorder(static_cast<int>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        disorder[static_cast<int>(i)] = values[i];
    const LocalizationFit fit = fit_gamma(disorder, medians);

    json sweep_json = {{"param", param},
                       {"disorder_values", vector_to_json(fit.disorder_values)},
                       {"xi_medians", vector_to_json(fit.xi_values)},
                       {"gamma", fit.gamma},
                       {"r2", fit.fit_r2},
                       {"seeds", opts.seeds}};
    io::write_text_atomic(std::filesystem::path(opts.out) / "sweep.json",
                          sweep_json.dump(2) + "\n");
    outputs.push_back("sweep.json");
    write_manifest(opts.out, "lattice", config, opts.seed, metadata, outputs);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"spectral localization laboratory: graph spectra, message-passing"
                 " diagnostics, degree-gated rewiring, disordered lattices"};
    app.require_subcommand(1);

    AnalyzeOptions analyze_opts;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Laplacian spectrum, eigenvector participation, degree statistics");
    add_graph_options(analyze, analyze_opts.graph);
    analyze->add_option("--seed", analyze_opts.seed, "master seed");
    analyze->add_option("--out", analyze_opts.out, "output directory");
    analyze->add_option("--format", analyze_opts.format, "table format: csv|json");
    analyze->add_option("--config", analyze_opts.config_file,
                        "JSON config or manifest; flags override");
    analyze->add_flag("--export-graph,!--no-export-graph", analyze_opts.export_graph,
                      "write graph.json");

    auto bind_propagate = [](CLI::App* sub, PropagateOptions& o) {
        add_graph_options(sub, o.graph);
        sub->add_option("--signal", o.signal, "signal source: random-gaussian|one-hot|file");
        sub->add_option("--channels", o.channels, "random-gaussian channel count");
        sub->add_option("--node", o.node, "one-hot node index");
        sub->add_option("--signal-file", o.signal_file, "whitespace matrix file, N rows");
        sub->add_option("--depth", o.depth, "number of layers");
        sub->add_option("--operator", o.op,
                        "aggregation operator: laplacian-complement|gcn-selfloop");
        sub->add_option("--nonlinearity", o.nonlinearity, "none|relu");
        sub->add_option("--record-every", o.record_every, "metric capture stride");
        sub->add_flag("--check-decay", o.check_decay,
                      "verify per-band |1-lambda|^l decay; nonzero exit on violation");
        sub->add_flag("--rewire", o.rewire, "run the paired rewiring experiment");
        sub->add_option("--alpha", o.alpha, "rewiring sharpness (> 0)");
        sub->add_option("--trials", o.trials, "rewiring trial count");
        sub->add_option("--add-rule", o.add_rule,
                        "add candidates: uniform-nonneighbor|two-hop");
        sub->add_flag("--rewire-once", o.rewire_once,
                      "sample one effective graph instead of one per layer");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--format", o.format, "table format: csv|json");
        sub->add_option("--config", o.config_file, "JSON config or manifest; flags override");
    };

    PropagateOptions propagate_opts;
    CLI::App* propagate = app.add_subcommand(
        "propagate", "multi-layer message passing with per-layer band metrics");
    bind_propagate(propagate, propagate_opts);

    PropagateOptions compare_opts;
    CLI::App* compare = app.add_subcommand(
        "compare-rewire", "A/B: propagation with vs without degree-gated rewiring");
    bind_propagate(compare, compare_opts);

    LatticeOptions lattice_opts;
    CLI::App* lattice = app.add_subcommand(
        "lattice", "disordered chains/lattices: spectra, DOS, localization lengths");
    lattice->add_option("--model", lattice_opts.model, "anderson|spring1d|spring2d");
    lattice->add_option("--n", lattice_opts.n, "sites (per side for spring2d)");
    lattice->add_option("--w", lattice_opts.w, "anderson disorder width W");
    lattice->add_option("--t", lattice_opts.hopping, "anderson hopping amplitude");
    lattice->add_option("--eps", lattice_opts.eps, "spring stiffness disorder in [0,1)");
    lattice->add_option("--dist", lattice_opts.dist, "stiffness draw: bimodal|uniform");
    lattice->add_option("--boundary", lattice_opts.boundary, "open|periodic");
    lattice->add_option("--bins", lattice_opts.bins, "DOS histogram bins");
    lattice->add_option("--sweep", lattice_opts.sweep, "disorder sweep, e.g. w=1,2,4");
    lattice->add_option("--seeds", lattice_opts.seeds, "ensemble members per sweep value");
    lattice->add_option("--seed", lattice_opts.seed, "master seed");
    lattice->add_option("--out", lattice_opts.out, "output directory");
    lattice->add_option("--format", lattice_opts.format, "table format: csv|json");
    lattice->add_option("--config", lattice_opts.config_file,
                        "JSON config or manifest; flags override");

    std::vector<const char*> argv;
    argv.push_back("specloc");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (analyze->parsed()) return run_analyze(*analyze, analyze_opts);
        if (propagate->parsed())
            return run_propagate_impl(*propagate, propagate_opts, "propagate");
        if (compare->parsed())
            return run_propagate_impl(*compare, compare_opts, "compare-rewire");
        if (lattice->parsed()) return run_lattice(*lattice, lattice_opts);
        std::cerr << "error: no subcommand given\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace specloc::cli

#include "kgatlas/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "kgatlas/error.hpp"
#include "kgatlas/extraction.hpp"
#include "kgatlas/graph.hpp"
#include "kgatlas/ingest.hpp"
#include "kgatlas/layout.hpp"
#include "kgatlas/preprocess.hpp"
#include "kgatlas/service.hpp"

namespace kgatlas::cli {

namespace {

namespace fs = std::filesystem;

struct InputOptions {
    std::string path;
    std::string format = "auto";
    std::string delimiter = ",";
    bool header = false;
};

struct GraphInputOptions {
    InputOptions triples;
    std::string abbreviations;
    double base_curvature = GraphOptions{}.base_curvature;
    double r_min = RadiusScale{}.r_min;
    double r_max = RadiusScale{}.r_max;
};

struct PreprocessOptions {
    InputOptions triples;
    std::string abbreviations;
    std::string merge_map;
    std::string out_dir = "out";
    std::uint64_t min_relation_count = PipelineConfig{}.min_relation_count;
    std::string long_tail_action = "relabel";
    std::string other_label = PipelineConfig{}.other_label;
    double similarity_threshold = PipelineConfig{}.similarity_threshold;
    bool second_pass = PipelineConfig{}.second_consolidation_pass;
    int only_stage = 0;
};

struct ExtractOptions {
    std::vector<std::string> documents;
    std::string output;
    std::string backend = "stub";
    std::string backend_name;
    std::string endpoint;
    std::int64_t timeout_ms = BackendDescriptor{}.timeout.count();
    std::string cues;
    std::string lexicon;
    bool keep_all = false;
    unsigned parallel = 1;
};

struct StatsOptions {
    GraphInputOptions graph;
    bool json = false;
};

struct ExportOptions {
    GraphInputOptions graph;
    std::size_t min_degree = 0;
    std::string output;
};

struct SvgExportOptions {
    ExportOptions common;
    LayoutConfig layout;
    double width = SvgOptions{}.width;
    double height = SvgOptions{}.height;
    double padding = SvgOptions{}.padding;
    bool no_labels = false;
};

struct ServeOptions {
    GraphInputOptions graph;
    std::string address = ServerOptions{}.address;
    int port = ServerOptions{}.port;
    std::string static_dir;
};

char parse_delimiter(const std::string& text) {
    if (text == "\\t" || text == "tab") return '\t';
    return text.front();
}

std::string check_delimiter(const std::string& text) {
    if (text == "\\t" || text == "tab" || (text.size() == 1 && text != "\"" && text != "\n")) return {};
    return "delimiter must be a single character, 'tab' or '\\t'";
}

TripleFormat resolve_format(const InputOptions& input) {
    if (input.format == "jsonl") return TripleFormat::JsonLines;
    if (input.format == "delimited") return TripleFormat::Delimited;
    auto ext = ascii_lower(fs::path(input.path).extension().string());
    return ext == ".jsonl" || ext == ".ndjson" ? TripleFormat::JsonLines : TripleFormat::Delimited;
}

DelimitedOptions delimited_of(const InputOptions& input) {
    DelimitedOptions options;
    options.delimiter = parse_delimiter(input.delimiter);
    if (input.format == "auto" && input.delimiter == "," &&
        ascii_lower(fs::path(input.path).extension().string()) == ".tsv") {
        options.delimiter = '\t';
    }
    options.has_header = input.header;
    return options;
}

void add_input_options(CLI::App* cmd, InputOptions& input) {
    cmd->add_option("input", input.path, "Triples file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", input.format, "Triples format; auto picks jsonl for .jsonl/.ndjson")
        ->check(CLI::IsMember({"auto", "delimited", "jsonl"}));
    cmd->add_option("--delimiter", input.delimiter, "Field delimiter for delimited input; 'tab' for tabs")
        ->check(check_delimiter);
    cmd->add_flag("--header", input.header, "Delimited input starts with a header row");
}

void add_graph_options(CLI::App* cmd, GraphInputOptions& graph) {
    add_input_options(cmd, graph.triples);
    cmd->add_option("--abbreviations", graph.abbreviations, "Abbreviation table (label,alias)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--base-curvature", graph.base_curvature, "Curvature step between parallel edges")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--r-min", graph.r_min, "Smallest node radius")->check(CLI::NonNegativeNumber);
    cmd->add_option("--r-max", graph.r_max, "Largest node radius")->check(CLI::NonNegativeNumber);
}

std::vector<Triplet> load_triples(const InputOptions& input, std::ostream& err, int verbosity) {
    auto parsed = parse_triplets(read_file(input.path), resolve_format(input), delimited_of(input));
    if (verbosity > 0) {
        for (const auto& warning : parsed.warnings) err << "warning: " << warning << '\n';
    }
    if (parsed.rows_rejected > 0) {
        err << "warning: " << parsed.rows_rejected << " of " << parsed.rows_rejected + parsed.triples_read << " rows rejected in "
            << input.path << '\n';
    }
    return std::move(parsed.triples);
}

AbbrevTable load_abbreviations(const std::string& path) {
    if (path.empty()) return {};
    return parse_abbreviations(read_file(path));
}

void report_missing(const IntegrityReport& integrity, std::ostream& err) {
    for (const auto& warning : integrity.warnings) err << "warning: " << warning << '\n';
}

struct LoadedGraph {
    KnowledgeGraph graph;
    AbbrevTable abbrev;
    RadiusScale radius;
};

LoadedGraph load_graph(const GraphInputOptions& options, std::ostream& err, int verbosity) {
    if (options.r_min > options.r_max) throw Error(ErrorCode::Config, "--r-min must not exceed --r-max");
    LoadedGraph loaded;
    auto triples = load_triples(options.triples, err, verbosity);
    loaded.abbrev = load_abbreviations(options.abbreviations);
    if (!options.abbreviations.empty()) report_missing(check_integrity(triples, loaded.abbrev), err);
    loaded.graph = build_graph(triples, loaded.abbrev, GraphOptions{options.base_curvature});
    loaded.radius = RadiusScale{options.r_min, options.r_max};
    return loaded;
}

void emit(const std::string& path, std::string_view contents, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << contents;
    } else {
        write_file(path, contents);
    }
}

int run_extract(const ExtractOptions& options, std::ostream& out, std::ostream& err, int verbosity) {
    std::vector<std::string> cues = StubBackend::default_cue_phrases();
    if (!options.cues.empty()) cues = parse_term_list(read_file(options.cues));
    LowValueLexicon lexicon = LowValueLexicon::defaults();
    if (!options.lexicon.empty()) lexicon = LowValueLexicon(parse_term_list(read_file(options.lexicon)));

    auto make_backend = [&]() -> std::unique_ptr<ExtractionBackend> {
        if (options.backend == "http") {
            BackendDescriptor descriptor{options.backend_name.empty() ? "http" : options.backend_name,
                                         options.endpoint, std::chrono::milliseconds(options.timeout_ms)};
            return std::make_unique<HttpBackend>(std::move(descriptor));
        }
        return std::make_unique<StubBackend>(cues, options.backend_name.empty() ? "stub" : options.backend_name);
    };
    make_backend();  // validates the descriptor before any work starts

    const auto n = options.documents.size();
    std::vector<std::vector<Triplet>> per_document(n);
    std::vector<std::optional<Error>> failures(n);
    auto work = [&](std::size_t first, std::size_t stride) {
        auto backend = make_backend();
        for (std::size_t i = first; i < n; i += stride) {
            try {
                const auto& path = options.documents[i];
                auto triples = extract_triplets(read_file(path), *backend);
                auto stem = fs::path(path).stem().string();
                for (auto& t : triples) {
                    if (!t.paper_id) t.paper_id = stem;
                }
                if (!options.keep_all) triples = select_preferred_per_group(filter_low_value(triples, lexicon));
                per_document[i] = std::move(triples);
            } catch (const Error& e) {
                failures[i] = e;
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(std::max(1u, options.parallel), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (failures[i]) throw Error(failures[i]->code(), options.documents[i] + ": " + failures[i]->message());
    }

    std::vector<Triplet> all;
    for (auto& triples : per_document) {
        if (verbosity > 0) err << "extracted " << triples.size() << " triples\n";
        all.insert(all.end(), std::make_move_iterator(triples.begin()), std::make_move_iterator(triples.end()));
    }
    emit(options.output, serialize_triplets(all), out);
    return kExitOk;
}

int run_preprocess(const PreprocessOptions& options, std::ostream& err, int verbosity) {
    PipelineConfig config;
    config.min_relation_count = options.min_relation_count;
    config.long_tail_action = options.long_tail_action == "drop" ? LongTailAction::Drop : LongTailAction::Relabel;
    config.other_label = options.other_label;
    config.similarity_threshold = options.similarity_threshold;
    config.second_consolidation_pass = options.second_pass;
    if (options.only_stage != 0) config.only_stage = options.only_stage;
    config.abbrev = load_abbreviations(options.abbreviations);
    if (!options.merge_map.empty()) config.merge_map = parse_merge_map(read_file(options.merge_map));
    config.validate();

    auto triples = load_triples(options.triples, err, verbosity);
    auto result = run_pipeline(triples, config);
    const auto& report = result.report;
    for (const auto& label : report.missing_abbreviations) {
        err << "warning: relation '" << label << "' has no abbreviation; flagged for manual inspection\n";
    }
    auto candidates = propose_merge_candidates(report.merge_stage_labels, config.similarity_threshold);

    fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "triples.csv", serialize_triplets(result.triples));
    write_file(dir / "report.json", to_json(report).dump(2) + "\n");
    write_file(dir / "merge_candidates.csv", serialize_merge_candidates(candidates));
    write_file(dir / "freq_before.csv", serialize_frequency(report.frequency_before));
    write_file(dir / "freq_after.csv", serialize_frequency(report.frequency_after));
    if (verbosity > 0) {
        err << "triples " << report.triples_in << " -> " << report.triples_out << ", consolidated "
            << report.relations_consolidated << ", merged " << report.relations_merged << ", duplicates removed "
            << report.duplicates_removed << '\n';
    }
    return kExitOk;
}

int run_stats(const StatsOptions& options, std::ostream& out, std::ostream& err, int verbosity) {
    auto loaded = load_graph(options.graph, err, verbosity);
    auto stats = compute_stats(loaded.graph);
    if (options.json) {
        out << to_json(stats).dump(2) << '\n';
        return kExitOk;
    }
    char coefficient[32];
    std::snprintf(coefficient, sizeof coefficient, "%.6f", stats.clustering_coefficient);
    out << "nodes: " << stats.node_count << '\n'
        << "edges: " << stats.edge_count << '\n'
        << "max_degree: " << stats.max_degree << '\n'
        << "clustering_coefficient: " << coefficient << '\n'
        << "degree_distribution:\n";
    for (const auto& [degree, count] : stats.degree_distribution) out << "  " << degree << ": " << count << '\n';
    return kExitOk;
}

KnowledgeGraph exported_view(const LoadedGraph& loaded, std::size_t min_degree) {
    return min_degree == 0 ? loaded.graph : filter_by_degree(loaded.graph, min_degree);
}

int run_export_json(const ExportOptions& options, std::ostream& out, std::ostream& err, int verbosity) {
    auto loaded = load_graph(options.graph, err, verbosity);
    emit(options.output, graph_to_json(exported_view(loaded, options.min_degree), loaded.radius), out);
    return kExitOk;
}

int run_export_svg(const SvgExportOptions& options, std::ostream& out, std::ostream& err, int verbosity) {
    options.layout.validate();
    auto loaded = load_graph(options.common.graph, err, verbosity);
    auto view = exported_view(loaded, options.common.min_degree);
    auto layout = run_layout(view, options.layout);
    if (verbosity > 0) {
        err << "layout " << (layout.converged ? "converged" : "stopped") << " after " << layout.iterations
            << " iterations\n";
    }
    SvgOptions svg;
    svg.show_labels = !options.no_labels;
    svg.width = options.width;
    svg.height = options.height;
    svg.padding = options.padding;
    svg.radius = loaded.radius;
    emit(options.common.output, render_svg(view, layout.positions, svg), out);
    return kExitOk;
}

std::atomic<bool> g_reload_requested{false};
std::atomic<bool> g_stop_requested{false};

extern "C" void on_reload_signal(int) { g_reload_requested = true; }
extern "C" void on_stop_signal(int) { g_stop_requested = true; }

int run_serve(const ServeOptions& options, std::ostream& err, int verbosity) {
    auto load = [&] {
        auto loaded = load_graph(options.graph, err, verbosity);
        return ServiceSnapshot::make(std::move(loaded.graph), std::move(loaded.abbrev), loaded.radius);
    };
    GraphService service(load());
    if (!options.static_dir.empty()) service.set_static_dir(options.static_dir);
    HttpServer server(service, ServerOptions{options.address, options.port});
    int port = server.bind();
    err << "serving on http://" << options.address << ':' << port << '\n';

    g_reload_requested = false;
    g_stop_requested = false;
    std::signal(SIGHUP, on_reload_signal);
    std::signal(SIGINT, on_stop_signal);
    std::signal(SIGTERM, on_stop_signal);
    std::jthread watcher([&](std::stop_token token) {
        while (!token.stop_requested()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
            if (g_stop_requested) {
                server.stop();
                return;
            }
            if (g_reload_requested.exchange(false)) {
                try {
                    service.replace(load());
                    err << "reloaded " << options.graph.triples.path << '\n';
                } catch (const Error& e) {
                    err << "error: reload failed: " << e.what() << '\n';
                }
            }
        }
    });
    server.serve();
    watcher.request_stop();
    return kExitOk;
}

int port_from_env(int fallback) {
    const char* value = std::getenv("KGATLAS_PORT");
    if (!value || !*value) return fallback;
    char* end = nullptr;
    long port = std::strtol(value, &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) {
        throw CLI::ValidationError("KGATLAS_PORT", std::string("not a port number: ") + value);
    }
    return static_cast<int>(port);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"kgatlas: build, clean, inspect and serve literature knowledge graphs", "kgatlas"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "TOML file with option values; command-line flags take precedence");
    app.set_version_flag("--version", std::string(kVersion));
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "Report per-row warnings and stage summaries (repeatable)");

    ExtractOptions extract;
    auto* extract_cmd = app.add_subcommand("extract", "Extract candidate triples from plain-text documents");
    extract_cmd->add_option("documents", extract.documents, "Plain-text documents, one paper each")
        ->required()
        ->check(CLI::ExistingFile);
    extract_cmd->add_option("-o,--output", extract.output, "Triples file to write (stdout when omitted)");
    extract_cmd->add_option("--backend", extract.backend, "Extraction backend")
        ->check(CLI::IsMember({"stub", "http"}));
    extract_cmd->add_option("--backend-name", extract.backend_name, "Name recorded as each triple's source");
    extract_cmd->add_option("--endpoint", extract.endpoint, "Endpoint URL for the http backend");
    extract_cmd->add_option("--timeout-ms", extract.timeout_ms, "Request timeout for the http backend")
        ->check(CLI::PositiveNumber);
    extract_cmd->add_option("--cues", extract.cues, "Relation cue phrases for the stub backend, one per line")
        ->check(CLI::ExistingFile);
    extract_cmd->add_option("--lexicon", extract.lexicon, "Low-value entity terms, one per line")
        ->check(CLI::ExistingFile);
    extract_cmd->add_flag("--keep-all", extract.keep_all, "Skip low-value filtering and preferred selection");
    extract_cmd->add_option("--parallel", extract.parallel, "Documents processed concurrently")
        ->check(CLI::Range(1u, 256u));

    PreprocessOptions preprocess;
    auto* preprocess_cmd = app.add_subcommand("preprocess", "Run the cleaning pipeline over a triples file");
    add_input_options(preprocess_cmd, preprocess.triples);
    preprocess_cmd->add_option("--abbreviations", preprocess.abbreviations, "Abbreviation table (label,alias)")
        ->check(CLI::ExistingFile);
    preprocess_cmd->add_option("--merge-map", preprocess.merge_map, "Curated merge map (variant,canonical)")
        ->check(CLI::ExistingFile);
    preprocess_cmd->add_option("--out-dir", preprocess.out_dir, "Directory for cleaned triples and reports");
    preprocess_cmd->add_option("--min-relation-count", preprocess.min_relation_count,
                               "Relations seen fewer times are consolidated")
        ->check(CLI::PositiveNumber);
    preprocess_cmd->add_option("--long-tail-action", preprocess.long_tail_action, "What happens to rare relations")
        ->check(CLI::IsMember({"drop", "relabel"}));
    preprocess_cmd->add_option("--other-label", preprocess.other_label, "Label given to relabelled rare relations");
    preprocess_cmd->add_option("--similarity-threshold", preprocess.similarity_threshold,
                               "Minimum similarity for merge candidates")
        ->check(CLI::Range(0.0, 1.0));
    preprocess_cmd->add_flag("--second-pass", preprocess.second_pass, "Consolidate again after deduplication, counting distinct triples");
    preprocess_cmd->add_option("--only-stage", preprocess.only_stage,
                               "Run a single stage: 1 consolidate, 2 merge, 3 deduplicate, 4 integrity; 0 runs all")
        ->check(CLI::Range(0, 4));

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "Print degree distribution and clustering coefficient");
    add_graph_options(stats_cmd, stats.graph);
    stats_cmd->add_flag("--json", stats.json, "Print JSON instead of text");

    ExportOptions export_json;
    auto* json_cmd = app.add_subcommand("export-json", "Write the graph payload as JSON");
    add_graph_options(json_cmd, export_json.graph);
    json_cmd->add_option("--min-degree", export_json.min_degree, "Keep nodes with at least this degree");
    json_cmd->add_option("-o,--output", export_json.output, "Output file (stdout when omitted)");

    SvgExportOptions export_svg;
    auto* svg_cmd = app.add_subcommand("export-svg", "Lay out the graph and write a static SVG");
    add_graph_options(svg_cmd, export_svg.common.graph);
    svg_cmd->add_option("--min-degree", export_svg.common.min_degree, "Keep nodes with at least this degree");
    svg_cmd->add_option("-o,--output", export_svg.common.output, "Output file (stdout when omitted)");
    auto& layout = export_svg.layout;
    svg_cmd->add_option("--repulsion-strength", layout.repulsion_strength, "Pairwise repulsion constant")
        ->check(CLI::PositiveNumber);
    svg_cmd->add_option("--spring-rest-length", layout.spring_rest_length, "Spring rest length")
        ->check(CLI::NonNegativeNumber);
    svg_cmd->add_option("--spring-stiffness", layout.spring_stiffness, "Spring stiffness")
        ->check(CLI::Range(0.0, 1.0));
    svg_cmd->add_option("--centering-strength", layout.centering_strength, "Pull towards the origin")
        ->check(CLI::Range(0.0, 1.0));
    svg_cmd->add_option("--velocity-decay", layout.velocity_decay, "Fraction of velocity lost per tick")
        ->check(CLI::Range(0.0, 1.0));
    svg_cmd->add_option("--max-iterations", layout.max_iterations, "Tick limit");
    svg_cmd->add_option("--displacement-epsilon", layout.displacement_epsilon,
                        "Stop once every node moves less than this")
        ->check(CLI::PositiveNumber);
    svg_cmd->add_option("--seed", layout.seed, "Seed for initial positions");
    svg_cmd->add_option("--width", export_svg.width, "Viewport width")->check(CLI::PositiveNumber);
    svg_cmd->add_option("--height", export_svg.height, "Viewport height")->check(CLI::PositiveNumber);
    svg_cmd->add_option("--padding", export_svg.padding, "Viewport padding")->check(CLI::NonNegativeNumber);
    svg_cmd->add_flag("--no-labels", export_svg.no_labels, "Omit edge labels");

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the graph API and explorer; SIGHUP reloads the input");
    add_graph_options(serve_cmd, serve.graph);
    serve_cmd->add_option("--addr", serve.address, "Bind address")->envname("KGATLAS_ADDR");
    auto* port_option = serve_cmd->add_option("--port", serve.port, "Bind port; 0 picks a free port (env KGATLAS_PORT)")
                            ->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--static-dir", serve.static_dir, "Directory holding the explorer bundle")
        ->check(CLI::ExistingDirectory);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (port_option->count() == 0) serve.port = port_from_env(serve.port);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::string message = e.what();
        if (app.get_subcommands().empty() && !app.remaining().empty()) {
            message = "unknown subcommand '" + app.remaining().front() + "'";
        }
        err << "error: E_USAGE: " << message << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (extract_cmd->parsed()) return run_extract(extract, out, err, verbosity);
        if (preprocess_cmd->parsed()) return run_preprocess(preprocess, err, verbosity);
        if (stats_cmd->parsed()) return run_stats(stats, out, err, verbosity);
        if (json_cmd->parsed()) return run_export_json(export_json, out, err, verbosity);
        if (svg_cmd->parsed()) return run_export_svg(export_svg, out, err, verbosity);
        if (serve_cmd->parsed()) return run_serve(serve, err, verbosity);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace kgatlas::cli

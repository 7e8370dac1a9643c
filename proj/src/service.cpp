#include "kgatlas/service.hpp"

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "kgatlas/error.hpp"
#include "kgatlas/ingest.hpp"

namespace kgatlas {

namespace {

constexpr std::string_view kPlaceholderPage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>kgatlas</title></head>
<body>
<h1>kgatlas</h1>
<p>The explorer bundle is not installed. Start the server with <code>--static-dir</code> pointing at a built UI.</p>
<ul>
<li><a href="/api/graph">/api/graph?min_degree=k</a></li>
<li>/api/search?q=text&amp;depth=d</li>
<li><a href="/api/abbreviations">/api/abbreviations</a></li>
<li><a href="/api/stats">/api/stats</a></li>
<li><a href="/healthz">/healthz</a></li>
</ul>
</body>
</html>
)";

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    std::string body = "{\"error\":";
    append_json_string(body, code);
    body += ",\"message\":";
    append_json_string(body, message);
    body += "}";
    return {status, std::move(body)};
}

/// Parses an optional non-negative integer parameter.
std::optional<std::size_t> count_param(const QueryParams& query, std::string_view name, std::size_t fallback,
                                       HttpResponse& error) {
    auto it = query.find(name);
    if (it == query.end()) return fallback;
    std::string_view text = it->second;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        error = error_response(400, "E_BAD_PARAM",
                               std::string(name) + " must be a non-negative integer, got '" + it->second + "'");
        return std::nullopt;
    }
    return value;
}

void append_meta(std::string& out, const ServiceSnapshot& snapshot, std::size_t min_degree) {
    out += ",\"meta\":{\"total_nodes\":";
    out += std::to_string(snapshot.graph.node_count());
    out += ",\"total_edges\":";
    out += std::to_string(snapshot.graph.edge_count());
    out += ",\"min_degree_applied\":";
    out += std::to_string(min_degree);
    out += ",\"max_degree\":";
    out += std::to_string(snapshot.graph.reference_max_degree());
}

std::string content_type_for(const std::filesystem::path& file) {
    auto ext = file.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
    if (ext == ".css") return "text/css; charset=utf-8";
    if (ext == ".json") return "application/json; charset=utf-8";
    if (ext == ".svg") return "image/svg+xml";
    return "application/octet-stream";
}

}  // namespace

std::shared_ptr<const ServiceSnapshot> ServiceSnapshot::make(KnowledgeGraph graph, AbbrevTable abbrev,
                                                             RadiusScale radius) {
    auto snapshot = std::make_shared<ServiceSnapshot>();
    snapshot->stats_body = to_json(compute_stats(graph)).dump();
    snapshot->abbrev_body = nlohmann::json(abbrev.entries()).dump();
    snapshot->graph = std::move(graph);
    snapshot->abbrev = std::move(abbrev);
    snapshot->radius = radius;
    return snapshot;
}

std::string graph_payload(const ServiceSnapshot& snapshot, const KnowledgeGraph& view, std::size_t min_degree) {
    std::string out = "{";
    append_graph_members(out, view, snapshot.radius);
    append_meta(out, snapshot, min_degree);
    out += "}}";
    return out;
}

GraphService::GraphService(std::shared_ptr<const ServiceSnapshot> snapshot) : snapshot_(std::move(snapshot)) {}

void GraphService::replace(std::shared_ptr<const ServiceSnapshot> snapshot) {
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(snapshot);
}

std::shared_ptr<const ServiceSnapshot> GraphService::snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

HttpResponse GraphService::handle(std::string_view path, const QueryParams& query) const {
    if (path == "/api/graph") return graph(query);
    if (path == "/api/search") return search(query);
    if (path == "/api/abbreviations") return abbreviations();
    if (path == "/api/stats") return stats();
    if (path == "/healthz") return health();
    if (path == "/" || path == "/index.html") return index();
    if (!static_dir_.empty() && !path.starts_with("/api/")) {
        auto relative = std::filesystem::path(std::string(path.substr(1))).lexically_normal();
        if (!relative.empty() && *relative.begin() != "..") {
            auto file = static_dir_ / relative;
            std::error_code ec;
            if (std::filesystem::is_regular_file(file, ec)) return {200, read_file(file), content_type_for(file)};
        }
    }
    return error_response(404, "E_NOT_FOUND", "no route for " + std::string(path));
}

HttpResponse GraphService::graph(const QueryParams& query) const {
    HttpResponse error;
    auto min_degree = count_param(query, "min_degree", 0, error);
    if (!min_degree) return error;
    auto snap = snapshot();
    if (*min_degree == 0) return {200, graph_payload(*snap, snap->graph, 0)};
    return {200, graph_payload(*snap, filter_by_degree(snap->graph, *min_degree), *min_degree)};
}

HttpResponse GraphService::search(const QueryParams& query) const {
    auto q = query.find("q");
    if (q == query.end() || q->second.empty()) return error_response(400, "E_BAD_PARAM", "q is required");
    HttpResponse error;
    auto depth = count_param(query, "depth", 1, error);
    if (!depth) return error;

    auto snap = snapshot();
    auto matches = kgatlas::search(snap->graph, q->second);
    auto view = expand_neighborhood(snap->graph, matches, *depth);

    std::string out = "{";
    append_graph_members(out, view, snap->radius);
    out += ",\"matches\":[";
    for (std::size_t i = 0; i < matches.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(matches[i]);
    }
    out += "]";
    append_meta(out, *snap, 0);
    out += ",\"query\":";
    append_json_string(out, q->second);
    out += ",\"depth\":";
    out += std::to_string(*depth);
    out += "}}";
    return {200, std::move(out)};
}

HttpResponse GraphService::abbreviations() const { return {200, snapshot()->abbrev_body}; }

HttpResponse GraphService::stats() const { return {200, snapshot()->stats_body}; }

HttpResponse GraphService::health() const {
    auto snap = snapshot();
    nlohmann::json body = {{"status", "ok"},
                           {"version", kVersion},
                           {"build", __DATE__ " " __TIME__},
                           {"nodes", snap->graph.node_count()},
                           {"edges", snap->graph.edge_count()}};
    return {200, body.dump()};
}

HttpResponse GraphService::index() const {
    if (!static_dir_.empty()) {
        auto file = static_dir_ / "index.html";
        std::error_code ec;
        if (std::filesystem::is_regular_file(file, ec)) return {200, read_file(file), "text/html; charset=utf-8"};
    }
    return {200, std::string(kPlaceholderPage), "text/html; charset=utf-8"};
}

HttpServer::HttpServer(GraphService& service, ServerOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    // Large payloads otherwise stall on Nagle plus delayed ACK.
    server_->set_tcp_nodelay(true);
    server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
        QueryParams query;
        for (const auto& [key, value] : req.params) query.emplace(key, value);
        HttpResponse response;
        try {
            response = service_.handle(req.path, query);
        } catch (const Error& e) {
            response = error_response(500, e.code_name(), e.what());
        } catch (const std::exception& e) {
            response = error_response(500, "E_INTERNAL", e.what());
        }
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    if (options_.port == 0) {
        port_ = server_->bind_to_any_port(options_.address);
    } else {
        port_ = server_->bind_to_port(options_.address, options_.port) ? options_.port : -1;
    }
    if (port_ <= 0) {
        throw Error(ErrorCode::Io, "cannot bind " + options_.address + ":" + std::to_string(options_.port));
    }
    return port_;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) server_->stop();
}

}  // namespace kgatlas

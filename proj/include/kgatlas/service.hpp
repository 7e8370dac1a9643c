#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "kgatlas/graph.hpp"
#include "kgatlas/model.hpp"

namespace httplib {
class Server;
}

namespace kgatlas {

inline constexpr std::string_view kVersion = "0.1.0";

/// Everything a request can see. Immutable; replaced wholesale on reload.
struct ServiceSnapshot {
    KnowledgeGraph graph;
    AbbrevTable abbrev;
    RadiusScale radius;
    std::string stats_body;
    std::string abbrev_body;

    static std::shared_ptr<const ServiceSnapshot> make(KnowledgeGraph graph, AbbrevTable abbrev,
                                                       RadiusScale radius = {});
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json; charset=utf-8";
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Request handling, independent of the transport so it can be exercised
/// directly in tests.
class GraphService {
public:
    explicit GraphService(std::shared_ptr<const ServiceSnapshot> snapshot);

    /// Atomically swaps the snapshot; requests already running keep the old one.
    void replace(std::shared_ptr<const ServiceSnapshot> snapshot);
    std::shared_ptr<const ServiceSnapshot> snapshot() const;

    void set_static_dir(std::filesystem::path dir) { static_dir_ = std::move(dir); }

    /// Routes GET `path`. Unknown paths give 404 with a JSON error body.
    HttpResponse handle(std::string_view path, const QueryParams& query) const;

    HttpResponse graph(const QueryParams& query) const;
    HttpResponse search(const QueryParams& query) const;
    HttpResponse abbreviations() const;
    HttpResponse stats() const;
    HttpResponse health() const;
    HttpResponse index() const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ServiceSnapshot> snapshot_;
    std::filesystem::path static_dir_;
};

/// {"nodes", "links", "meta": {total_nodes, total_edges, min_degree_applied, max_degree}}
/// where the totals describe the whole loaded graph.
std::string graph_payload(const ServiceSnapshot& snapshot, const KnowledgeGraph& view, std::size_t min_degree);

struct ServerOptions {
    std::string address = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
};

/// cpp-httplib front end for a GraphService.
class HttpServer {
public:
    HttpServer(GraphService& service, ServerOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; returns the bound port. Throws E_IO on failure.
    int bind();
    /// Serves until stop(); call bind() first.
    void serve();
    void stop();
    int port() const noexcept { return port_; }

private:
    GraphService& service_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = 0;
};

}  // namespace kgatlas

#pragma once

// Multi-user HTTP facade over workspaces, plus interactive VM sessions.
// `Service::handle` is the whole API without sockets; `serve` binds it to HTTP.

#include "tws/pipeline.hpp"
#include "tws/tinyvm.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

namespace tws::service {

struct Config
{
    std::string host = "0.0.0.0";
    int port = 8080;
    /// Workspaces persist under data_dir/<id>/; empty keeps everything in memory.
    std::filesystem::path data_dir;
    std::optional<std::filesystem::path> static_dir;
    std::uint64_t max_steps = 1'000'000;
    std::size_t max_trace = 100'000;
};

/// Defaults overridden by TWS_PORT, TWS_DATA_DIR, TWS_MAX_STEPS, TWS_MAX_TRACE.
/// Throws std::invalid_argument on unparsable values.
Config config_from_env(Config base = {});

struct Response
{
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

class Service
{
  public:
    /// Loads every persisted workspace found under config.data_dir.
    explicit Service(Config config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Thread-safe. `path` has no query string.
    Response handle(const std::string& method, const std::string& path, const std::string& body);

    const Config& config() const { return config_; }

  private:
    struct WorkspaceEntry;
    struct SessionEntry;

    Config config_;
    std::shared_mutex mutex_; // guards the two maps, not their entries
    std::map<std::string, std::shared_ptr<WorkspaceEntry>> workspaces_;
    std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;

    std::shared_ptr<WorkspaceEntry> find_workspace(const std::string& id);
    std::shared_ptr<SessionEntry> find_session(const std::string& id);
    void persist(WorkspaceEntry& e);

    Response route(const std::string& method, const std::string& path, const std::string& body);
    Response workspace_route(const std::string& method, const std::string& id, const std::string& rest,
                             const std::string& body);
    Response session_route(const std::string& method, const std::string& id, const std::string& rest,
                           const std::string& body);
    Response open_session(const std::shared_ptr<WorkspaceEntry>& ws, const std::string& body);
};

/// HTTP binding of a Service: the API routes plus optional static files.
class HttpServer
{
  public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port, or -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop(); requires a successful bind.
    void listen();
    /// Safe to call from another thread.
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Binds to the configured host and port and serves until the process is
/// stopped. Returns nonzero if the socket cannot be bound.
int serve(Service& service);

} // namespace tws::service

#pragma once

// Read-only HTTP API over a frozen graph snapshot and its fact index.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lkg/config.hpp"
#include "lkg/graph.hpp"
#include "lkg/index.hpp"

namespace httplib {
class Server;
}

namespace lkg {

struct ApiRequest {
  std::string method;  // "GET", "POST", "OPTIONS"
  std::string path;
  std::string body;
  std::optional<std::string> origin;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

struct ServiceSnapshot {
  Graph graph;
  std::optional<VectorIndex> index;
  std::shared_ptr<const Embedder> embedder;
  std::string fingerprint;
  std::string stats_body;   // cached /v1/stats payload
  std::string export_body;  // cached /v1/export/jsonld payload
};

class Service {
 public:
  explicit Service(std::vector<std::string> cors_origins = {});

  // Replaces the served snapshot. The graph must be frozen.
  void load(Graph graph, std::optional<VectorIndex> index, std::shared_ptr<const Embedder> embedder);
  std::shared_ptr<const ServiceSnapshot> snapshot() const;

  ApiResponse handle(const ApiRequest& request) const;

  // Routes every request on `server` through handle().
  void mount(httplib::Server& server) const;

 private:
  ApiResponse dispatch(const ApiRequest& request) const;
  ApiResponse search(const ServiceSnapshot& s, const std::string& body) const;

  std::vector<std::string> cors_origins_;
  mutable std::mutex mutex_;
  std::shared_ptr<const ServiceSnapshot> snapshot_;
};

// Loads the snapshot and, when the file exists, the index named in the
// config. Throws on unreadable or stale files.
void load_service_files(Service& service, const RunConfig& config);

// Blocks until the server stops. Throws Io when the address cannot be bound.
void run_service(const RunConfig& config);

}  // namespace lkg

#include "lkg/service.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/search.hpp"

namespace lkg {

using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json", {}}; }

ApiResponse api_error(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

ApiResponse no_snapshot() { return api_error(503, "index_missing", "no snapshot loaded"); }

json node_json(const Graph& g, std::size_t i) {
  const auto& n = g.node(i);
  json out = {{"id", n.node_id},
              {"label", to_string(n.label)},
              {"text", n.text},
              {"doc_id", n.doc_id},
              {"segment_id", n.segment_id}};
  if (n.provision) out["provision"] = canonical_string(*n.provision);
  json outs = json::array(), ins = json::array();
  for (auto e : g.out_edges(i)) {
    outs.push_back({{"id", g.edge(e).edge_id}, {"kind", to_string(g.edge(e).kind)}, {"target", g.edge(e).dst}});
  }
  for (auto e : g.in_edges(i)) {
    ins.push_back({{"id", g.edge(e).edge_id}, {"kind", to_string(g.edge(e).kind)}, {"source", g.edge(e).src}});
  }
  out["out_edges"] = std::move(outs);
  out["in_edges"] = std::move(ins);
  return out;
}

json path_json(const Graph& g, const ReasoningPath& p) {
  json out = {{"fact", p.fact}, {"application", p.application}, {"norm", p.norm.value_or("")},
              {"provision", p.provision.value_or("")}};
  if (p.provision) out["provision_id"] = canonical_string(*g.find_node(*p.provision)->provision);
  return out;
}

}  // namespace

Service::Service(std::vector<std::string> cors_origins) : cors_origins_(std::move(cors_origins)) {}

void Service::load(Graph graph, std::optional<VectorIndex> index, std::shared_ptr<const Embedder> embedder) {
  graph.require_frozen();
  auto s = std::make_shared<ServiceSnapshot>();
  s->fingerprint = graph.fingerprint();
  s->stats_body = stats_to_json(graph_stats(graph)).dump();
  s->export_body = export_jsonld(graph).dump();
  s->graph = std::move(graph);
  s->index = std::move(index);
  s->embedder = std::move(embedder);
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(s);
}

std::shared_ptr<const ServiceSnapshot> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

ApiResponse Service::handle(const ApiRequest& request) const {
  ApiResponse res;
  try {
    res = dispatch(request);
  } catch (const std::exception& err) {
    res = api_error(500, "internal", err.what());
  }
  if (request.origin && !cors_origins_.empty()) {
    bool any = std::find(cors_origins_.begin(), cors_origins_.end(), "*") != cors_origins_.end();
    bool listed = std::find(cors_origins_.begin(), cors_origins_.end(), *request.origin) != cors_origins_.end();
    if (any || listed) {
      res.headers["Access-Control-Allow-Origin"] = any ? "*" : *request.origin;
      res.headers["Vary"] = "Origin";
      if (request.method == "OPTIONS") {
        res.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
        res.headers["Access-Control-Allow-Headers"] = "Content-Type";
      }
    }
  }
  return res;
}

ApiResponse Service::dispatch(const ApiRequest& req) const {
  const std::string& path = req.path;
  if (req.method == "OPTIONS") return {204, "", "text/plain", {}};

  auto snap = snapshot();
  if (path == "/v1/health") {
    if (req.method != "GET") return api_error(405, "invalid_request", "method not allowed");
    if (!snap) return json_response(200, {{"status", "starting"}});
    return json_response(200, {{"status", "ok"}, {"snapshot", snap->fingerprint}});
  }
  if (path.rfind("/v1/", 0) != 0) return api_error(404, "not_found", "no such route");

  if (path == "/v1/search") {
    if (req.method != "POST") return api_error(405, "invalid_request", "method not allowed");
    if (!snap) return no_snapshot();
    return search(*snap, req.body);
  }
  if (req.method != "GET") return api_error(405, "invalid_request", "method not allowed");
  if (path == "/v1/stats") {
    if (!snap) return no_snapshot();
    return {200, snap->stats_body, "application/json", {}};
  }
  if (path == "/v1/export/jsonld") {
    if (!snap) return no_snapshot();
    return {200, snap->export_body, "application/ld+json", {}};
  }
  static constexpr std::string_view kNodes = "/v1/nodes/";
  static constexpr std::string_view kFacts = "/v1/facts/";
  static constexpr std::string_view kPaths = "/paths";
  if (path.rfind(kNodes, 0) == 0) {
    if (!snap) return no_snapshot();
    auto id = path.substr(kNodes.size());
    auto i = snap->graph.index_of(id);
    if (!i) return api_error(404, "not_found", "unknown node '" + id + "'");
    return json_response(200, node_json(snap->graph, *i));
  }
  if (path.rfind(kFacts, 0) == 0 && path.size() > kFacts.size() + kPaths.size() &&
      path.compare(path.size() - kPaths.size(), kPaths.size(), kPaths) == 0) {
    if (!snap) return no_snapshot();
    auto id = path.substr(kFacts.size(), path.size() - kFacts.size() - kPaths.size());
    const auto* n = snap->graph.find_node(id);
    if (!n) return api_error(404, "not_found", "unknown node '" + id + "'");
    if (n->label != NodeLabel::Fact) return api_error(422, "invalid_request", "node '" + id + "' is not a Fact");
    json paths = json::array();
    for (const auto& p : reasoning_paths(snap->graph, id, std::numeric_limits<std::size_t>::max(), true)) {
      paths.push_back(path_json(snap->graph, p));
    }
    return json_response(200, {{"fact", id}, {"paths", std::move(paths)}});
  }
  return api_error(404, "not_found", "no such route");
}

ApiResponse Service::search(const ServiceSnapshot& s, const std::string& body) const {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return api_error(422, "invalid_request", "body is not JSON");
  }
  if (!req.is_object()) return api_error(422, "invalid_request", "body must be an object");
  for (const auto& [key, _] : req.items()) {
    if (key != "text" && key != "fact_id" && key != "k" && key != "mask") {
      return api_error(422, "invalid_request", "unknown field '" + key + "'");
    }
  }
  bool has_text = req.contains("text"), has_fact = req.contains("fact_id");
  if (has_text == has_fact) return api_error(422, "invalid_request", "give exactly one of text and fact_id");
  if ((has_text && !req["text"].is_string()) || (has_fact && !req["fact_id"].is_string())) {
    return api_error(422, "invalid_request", "text and fact_id must be strings");
  }
  SearchQuery q;
  if (req.contains("k")) {
    if (!req["k"].is_number_integer()) return api_error(422, "invalid_request", "k must be an integer");
    auto k = req["k"].get<long long>();
    if (k < 1 || k > 100) return api_error(422, "invalid_request", "k must be between 1 and 100");
    q.k = static_cast<std::size_t>(k);
  }
  if (req.contains("mask")) {
    if (!req["mask"].is_boolean()) return api_error(422, "invalid_request", "mask must be a boolean");
    q.mask = req["mask"].get<bool>();
  }
  if (has_text) {
    q.text = req["text"].get<std::string>();
  } else {
    q.fact_id = req["fact_id"].get<std::string>();
    if (!s.graph.find_node(*q.fact_id)) return api_error(404, "not_found", "unknown fact '" + *q.fact_id + "'");
  }
  if (!s.index || !s.embedder) return api_error(503, "index_missing", "no index loaded");
  try {
    auto hits = retrieve_provisions(q, s.graph, *s.index, *s.embedder);
    return json_response(200, {{"hits", hits_to_json(hits)}});
  } catch (const Error& err) {
    switch (err.code()) {
      case ErrorCode::UnknownNode: return api_error(404, "not_found", err.what());
      case ErrorCode::WrongLabel:
      case ErrorCode::EmptyText:
      case ErrorCode::InvalidParams: return api_error(422, "invalid_request", err.what());
      case ErrorCode::EmptyIndex: return api_error(503, "index_missing", err.what());
      default: throw;
    }
  }
}

void Service::mount(httplib::Server& server) const {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, req.body, std::nullopt};
    if (req.has_header("Origin")) r.origin = req.get_header_value("Origin");
    auto out = handle(r);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (out.status != 204) res.set_content(out.body, out.content_type);
  };
  const char* any = R"(/.*)";
  server.Get(any, route);
  server.Post(any, route);
  server.Options(any, route);
}

void load_service_files(Service& service, const RunConfig& config) {
  auto graph = load_snapshot(config.paths.snapshot);
  std::shared_ptr<const Embedder> embedder = make_embedder(config.embedder);
  std::optional<VectorIndex> index;
  if (std::filesystem::exists(config.paths.index)) {
    index = VectorIndex::load(config.paths.index, embedder->fingerprint());
  }
  service.load(std::move(graph), std::move(index), std::move(embedder));
}

void run_service(const RunConfig& config) {
  auto [host, port] = split_addr(config.service.addr);
  Service service(config.service.cors_origins);
  httplib::Server server;
  service.mount(server);
  if (!server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + config.service.addr);
  }
  // Health answers "starting" until the snapshot is in place.
  std::exception_ptr load_error;
  std::thread loader([&] {
    try {
      load_service_files(service, config);
    } catch (...) {
      load_error = std::current_exception();
      server.wait_until_ready();
      server.stop();
    }
  });
  server.listen_after_bind();
  loader.join();
  if (load_error) std::rethrow_exception(load_error);
}

}  // namespace lkg

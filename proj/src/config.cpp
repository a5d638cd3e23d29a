#include "lkg/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

std::optional<std::string> process_env(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidParams, "config '" + std::string(where) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw Error(ErrorCode::InvalidParams, "unknown config key '" + std::string(where) + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_opt(const json& obj, const char* key, std::optional<std::string>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<std::string>();
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    auto item = text::trim(s.substr(pos, end - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = end + 1;
  }
  return out;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    check_keys(j, "config", {"provider", "embedder", "index", "paths", "synth", "eval", "service"});
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      check_keys(p, "provider", {"mode", "endpoint", "model", "api_key", "max_retries", "timeout_ms", "max_in_flight"});
      if (p.contains("mode")) c.provider.mode = provider_mode_from_string(p["mode"].get<std::string>());
      read_opt(p, "endpoint", c.provider.endpoint);
      read_opt(p, "model", c.provider.model_name);
      read_opt(p, "api_key", c.provider.api_key);
      read(p, "max_retries", c.provider.max_retries);
      read(p, "max_in_flight", c.provider.max_in_flight);
      if (p.contains("timeout_ms")) c.provider.timeout = std::chrono::milliseconds(p["timeout_ms"].get<long>());
    }
    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      check_keys(e, "embedder", {"mode", "dim", "ngram_min", "ngram_max", "endpoint", "model", "api_key", "timeout_ms"});
      if (e.contains("mode")) c.embedder.mode = embedder_mode_from_string(e["mode"].get<std::string>());
      read(e, "dim", c.embedder.dim);
      read(e, "ngram_min", c.embedder.ngram_min);
      read(e, "ngram_max", c.embedder.ngram_max);
      read_opt(e, "endpoint", c.embedder.endpoint);
      read_opt(e, "model", c.embedder.model_name);
      read_opt(e, "api_key", c.embedder.api_key);
      if (e.contains("timeout_ms")) c.embedder.timeout = std::chrono::milliseconds(e["timeout_ms"].get<long>());
    }
    if (j.contains("index")) {
      const auto& x = j["index"];
      check_keys(x, "index", {"mode", "trees", "leaf_size", "search_k", "seed"});
      if (x.contains("mode")) c.index_mode = index_mode_from_string(x["mode"].get<std::string>());
      read(x, "trees", c.ann.n_trees);
      read(x, "leaf_size", c.ann.leaf_size);
      read(x, "search_k", c.ann.search_k);
      read(x, "seed", c.ann.seed);
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      check_keys(p, "paths", {"corpus", "extraction", "snapshot", "index", "reports"});
      read(p, "corpus", c.paths.corpus);
      read(p, "extraction", c.paths.extraction);
      read(p, "snapshot", c.paths.snapshot);
      read(p, "index", c.paths.index);
      read(p, "reports", c.paths.reports);
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      check_keys(s, "synth", {"seed", "docs"});
      read(s, "seed", c.seed);
      read(s, "docs", c.docs);
    }
    if (j.contains("eval")) {
      check_keys(j["eval"], "eval", {"predictors"});
      read(j["eval"], "predictors", c.predictors);
    }
    if (j.contains("service")) {
      const auto& s = j["service"];
      check_keys(s, "service", {"addr", "cors_origins"});
      read(s, "addr", c.service.addr);
      read(s, "cors_origins", c.service.cors_origins);
    }
  } catch (const json::exception& err) {
    throw Error(ErrorCode::InvalidParams, std::string("config: ") + err.what());
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  auto opt = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
  return {
      {"provider",
       {{"mode", to_string(c.provider.mode)},
        {"endpoint", opt(c.provider.endpoint)},
        {"model", opt(c.provider.model_name)},
        {"max_retries", c.provider.max_retries},
        {"timeout_ms", c.provider.timeout.count()},
        {"max_in_flight", c.provider.max_in_flight}}},
      {"embedder",
       {{"mode", to_string(c.embedder.mode)},
        {"dim", c.embedder.dim},
        {"ngram_min", c.embedder.ngram_min},
        {"ngram_max", c.embedder.ngram_max},
        {"endpoint", opt(c.embedder.endpoint)},
        {"model", opt(c.embedder.model_name)},
        {"timeout_ms", c.embedder.timeout.count()}}},
      {"index",
       {{"mode", to_string(c.index_mode)},
        {"trees", c.ann.n_trees},
        {"leaf_size", c.ann.leaf_size},
        {"search_k", c.ann.search_k},
        {"seed", c.ann.seed}}},
      {"paths",
       {{"corpus", c.paths.corpus},
        {"extraction", c.paths.extraction},
        {"snapshot", c.paths.snapshot},
        {"index", c.paths.index},
        {"reports", c.paths.reports}}},
      {"synth", {{"seed", c.seed}, {"docs", c.docs}}},
      {"eval", {{"predictors", c.predictors}}},
      {"service", {{"addr", c.service.addr}, {"cors_origins", c.service.cors_origins}}},
  };
}

void apply_env(RunConfig& c, const EnvLookup& env) {
  if (auto v = env("LKG_LLM_MODE")) c.provider.mode = provider_mode_from_string(*v);
  if (auto v = env("LKG_LLM_ENDPOINT")) c.provider.endpoint = *v;
  if (auto v = env("LKG_LLM_API_KEY")) c.provider.api_key = *v;
  if (auto v = env("LKG_LLM_MODEL")) c.provider.model_name = *v;
  if (auto v = env("LKG_EMBED_MODE")) c.embedder.mode = embedder_mode_from_string(*v);
  if (auto v = env("LKG_EMBED_ENDPOINT")) c.embedder.endpoint = *v;
  if (auto v = env("LKG_EMBED_API_KEY")) c.embedder.api_key = *v;
  if (auto v = env("LKG_EMBED_MODEL")) c.embedder.model_name = *v;
  if (auto v = env("LKG_SERVICE_ADDR")) c.service.addr = *v;
  if (auto v = env("LKG_SNAPSHOT_PATH")) c.paths.snapshot = *v;
  if (auto v = env("LKG_INDEX_PATH")) c.paths.index = *v;
  if (auto v = env("LKG_CORS_ORIGINS")) c.service.cors_origins = split_list(*v);
}

RunConfig load_run_config(const std::optional<std::string>& path, const EnvLookup& env) {
  RunConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::Io, "cannot read config '" + *path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& err) {
      throw Error(ErrorCode::InvalidParams, "config '" + *path + "': " + err.what());
    }
    c = config_from_json(j);
  }
  apply_env(c, env);
  return c;
}

std::pair<std::string, int> split_addr(std::string_view addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidParams, "address must be host:port");
  std::string host(addr.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  auto port_s = addr.substr(colon + 1);
  int port = 0;
  auto [ptr, ec] = std::from_chars(port_s.data(), port_s.data() + port_s.size(), port);
  if (ec != std::errc() || ptr != port_s.data() + port_s.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::InvalidParams, "bad port in '" + std::string(addr) + "'");
  }
  return {host, port};
}

}  // namespace lkg

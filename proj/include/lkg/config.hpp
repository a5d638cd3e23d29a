#pragma once

// Run configuration: one JSON file plus LKG_* environment overrides.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/index.hpp"
#include "lkg/provider.hpp"

namespace lkg {

struct RunPaths {
  std::string corpus = "corpus.json";
  std::string extraction = "extraction.json";
  std::string snapshot = "graph.json";
  std::string index = "index.json";
  std::string reports = "reports";
};

struct ServiceSettings {
  std::string addr = "127.0.0.1:8080";
  std::vector<std::string> cors_origins;
};

struct RunConfig {
  ProviderConfig provider;
  EmbedderConfig embedder;
  IndexMode index_mode = IndexMode::Exact;
  AnnParams ann;
  RunPaths paths;
  std::uint64_t seed = 7;
  int docs = 40;
  std::string predictors = "lkg:k=3";
  ServiceSettings service;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view name)>;

// Reads the process environment.
std::optional<std::string> process_env(std::string_view name);

// Throws InvalidParams for unknown keys or ill-typed values.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

// Overrides: LKG_LLM_MODE, LKG_LLM_ENDPOINT, LKG_LLM_API_KEY, LKG_LLM_MODEL,
// LKG_EMBED_MODE, LKG_EMBED_ENDPOINT, LKG_EMBED_API_KEY, LKG_EMBED_MODEL,
// LKG_SERVICE_ADDR, LKG_SNAPSHOT_PATH, LKG_INDEX_PATH, LKG_CORS_ORIGINS
// (comma-separated).
void apply_env(RunConfig& config, const EnvLookup& env);

// File (when given) then environment.
RunConfig load_run_config(const std::optional<std::string>& path, const EnvLookup& env = process_env);

// "host:port" or ":port"; throws InvalidParams.
std::pair<std::string, int> split_addr(std::string_view addr);

}  // namespace lkg

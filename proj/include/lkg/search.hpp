#pragma once

// Fact-masked provision retrieval over a frozen graph and a fact index.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/graph.hpp"
#include "lkg/index.hpp"

namespace lkg {

struct SearchQuery {
  std::optional<std::string> text;
  std::optional<std::string> fact_id;
  std::size_t k = 3;
  bool mask = true;
};

struct SupportingPath {
  std::string neighbor;  // fact node id
  float similarity = 0.0f;
  ReasoningPath path;
};

struct ProvisionHit {
  ProvisionId provision;
  float score = 0.0f;  // max similarity over supporting neighbors
  std::size_t supporting_facts = 0;
  std::vector<SupportingPath> supporting_paths;
};

// Throws InvalidParams (both or neither of text/fact_id, k == 0),
// UnknownNode, WrongLabel, EmptyIndex, GraphNotFrozen.
//
// A masked fact_id query excludes the fact from neighbor retrieval, so its
// own ToFact edges contribute no paths. An unmasked fact_id query places the
// fact itself first (similarity 1) followed by its k - 1 nearest other facts.
// Neighbors with non-positive similarity contribute nothing.
std::vector<ProvisionHit> retrieve_provisions(const SearchQuery& query, const Graph& graph, const VectorIndex& index,
                                              const Embedder& embedder);

// Fact -> Application -> Norm -> provision, one block per supporting path.
std::string explain(const ProvisionHit& hit, const Graph& graph);

nlohmann::json hits_to_json(const std::vector<ProvisionHit>& hits);

// Fact nodes of a frozen graph as (node_id, text), in node order.
std::vector<std::pair<std::string, std::string>> fact_texts(const Graph& graph);

}  // namespace lkg

#include "lkg/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"

namespace lkg {

using nlohmann::json;

std::vector<std::pair<std::string, std::string>> fact_texts(const Graph& graph) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& n : graph.nodes()) {
    if (n.label == NodeLabel::Fact) out.emplace_back(n.node_id, n.text);
  }
  return out;
}

std::vector<ProvisionHit> retrieve_provisions(const SearchQuery& query, const Graph& graph, const VectorIndex& index,
                                              const Embedder& embedder) {
  graph.require_frozen();
  if (query.text.has_value() == query.fact_id.has_value()) {
    throw Error(ErrorCode::InvalidParams, "exactly one of text and fact_id must be given");
  }
  if (query.k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  if (index.size() == 0) throw Error(ErrorCode::EmptyIndex, "index is empty");

  std::string text;
  std::set<std::string, std::less<>> exclude;
  std::vector<Neighbor> neighbors;
  std::size_t k = query.k;
  if (query.fact_id) {
    const auto* node = graph.find_node(*query.fact_id);
    if (!node) throw Error(ErrorCode::UnknownNode, "unknown node '" + *query.fact_id + "'");
    if (node->label != NodeLabel::Fact) throw Error(ErrorCode::WrongLabel, "node '" + *query.fact_id + "' is not a Fact");
    text = node->text;
    exclude.insert(node->node_id);
    if (!query.mask) {
      neighbors.push_back({node->node_id, 1.0f});
      --k;
    }
  } else {
    text = *query.text;
  }
  auto vec = embedder.embed(text);
  if (k > 0) {
    auto found = index.query(vec, k, exclude);
    neighbors.insert(neighbors.end(), found.begin(), found.end());
  }

  std::map<ProvisionId, ProvisionHit> by_provision;
  std::map<ProvisionId, std::set<std::string>> supporters;
  for (const auto& nb : neighbors) {
    if (!(nb.similarity > 0.0f)) continue;
    if (!graph.index_of(nb.node_id)) continue;
    for (auto& path : reasoning_paths(graph, nb.node_id, std::numeric_limits<std::size_t>::max())) {
      const auto& pid = *graph.find_node(*path.provision)->provision;
      auto& hit = by_provision[pid];
      if (hit.supporting_paths.empty()) {
        hit.provision = pid;
        hit.score = nb.similarity;
      }
      hit.score = std::max(hit.score, nb.similarity);
      hit.supporting_paths.push_back({nb.node_id, nb.similarity, std::move(path)});
      supporters[pid].insert(nb.node_id);
    }
  }
  std::vector<ProvisionHit> hits;
  for (auto& [pid, hit] : by_provision) {
    hit.supporting_facts = supporters[pid].size();
    hits.push_back(std::move(hit));
  }
  std::sort(hits.begin(), hits.end(), [](const ProvisionHit& a, const ProvisionHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.supporting_facts != b.supporting_facts) return a.supporting_facts > b.supporting_facts;
    return canonical_string(a.provision) < canonical_string(b.provision);
  });
  return hits;
}

std::string explain(const ProvisionHit& hit, const Graph& graph) {
  std::ostringstream os;
  auto text_of = [&graph](const std::optional<std::string>& id) {
    if (!id) return std::string("(none)");
    const auto* n = graph.find_node(*id);
    return n ? n->text : *id;
  };
  os << canonical_string(hit.provision) << "  score " << hit.score << "  supporting facts "
     << hit.supporting_facts << '\n';
  for (const auto& sp : hit.supporting_paths) {
    os << "  Fact:        " << text_of(sp.path.fact) << "  [similarity " << sp.similarity << "]\n"
       << "  Application: " << text_of(sp.path.application) << '\n'
       << "  Norm:        " << text_of(sp.path.norm) << '\n'
       << "  Provision:   " << canonical_string(hit.provision) << "  (" << text_of(sp.path.provision) << ")\n\n";
  }
  return os.str();
}

json hits_to_json(const std::vector<ProvisionHit>& hits) {
  json out = json::array();
  for (const auto& h : hits) {
    json paths = json::array();
    for (const auto& sp : h.supporting_paths) {
      paths.push_back({{"fact", sp.path.fact},
                       {"application", sp.path.application},
                       {"norm", sp.path.norm.value_or("")},
                       {"provision", sp.path.provision.value_or("")},
                       {"similarity", sp.similarity}});
    }
    out.push_back({{"provision", canonical_string(h.provision)},
                   {"score", h.score},
                   {"supporting_facts", h.supporting_facts},
                   {"paths", std::move(paths)}});
  }
  return out;
}

}  // namespace lkg

#pragma once

// The legal knowledge graph: a typed directed multigraph over
// segment-anchored nodes.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/normalize.hpp"
#include "lkg/schema.hpp"

namespace lkg {

inline constexpr std::string_view kSnapshotFormat = "lkg-graph/1";

enum class Provenance { Oracle, Mock, Remote, Imported };
std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct LkgNode {
  std::string node_id;  // assigned by add_node when empty
  NodeLabel label = NodeLabel::Fact;
  std::string text;
  std::string doc_id;
  std::string segment_id;
  std::optional<ProvisionId> provision;  // required iff label == Provision
};

struct LkgEdge {
  std::string edge_id;  // assigned by add_edge when empty
  EdgeType kind = EdgeType::ToFact;
  std::string src;
  std::string dst;
  std::string doc_id;  // filled from the endpoints when empty
  Provenance provenance = Provenance::Oracle;
};

struct GraphOptions {
  // Accept FactToFact / NormToNorm edges.
  bool allow_same_category = false;
};

class Graph {
 public:
  explicit Graph(GraphOptions options = {});

  // Idempotent on (doc_id, segment_id, label, text, provision): re-adding an
  // identical node returns the existing id.
  std::string add_node(LkgNode node);
  // Parallel edges are kept. Throws UnknownEndpoint, LabelMismatch,
  // CrossDocumentEdge or ExtendedKindDisabled.
  std::string add_edge(LkgEdge edge);

  // After freeze() the graph rejects mutation (GraphFrozen).
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  // Throws GraphNotFrozen.
  void require_frozen() const;

  const GraphOptions& options() const { return options_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<LkgNode>& nodes() const { return nodes_; }
  const std::vector<LkgEdge>& edges() const { return edges_; }
  const LkgNode& node(std::size_t index) const { return nodes_[index]; }
  const LkgEdge& edge(std::size_t index) const { return edges_[index]; }

  std::optional<std::size_t> index_of(std::string_view node_id) const;
  const LkgNode* find_node(std::string_view node_id) const;

  // Edge indices, in insertion order.
  const std::vector<std::size_t>& out_edges(std::size_t node_index) const { return out_[node_index]; }
  const std::vector<std::size_t>& in_edges(std::size_t node_index) const { return in_[node_index]; }
  std::size_t src_index(std::size_t edge_index) const { return endpoints_[edge_index].first; }
  std::size_t dst_index(std::size_t edge_index) const { return endpoints_[edge_index].second; }

  // Stable content hash of nodes and edges.
  std::string fingerprint() const;

 private:
  GraphOptions options_;
  bool frozen_ = false;
  std::vector<LkgNode> nodes_;
  std::vector<LkgEdge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::size_t, std::less<>> by_key_;
  std::map<std::string, int, std::less<>> per_segment_label_;
  std::set<std::string, std::less<>> edge_ids_;
};

// --- statistics ------------------------------------------------------------

struct LabelStats {
  NodeLabel label = NodeLabel::Fact;
  std::size_t nodes = 0;
  double avg_in_degree = 0.0;
  double avg_out_degree = 0.0;
  // Edges whose endpoints share a segment, counted at both endpoints' labels.
  std::size_t self_loops = 0;
};

struct EdgeKindStats {
  EdgeType kind = EdgeType::ToFact;
  std::size_t edges = 0;
  std::size_t distinct_pairs = 0;
  double multiplicity = 0.0;  // edges / distinct_pairs, 0 when there are no pairs
};

struct NetworkStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t wcc_count = 0;
  std::size_t wcc_diameter_ge2 = 0;
  double mean_diameter = 0.0;  // over WCCs with diameter >= 2
  double std_diameter = 0.0;   // population std over the same WCCs
  double degree_std = 0.0;     // population std of in+out degree
  double density = 0.0;
};

struct GraphStats {
  std::vector<LabelStats> by_label;
  std::vector<EdgeKindStats> by_kind;
  NetworkStats network;
};

// E / (N (N - 1)); 0 for N < 2.
double graph_density(std::size_t nodes, std::size_t edges);

std::vector<LabelStats> node_stats(const Graph& g);
std::vector<EdgeKindStats> edge_stats(const Graph& g);
NetworkStats network_stats(const Graph& g);
GraphStats graph_stats(const Graph& g);

nlohmann::json stats_to_json(const GraphStats& stats);
// Plain-text tables laid out like the published node/edge/network tables.
std::string render_stats(const GraphStats& stats);

// --- traversal -------------------------------------------------------------

struct ReasoningPath {
  std::string fact;
  std::string application;
  std::optional<std::string> norm;
  std::optional<std::string> provision;

  bool complete() const { return norm.has_value() && provision.has_value(); }
  friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

// Fact -ToFact-> Application <-AppliesNorm- Norm <-DerivesNorm- Provision.
// Throws UnknownNode or WrongLabel. Complete paths only unless
// include_partial; at most `limit` paths.
std::vector<ReasoningPath> reasoning_paths(const Graph& g, std::string_view fact_id, std::size_t limit,
                                           bool include_partial = false);

// --- interchange -----------------------------------------------------------

inline constexpr std::string_view kLkgNamespace = "https://w3id.org/lkg/ontology#";

nlohmann::json export_jsonld(const Graph& g);
// Throws SchemaViolation. The result is frozen.
Graph import_jsonld(const nlohmann::json& doc, GraphOptions options = {});

nlohmann::json snapshot_to_json(const Graph& g);
Graph snapshot_from_json(const nlohmann::json& j);
void save_snapshot(const std::string& path, const Graph& g);
Graph load_snapshot(const std::string& path);

}  // namespace lkg

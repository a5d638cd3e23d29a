#pragma once

// Edge construction: same-section Provision->Norm pairing and
// scoped-history linking of Norms and Facts to Applications.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/extraction.hpp"
#include "lkg/graph.hpp"
#include "lkg/provider.hpp"

namespace lkg {

struct PlacedNode {
  std::string node_id;
  NodeLabel label = NodeLabel::Fact;
  std::string text;
  std::string segment_id;
  std::optional<ProvisionId> provision;
  std::size_t position = 0;  // segment index in reading order
  std::size_t section = 0;   // index into sections_in_reading_order
};

// The nodes of one document placed in reading order.
class DocLayout {
 public:
  // Throws InvalidFormat when a node's segment is not part of the document.
  DocLayout(const JudgmentDoc& doc, const Graph& graph);

  const std::vector<PlacedNode>& nodes() const { return nodes_; }
  const PlacedNode* find(std::string_view node_id) const;
  std::size_t section_count() const { return excerpts_.size(); }
  std::vector<const PlacedNode*> in_section(std::size_t section) const;
  const std::string& section_excerpt(std::size_t section) const { return excerpts_[section]; }

 private:
  std::vector<PlacedNode> nodes_;
  std::vector<std::string> excerpts_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

struct LinkRequest {
  std::string target;
  std::string target_text;
  NodeLabel kind = NodeLabel::LegalNorm;  // label of the candidates
  std::vector<std::string> candidates;    // oldest first
  std::vector<std::string> candidate_texts;
  std::vector<std::size_t> candidate_sections;
  // Latest section holding a candidate in the unchunked history.
  std::optional<std::size_t> anchor_section;
  std::string source_excerpt;
};

// Every node labeled `kind` whose segment is at or before the application's
// segment in reading order, across section boundaries. Throws UnknownNode or
// WrongLabel.
LinkRequest assemble_history(const DocLayout& layout, std::string_view app_id, NodeLabel kind);

// ceil(code points / 3).
std::size_t estimate_tokens(std::string_view s);

// Splits the history oldest-first so that each chunk's serialized prompt
// stays within `budget_tokens`. Every chunk holds at least one candidate; the
// union of the chunks is the full history.
std::vector<LinkRequest> chunk_history(const LinkRequest& request, std::size_t budget_tokens);

// Gold edges of one document expressed over graph node ids.
class OracleEdges {
 public:
  OracleEdges() = default;
  // gold_to_nodes[i] lists the graph nodes created from gold node i.
  OracleEdges(const GoldAnnotations& gold, const std::vector<std::vector<std::string>>& gold_to_nodes);

  bool contains(EdgeType type, std::string_view src, std::string_view dst) const;
  std::size_t size() const { return edges_.size(); }

 private:
  std::map<std::tuple<EdgeType, std::string, std::string>, std::size_t> edges_;
};

struct LinkContext {
  ProviderMode mode = ProviderMode::Mock;
  Provider* provider = nullptr;  // remote mode
  const OracleEdges* oracle = nullptr;  // oracle mode
  int max_retries = 2;
  std::size_t budget_tokens = 8000;
  // Token overlap at or above which a Fact is linked to an Application in mock mode.
  double mock_fact_overlap = 0.4;
};

struct LinkOutcome {
  std::vector<LkgEdge> edges;
  std::vector<ValidationWarning> warnings;
};

// Pairs the Provisions and Norms of one section.
LinkOutcome pair_provision_norm(const std::vector<const PlacedNode*>& section_nodes, std::string_view excerpt,
                                const LinkContext& ctx);
LinkOutcome link_norm_application(const LinkRequest& history, const LinkContext& ctx);
LinkOutcome link_fact_application(const LinkRequest& history, const LinkContext& ctx);

// Runs all three passes over one document. History requests are chunked
// against ctx.budget_tokens.
LinkOutcome link_document(const DocLayout& layout, const LinkContext& ctx);

// Parses a positional reference such as "Norm 3" (1-based); nullopt when no
// number is present.
std::optional<std::size_t> parse_item_label(std::string_view label);

}  // namespace lkg

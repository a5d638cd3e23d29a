#pragma once

// The node labels and edge kinds of the legal knowledge graph.

#include <optional>
#include <string_view>

namespace lkg {

enum class NodeLabel { Fact, Provision, LegalNorm, LegalApplication };

inline constexpr NodeLabel kAllLabels[] = {NodeLabel::Provision, NodeLabel::LegalNorm, NodeLabel::LegalApplication,
                                           NodeLabel::Fact};

std::string_view to_string(NodeLabel label);
std::optional<NodeLabel> node_label_from_string(std::string_view s);
// One-letter tag used in node ids: F, P, N, A.
char label_tag(NodeLabel label);

// Canonical kinds follow the direction of legal derivation:
//   DerivesNorm  Provision -> LegalNorm
//   AppliesNorm  LegalNorm -> LegalApplication
//   ToFact       Fact      -> LegalApplication
// The same-category kinds are only accepted by graphs built with
// GraphOptions::allow_same_category.
enum class EdgeType { DerivesNorm, AppliesNorm, ToFact, FactToFact, NormToNorm };

inline constexpr EdgeType kCanonicalEdgeTypes[] = {EdgeType::DerivesNorm, EdgeType::AppliesNorm, EdgeType::ToFact};

std::string_view to_string(EdgeType type);
std::optional<EdgeType> edge_type_from_string(std::string_view s);

struct EdgeSignature {
  NodeLabel src;
  NodeLabel dst;
};
EdgeSignature signature(EdgeType type);
bool is_canonical(EdgeType type);

}  // namespace lkg

#include "lkg/schema.hpp"

namespace lkg {

std::string_view to_string(NodeLabel label) {
  switch (label) {
    case NodeLabel::Fact: return "Fact";
    case NodeLabel::Provision: return "Provision";
    case NodeLabel::LegalNorm: return "LegalNorm";
    case NodeLabel::LegalApplication: return "LegalApplication";
  }
  return "Fact";
}

std::optional<NodeLabel> node_label_from_string(std::string_view s) {
  for (auto l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

char label_tag(NodeLabel label) {
  switch (label) {
    case NodeLabel::Fact: return 'F';
    case NodeLabel::Provision: return 'P';
    case NodeLabel::LegalNorm: return 'N';
    case NodeLabel::LegalApplication: return 'A';
  }
  return '?';
}

std::string_view to_string(EdgeType type) {
  switch (type) {
    case EdgeType::DerivesNorm: return "DerivesNorm";
    case EdgeType::AppliesNorm: return "AppliesNorm";
    case EdgeType::ToFact: return "ToFact";
    case EdgeType::FactToFact: return "FactToFact";
    case EdgeType::NormToNorm: return "NormToNorm";
  }
  return "ToFact";
}

std::optional<EdgeType> edge_type_from_string(std::string_view s) {
  for (auto t : {EdgeType::DerivesNorm, EdgeType::AppliesNorm, EdgeType::ToFact, EdgeType::FactToFact,
                 EdgeType::NormToNorm}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

EdgeSignature signature(EdgeType type) {
  switch (type) {
    case EdgeType::DerivesNorm: return {NodeLabel::Provision, NodeLabel::LegalNorm};
    case EdgeType::AppliesNorm: return {NodeLabel::LegalNorm, NodeLabel::LegalApplication};
    case EdgeType::ToFact: return {NodeLabel::Fact, NodeLabel::LegalApplication};
    case EdgeType::FactToFact: return {NodeLabel::Fact, NodeLabel::Fact};
    case EdgeType::NormToNorm: return {NodeLabel::LegalNorm, NodeLabel::LegalNorm};
  }
  return {NodeLabel::Fact, NodeLabel::Fact};
}

bool is_canonical(EdgeType type) {
  return type == EdgeType::DerivesNorm || type == EdgeType::AppliesNorm || type == EdgeType::ToFact;
}

}  // namespace lkg

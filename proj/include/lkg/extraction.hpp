#pragma once

// Per-section node extraction: prompt assembly, provider orchestration and
// candidate validation.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/graph.hpp"
#include "lkg/provider.hpp"

namespace lkg {

struct NodeCandidate {
  NodeLabel label = NodeLabel::Fact;
  std::string text;
  std::string segment_id;
  Provenance provenance = Provenance::Mock;
  // Index of the gold node this candidate reproduces (oracle mode only).
  std::optional<std::size_t> gold_index;

  friend bool operator==(const NodeCandidate&, const NodeCandidate&) = default;
};

enum class WarningKind {
  NonVerbatimSpan,
  SurfaceCopy,
  DuplicateCandidate,
  UnresolvedReference,
  SectionFailed,
  IndexOutOfRange,
  LinkFailed,
};
std::string_view to_string(WarningKind kind);
WarningKind warning_kind_from_string(std::string_view s);

struct ValidationWarning {
  WarningKind kind = WarningKind::NonVerbatimSpan;
  std::string segment_id;
  std::string text;
  std::string message;
};

std::string build_node_prompt(std::string_view overview, std::string_view section_text);

// Flags spans that are not contiguous in section_text (after whitespace
// normalization) and spans carrying the one-shot example's fictional names
// when those names do not occur in the source. Flagged candidates are kept.
// Repeated (label, text) pairs are dropped.
struct Validated {
  std::vector<NodeCandidate> candidates;
  std::vector<ValidationWarning> warnings;
};
Validated validate_candidates(std::vector<NodeCandidate> candidates, std::string_view section_text);

// Deterministic rule-based labeling of one segment.
std::vector<NodeCandidate> mock_label_segment(const Segment& segment);

struct ExtractionResult {
  std::vector<NodeCandidate> candidates;
  std::vector<ValidationWarning> warnings;
};

// `provider` is required in remote mode and ignored otherwise. Throws
// OracleMissing, MalformedOutput or ProviderUnavailable.
ExtractionResult extract_nodes(const JudgmentDoc& doc, const Section& section, const ProviderConfig& config,
                               Provider* provider = nullptr);

// Maps provider output spans to the section segment that contains them,
// falling back to the segment with the highest token overlap.
std::vector<NodeCandidate> parse_extraction_reply(const nlohmann::json& reply, const Section& section,
                                                  Provenance provenance);

}  // namespace lkg

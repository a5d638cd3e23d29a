#pragma once

// Corpus-level stages: extraction with provision normalization, graph
// assembly and linking. Each stage's output is serializable so the CLI can
// compose stages through files.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/corpus.hpp"
#include "lkg/extraction.hpp"
#include "lkg/graph.hpp"
#include "lkg/linker.hpp"
#include "lkg/normalize.hpp"
#include "lkg/provider.hpp"

namespace lkg {

inline constexpr std::string_view kExtractionFormat = "lkg-extraction/1";

struct DocExtraction {
  std::string doc_id;
  std::vector<NodeCandidate> candidates;
  // Resolved ids of candidates[i]; empty for non-Provision candidates and
  // for unresolved references.
  std::vector<std::vector<ProvisionId>> provisions;
  std::vector<ValidationWarning> warnings;
  std::vector<std::string> failed_sections;
};

struct NormalizeOptions {
  const StatuteCatalog* catalog = nullptr;
  // Per-document alias overrides keyed by doc_id, merged over the tables
  // built from the document text.
  const std::map<std::string, AliasTable>* aliases = nullptr;
};

// Alias table for a document: definitions and the default title found in
// its overview and body, plus any override entries.
AliasTable document_aliases(const JudgmentDoc& doc, const NormalizeOptions& options = {});

// Resolves every Provision candidate in place and records unresolved
// references as warnings.
void normalize_extraction(DocExtraction& extraction, const JudgmentDoc& doc, const NormalizeOptions& options = {},
                          Provider* provider = nullptr, int max_retries = 2);

// Extracts and normalizes every section of every document. Sections whose
// provider output stays malformed are recorded in failed_sections. Remote
// work runs with at most config.max_in_flight concurrent requests; results
// are merged in reading order.
std::vector<DocExtraction> extract_corpus(const std::vector<JudgmentDoc>& docs, const ProviderConfig& config,
                                          Provider* provider = nullptr, const NormalizeOptions& options = {});

nlohmann::json extraction_to_json(const std::vector<DocExtraction>& extractions);
std::vector<DocExtraction> extraction_from_json(const nlohmann::json& j);

struct BuildResult {
  Graph graph;
  std::vector<ValidationWarning> warnings;
};

// Adds one node per candidate (one per resolved id for Provisions), then
// links each document. The returned graph is frozen. `ctx.oracle` is filled
// per document in oracle mode.
BuildResult build_graph(const std::vector<JudgmentDoc>& docs, const std::vector<DocExtraction>& extractions,
                        LinkContext ctx, GraphOptions options = {});

// The graph spelled out by the gold annotations. Provision ids come from the
// generator when known and from normalization otherwise.
Graph gold_graph(const std::vector<JudgmentDoc>& docs, const NormalizeOptions& options = {});

}  // namespace lkg

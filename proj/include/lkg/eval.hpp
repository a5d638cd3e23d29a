#pragma once

// Fact-to-provision benchmark: gold labels from the graph, the retrieval and
// LLM-baseline predictors, macro/micro metrics, and node/edge agreement
// between two annotation sets.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/corpus.hpp"
#include "lkg/extraction.hpp"
#include "lkg/graph.hpp"
#include "lkg/index.hpp"
#include "lkg/pipeline.hpp"
#include "lkg/provider.hpp"

namespace lkg {

// --- gold ------------------------------------------------------------------

struct GoldQuery {
  std::string fact_id;
  std::string doc_id;
  std::set<ProvisionId> provisions;  // nonempty
};

struct GoldSet {
  std::vector<GoldQuery> queries;  // graph node order
  std::size_t total() const;
  const GoldQuery* find(std::string_view fact_id) const;
};

// gold(f) = provisions reachable from f over ToFact, AppliesNorm^-1,
// DerivesNorm^-1. Facts with nothing reachable are left out.
GoldSet build_gold(const Graph& graph);

// --- predictors ------------------------------------------------------------

enum class PredictorKind { LkgRetrieval, LlmSimple, LlmWithContext, LlmWithRag };

struct PredictorSpec {
  PredictorKind kind = PredictorKind::LkgRetrieval;
  std::size_t k = 3;  // LkgRetrieval
  std::size_t m = 3;  // LlmWithRag

  // "LKG Retrieval (k=3)", "LLM Simple", "LLM With Context", "LLM With RAG (m=3)"
  std::string name() const;
  // "lkg:k=3", "llm-simple", "llm-context", "llm-rag:m=3"
  std::string token() const;
};

// Comma-separated predictor tokens. Throws InvalidParams.
std::vector<PredictorSpec> parse_predictors(std::string_view list);

struct Prediction {
  std::string fact_id;
  std::set<ProvisionId> provisions;
};

// Answers baseline prompts offline by quoting every provision reference that
// appears in the prompt's context.
class MockBaselineProvider final : public Provider {
 public:
  std::string complete(std::string_view prompt) override;
  std::string fingerprint() const override { return "mock-baseline"; }
};

struct EvalResources {
  const Graph* graph = nullptr;
  const VectorIndex* index = nullptr;
  const Embedder* embedder = nullptr;
  Provider* provider = nullptr;
  const std::vector<JudgmentDoc>* corpus = nullptr;
  NormalizeOptions normalize;
  int max_retries = 2;
  int max_in_flight = 4;
};

struct PredictorRun {
  std::vector<Prediction> predictions;  // same order as the gold queries
  std::vector<std::string> warnings;
};

// Throws ResourceMissing when the predictor's resources are absent. Provider
// failures leave the query's prediction empty and add a warning.
PredictorRun run_predictor(const GoldSet& gold, const PredictorSpec& spec, const EvalResources& resources);

// The retrieval predictor's per-query loop, parallel and serial.
std::vector<Prediction> predict_lkg(const GoldSet& gold, std::size_t k, const Graph& graph, const VectorIndex& index,
                                    const Embedder& embedder);
std::vector<Prediction> predict_lkg_serial(const GoldSet& gold, std::size_t k, const Graph& graph,
                                           const VectorIndex& index, const Embedder& embedder);

// Prompt builders for the three baselines. `passages` holds the retrieved
// section texts for the RAG mode.
std::string build_baseline_prompt(PredictorKind kind, std::string_view fact, std::string_view overview,
                                  const std::vector<std::string>& passages);

// Judgment sections as retrieval units for the RAG baseline.
struct SectionPassage {
  std::string doc_id;
  std::string text;
};
std::vector<SectionPassage> corpus_passages(const std::vector<JudgmentDoc>& corpus);

// Top-m passages by cosine similarity, similarity desc then corpus order.
// Passages of `exclude_doc` are skipped.
std::vector<std::size_t> top_passages(const std::vector<std::vector<float>>& passage_vectors,
                                      const std::vector<SectionPassage>& passages, std::span<const float> query,
                                      std::size_t m, std::string_view exclude_doc);

// --- metrics ---------------------------------------------------------------

struct MetricsRow {
  std::string method;
  std::size_t pred = 0;
  std::size_t tp = 0;
  double macro_recall = 0.0;
  double micro_recall = 0.0;
  double macro_precision = 0.0;
  double micro_precision = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

struct MetricsReport {
  std::size_t gold_total = 0;
  std::vector<MetricsRow> rows;
};

// 2PR / (P + R), 0 when both are 0.
double f1_score(double precision, double recall);

// Micro rates from raw counts (the Table 6 identities).
MetricsRow micro_row(std::string method, std::size_t pred, std::size_t tp, std::size_t gold_total);

// Throws UnknownQuery when a prediction's fact is not a gold query.
MetricsRow compute_metrics(std::string method, const std::vector<Prediction>& predictions, const GoldSet& gold);

std::string render_report_text(const MetricsReport& report);
std::string render_report_csv(const MetricsReport& report);
// Parses render_report_csv output. Throws InvalidFormat.
MetricsReport parse_report_csv(std::string_view csv);

// --- annotation agreement --------------------------------------------------

struct AnnotationNode {
  std::string doc_id;
  std::string segment_id;
  NodeLabel label = NodeLabel::Fact;
  std::string text;
};

struct AnnotationEdge {
  EdgeType kind = EdgeType::ToFact;
  std::size_t src = 0;  // indices into AnnotationSet::nodes
  std::size_t dst = 0;
};

struct AnnotationSet {
  std::vector<AnnotationNode> nodes;
  std::vector<AnnotationEdge> edges;
  std::set<std::string> doc_ids() const;
};

AnnotationSet annotations_from_graph(const Graph& graph);
AnnotationSet annotations_from_gold(const std::vector<JudgmentDoc>& docs);

struct AgreementRow {
  std::string category;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct AgreementReport {
  std::vector<AgreementRow> nodes;  // one row per label
  std::vector<AgreementRow> edges;  // one row per canonical kind
};

struct MatchOptions {
  // Minimum text::token_overlap for two nodes in the same segment with the
  // same label to match.
  double min_overlap = 0.8;
};

// Nodes match one-to-one on (doc, segment, label) with sufficient text
// overlap; edges match on kind plus matched endpoints. Throws
// DocumentMismatch when the two sets cover different documents.
AgreementReport compare_annotations(const AnnotationSet& system, const AnnotationSet& reference,
                                    const MatchOptions& options = {});
std::string render_agreement(const AgreementReport& report);

// --- run manifest ----------------------------------------------------------

struct RunManifest {
  std::vector<PredictorSpec> predictors;
  std::string graph_fingerprint;
  std::string index_embedder;
  std::string provider;
  std::optional<std::uint64_t> corpus_seed;
  std::size_t queries = 0;
  std::size_t gold_total = 0;
};
nlohmann::json manifest_to_json(const RunManifest& manifest);

}  // namespace lkg

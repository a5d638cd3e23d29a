#pragma once

// Judgment documents: markup and structured-JSON ingestion, the section
// tree, and the seeded synthetic corpus generator.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lkg/normalize.hpp"
#include "lkg/schema.hpp"

namespace lkg {

inline constexpr std::string_view kCorpusFormat = "lkg-corpus/1";

enum class SourceKind { Markup, StructuredJson };

struct RawDocument {
  std::string doc_id;
  SourceKind source_kind = SourceKind::Markup;
  std::string bytes;
};

struct Segment {
  std::string segment_id;
  std::string text;
  bool is_heading = false;
  std::vector<int> section_path;
  int ordinal = 0;  // 0 for the heading, 1.. for body segments
};

struct Section {
  std::vector<int> path;  // empty for the root
  int level = 0;
  std::optional<Segment> heading;
  std::vector<Segment> paragraphs;
  std::vector<Section> children;
};

struct GoldNode {
  std::string segment_id;
  NodeLabel label = NodeLabel::Fact;
  std::string text;
  // Generator-assigned canonical id for Provision nodes. Not serialized.
  std::optional<ProvisionId> canonical;
};

struct GoldEdge {
  EdgeType type = EdgeType::ToFact;
  std::size_t src = 0;  // indices into GoldAnnotations::nodes
  std::size_t dst = 0;
};

struct GoldAnnotations {
  std::vector<GoldNode> nodes;
  std::vector<GoldEdge> edges;
};

struct JudgmentDoc {
  std::string doc_id;
  std::string case_overview;
  Section root;
  std::optional<GoldAnnotations> gold;
};

struct HeadingMarker {
  std::string pattern;  // ECMAScript regex anchored at line start
  int level = 1;
};

struct HeadingHeuristics {
  std::size_t max_length = 60;  // code points
  std::vector<std::string> terminal_punctuation = {".", "!", "?", ";", ":", ",", "。", "．", "：", "」"};
  std::vector<HeadingMarker> markers = {
      {"^第", 1},
      {R"(^[0-9]+\.\s)", 1},
      {R"(^[IVX]+\.\s)", 1},
      {R"(^\([0-9]+\))", 2},
      {"^（", 2},
      {R"(^\([a-z]\))", 3},
  };
  std::vector<std::string> overview_patterns = {"case overview", "overview of the case", "summary of the case",
                                                "outline of the case", "事案の概要"};
};

// Pure function of (line, heuristics): short and without terminal punctuation.
bool is_heading_line(std::string_view line, const HeadingHeuristics& heuristics);
// Nesting level from the first matching marker; 1 when none matches.
int heading_level(std::string_view line, const HeadingHeuristics& heuristics);

std::string make_segment_id(std::string_view doc_id, const std::vector<int>& path, int ordinal);

// Markup text with tags removed and entities decoded; block boundaries
// become newlines.
std::string strip_markup(std::string_view markup);

JudgmentDoc parse_document(const RawDocument& raw, const HeadingHeuristics& heuristics = {});

// Depth-first pre-order over every segment, headings included.
std::vector<Segment> segments_in_reading_order(const JudgmentDoc& doc);
// Same order, headings excluded.
std::vector<Segment> body_segments(const JudgmentDoc& doc);
std::vector<const Section*> sections_in_reading_order(const JudgmentDoc& doc);
// Body text of a section (heading and children excluded), one paragraph per line.
std::string section_text(const Section& section);
const Segment* find_segment(const JudgmentDoc& doc, std::string_view segment_id);

// --- lkg-corpus/1 ----------------------------------------------------------

nlohmann::json document_to_json(const JudgmentDoc& doc);
JudgmentDoc document_from_json(const nlohmann::json& j);
nlohmann::json corpus_to_json(const std::vector<JudgmentDoc>& docs);
std::vector<JudgmentDoc> corpus_from_json(const nlohmann::json& j);
std::vector<JudgmentDoc> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<JudgmentDoc>& docs);

// Throws InvalidFormat when a gold annotation references a missing segment
// or node index.
void validate_gold(const JudgmentDoc& doc);

// --- synthetic corpus ------------------------------------------------------

struct SynthParams {
  int min_issues = 1;
  int max_issues = 3;
  int min_facts_per_issue = 1;
  int max_facts_per_issue = 4;
  int max_norms_per_issue = 2;
  int max_applications_per_issue = 2;
  int background_facts = 2;
  int statute_catalog_size = 12;
  double local_ordinance_rate = 0.35;
  double shared_segment_rate = 0.2;
  double alias_rate = 0.4;

  void validate() const;
};

// Fictional statute titles used by the generator.
std::vector<std::string> synth_statute_catalog(int size);

std::vector<JudgmentDoc> synth_corpus(std::uint64_t seed, int n_docs, const SynthParams& params = {});

}  // namespace lkg

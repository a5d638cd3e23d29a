#include "lkg/extraction.hpp"

#include <regex>
#include <set>

#include "lkg/error.hpp"
#include "lkg/normalize.hpp"
#include "lkg/prompts.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

std::string_view to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::NonVerbatimSpan: return "NonVerbatimSpan";
    case WarningKind::SurfaceCopy: return "SurfaceCopy";
    case WarningKind::DuplicateCandidate: return "DuplicateCandidate";
    case WarningKind::UnresolvedReference: return "UnresolvedReference";
    case WarningKind::SectionFailed: return "SectionFailed";
    case WarningKind::IndexOutOfRange: return "IndexOutOfRange";
    case WarningKind::LinkFailed: return "LinkFailed";
  }
  return "NonVerbatimSpan";
}

WarningKind warning_kind_from_string(std::string_view s) {
  for (auto k : {WarningKind::NonVerbatimSpan, WarningKind::SurfaceCopy, WarningKind::DuplicateCandidate,
                 WarningKind::UnresolvedReference, WarningKind::SectionFailed, WarningKind::IndexOutOfRange,
                 WarningKind::LinkFailed}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidFormat, "unknown warning kind '" + std::string(s) + "'");
}

std::string build_node_prompt(std::string_view overview, std::string_view section_text) {
  std::string ov = text::trim(overview).empty() ? "(none)" : std::string(text::trim(overview));
  return prompts::render("node_extraction", {{"OVERVIEW", ov}, {"SECTION", std::string(section_text)}});
}

namespace {

// Names that only occur in the one-shot example.
constexpr std::string_view kExampleMarkers[] = {"Zalk", "Noxis", "Saturn", "Martian"};

std::string strip_terminal(std::string_view s) {
  auto t = std::string(text::trim(s));
  for (std::string_view p : {".", "。", "．"}) {
    if (t.size() >= p.size() && t.compare(t.size() - p.size(), p.size(), p) == 0) {
      t.resize(t.size() - p.size());
      break;
    }
  }
  return std::string(text::trim(t));
}

bool contains_any(std::string_view s, std::initializer_list<std::string_view> needles) {
  for (auto n : needles) {
    if (s.find(n) != std::string_view::npos) return true;
  }
  return false;
}

bool looks_like_norm(const std::string& sentence) {
  static const std::regex re(R"(\b(aims? to|purpose of|refers to|shall mean|means|is defined as)\b)",
                             std::regex::icase);
  return std::regex_search(sentence, re) || contains_any(sentence, {"目的", "とは", "をいう"});
}

bool looks_like_application(const std::string& sentence) {
  static const std::regex re(
      R"(\b(therefore|accordingly|qualifies as|is unlawful|is lawful|is illegal|is invalid|violates|is liable|is not liable)\b)",
      std::regex::icase);
  return std::regex_search(sentence, re) || contains_any(sentence, {"したがって", "違法", "該当する"});
}

bool looks_declarative(const std::string& sentence) {
  if (sentence.find('?') != std::string::npos) return false;
  return text::tokens(sentence).size() >= 3 || !text::is_valid_utf8(sentence) ||
         text::codepoint_count(sentence) >= 6;
}

std::vector<const Segment*> own_segments(const Section& section) {
  std::vector<const Segment*> out;
  if (section.heading) out.push_back(&*section.heading);
  for (const auto& p : section.paragraphs) out.push_back(&p);
  return out;
}

}  // namespace

std::vector<NodeCandidate> mock_label_segment(const Segment& segment) {
  std::vector<NodeCandidate> out;
  if (segment.is_heading) return out;
  for (const auto& sentence : text::split_sentences(segment.text)) {
    auto refs = parse_provision_ref(sentence);
    if (!refs.empty()) {
      std::set<std::string> seen;
      for (const auto& r : refs) {
        auto surface = strip_terminal(r.surface);
        if (surface.empty() || !seen.insert(surface).second) continue;
        out.push_back({NodeLabel::Provision, surface, segment.segment_id, Provenance::Mock, std::nullopt});
      }
      continue;
    }
    auto body = strip_terminal(sentence);
    if (body.empty()) continue;
    NodeLabel label;
    if (looks_like_norm(body)) {
      label = NodeLabel::LegalNorm;
    } else if (looks_like_application(body)) {
      label = NodeLabel::LegalApplication;
    } else if (looks_declarative(body)) {
      label = NodeLabel::Fact;
    } else {
      continue;
    }
    out.push_back({label, body, segment.segment_id, Provenance::Mock, std::nullopt});
  }
  return out;
}

Validated validate_candidates(std::vector<NodeCandidate> candidates, std::string_view section_text) {
  Validated out;
  const auto source = text::normalize_whitespace(section_text);
  std::set<std::pair<NodeLabel, std::string>> seen;
  for (auto& c : candidates) {
    auto norm = text::normalize_whitespace(c.text);
    if (!seen.emplace(c.label, norm).second) {
      out.warnings.push_back({WarningKind::DuplicateCandidate, c.segment_id, c.text, "duplicate candidate dropped"});
      continue;
    }
    if (source.find(norm) == std::string::npos) {
      out.warnings.push_back(
          {WarningKind::NonVerbatimSpan, c.segment_id, c.text, "span is not a contiguous substring of the section"});
    }
    for (auto marker : kExampleMarkers) {
      if (text::contains_ci(c.text, marker) && !text::contains_ci(section_text, marker)) {
        out.warnings.push_back({WarningKind::SurfaceCopy, c.segment_id, c.text,
                                "span repeats the prompt example ('" + std::string(marker) + "')"});
        break;
      }
    }
    out.candidates.push_back(std::move(c));
  }
  return out;
}

std::vector<NodeCandidate> parse_extraction_reply(const json& reply, const Section& section, Provenance provenance) {
  static const std::pair<const char*, NodeLabel> kKeys[] = {{"facts", NodeLabel::Fact},
                                                            {"provisions", NodeLabel::Provision},
                                                            {"legal_norms", NodeLabel::LegalNorm},
                                                            {"legal_applications", NodeLabel::LegalApplication}};
  auto segments = own_segments(section);
  std::vector<std::string> normalized;
  for (const auto* s : segments) normalized.push_back(text::normalize_whitespace(s->text));

  std::vector<NodeCandidate> out;
  for (const auto& [key, label] : kKeys) {
    if (!reply.contains(key)) continue;
    for (const auto& item : reply.at(key)) {
      if (!item.is_string()) continue;
      auto span = strip_terminal(item.get<std::string>());
      if (span.empty()) continue;
      auto norm = text::normalize_whitespace(span);
      const Segment* best = nullptr;
      for (std::size_t i = 0; i < segments.size() && !best; ++i) {
        if (normalized[i].find(norm) != std::string::npos) best = segments[i];
      }
      if (!best) {
        double best_score = -1.0;
        for (const auto* s : segments) {
          if (s->is_heading && segments.size() > 1) continue;
          double score = text::token_overlap(span, s->text);
          if (score > best_score) {
            best_score = score;
            best = s;
          }
        }
      }
      if (!best) continue;
      out.push_back({label, span, best->segment_id, provenance, std::nullopt});
    }
  }
  return out;
}

ExtractionResult extract_nodes(const JudgmentDoc& doc, const Section& section, const ProviderConfig& config,
                               Provider* provider) {
  auto segments = own_segments(section);
  std::set<std::string_view> ids;
  for (const auto* s : segments) ids.insert(s->segment_id);
  const auto body = section_text(section);

  std::vector<NodeCandidate> raw;
  switch (config.mode) {
    case ProviderMode::Oracle: {
      if (!doc.gold) throw Error(ErrorCode::OracleMissing, "document '" + doc.doc_id + "' has no gold annotations");
      const auto& nodes = doc.gold->nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (ids.count(nodes[i].segment_id) == 0) continue;
        raw.push_back({nodes[i].label, nodes[i].text, nodes[i].segment_id, Provenance::Oracle, i});
      }
      // Gold sets are authoritative: no validation pass.
      return ExtractionResult{std::move(raw), {}};
    }
    case ProviderMode::Mock:
      for (const auto* s : segments) {
        auto c = mock_label_segment(*s);
        raw.insert(raw.end(), c.begin(), c.end());
      }
      break;
    case ProviderMode::Remote: {
      if (!provider) throw Error(ErrorCode::ProviderUnavailable, "remote mode without a provider");
      if (text::trim(body).empty()) return {};
      auto accept = [](const json& j) {
        if (!j.is_object()) return false;
        bool any = false;
        for (const char* k : {"facts", "provisions", "legal_norms", "legal_applications"}) {
          if (!j.contains(k)) continue;
          if (!j.at(k).is_array()) return false;
          any = true;
        }
        return any;
      };
      auto reply = complete_json(*provider, build_node_prompt(doc.case_overview, body), config.max_retries, accept);
      raw = parse_extraction_reply(reply, section, Provenance::Remote);
      break;
    }
  }
  auto v = validate_candidates(std::move(raw), body);
  return ExtractionResult{std::move(v.candidates), std::move(v.warnings)};
}

}  // namespace lkg

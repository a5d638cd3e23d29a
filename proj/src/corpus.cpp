#include "lkg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

// --- headings --------------------------------------------------------------

bool is_heading_line(std::string_view line, const HeadingHeuristics& heuristics) {
  auto t = text::trim(line);
  if (t.empty()) return false;
  if (text::codepoint_count(t) > heuristics.max_length) return false;
  for (const auto& p : heuristics.terminal_punctuation) {
    if (!p.empty() && t.ends_with(p)) return false;
  }
  return true;
}

int heading_level(std::string_view line, const HeadingHeuristics& heuristics) {
  std::string t(text::trim(line));
  for (const auto& m : heuristics.markers) {
    if (std::regex_search(t, std::regex(m.pattern))) return std::max(1, m.level);
  }
  return 1;
}

std::string make_segment_id(std::string_view doc_id, const std::vector<int>& path, int ordinal) {
  std::string s(doc_id);
  s += ':';
  if (path.empty()) {
    s += '0';
  } else {
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(path[i]);
    }
  }
  s += ':';
  s += std::to_string(ordinal);
  return s;
}

// --- markup ----------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>>& block_tags() {
  static const std::set<std::string, std::less<>> tags = {
      "p",  "div", "br",    "h1",    "h2", "h3", "h4",      "h5",       "h6",     "li",     "ul",
      "ol", "tr",  "table", "td",    "th", "dd", "dt",      "section",  "article", "header", "footer",
      "hr", "pre", "body",  "title", "blockquote", "center", "main", "nav"};
  return tags;
}

void append_codepoint(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at s[i] ('&'). Returns consumed length, 0 if
// the text is not a recognized entity.
std::size_t decode_entity(std::string_view s, std::size_t i, std::string& out) {
  auto semi = s.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) return 0;
  auto name = s.substr(i + 1, semi - i - 1);
  static const std::map<std::string, std::string, std::less<>> named = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}, {"ensp", " "}, {"emsp", " "}};
  if (auto it = named.find(name); it != named.end()) {
    out += it->second;
    return semi - i + 1;
  }
  if (name.size() >= 2 && name[0] == '#') {
    std::uint32_t cp = 0;
    bool hex = name[1] == 'x' || name[1] == 'X';
    auto digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      int v;
      if (c >= '0' && c <= '9') v = c - '0';
      else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
      else return 0;
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      if (cp > 0x10FFFF) return 0;
    }
    if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    append_codepoint(out, cp);
    return semi - i + 1;
  }
  return 0;
}

struct Line {
  std::string text;
  bool tagged_heading = false;
  int tag_level = 0;
};

// Splits markup into lines at block tags and newlines, tracking <hN> spans.
std::vector<Line> markup_lines(std::string_view s) {
  std::vector<Line> lines;
  Line cur;
  int heading_depth = 0;
  int heading_tag_level = 0;
  auto flush = [&] {
    cur.tagged_heading = heading_depth > 0;
    cur.tag_level = heading_tag_level;
    if (!text::trim(cur.text).empty()) lines.push_back(cur);
    cur = Line{};
  };
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '<') {
      if (s.substr(i, 4) == "<!--") {
        auto end = s.find("-->", i + 4);
        if (end == std::string_view::npos) throw Error(ErrorCode::MalformedMarkup, "unterminated comment");
        i = end + 3;
        continue;
      }
      auto close = s.find('>', i + 1);
      auto next_open = s.find('<', i + 1);
      if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
        // Recovery: a stray '<' is literal text.
        cur.text.push_back(c);
        ++i;
        continue;
      }
      auto inner = text::trim(s.substr(i + 1, close - i - 1));
      bool closing = !inner.empty() && inner[0] == '/';
      if (closing) inner.remove_prefix(1);
      std::size_t n = 0;
      while (n < inner.size() && (std::isalnum(static_cast<unsigned char>(inner[n])) != 0)) ++n;
      std::string name = text::to_lower_ascii(inner.substr(0, n));
      if (!closing && (name == "script" || name == "style")) {
        auto end = text::to_lower_ascii(s).find("</" + name, close + 1);
        if (end == std::string::npos) throw Error(ErrorCode::MalformedMarkup, "unterminated <" + name + "> element");
        auto end_close = s.find('>', end);
        if (end_close == std::string_view::npos) throw Error(ErrorCode::MalformedMarkup, "unterminated </" + name + ">");
        i = end_close + 1;
        continue;
      }
      bool heading_tag = name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
      if (block_tags().contains(name)) {
        flush();
        if (heading_tag) {
          if (closing) {
            heading_depth = std::max(0, heading_depth - 1);
          } else {
            ++heading_depth;
            heading_tag_level = name[1] - '0';
          }
        }
      } else {
        // Inline tags separate words.
        cur.text.push_back(' ');
      }
      i = close + 1;
      continue;
    }
    if (c == '&') {
      std::string decoded;
      if (auto used = decode_entity(s, i, decoded)) {
        cur.text += decoded;
        i += used;
        continue;
      }
    }
    if (c == '\n') {
      flush();
      ++i;
      continue;
    }
    cur.text.push_back(c);
    ++i;
  }
  flush();
  return lines;
}

bool matches_any(std::string_view heading, const std::vector<std::string>& patterns) {
  std::string h(heading);
  for (const auto& p : patterns) {
    if (std::regex_search(h, std::regex(p, std::regex::ECMAScript | std::regex::icase))) return true;
  }
  return false;
}

void collect_segments(const Section& s, std::vector<Segment>& out, bool with_headings) {
  if (with_headings && s.heading) out.push_back(*s.heading);
  out.insert(out.end(), s.paragraphs.begin(), s.paragraphs.end());
  for (const auto& c : s.children) collect_segments(c, out, with_headings);
}

void collect_sections(const Section& s, std::vector<const Section*>& out) {
  out.push_back(&s);
  for (const auto& c : s.children) collect_sections(c, out);
}

std::string section_body_text(const Section& s) {
  std::vector<std::string> parts;
  for (const auto& p : s.paragraphs) parts.push_back(p.text);
  for (const auto& c : s.children) {
    auto t = section_body_text(c);
    if (!t.empty()) parts.push_back(std::move(t));
  }
  return text::join(parts, "\n");
}

JudgmentDoc parse_markup(const RawDocument& raw, const HeadingHeuristics& heuristics) {
  auto lines = markup_lines(raw.bytes);
  if (lines.empty()) throw Error(ErrorCode::EmptyDocument, "document '" + raw.doc_id + "' has no extractable text");

  JudgmentDoc doc;
  doc.doc_id = raw.doc_id;
  // Stack of open sections; the root sits at level 0.
  std::vector<Section*> stack{&doc.root};
  for (const auto& line : lines) {
    std::string t = text::normalize_whitespace(line.text);
    bool heading = line.tagged_heading || is_heading_line(t, heuristics);
    if (heading) {
      int level = line.tagged_heading && heading_level(t, heuristics) == 1 ? line.tag_level : heading_level(t, heuristics);
      level = std::max(1, level);
      while (stack.size() > 1 && stack.back()->level >= level) stack.pop_back();
      Section* parent = stack.back();
      Section child;
      child.level = level;
      child.path = parent->path;
      child.path.push_back(static_cast<int>(parent->children.size()) + 1);
      child.heading = Segment{make_segment_id(doc.doc_id, child.path, 0), t, true, child.path, 0};
      parent->children.push_back(std::move(child));
      stack.push_back(&parent->children.back());
    } else {
      Section* s = stack.back();
      int ordinal = static_cast<int>(s->paragraphs.size()) + 1;
      s->paragraphs.push_back(Segment{make_segment_id(doc.doc_id, s->path, ordinal), t, false, s->path, ordinal});
    }
  }
  for (const Section* s : sections_in_reading_order(doc)) {
    if (s->heading && matches_any(s->heading->text, heuristics.overview_patterns)) {
      doc.case_overview = section_body_text(*s);
      break;
    }
  }
  return doc;
}

}  // namespace

std::string strip_markup(std::string_view markup) {
  std::vector<std::string> parts;
  for (auto& l : markup_lines(markup)) parts.push_back(std::move(l.text));
  return text::join(parts, "\n");
}

JudgmentDoc parse_document(const RawDocument& raw, const HeadingHeuristics& heuristics) {
  if (raw.doc_id.empty()) throw Error(ErrorCode::InvalidParams, "doc_id must be nonempty");
  if (!text::is_valid_utf8(raw.bytes)) throw Error(ErrorCode::MalformedMarkup, "document '" + raw.doc_id + "' is not valid UTF-8");
  if (text::trim(raw.bytes).empty()) throw Error(ErrorCode::EmptyDocument, "document '" + raw.doc_id + "' is empty");
  if (raw.source_kind == SourceKind::StructuredJson) {
    auto j = json::parse(raw.bytes, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::MalformedMarkup, "document '" + raw.doc_id + "' is not valid JSON");
    if (!j.contains("doc_id")) j["doc_id"] = raw.doc_id;
    auto doc = document_from_json(j);
    if (body_segments(doc).empty() && doc.case_overview.empty()) {
      throw Error(ErrorCode::EmptyDocument, "document '" + raw.doc_id + "' has no extractable text");
    }
    return doc;
  }
  return parse_markup(raw, heuristics);
}

std::vector<Segment> segments_in_reading_order(const JudgmentDoc& doc) {
  std::vector<Segment> out;
  collect_segments(doc.root, out, true);
  return out;
}

std::vector<Segment> body_segments(const JudgmentDoc& doc) {
  std::vector<Segment> out;
  collect_segments(doc.root, out, false);
  return out;
}

std::vector<const Section*> sections_in_reading_order(const JudgmentDoc& doc) {
  std::vector<const Section*> out;
  collect_sections(doc.root, out);
  return out;
}

std::string section_text(const Section& section) {
  std::vector<std::string> parts;
  for (const auto& p : section.paragraphs) parts.push_back(p.text);
  return text::join(parts, "\n");
}

const Segment* find_segment(const JudgmentDoc& doc, std::string_view segment_id) {
  const Segment* found = nullptr;
  auto visit = [&](auto&& self, const Section& s) -> void {
    if (found) return;
    if (s.heading && s.heading->segment_id == segment_id) found = &*s.heading;
    for (const auto& p : s.paragraphs) {
      if (p.segment_id == segment_id) {
        found = &p;
        return;
      }
    }
    for (const auto& c : s.children) self(self, c);
  };
  visit(visit, doc.root);
  return found;
}

// --- lkg-corpus/1 ----------------------------------------------------------

namespace {

void flatten_sections(const Section& s, json& out) {
  if (s.heading || !s.paragraphs.empty()) {
    if (!s.path.empty() || !s.paragraphs.empty()) {
      json sec;
      sec["heading"] = s.heading ? s.heading->text : "";
      json paras = json::array();
      for (const auto& p : s.paragraphs) paras.push_back(p.text);
      sec["paragraphs"] = std::move(paras);
      out.push_back(std::move(sec));
    }
  }
  for (const auto& c : s.children) flatten_sections(c, out);
}

}  // namespace

json document_to_json(const JudgmentDoc& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["case_overview"] = doc.case_overview;
  json sections = json::array();
  flatten_sections(doc.root, sections);
  j["sections"] = std::move(sections);
  if (doc.gold) {
    json nodes = json::array();
    for (const auto& n : doc.gold->nodes) {
      nodes.push_back({{"segment", n.segment_id}, {"label", std::string(to_string(n.label))}, {"text", n.text}});
    }
    json edges = json::array();
    for (const auto& e : doc.gold->edges) {
      edges.push_back({{"type", std::string(to_string(e.type))}, {"src", e.src}, {"dst", e.dst}});
    }
    j["gold"] = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  }
  return j;
}

JudgmentDoc document_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidFormat, "document must be an object");
  JudgmentDoc doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    if (doc.doc_id.empty()) throw Error(ErrorCode::InvalidFormat, "doc_id must be nonempty");
    doc.case_overview = j.value("case_overview", std::string{});
    int index = 0;
    for (const auto& sec : j.value("sections", json::array())) {
      std::string heading = text::normalize_whitespace(sec.value("heading", std::string{}));
      Section s;
      s.level = 1;
      if (heading.empty() && index == 0 && doc.root.children.empty()) {
        // A leading heading-less section holds preamble text at the root.
        for (const auto& p : sec.value("paragraphs", json::array())) {
          auto t = text::normalize_whitespace(p.get<std::string>());
          if (t.empty()) continue;
          int ord = static_cast<int>(doc.root.paragraphs.size()) + 1;
          doc.root.paragraphs.push_back(Segment{make_segment_id(doc.doc_id, {}, ord), t, false, {}, ord});
        }
        ++index;
        continue;
      }
      ++index;
      s.path = {static_cast<int>(doc.root.children.size()) + 1};
      if (!heading.empty()) s.heading = Segment{make_segment_id(doc.doc_id, s.path, 0), heading, true, s.path, 0};
      for (const auto& p : sec.value("paragraphs", json::array())) {
        auto t = text::normalize_whitespace(p.get<std::string>());
        if (t.empty()) continue;
        int ord = static_cast<int>(s.paragraphs.size()) + 1;
        s.paragraphs.push_back(Segment{make_segment_id(doc.doc_id, s.path, ord), t, false, s.path, ord});
      }
      doc.root.children.push_back(std::move(s));
    }
    if (j.contains("gold") && !j["gold"].is_null()) {
      GoldAnnotations gold;
      for (const auto& n : j["gold"].value("nodes", json::array())) {
        auto label = node_label_from_string(n.at("label").get<std::string>());
        if (!label) throw Error(ErrorCode::InvalidFormat, "unknown gold label '" + n.at("label").get<std::string>() + "'");
        gold.nodes.push_back(GoldNode{n.at("segment").get<std::string>(), *label, n.at("text").get<std::string>(), {}});
      }
      for (const auto& e : j["gold"].value("edges", json::array())) {
        auto type = edge_type_from_string(e.at("type").get<std::string>());
        if (!type) throw Error(ErrorCode::InvalidFormat, "unknown gold edge type '" + e.at("type").get<std::string>() + "'");
        gold.edges.push_back(GoldEdge{*type, e.at("src").get<std::size_t>(), e.at("dst").get<std::size_t>()});
      }
      doc.gold = std::move(gold);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidFormat, std::string("corpus document: ") + ex.what());
  }
  validate_gold(doc);
  return doc;
}

void validate_gold(const JudgmentDoc& doc) {
  if (!doc.gold) return;
  for (const auto& n : doc.gold->nodes) {
    if (!find_segment(doc, n.segment_id)) {
      throw Error(ErrorCode::InvalidFormat, "gold node references unknown segment '" + n.segment_id + "'");
    }
    if (text::trim(n.text).empty()) throw Error(ErrorCode::InvalidFormat, "gold node with empty text");
  }
  for (const auto& e : doc.gold->edges) {
    if (e.src >= doc.gold->nodes.size() || e.dst >= doc.gold->nodes.size()) {
      throw Error(ErrorCode::InvalidFormat, "gold edge references a missing node index");
    }
    auto sig = signature(e.type);
    if (doc.gold->nodes[e.src].label != sig.src || doc.gold->nodes[e.dst].label != sig.dst) {
      throw Error(ErrorCode::InvalidFormat, "gold edge endpoints do not match " + std::string(to_string(e.type)));
    }
  }
}

json corpus_to_json(const std::vector<JudgmentDoc>& docs) {
  json arr = json::array();
  for (const auto& d : docs) arr.push_back(document_to_json(d));
  return {{"version", std::string(kCorpusFormat)}, {"documents", std::move(arr)}};
}

std::vector<JudgmentDoc> corpus_from_json(const json& j) {
  if (!j.is_object() || j.value("version", std::string{}) != kCorpusFormat) {
    throw Error(ErrorCode::InvalidFormat, "expected a corpus with version \"" + std::string(kCorpusFormat) + "\"");
  }
  std::vector<JudgmentDoc> docs;
  std::set<std::string> ids;
  for (const auto& d : j.value("documents", json::array())) {
    auto doc = document_from_json(d);
    if (!ids.insert(doc.doc_id).second) throw Error(ErrorCode::InvalidFormat, "duplicate doc_id '" + doc.doc_id + "'");
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<JudgmentDoc> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus '" + path + "'");
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidFormat, "corpus '" + path + "' is not valid JSON");
  return corpus_from_json(j);
}

void save_corpus(const std::string& path, const std::vector<JudgmentDoc>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write corpus '" + path + "'");
  out << corpus_to_json(docs).dump(1) << '\n';
}

// --- synthetic corpus ------------------------------------------------------

void SynthParams::validate() const {
  if (min_issues < 1 || max_issues < min_issues) throw Error(ErrorCode::InvalidParams, "issue bounds must satisfy 1 <= min <= max");
  if (min_facts_per_issue < 1 || max_facts_per_issue < min_facts_per_issue) {
    throw Error(ErrorCode::InvalidParams, "fact bounds must satisfy 1 <= min <= max");
  }
  if (max_norms_per_issue < 1 || max_applications_per_issue < 1) {
    throw Error(ErrorCode::InvalidParams, "norm and application counts must be positive");
  }
  if (background_facts < 0) throw Error(ErrorCode::InvalidParams, "background_facts must be >= 0");
  if (statute_catalog_size < 1) throw Error(ErrorCode::InvalidParams, "statute_catalog_size must be positive");
  for (double r : {local_ordinance_rate, shared_segment_rate, alias_rate}) {
    if (r < 0.0 || r > 1.0) throw Error(ErrorCode::InvalidParams, "rates must lie in [0, 1]");
  }
}

namespace {

struct Topic {
  std::string core;
  std::string term;
  std::vector<std::string> objects;
  std::vector<std::string> actions;
  std::string purpose;
  std::string definition;
  std::string decision;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {"Coexistence with Martians", "Martian",
       {"a residence permit for Mars", "a registration of non-human lifeforms", "the Martian community registry"},
       {"applied for", "submitted", "renewed"},
       "promote harmony between humans and extraterrestrial life in light of frequent clashes",
       "any non-human lifeform related to Mars", "refusal of registration"},
      {"Lunar Mining", "lunar operator",
       {"a regolith extraction permit", "the crater excavation site", "lunar mining royalties"},
       {"operated", "applied for", "paid"}, "secure the orderly extraction of lunar resources",
       "a person engaged in extracting minerals on the Moon", "revocation of the mining permit"},
      {"Orbital Traffic Safety", "orbital carrier",
       {"a cargo shuttle in low orbit", "the docking schedule of the station", "an orbital transit license"},
       {"navigated", "filed", "held"}, "prevent collisions in crowded orbits",
       "any operator of a vessel travelling between stations", "suspension of the transit license"},
      {"Asteroid Salvage", "salvager",
       {"a derelict ore hauler", "the salvage claim on belt debris", "a towing contract for asteroid fragments"},
       {"recovered", "registered", "signed"}, "allocate abandoned property in the asteroid belt fairly",
       "a person who recovers abandoned craft or cargo in space", "rejection of the salvage claim"},
      {"Venusian Atmosphere Protection", "emission source",
       {"a sulfur scrubber plant", "the cloud-layer exhaust vents", "an emission monitoring report"},
       {"installed", "operated", "submitted"}, "preserve the upper atmosphere of Venus for settlement",
       "any facility that releases gases into the cloud layer", "order to halt emissions"},
      {"Interplanetary Immigration Control", "settler",
       {"a colonist visa", "the arrival record at the spaceport", "a residence card for Europa"},
       {"applied for", "obtained", "presented"}, "regulate the entry of persons into the colonies",
       "a person who intends to reside in a colony for more than one year", "denial of the colonist visa"},
      {"Dome Habitat Construction", "habitat builder",
       {"a pressurized dome extension", "the building permit for a habitat module", "airlock installation work"},
       {"commissioned", "applied for", "carried out"}, "ensure the structural safety of sealed habitats",
       "a person who erects or alters a pressurized structure", "refusal of the building permit"},
      {"Martian Water Rights", "ice extractor",
       {"a polar ice drilling well", "the water allocation for the crater farm", "a groundwater usage permit"},
       {"drilled", "requested", "used"}, "distribute scarce water among settlements equitably",
       "a person who draws water from polar ice or aquifers", "reduction of the water allocation"},
      {"Robot Labor Standards", "robotic worker",
       {"a maintenance android contract", "overtime records of the assembly robots", "the labor registration of service drones"},
       {"concluded", "kept", "filed"}, "protect the working conditions of autonomous machines",
       "an autonomous machine performing work under the direction of another", "fine for labor violations"},
      {"Terraforming Environmental Assessment", "terraforming project",
       {"an atmospheric seeding plan", "the environmental impact statement for Tharsis", "a greenhouse gas release schedule"},
       {"prepared", "published", "revised"}, "require prior assessment of large planetary alterations",
       "any undertaking that alters the climate of a planet", "approval of the seeding plan"},
      {"Spaceport Noise Regulation", "spaceport operator",
       {"night launches from the spaceport", "the noise measurements near the launch pad", "a launch window extension"},
       {"scheduled", "recorded", "requested"}, "protect residents from excessive launch noise",
       "a person who manages a launch facility", "permission for night launches"},
      {"Alien Artifact Preservation", "cultural artifact",
       {"an excavated alien relic", "the artifact registry of the museum", "an export permit for ancient crystals"},
       {"excavated", "catalogued", "applied for"}, "preserve remains of extinct civilizations",
       "an object of historical value created by non-human beings", "refusal of the export permit"},
      {"Colony Tax", "taxable colonist",
       {"the colony income tax return", "an oxygen consumption levy", "a property assessment of the dome"},
       {"filed", "paid", "contested"}, "fund the common life-support systems of colonies",
       "a resident who earns income inside a colony", "additional tax assessment"},
      {"Space Debris Liability", "debris owner",
       {"a decommissioned satellite", "the debris removal order", "an insurance claim for collision damage"},
       {"abandoned", "received", "submitted"}, "allocate responsibility for fragments left in orbit",
       "the last registered operator of an object in orbit", "debris removal order"},
  };
  return t;
}

const std::vector<std::string>& places() {
  static const std::vector<std::string> p = {"Olympus Ward",   "Tharsis City",   "Hellas Basin",  "Valles Town",
                                             "Elysium District", "Gale Crater",  "Arcadia Plain", "Utopia Settlement",
                                             "Noctis Village", "Syrtis Harbor"};
  return p;
}

const std::vector<std::string>& months() {
  static const std::vector<std::string> m = {"January", "February", "March",     "April",   "May",      "June",
                                             "July",    "August",   "September", "October", "November", "December"};
  return m;
}

const std::vector<std::string>& syllables() {
  static const std::vector<std::string> s = {"za", "lk", "no", "xi", "ve", "ra", "qu", "tor", "mi", "la",
                                             "ko", "dre", "sa", "vin", "el", "ul", "ka", "ren", "thu", "ob"};
  return s;
}

std::string title_for(int index) {
  const auto& t = topics();
  const auto& topic = t[static_cast<std::size_t>(index) % t.size()];
  int form = index / static_cast<int>(t.size());
  if (index == 0) return "Law on Coexistence with Martians";
  switch (form % 3) {
    case 0: return topic.core + " Act";
    case 1: return "Law on " + topic.core;
    default: return "Enforcement Ordinance of the " + topic.core + " Act";
  }
}

// Portable sampling on top of mt19937_64 (std distributions are
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  std::size_t below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(next() % n); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 eng_;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string make_name(Rng& rng, int syllable_count) {
  std::string s;
  for (int i = 0; i < syllable_count; ++i) s += rng.pick(syllables());
  return capitalize(s);
}

std::string alias_keyword(const std::string& title) {
  for (std::string_view k : {"Ordinance", "Act", "Law", "Code", "Regulation"}) {
    auto pos = title.find(k);
    if (pos != std::string::npos) return "the " + std::string(k);
  }
  return "the Act";
}

struct IssuePlan {
  std::string title;
  const Topic* topic = nullptr;
  bool ordinance = false;
  bool aliased = false;
  std::vector<ProvisionId> provisions;
};

class DocBuilder {
 public:
  DocBuilder(std::string doc_id) { doc_.doc_id = std::move(doc_id); doc_.gold = GoldAnnotations{}; }

  void begin_section(const std::string& heading) {
    Section s;
    s.level = 1;
    s.path = {static_cast<int>(doc_.root.children.size()) + 1};
    s.heading = Segment{make_segment_id(doc_.doc_id, s.path, 0), heading, true, s.path, 0};
    doc_.root.children.push_back(std::move(s));
  }

  // Adds a paragraph made of `sentences`; returns its segment id.
  std::string add_paragraph(const std::vector<std::string>& sentences) {
    auto& s = doc_.root.children.back();
    int ord = static_cast<int>(s.paragraphs.size()) + 1;
    auto id = make_segment_id(doc_.doc_id, s.path, ord);
    s.paragraphs.push_back(Segment{id, text::join(sentences, " "), false, s.path, ord});
    return id;
  }

  std::size_t add_node(const std::string& segment, NodeLabel label, std::string text,
                       std::optional<ProvisionId> canonical = std::nullopt) {
    doc_.gold->nodes.push_back(GoldNode{segment, label, std::move(text), std::move(canonical)});
    return doc_.gold->nodes.size() - 1;
  }

  void add_edge(EdgeType type, std::size_t src, std::size_t dst) { doc_.gold->edges.push_back(GoldEdge{type, src, dst}); }

  JudgmentDoc& doc() { return doc_; }

 private:
  JudgmentDoc doc_;
};

std::string strip_period(const std::string& s) { return s.ends_with(".") ? s.substr(0, s.size() - 1) : s; }

}  // namespace

std::vector<std::string> synth_statute_catalog(int size) {
  std::vector<std::string> out;
  for (int i = 0; i < size; ++i) out.push_back(title_for(i));
  return out;
}

std::vector<JudgmentDoc> synth_corpus(std::uint64_t seed, int n_docs, const SynthParams& params) {
  if (n_docs < 1) throw Error(ErrorCode::InvalidParams, "n_docs must be >= 1");
  params.validate();
  Rng rng(seed);
  const auto catalog = synth_statute_catalog(params.statute_catalog_size);
  std::set<std::string> used_towns;
  std::vector<JudgmentDoc> docs;

  for (int d = 0; d < n_docs; ++d) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "case-%04d", d + 1);
    DocBuilder b(idbuf);
    const std::string person = make_name(rng, 2) + " " + make_name(rng, 2);
    const std::string place = rng.pick(places());
    const int year = 2090 + static_cast<int>(rng.below(40));

    // Plan the issues first so the overview can define an alias.
    int n_issues = rng.between(params.min_issues, params.max_issues);
    std::vector<IssuePlan> issues;
    for (int i = 0; i < n_issues; ++i) {
      IssuePlan plan;
      if (rng.chance(params.local_ordinance_rate)) {
        std::string town;
        do {
          town = make_name(rng, 3) + " Town";
        } while (!used_towns.insert(town).second);
        plan.topic = &rng.pick(topics());
        plan.title = "Ordinance of " + town + " on " + plan.topic->core;
        plan.ordinance = true;
      } else {
        std::size_t ci = rng.below(catalog.size());
        plan.title = catalog[ci];
        plan.topic = &topics()[ci % topics().size()];
      }
      int n_prov = plan.ordinance ? 1 : rng.between(1, 2);
      int base_article = rng.between(1, 40);
      for (int k = 0; k < n_prov; ++k) {
        ProvisionId id{plan.title, base_article + k, std::nullopt, std::nullopt};
        if (rng.chance(0.25)) id.paragraph = rng.between(1, 4);
        plan.provisions.push_back(id);
      }
      issues.push_back(std::move(plan));
    }
    std::set<std::string> distinct_titles;
    for (const auto& p : issues) distinct_titles.insert(p.title);
    const bool single_title = distinct_titles.size() == 1;
    const IssuePlan& primary = issues.front();
    const bool define_alias = rng.chance(params.alias_rate);
    const std::string alias = alias_keyword(primary.title);

    std::string overview = "The plaintiff, " + person + ", a resident of " + place + ", challenges the " +
                           primary.topic->decision + " issued by the administrative authority pursuant to Article " +
                           std::to_string(primary.provisions.front().article) + " of the " + primary.title;
    overview += define_alias ? " (hereinafter \"" + alias + "\")." : ".";
    overview += " The central question is whether the decision complied with the applicable law.";
    b.doc().case_overview = overview;

    int section_no = 1;
    b.begin_section(std::to_string(section_no++) + ". Background");
    for (int k = 0; k < params.background_facts; ++k) {
      std::string sentence = k % 2 == 0 ? person + " has lived in " + place + " since " + std::to_string(year - 10 - k) + "."
                                        : person + " works as an engineer at a settlement cooperative in " + place + ".";
      auto seg = b.add_paragraph({sentence});
      b.add_node(seg, NodeLabel::Fact, strip_period(sentence));
    }

    for (const auto& issue : issues) {
      const Topic& topic = *issue.topic;
      const bool aliased_refs = define_alias && issue.title == primary.title && !issue.ordinance;

      // Applicable law: provisions, then norms, in one section.
      b.begin_section(std::to_string(section_no++) + ". Applicable Law");
      std::vector<std::size_t> prov_nodes;
      for (const auto& id : issue.provisions) {
        std::string article = "Article " + std::to_string(id.article);
        if (id.paragraph) article += ", Paragraph " + std::to_string(*id.paragraph);
        std::string surface;
        auto form = rng.below(4);
        if (aliased_refs && form == 0) {
          surface = article + " of " + alias;
        } else if (single_title && !define_alias && form == 1 && !issue.ordinance) {
          surface = article;
        } else if (form == 2 && !id.paragraph) {
          surface = issue.title + ", " + article;
        } else {
          surface = article + " of the " + issue.title;
        }
        auto seg = b.add_paragraph({surface + "."});
        prov_nodes.push_back(b.add_node(seg, NodeLabel::Provision, surface, id));
      }
      int n_norms = rng.between(1, params.max_norms_per_issue);
      std::vector<std::size_t> norm_nodes;
      for (int k = 0; k < n_norms; ++k) {
        std::string sentence = k % 2 == 0 ? "The " + issue.title + " aims to " + topic.purpose + "."
                                          : "A " + topic.term + " under the " + issue.title + " refers to " + topic.definition + ".";
        auto seg = b.add_paragraph({sentence});
        norm_nodes.push_back(b.add_node(seg, NodeLabel::LegalNorm, strip_period(sentence)));
      }
      for (std::size_t k = 0; k < prov_nodes.size(); ++k) {
        if (prov_nodes.size() == 1) {
          for (auto n : norm_nodes) b.add_edge(EdgeType::DerivesNorm, prov_nodes[k], n);
        } else {
          b.add_edge(EdgeType::DerivesNorm, prov_nodes[k], norm_nodes[std::min(k, norm_nodes.size() - 1)]);
        }
      }

      // Findings of fact.
      b.begin_section(std::to_string(section_no++) + ". Findings of Fact");
      int n_facts = issue.ordinance ? 1 : rng.between(params.min_facts_per_issue, params.max_facts_per_issue);
      int n_apps = issue.ordinance ? 1 : rng.between(1, params.max_applications_per_issue);
      std::vector<std::size_t> fact_nodes;
      std::vector<std::string> fact_segments;
      for (int k = 0; k < n_facts; ++k) {
        const auto& object = topic.objects[static_cast<std::size_t>(k) % topic.objects.size()];
        const auto& action = topic.actions[rng.below(topic.actions.size())];
        std::string sentence = person + " " + action + " " + object + " in " + place + " on " + rng.pick(months()) + " " +
                               std::to_string(rng.between(1, 28)) + ", " + std::to_string(year + k) + ".";
        if (k >= static_cast<int>(topic.objects.size())) {
          sentence = "On " + rng.pick(months()) + " " + std::to_string(rng.between(1, 28)) + ", " +
                     std::to_string(year + k) + ", the authority inspected " + object + " held by " + person + ".";
        }
        auto seg = b.add_paragraph({sentence});
        fact_segments.push_back(seg);
        fact_nodes.push_back(b.add_node(seg, NodeLabel::Fact, strip_period(sentence)));
      }

      // Assessment: applications, optionally sharing the last fact's segment.
      const std::string& app_object = topic.objects[rng.below(topic.objects.size())];
      std::vector<std::string> app_sentences = {
          "Therefore, " + person + " qualifies as a " + topic.term + " with respect to " + app_object + ".",
          "Accordingly, the " + topic.decision + " concerning " + app_object + " is unlawful.",
      };
      if (rng.chance(0.5)) std::swap(app_sentences[0], app_sentences[1]);
      std::vector<std::size_t> app_nodes;
      bool shared = rng.chance(params.shared_segment_rate);
      bool section_open = false;
      for (int k = 0; k < n_apps; ++k) {
        const std::string& sentence = app_sentences[static_cast<std::size_t>(k) % app_sentences.size()];
        if (k == 0 && shared) {
          // Rewrite the last fact paragraph to also host the application.
          auto& sec = b.doc().root.children.back();
          auto& para = sec.paragraphs.back();
          para.text += " " + sentence;
          app_nodes.push_back(b.add_node(para.segment_id, NodeLabel::LegalApplication, strip_period(sentence)));
          continue;
        }
        if (!section_open) {
          b.begin_section(std::to_string(section_no++) + ". Assessment");
          section_open = true;
        }
        auto seg = b.add_paragraph({sentence});
        app_nodes.push_back(b.add_node(seg, NodeLabel::LegalApplication, strip_period(sentence)));
      }
      for (std::size_t a = 0; a < app_nodes.size(); ++a) {
        for (auto n : norm_nodes) b.add_edge(EdgeType::AppliesNorm, n, app_nodes[a]);
        if (a == 0) {
          for (auto f : fact_nodes) b.add_edge(EdgeType::ToFact, f, app_nodes[a]);
        } else {
          b.add_edge(EdgeType::ToFact, fact_nodes.back(), app_nodes[a]);
        }
      }
    }
    validate_gold(b.doc());
    docs.push_back(std::move(b.doc()));
  }
  return docs;
}

}  // namespace lkg

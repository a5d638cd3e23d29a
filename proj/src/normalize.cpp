#include "lkg/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/prompts.hpp"
#include "lkg/provider.hpp"
#include "lkg/text.hpp"

namespace lkg {

bool ProvisionId::valid() const {
  if (law_title.empty() || law_title.find('/') != std::string::npos) return false;
  if (text::trim(law_title) != law_title) return false;
  if (article <= 0) return false;
  if (paragraph && *paragraph <= 0) return false;
  if (item && *item <= 0) return false;
  return true;
}

std::string canonical_string(const ProvisionId& id) {
  std::string s = id.law_title + "/Art." + std::to_string(id.article);
  if (id.paragraph) s += "/Para." + std::to_string(*id.paragraph);
  if (id.item) s += "/Item." + std::to_string(*id.item);
  return s;
}

namespace {

std::optional<int> to_positive_int(std::string_view digits) {
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  if (v <= 0) return std::nullopt;
  return v;
}

}  // namespace

std::optional<ProvisionId> parse_canonical(std::string_view s) {
  static const std::regex re(R"(^([^/]+)/Art\.(\d+)(?:/Para\.(\d+))?(?:/Item\.(\d+))?$)");
  std::string str(text::trim(s));
  std::smatch m;
  if (!std::regex_match(str, m, re)) return std::nullopt;
  ProvisionId id;
  id.law_title = m[1].str();
  auto art = to_positive_int(m[2].str());
  if (!art) return std::nullopt;
  id.article = *art;
  if (m[3].matched) {
    id.paragraph = to_positive_int(m[3].str());
    if (!id.paragraph) return std::nullopt;
  }
  if (m[4].matched) {
    id.item = to_positive_int(m[4].str());
    if (!id.item) return std::nullopt;
  }
  if (!id.valid()) return std::nullopt;
  return id;
}

namespace {

// --- English grammar -------------------------------------------------------

enum class TokKind { Word, Number, Punct };

struct Tok {
  TokKind kind;
  std::string text;
  std::size_t begin;
  std::size_t end;
};

std::vector<Tok> lex(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isdigit(c)) {
      std::size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({TokKind::Number, std::string(s.substr(b, i - b)), b, i});
    } else if (std::isalpha(c) || c >= 0x80) {
      std::size_t b = i;
      while (i < s.size()) {
        auto d = static_cast<unsigned char>(s[i]);
        bool word = std::isalnum(d) || d >= 0x80 || d == '-' || d == '\'';
        if (!word) break;
        ++i;
      }
      out.push_back({TokKind::Word, std::string(s.substr(b, i - b)), b, i});
    } else {
      out.push_back({TokKind::Punct, std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
    }
  }
  return out;
}

const std::set<std::string, std::less<>>& title_keywords() {
  static const std::set<std::string, std::less<>> k = {
      "Act",   "Law",     "Code",      "Ordinance", "Regulation", "Regulations", "Constitution", "Rules",
      "Order", "Decree",  "Treaty",    "Statute",   "Convention", "Agreement",   "Contract",     "Charter"};
  return k;
}

const std::set<std::string, std::less<>>& connectors() {
  static const std::set<std::string, std::less<>> c = {"on",   "of",         "for",       "and",      "with",
                                                       "the",  "in",         "to",        "concerning", "regarding",
                                                       "relating", "against", "between", "by"};
  return c;
}

bool is_reference_word(std::string_view w) {
  return w == "Article" || w == "Articles" || w == "Paragraph" || w == "Paragraphs" || w == "Item" || w == "Items";
}

bool is_capitalized(const Tok& t) {
  if (t.kind != TokKind::Word) return false;
  auto c = static_cast<unsigned char>(t.text[0]);
  return std::isupper(c) || c >= 0x80;
}

bool is_title_token(const Tok& t) {
  if (t.kind != TokKind::Word || is_reference_word(t.text)) return false;
  return is_capitalized(t) || connectors().contains(t.text);
}

struct TitleMatch {
  std::optional<std::string> title;  // full title
  std::string alias;                  // set when the phrase is an alias
  std::size_t first_tok = 0;
  std::size_t last_tok = 0;  // inclusive
};

bool has_keyword(const std::vector<Tok>& toks, std::size_t b, std::size_t e) {
  for (std::size_t i = b; i <= e; ++i) {
    if (title_keywords().contains(toks[i].text)) return true;
  }
  return false;
}

std::string span_text(std::string_view s, const std::vector<Tok>& toks, std::size_t b, std::size_t e) {
  return text::normalize_whitespace(s.substr(toks[b].begin, toks[e].end - toks[b].begin));
}

// Title starting at token t (after "of").
std::optional<TitleMatch> title_forward(std::string_view s, const std::vector<Tok>& toks, std::size_t t) {
  if (t >= toks.size()) return std::nullopt;
  std::size_t start = t;
  bool determiner = false;
  if (toks[t].kind == TokKind::Word &&
      (toks[t].text == "the" || toks[t].text == "The" || toks[t].text == "this" || toks[t].text == "This" ||
       toks[t].text == "that" || toks[t].text == "said" || toks[t].text == "same")) {
    determiner = true;
    ++t;
    // "the same Act"
    if (t < toks.size() && toks[t].text == "same") ++t;
  }
  if (t >= toks.size() || !is_capitalized(toks[t])) return std::nullopt;
  std::size_t e = t;
  while (e + 1 < toks.size() && is_title_token(toks[e + 1]) &&
         s.substr(toks[e].end, toks[e + 1].begin - toks[e].end).find('\n') == std::string_view::npos) {
    ++e;
  }
  while (e > t && connectors().contains(toks[e].text)) --e;
  if (!has_keyword(toks, t, e)) return std::nullopt;
  TitleMatch m;
  m.first_tok = start;
  m.last_tok = e;
  if (determiner && e == t) {
    // "the Act", "this Law", "the same Act"
    m.alias = span_text(s, toks, start, e);
    m.alias[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(m.alias[0])));
  } else {
    m.title = span_text(s, toks, t, e);
  }
  return m;
}

// Title ending at token e (before ", Article").
std::optional<TitleMatch> title_backward(std::string_view s, const std::vector<Tok>& toks, std::size_t e) {
  if (!is_capitalized(toks[e]) || is_reference_word(toks[e].text)) return std::nullopt;
  auto same_line = [&](std::size_t a, std::size_t b2) {
    return s.substr(toks[a].end, toks[b2].begin - toks[a].end).find('\n') == std::string_view::npos;
  };
  std::size_t b = e;
  while (b > 0 && is_title_token(toks[b - 1]) && same_line(b - 1, b)) --b;
  while (b < e && connectors().contains(toks[b].text)) ++b;
  if (!has_keyword(toks, b, e)) return std::nullopt;
  // Keyword-first titles ("Act on ..."): start at the first keyword followed
  // by a connector, pulling in directly preceding capitalized words.
  std::size_t start = b;
  bool keyword_first = false;
  for (std::size_t i = b; i < e; ++i) {
    if (title_keywords().contains(toks[i].text) && connectors().contains(toks[i + 1].text)) {
      start = i;
      while (start > b && is_capitalized(toks[start - 1])) --start;
      keyword_first = true;
      break;
    }
  }
  if (!keyword_first) {
    // Keyword-last: the trailing run of capitalized words.
    start = e;
    while (start > b && is_capitalized(toks[start - 1])) --start;
  }
  if (!has_keyword(toks, start, e)) return std::nullopt;
  TitleMatch m;
  m.first_tok = start;
  m.last_tok = e;
  if (start == e && start > 0 && (toks[start - 1].text == "the" || toks[start - 1].text == "The" ||
                                  toks[start - 1].text == "this" || toks[start - 1].text == "This")) {
    m.first_tok = start - 1;
    m.alias = "the " + toks[e].text;
    if (toks[start - 1].text == "this" || toks[start - 1].text == "This") m.alias = "this " + toks[e].text;
    return m;
  }
  m.title = span_text(s, toks, start, e);
  return m;
}

bool tok_is(const std::vector<Tok>& toks, std::size_t i, std::string_view text) {
  return i < toks.size() && toks[i].text == text;
}

// Parses "N [, M] [and K]" at i. Returns the numbers and advances i.
std::vector<int> number_list(const std::vector<Tok>& toks, std::size_t& i) {
  std::vector<int> nums;
  if (i >= toks.size() || toks[i].kind != TokKind::Number) return nums;
  auto first = to_positive_int(toks[i].text);
  if (!first) return nums;
  nums.push_back(*first);
  ++i;
  while (i < toks.size()) {
    std::size_t j = i;
    if (tok_is(toks, j, ",")) ++j;
    if (tok_is(toks, j, "and") || tok_is(toks, j, "or")) ++j;
    if (j == i || j >= toks.size() || toks[j].kind != TokKind::Number) break;
    auto v = to_positive_int(toks[j].text);
    if (!v) break;
    nums.push_back(*v);
    i = j + 1;
  }
  return nums;
}

// "[,] Paragraph P" / "[,] Item I" at i.
std::optional<int> labelled_number(const std::vector<Tok>& toks, std::size_t& i, std::string_view label) {
  std::size_t j = i;
  if (tok_is(toks, j, ",")) ++j;
  if (!tok_is(toks, j, label)) return std::nullopt;
  ++j;
  if (j >= toks.size() || toks[j].kind != TokKind::Number) return std::nullopt;
  auto v = to_positive_int(toks[j].text);
  if (v) i = j + 1;
  return v;
}

std::vector<PartialProvision> english_rule(std::string_view s) {
  std::vector<PartialProvision> out;
  auto toks = lex(s);
  std::size_t i = 0;
  while (i < toks.size()) {
    std::optional<int> pre_para;
    std::optional<int> pre_item;
    std::size_t first = i;
    std::size_t a = i;
    // "Paragraph P [, Item I] of Article N ..."
    if (tok_is(toks, a, "Paragraph")) {
      std::size_t j = a;
      auto p = labelled_number(toks, j, "Paragraph");
      if (p) {
        auto it = labelled_number(toks, j, "Item");
        if (tok_is(toks, j, "of") && (tok_is(toks, j + 1, "Article"))) {
          pre_para = p;
          pre_item = it;
          a = j + 1;
        }
      }
    }
    if (!(tok_is(toks, a, "Article") || tok_is(toks, a, "Articles"))) {
      ++i;
      continue;
    }
    std::size_t j = a + 1;
    auto nums = number_list(toks, j);
    if (nums.empty()) {
      i = a + 1;
      continue;
    }
    auto para = pre_para ? pre_para : labelled_number(toks, j, "Paragraph");
    auto item = pre_item ? pre_item : labelled_number(toks, j, "Item");
    std::size_t last = j - 1;

    std::optional<TitleMatch> title;
    if (tok_is(toks, j, "of")) {
      title = title_forward(s, toks, j + 1);
      if (title) last = title->last_tok;
    }
    if (!title && first > 0) {
      // "<Title>, Article N" or "<Title> Article N"
      std::size_t e = first - 1;
      if (toks[e].text == "," && e > 0) --e;
      bool same_line = s.substr(toks[e].end, toks[first].begin - toks[e].end).find('\n') == std::string_view::npos;
      if (same_line) title = title_backward(s, toks, e);
      if (title) first = title->first_tok;
    }
    for (int n : nums) {
      PartialProvision p;
      p.article = n;
      p.paragraph = para;
      p.item = item;
      if (title) {
        p.law_title = title->title;
        p.alias = title->alias;
      }
      p.surface = std::string(s.substr(toks[first].begin, toks[last].end - toks[first].begin));
      p.offset = toks[first].begin;
      out.push_back(std::move(p));
    }
    i = last + 1;
  }
  return out;
}

// --- Japanese grammar ------------------------------------------------------

std::optional<int> kanji_number(std::string_view s) {
  static const std::vector<std::pair<std::string_view, int>> digits = {
      {"〇", 0}, {"一", 1}, {"二", 2}, {"三", 3}, {"四", 4}, {"五", 5}, {"六", 6}, {"七", 7}, {"八", 8}, {"九", 9}};
  static const std::vector<std::pair<std::string_view, int>> units = {{"十", 10}, {"百", 100}, {"千", 1000}};
  if (auto v = to_positive_int(s)) return v;
  int total = 0;
  int current = -1;
  std::size_t i = 0;
  while (i < s.size()) {
    bool matched = false;
    for (auto [glyph, value] : digits) {
      if (s.substr(i, glyph.size()) == glyph) {
        current = value;
        i += glyph.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto [glyph, value] : units) {
      if (s.substr(i, glyph.size()) == glyph) {
        total += (current < 0 ? 1 : current) * value;
        current = -1;
        i += glyph.size();
        matched = true;
        break;
      }
    }
    if (!matched) return std::nullopt;
  }
  if (current > 0) total += current;
  if (total <= 0) return std::nullopt;
  return total;
}

std::vector<PartialProvision> japanese_rule(std::string_view raw) {
  std::vector<PartialProvision> out;
  if (raw.find("\xE6\x9D\xA1") == std::string_view::npos) return out;  // 条
  // Fullwidth digits fold to ASCII; offsets refer to the folded text.
  std::string s = text::fold_width(raw);
  static const std::regex re(
      "(?:([^\\s!-/:-@\\[-`{-~]*?"
      "(?:\xE6\xB3\x95\xE5\xBE\x8B|\xE6\xB3\x95|\xE6\x9D\xA1\xE4\xBE\x8B|\xE8\xA6\x8F\xE5\x89\x87|\xE4\xBB\xA4))(?:\xE3\x80\x8D)?)?"
      "\xE7\xAC\xAC([0-9]+|(?:[^\\s0-9]{3})+?)\xE6\x9D\xA1"                    // 第N条
      "(?:\xE7\xAC\xAC([0-9]+|(?:[^\\s0-9]{3})+?)\xE9\xA0\x85)?"              // 第P項
      "(?:\xE7\xAC\xAC([0-9]+|(?:[^\\s0-9]{3})+?)\xE5\x8F\xB7)?");            // 第I号
  auto begin = std::sregex_iterator(s.begin(), s.end(), re);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    auto art = kanji_number(m[2].str());
    if (!art) continue;
    PartialProvision p;
    p.article = *art;
    if (m[3].matched) p.paragraph = kanji_number(m[3].str());
    if (m[4].matched) p.item = kanji_number(m[4].str());
    std::string title = m[1].str();
    // Drop a closing corner bracket (」); the opening one is cut below.
    if (title.ends_with("\xE3\x80\x8D")) title.resize(title.size() - 3);
    std::size_t cut = 0;
    // Titles cannot contain the topic/subject/object particles or the
    // ideographic comma; cut anything before the last one.
    for (std::string_view stop : {"\xE3\x81\xAF", "\xE3\x81\x8C", "\xE3\x82\x92", "\xE3\x81\xA7", "\xE3\x80\x81", "\xE3\x80\x8C"}) {
      auto pos = title.rfind(stop);
      if (pos != std::string::npos) {
        cut += pos + stop.size();
        title = title.substr(pos + stop.size());
      }
    }
    // "同法" ("the same Act") is an alias.
    if (title == "\xE5\x90\x8C\xE6\xB3\x95") {
      p.alias = title;
    } else if (!title.empty()) {
      p.law_title = title;
    }
    p.surface = m[0].str().substr(cut);
    p.offset = static_cast<std::size_t>(m.position(0)) + cut;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PartialProvision> canonical_rule(std::string_view s) {
  std::vector<PartialProvision> out;
  if (auto id = parse_canonical(s)) {
    PartialProvision p;
    p.law_title = id->law_title;
    p.article = id->article;
    p.paragraph = id->paragraph;
    p.item = id->item;
    p.surface = std::string(text::trim(s));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

ReferenceGrammar ReferenceGrammar::standard() {
  ReferenceGrammar g;
  g.add_rule("canonical", canonical_rule);
  g.add_rule("english", english_rule);
  g.add_rule("japanese", japanese_rule);
  return g;
}

void ReferenceGrammar::add_rule(std::string name, ReferenceRule rule) { rules_.emplace_back(std::move(name), std::move(rule)); }

std::vector<PartialProvision> ReferenceGrammar::parse(std::string_view text) const {
  std::vector<PartialProvision> out;
  try {
    for (const auto& [name, rule] : rules_) {
      auto found = rule(text);
      if (name == "canonical" && !found.empty()) return found;
      out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
  } catch (const std::exception&) {
    // Regex engines can throw on pathological input; the contract is "never throws".
    return {};
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  return out;
}

std::vector<PartialProvision> parse_provision_ref(std::string_view text) {
  static const ReferenceGrammar grammar = ReferenceGrammar::standard();
  return grammar.parse(text);
}

// --- catalog & aliases -----------------------------------------------------

namespace {
std::string fold_key(std::string_view s) { return text::to_lower_ascii(text::normalize_whitespace(text::fold_width(s))); }
}  // namespace

StatuteCatalog::StatuteCatalog(std::vector<std::string> titles) : titles_(std::move(titles)) {
  for (const auto& t : titles_) folded_.emplace(fold_key(t), t);
}

StatuteCatalog StatuteCatalog::from_json(const nlohmann::json& j) {
  std::vector<std::string> titles;
  const auto& arr = j.is_object() && j.contains("titles") ? j.at("titles") : j;
  if (!arr.is_array()) throw Error(ErrorCode::InvalidFormat, "statute catalog must be an array of titles");
  for (const auto& t : arr) titles.push_back(t.get<std::string>());
  return StatuteCatalog(std::move(titles));
}

std::optional<std::string> StatuteCatalog::match(std::string_view title) const {
  for (const auto& t : titles_) {
    if (t == title) return t;
  }
  auto it = folded_.find(fold_key(title));
  if (it != folded_.end()) return it->second;
  return std::nullopt;
}

void AliasTable::add(std::string alias, std::string title) {
  if (title.empty()) throw Error(ErrorCode::InvalidParams, "alias '" + alias + "' maps to an empty title");
  aliases[std::move(alias)] = std::move(title);
}

std::optional<std::string> AliasTable::lookup(std::string_view alias) const {
  if (alias.empty()) return default_title;
  auto it = aliases.find(alias);
  if (it != aliases.end()) return it->second;
  auto folded = text::to_lower_ascii(alias);
  for (const auto& [k, v] : aliases) {
    if (text::to_lower_ascii(k) == folded) return v;
  }
  return std::nullopt;
}

AliasTable build_alias_table(std::string_view source) {
  AliasTable table;
  // Title "(hereinafter [referred to as] "the Act")" with straight or curly quotes.
  static const std::regex def(
      R"(\(hereinafter(?: referred to as)?\s*(?:"|\xE2\x80\x9C)([^"\xE2]+)(?:"|\xE2\x80\x9D)\))");
  std::string s(source);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), def); it != std::sregex_iterator(); ++it) {
    std::string_view before = std::string_view(s).substr(0, static_cast<std::size_t>(it->position(0)));
    auto toks = lex(before);
    if (toks.empty()) continue;
    auto m = title_backward(before, toks, toks.size() - 1);
    if (m && m->title) table.add((*it)[1].str(), *m->title);
  }
  std::set<std::string> titles;
  for (const auto& p : parse_provision_ref(source)) {
    if (p.law_title) titles.insert(*p.law_title);
  }
  for (const auto& [alias, title] : table.aliases) titles.insert(title);
  if (titles.size() == 1) table.default_title = *titles.begin();
  return table;
}

std::map<std::string, AliasTable> load_alias_tables(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidFormat, "alias file must be a JSON object keyed by doc_id");
  std::map<std::string, AliasTable> out;
  for (const auto& [doc, entries] : j.items()) {
    AliasTable table;
    if (!entries.is_object()) throw Error(ErrorCode::InvalidFormat, "aliases for '" + doc + "' must be an object");
    for (const auto& [alias, title] : entries.items()) {
      if (alias == "*") {
        table.default_title = title.get<std::string>();
        if (table.default_title->empty()) throw Error(ErrorCode::InvalidParams, "empty default title for '" + doc + "'");
      } else {
        table.add(alias, title.get<std::string>());
      }
    }
    out.emplace(doc, std::move(table));
  }
  return out;
}

Resolution resolve(const std::vector<PartialProvision>& partials, const AliasTable& aliases, Provider* provider,
                   const StatuteCatalog* catalog, int max_retries) {
  Resolution r;
  for (std::size_t idx = 0; idx < partials.size(); ++idx) {
    const auto& p = partials[idx];
    std::optional<std::string> title = p.law_title;
    if (!title) title = aliases.lookup(p.alias);
    if (!title && provider) {
      std::string prompt = prompts::render("normalize_reference", {{"REFERENCE", p.surface},
                                                                   {"ALIAS", p.alias.empty() ? "(none)" : p.alias}});
      auto reply = complete_json(*provider, prompt, max_retries, [](const nlohmann::json& j) {
        return j.is_object() && j.contains("law_title") && (j["law_title"].is_string() || j["law_title"].is_null());
      });
      if (reply["law_title"].is_string() && !text::trim(reply["law_title"].get<std::string>()).empty()) {
        title = std::string(text::trim(reply["law_title"].get<std::string>()));
      }
    }
    if (title && catalog && !catalog->titles().empty()) {
      if (auto m = catalog->match(*title)) title = *m;
    }
    ProvisionId id;
    if (title) id = ProvisionId{*title, p.article, p.paragraph, p.item};
    if (!title || !id.valid()) {
      r.unresolved.push_back(p);
      r.warnings.push_back("unresolved provision reference '" + p.surface + "'");
      continue;
    }
    r.resolved.push_back(std::move(id));
    r.source_index.push_back(idx);
  }
  return r;
}

}  // namespace lkg

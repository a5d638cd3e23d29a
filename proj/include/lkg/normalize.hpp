#pragma once

// Statutory reference grammar and canonicalization.

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lkg {

class Provider;

struct ProvisionId {
  std::string law_title;
  int article = 0;
  std::optional<int> paragraph;
  std::optional<int> item;

  friend auto operator<=>(const ProvisionId&, const ProvisionId&) = default;
  friend bool operator==(const ProvisionId&, const ProvisionId&) = default;

  // Title nonempty without '/', article/paragraph/item positive.
  bool valid() const;
};

// A reference as written. law_title is unset for bare ("Article 2") and
// aliased ("Article 2 of the Act") references; `alias` holds the alias
// phrase in the latter case.
struct PartialProvision {
  std::optional<std::string> law_title;
  std::string alias;
  int article = 0;
  std::optional<int> paragraph;
  std::optional<int> item;
  std::string surface;
  std::size_t offset = 0;

  friend bool operator==(const PartialProvision&, const PartialProvision&) = default;
};

// "<law_title>/Art.<article>[/Para.<paragraph>][/Item.<item>]"
std::string canonical_string(const ProvisionId& id);
std::optional<ProvisionId> parse_canonical(std::string_view s);

// One rule of the reference grammar. Returns every match in `text`.
using ReferenceRule = std::function<std::vector<PartialProvision>(std::string_view text)>;

class ReferenceGrammar {
 public:
  // Canonical strings, English article-first and title-first forms, and
  // Japanese 第N条 forms.
  static ReferenceGrammar standard();

  void add_rule(std::string name, ReferenceRule rule);
  // Never throws; unparseable text yields an empty list. Results are ordered
  // by position in the text.
  std::vector<PartialProvision> parse(std::string_view text) const;

 private:
  std::vector<std::pair<std::string, ReferenceRule>> rules_;
};

std::vector<PartialProvision> parse_provision_ref(std::string_view text);

// Known canonical statute titles. Matching is exact first, then case- and
// width-insensitive.
class StatuteCatalog {
 public:
  StatuteCatalog() = default;
  explicit StatuteCatalog(std::vector<std::string> titles);
  static StatuteCatalog from_json(const nlohmann::json& j);

  std::optional<std::string> match(std::string_view title) const;
  const std::vector<std::string>& titles() const { return titles_; }

 private:
  std::vector<std::string> titles_;
  std::map<std::string, std::string, std::less<>> folded_;
};

// Document-scoped alias map ("the Act" -> canonical title). Bare references
// resolve through default_title when it is set.
struct AliasTable {
  std::map<std::string, std::string, std::less<>> aliases;
  std::optional<std::string> default_title;

  void add(std::string alias, std::string title);
  std::optional<std::string> lookup(std::string_view alias) const;
};

// Scans text for definitions such as `Local Autonomy Act (hereinafter "the
// Act")`. If exactly one full title is cited anywhere in the text it becomes
// the default title for bare references.
AliasTable build_alias_table(std::string_view text);

// {"doc_id": {"alias": "canonical title"}}; the key "*" sets default_title.
std::map<std::string, AliasTable> load_alias_tables(const nlohmann::json& j);

struct Resolution {
  std::vector<ProvisionId> resolved;
  // Same length as `resolved`; index of the partial each id came from.
  std::vector<std::size_t> source_index;
  std::vector<PartialProvision> unresolved;
  std::vector<std::string> warnings;
};

// Completes partials through the alias table, then (if given) the provider.
// Titles are canonicalized through the catalog when one is supplied.
Resolution resolve(const std::vector<PartialProvision>& partials, const AliasTable& aliases,
                   Provider* provider = nullptr, const StatuteCatalog* catalog = nullptr, int max_retries = 2);

}  // namespace lkg

#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/normalize.hpp"
#include "lkg/provider.hpp"

using namespace lkg;

namespace {

ProvisionId pid(std::string title, int art, std::optional<int> para = {}, std::optional<int> item = {}) {
  return ProvisionId{std::move(title), art, para, item};
}

std::vector<ProvisionId> resolve_all(std::string_view text, const AliasTable& aliases = {}) {
  return resolve(parse_provision_ref(text), aliases).resolved;
}

class CannedProvider final : public Provider {
 public:
  explicit CannedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(std::string_view prompt) override {
    prompts.emplace_back(prompt);
    return replies_.at(std::min(calls++, replies_.size() - 1));
  }
  std::string fingerprint() const override { return "canned"; }
  std::size_t calls = 0;
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

}  // namespace

TEST(Normalize, ConjunctionOfArticles) {
  auto ids = resolve_all("Articles 1 and 2 of the Law on Coexistence with Martians");
  EXPECT_EQ(ids, (std::vector<ProvisionId>{pid("Law on Coexistence with Martians", 1),
                                           pid("Law on Coexistence with Martians", 2)}));
}

TEST(Normalize, LocalAutonomyAct) {
  EXPECT_EQ(resolve_all("Article 242 of the Local Autonomy Act"),
            std::vector<ProvisionId>{pid("Local Autonomy Act", 242)});
}

TEST(Normalize, NonReferenceIsEmpty) { EXPECT_TRUE(parse_provision_ref("the weather was pleasant").empty()); }

TEST(Normalize, CanonicalStrings) {
  EXPECT_EQ(canonical_string(pid("Local Autonomy Act", 242)), "Local Autonomy Act/Art.242");
  EXPECT_EQ(canonical_string(pid("Nationality Act", 11)), "Nationality Act/Art.11");
  EXPECT_EQ(canonical_string(pid("Civil Code", 709, 2, 3)), "Civil Code/Art.709/Para.2/Item.3");
  EXPECT_EQ(parse_canonical("Civil Code/Art.709/Para.2"), pid("Civil Code", 709, 2));
  EXPECT_FALSE(parse_canonical("Civil Code/Art.0").has_value());
  EXPECT_FALSE(parse_canonical("Civil Code/Para.2").has_value());
  EXPECT_FALSE(parse_canonical("/Art.2").has_value());
}

TEST(Normalize, CanonicalRoundTripRandom) {
  std::mt19937_64 rng(99);
  const char* words[] = {"Local", "Autonomy", "Act", "Nationality", "Code", "of", "the", "Civil", "Harbor", "Law"};
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    std::string title;
    for (int w = 0, n = 1 + rng() % 4; w < n; ++w) title += (w ? " " : "") + std::string(words[rng() % 10]);
    ProvisionId id{title, static_cast<int>(1 + rng() % 900), std::nullopt, std::nullopt};
    if (rng() % 2) id.paragraph = static_cast<int>(1 + rng() % 9);
    if (id.paragraph && rng() % 2) id.item = static_cast<int>(1 + rng() % 9);
    auto s = canonical_string(id);
    ASSERT_EQ(parse_canonical(s), id) << s;
    seen.insert(s);
  }
  EXPECT_GT(seen.size(), 900u);
}

TEST(Normalize, ParagraphAndItem) {
  EXPECT_EQ(resolve_all("Article 9, Paragraph 2, Item 3 of the Civil Code"),
            std::vector<ProvisionId>{pid("Civil Code", 9, 2, 3)});
  EXPECT_EQ(resolve_all("Civil Code, Article 709"), std::vector<ProvisionId>{pid("Civil Code", 709)});
}

TEST(Normalize, AliasSubstitution) {
  AliasTable table;
  table.add("the Act", "Administrative Case Litigation Act");
  auto partials = parse_provision_ref("Article 2 of the Act");
  ASSERT_EQ(partials.size(), 1u);
  EXPECT_FALSE(partials[0].law_title.has_value());
  EXPECT_EQ(resolve(partials, table).resolved, std::vector<ProvisionId>{pid("Administrative Case Litigation Act", 2)});
}

TEST(Normalize, CompleteIdsUnchanged) {
  auto partials = parse_provision_ref("Local Autonomy Act/Art.242/Para.1");
  auto r = resolve(partials, AliasTable{});
  EXPECT_EQ(r.resolved, std::vector<ProvisionId>{pid("Local Autonomy Act", 242, 1)});
  EXPECT_TRUE(r.unresolved.empty());
}

TEST(Normalize, AliasTableFromDefinitions) {
  auto t = build_alias_table(
      "Under the Local Autonomy Act (hereinafter \"the Act\"), residents may sue. Article 242 of the Act applies.");
  EXPECT_EQ(t.lookup("the Act"), "Local Autonomy Act");
  EXPECT_EQ(t.default_title, "Local Autonomy Act");
  EXPECT_EQ(resolve_all("Article 242 of the Act", t), std::vector<ProvisionId>{pid("Local Autonomy Act", 242)});
  EXPECT_EQ(resolve_all("Article 3", t), std::vector<ProvisionId>{pid("Local Autonomy Act", 3)});
}

TEST(Normalize, AliasesDoNotLeakAcrossDocuments) {
  auto tables = load_alias_tables(nlohmann::json::parse(R"({"d1": {"the Act": "Nationality Act"}, "d2": {}})"));
  EXPECT_EQ(tables.at("d1").lookup("the Act"), "Nationality Act");
  EXPECT_FALSE(tables.at("d2").lookup("the Act").has_value());
}

TEST(Normalize, UnresolvedStaysUnresolved) {
  auto r = resolve(parse_provision_ref("Article 2 of the Ordinance"), AliasTable{});
  EXPECT_TRUE(r.resolved.empty());
  EXPECT_EQ(r.unresolved.size(), 1u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Normalize, ProviderAssistedResolution) {
  CannedProvider p({R"({"law_title": "Nationality Act"})"});
  auto r = resolve(parse_provision_ref("Article 11 of the Act"), AliasTable{}, &p);
  EXPECT_EQ(r.resolved, std::vector<ProvisionId>{pid("Nationality Act", 11)});
  EXPECT_EQ(p.calls, 1u);
}

TEST(Normalize, CatalogCanonicalizesTitles) {
  StatuteCatalog catalog({"Local Autonomy Act"});
  auto r = resolve(parse_provision_ref("Article 242 of the Local AUTONOMY Act"), AliasTable{}, nullptr, &catalog);
  EXPECT_EQ(r.resolved, std::vector<ProvisionId>{pid("Local Autonomy Act", 242)});
  EXPECT_EQ(catalog.match("ＬＯＣＡＬ autonomy ACT"), "Local Autonomy Act");
  EXPECT_FALSE(catalog.match("Harbor Act").has_value());
}

TEST(Normalize, JapaneseForms) {
  auto ids = resolve_all("「地方自治法」第242条第1項");
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(ids[0], pid("地方自治法", 242, 1));
}

TEST(Normalize, NeverThrowsAndBoundedByArticleTokens) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "Article 12 of the Act, and Paragraph 3 Item ()\"第条項号法";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int j = 0, n = rng() % 60; j < n; ++j) s += alphabet[rng() % alphabet.size()];
    std::vector<PartialProvision> out;
    ASSERT_NO_THROW(out = parse_provision_ref(s));
    std::size_t numbers = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (std::isdigit(static_cast<unsigned char>(s[j])) && (j == 0 || !std::isdigit(static_cast<unsigned char>(s[j - 1])))) {
        ++numbers;
      }
    }
    EXPECT_LE(out.size(), numbers) << s;
  }
}

TEST(Normalize, GrammarIsExtensible) {
  auto g = ReferenceGrammar::standard();
  g.add_rule("section-sign", [](std::string_view text) {
    std::vector<PartialProvision> out;
    if (auto pos = text.find("§ 7 HarbAct"); pos != std::string_view::npos) {
      PartialProvision p;
      p.law_title = "Harbor Act";
      p.article = 7;
      p.surface = "§ 7 HarbAct";
      p.offset = pos;
      out.push_back(p);
    }
    return out;
  });
  auto out = g.parse("see § 7 HarbAct");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].article, 7);
}

#include <gtest/gtest.h>

#include "lkg/error.hpp"
#include "lkg/prompts.hpp"
#include "lkg/provider.hpp"

using namespace lkg;

namespace {

class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(std::string_view prompt) override {
    prompts.emplace_back(prompt);
    return replies_.at(std::min(prompts.size() - 1, replies_.size() - 1));
  }
  std::string fingerprint() const override { return "scripted"; }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
};

}  // namespace

TEST(Provider, ParseJsonReply) {
  EXPECT_EQ(parse_json_reply(R"({"a": 1})")->at("a"), 1);
  EXPECT_EQ(parse_json_reply("```json\n{\"a\": [1, 2]}\n```")->at("a").size(), 2u);
  EXPECT_EQ(parse_json_reply("Sure! Here it is: [\"Norm 2\"] Hope this helps.")->size(), 1u);
  EXPECT_FALSE(parse_json_reply("no json here").has_value());
  EXPECT_FALSE(parse_json_reply("{broken").has_value());
}

TEST(Provider, RetriesWithReminder) {
  ScriptedProvider p({"garbage", "still garbage", R"({"ok": true})"});
  auto j = complete_json(p, "PROMPT", 2);
  EXPECT_EQ(j["ok"], true);
  ASSERT_EQ(p.prompts.size(), 3u);
  EXPECT_EQ(p.prompts[0], "PROMPT");
  EXPECT_NE(p.prompts[1].find(kFormatReminder), std::string::npos);
}

TEST(Provider, GivesUpAfterMaxRetries) {
  ScriptedProvider p({"garbage"});
  try {
    complete_json(p, "PROMPT", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedOutput);
  }
  EXPECT_EQ(p.prompts.size(), 3u);
}

TEST(Provider, AcceptPredicate) {
  ScriptedProvider p({"[1]", R"({"x": 1})"});
  auto j = complete_json(p, "P", 1, [](const nlohmann::json& v) { return v.is_object(); });
  EXPECT_TRUE(j.is_object());
  EXPECT_EQ(p.prompts.size(), 2u);
}

TEST(Provider, ConfigValidation) {
  ProviderConfig c;
  c.mode = ProviderMode::Remote;
  EXPECT_THROW(c.validate(), Error);
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  EXPECT_NO_THROW(c.validate());
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(provider_mode_from_string("oracle"), ProviderMode::Oracle);
  EXPECT_THROW(provider_mode_from_string("psychic"), Error);
  EXPECT_EQ(make_provider(ProviderConfig{}), nullptr);
}

TEST(Provider, UnreachableEndpoint) {
  ProviderConfig c;
  c.mode = ProviderMode::Remote;
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  c.timeout = std::chrono::milliseconds(500);
  auto p = make_provider(c);
  ASSERT_NE(p, nullptr);
  try {
    p->complete("hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnavailable);
  }
}

TEST(Provider, SplitEndpoint) {
  auto e = split_endpoint("https://api.example.org:8443/v1/chat/completions");
  EXPECT_EQ(e.base, "https://api.example.org:8443");
  EXPECT_EQ(e.path, "/v1/chat/completions");
  EXPECT_EQ(split_endpoint("http://host").path, "/");
}

TEST(Prompts, TemplatesEmbedded) {
  for (const char* name : {"node_extraction", "link_provision_norm", "link_norm_application", "link_fact_application",
                           "normalize_reference", "baseline_simple", "baseline_context", "baseline_rag"}) {
    EXPECT_FALSE(prompts::body(name).empty()) << name;
    EXPECT_EQ(prompts::version(name), "v1") << name;
  }
  auto out = prompts::render("baseline_simple", {{"FACT", "The resident filed a request."}});
  EXPECT_NE(out.find("The resident filed a request."), std::string::npos);
  EXPECT_EQ(out.find("{{"), std::string::npos);
}

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lkg/corpus.hpp"
#include "lkg/eval.hpp"
#include "lkg/graph.hpp"
#include "lkg/index.hpp"
#include "lkg/pipeline.hpp"
#include "lkg/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lkg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliResult run(const std::string& args) const {
    auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    std::string cmd = "cd '" + dir_.string() + "' && env -u LKG_LLM_MODE -u LKG_EMBED_MODE '" + LKG_CLI + "' " + args +
                      " >'" + out.string() + "' 2>'" + err.string() + "'";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

const char* kSubcommands[] = {"synth", "ingest",  "extract", "normalize", "link",   "stats",
                              "index build", "search", "eval", "compare",   "export", "serve"};

}  // namespace

TEST_F(Cli, HelpMatchesGolden) {
  auto top = run("--help");
  EXPECT_EQ(top.code, 0);
  EXPECT_EQ(top.out, slurp(fs::path(LKG_GOLDEN) / "lkg.txt"));
  for (std::string sub : kSubcommands) {
    auto r = run(sub + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    std::string file = sub;
    std::replace(file.begin(), file.end(), ' ', '_');
    EXPECT_EQ(r.out, slurp(fs::path(LKG_GOLDEN) / (file + ".txt"))) << sub;
  }
}

TEST_F(Cli, HelpDocumentsEveryFlag) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"synth", {"--seed", "--docs", "--out"}},
      {"ingest", {"--corpus", "--out"}},
      {"extract", {"--corpus", "--mode", "--out", "--aliases", "--catalog"}},
      {"link", {"--corpus", "--extraction", "--mode", "--out", "--allow-same-category"}},
      {"stats", {"--snapshot", "--json"}},
      {"index build", {"--snapshot", "--out", "--mode", "--trees"}},
      {"search", {"--snapshot", "--index", "--text", "--fact-id", "--k", "--no-mask", "--json"}},
      {"eval", {"--snapshot", "--index", "--corpus", "--predictors", "--llm-mode", "--report"}},
      {"export", {"--snapshot", "--jsonld"}},
      {"serve", {"--addr", "--snapshot", "--index", "--cors"}},
  };
  for (const auto& [sub, list] : flags) {
    auto r = run(sub + " --help");
    for (const auto& f : list) EXPECT_NE(r.out.find(f), std::string::npos) << sub << " " << f;
  }
}

TEST_F(Cli, SynthIsByteIdentical) {
  ASSERT_EQ(run("synth --seed 7 --docs 40 --out a.json").code, 0);
  ASSERT_EQ(run("synth --seed 7 --docs 40 --out b.json").code, 0);
  ASSERT_EQ(run("synth --seed 8 --docs 40 --out c.json").code, 0);
  auto a = slurp(path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.json")));
  EXPECT_NE(a, slurp(path("c.json")));
  EXPECT_EQ(lkg::load_corpus(path("a.json")).size(), 40u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("synth --docs 0").code, 2);
  EXPECT_EQ(run("synth --bogus").code, 2);
  EXPECT_EQ(run("search --k 0 --text x").code, 2);
  EXPECT_EQ(run("search --text a --fact-id b").code, 2);
  EXPECT_EQ(run("search").code, 2);
  EXPECT_EQ(run("export").code, 2);
  EXPECT_EQ(run("stats --snapshot missing.json").code, 1);
  EXPECT_EQ(run("ingest --corpus missing-dir").code, 1);
  auto bad = run("--config missing.json stats");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("missing.json"), std::string::npos);
}

TEST_F(Cli, FixtureSearchFindsAuditProvision) {
  ASSERT_EQ(run(std::string("ingest --corpus '") + LKG_FIXTURES + "/judgments' --out c.json").code, 0);
  ASSERT_EQ(run("extract --corpus c.json --mode mock --out x.json").code, 0);
  ASSERT_EQ(run("link --corpus c.json --extraction x.json --mode mock --out g.json").code, 0);
  ASSERT_EQ(run("index build --snapshot g.json --out i.json").code, 0);
  auto r = run("search --snapshot g.json --index i.json --text 'resident filed an audit request' --k 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("Local Autonomy Act/Art.242", 0), 0u) << r.out;
  for (const char* layer : {"Fact:", "Application:", "Norm:", "Provision:"}) {
    EXPECT_NE(r.out.find(layer), std::string::npos);
  }
  auto j = run("search --snapshot g.json --index i.json --text 'resident filed an audit request' --k 1 --json");
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(json::parse(j.out)["hits"][0]["provision"], "Local Autonomy Act/Art.242");
  auto stats = run("stats --snapshot g.json --json");
  ASSERT_EQ(stats.code, 0);
  EXPECT_EQ(json::parse(stats.out), lkg::stats_to_json(lkg::graph_stats(lkg::load_snapshot(path("g.json")))));
  EXPECT_EQ(run("search --snapshot g.json --index i.json --fact-id nope").code, 1);
}

// synth -> ingest -> extract -> link -> index -> eval, with the reported
// micro recall checked against closure-derived gold and brute-force
// neighbor scans.
TEST_F(Cli, OraclePipelineEval) {
  ASSERT_EQ(run("synth --seed 7 --docs 12 --out raw.json").code, 0);
  ASSERT_EQ(run("ingest --corpus raw.json --out c.json").code, 0);
  ASSERT_EQ(run("extract --corpus c.json --mode oracle --out x.json").code, 0);
  ASSERT_EQ(run("link --corpus c.json --extraction x.json --mode oracle --out g.json").code, 0);
  ASSERT_EQ(run("index build --snapshot g.json --out i.json").code, 0);
  auto r = run("eval --snapshot g.json --index i.json --predictors lkg:k=3 --report rep/out");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("rep/out.txt")));
  EXPECT_TRUE(fs::exists(path("rep/out.manifest.json")));
  auto report = lkg::parse_report_csv(slurp(path("rep/out.csv")));
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].method, "LKG Retrieval (k=3)");

  auto g = lkg::load_snapshot(path("g.json"));
  std::map<std::string, std::set<lkg::ProvisionId>> closure;
  {
    // Reverse 3-hop reachability by explicit edge walks.
    std::map<std::string, std::vector<std::string>> to_app, norm_of_app, prov_of_norm;
    for (const auto& e : g.edges()) {
      if (e.kind == lkg::EdgeType::ToFact) to_app[e.src].push_back(e.dst);
      if (e.kind == lkg::EdgeType::AppliesNorm) norm_of_app[e.dst].push_back(e.src);
      if (e.kind == lkg::EdgeType::DerivesNorm) prov_of_norm[e.dst].push_back(e.src);
    }
    for (const auto& [fact, apps] : to_app) {
      for (const auto& a : apps)
        for (const auto& n : norm_of_app[a])
          for (const auto& p : prov_of_norm[n]) closure[fact].insert(*g.find_node(p)->provision);
    }
    std::erase_if(closure, [](const auto& kv) { return kv.second.empty(); });
  }
  std::size_t gold_total = 0;
  for (const auto& [f, s] : closure) gold_total += s.size();
  ASSERT_GT(gold_total, 0u);

  lkg::MockEmbedder embedder;
  auto facts = lkg::fact_texts(g);
  std::vector<std::vector<float>> rows;
  for (const auto& [id, text] : facts) rows.push_back(embedder.embed(text));
  std::size_t tp = 0, pred = 0;
  for (const auto& [fact, gold] : closure) {
    std::size_t qi = 0;
    while (facts[qi].first != fact) ++qi;
    std::vector<std::pair<float, std::string>> scored;
    for (std::size_t i = 0; i < facts.size(); ++i) {
      if (i == qi) continue;
      float s = 0.0f;
      for (std::size_t d = 0; d < rows[i].size(); ++d) s += rows[i][d] * rows[qi][d];
      scored.emplace_back(-s, facts[i].first);
    }
    std::sort(scored.begin(), scored.end());
    std::set<lkg::ProvisionId> predicted;
    for (std::size_t i = 0; i < 3 && i < scored.size(); ++i) {
      if (-scored[i].first <= 0.0f) continue;
      if (auto it = closure.find(scored[i].second); it != closure.end()) predicted.insert(it->second.begin(), it->second.end());
    }
    pred += predicted.size();
    for (const auto& p : predicted) tp += gold.count(p);
  }
  EXPECT_EQ(report.rows[0].tp, tp);
  EXPECT_EQ(report.rows[0].pred, pred);
  EXPECT_NEAR(report.rows[0].micro_recall, double(tp) / double(gold_total), 0.0005);
  auto manifest = json::parse(slurp(path("rep/out.manifest.json")));
  EXPECT_EQ(manifest["gold_total"], gold_total);
  EXPECT_EQ(manifest["graph"], g.fingerprint());

  auto cmp = run("compare --snapshot g.json --corpus c.json");
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  EXPECT_NE(cmp.out.find("1.0000"), std::string::npos);
  EXPECT_EQ(cmp.out.find("0.0000"), std::string::npos) << cmp.out;

  ASSERT_EQ(run("export --snapshot g.json --jsonld out/g.jsonld").code, 0);
  auto back = lkg::import_jsonld(json::parse(slurp(path("out/g.jsonld"))));
  EXPECT_EQ(back.node_count(), g.node_count());
  EXPECT_EQ(back.edge_count(), g.edge_count());

  // Same inputs, same bytes.
  ASSERT_EQ(run("link --corpus c.json --extraction x.json --mode oracle --out g2.json").code, 0);
  EXPECT_EQ(slurp(path("g.json")), slurp(path("g2.json")));
}

TEST_F(Cli, BaselinesRunOffline) {
  ASSERT_EQ(run("synth --seed 3 --docs 6 --out c.json").code, 0);
  ASSERT_EQ(run("extract --corpus c.json --mode oracle --out x.json").code, 0);
  ASSERT_EQ(run("link --corpus c.json --extraction x.json --mode oracle --out g.json").code, 0);
  auto r = run("eval --snapshot g.json --corpus c.json --predictors llm-simple,llm-context,llm-rag:m=2 --report r");
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = lkg::parse_report_csv(slurp(path("r.csv")));
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[2].method, "LLM With RAG (m=2)");
  EXPECT_EQ(run("eval --snapshot g.json --predictors lkg:k=3 --index missing.json --report r").code, 1);
}

TEST_F(Cli, ConfigFileSuppliesPaths) {
  {
    std::ofstream cfg(path("cfg.json"));
    cfg << R"({"paths": {"corpus": "cc.json"}, "synth": {"seed": 5, "docs": 3}})";
  }
  ASSERT_EQ(run("--config cfg.json synth").code, 0);
  EXPECT_EQ(lkg::load_corpus(path("cc.json")).size(), 3u);
  {
    std::ofstream cfg(path("bad.json"));
    cfg << R"({"pathz": {}})";
  }
  EXPECT_EQ(run("--config bad.json synth").code, 1);
}

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <thread>

#include "lkg/corpus.hpp"
#include "lkg/error.hpp"
#include "lkg/index.hpp"
#include "lkg/pipeline.hpp"
#include "lkg/search.hpp"
#include "oracles.hpp"

using namespace lkg;

namespace {

// Independent restatement of the mock embedder: FNV-1a 64 over UTF-8 code
// point n-grams of the lowercased, whitespace-collapsed, space-padded text.
std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<float> oracle_embed(const std::string& raw, std::size_t dim, int nmin, int nmax) {
  std::string collapsed;
  bool space = false;
  for (unsigned char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      space = true;
      continue;
    }
    if (space && !collapsed.empty()) collapsed += ' ';
    space = false;
    collapsed += (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : char(c);
  }
  std::string padded = " " + collapsed + " ";
  std::vector<std::string> cps;
  for (std::size_t i = 0; i < padded.size();) {
    unsigned char c = padded[i];
    std::size_t len = c < 0x80 ? 1 : c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
    cps.push_back(padded.substr(i, len));
    i += len;
  }
  std::vector<double> acc(dim, 0.0);
  for (int n = nmin; n <= nmax; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (int k = 0; k < n; ++k) g += cps[i + k];
      auto h = fnv(g);
      acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  double ss = 0.0;
  for (double x : acc) ss += x * x;
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / std::sqrt(ss));
  return out;
}

struct Corpus {
  std::vector<std::pair<std::string, std::string>> facts;
  std::vector<std::string> ids;
  std::vector<std::vector<float>> rows;
};

const Corpus& big_corpus() {
  static const Corpus c = [] {
    Corpus out;
    auto g = gold_graph(synth_corpus(11, 330));
    out.facts = fact_texts(g);
    MockEmbedder e;
    for (const auto& [id, text] : out.facts) {
      out.ids.push_back(id);
      out.rows.push_back(e.embed(text));
    }
    return out;
  }();
  return c;
}

std::vector<Neighbor> as_neighbors(const std::vector<oracle::Scored>& s) {
  std::vector<Neighbor> out;
  for (const auto& x : s) out.push_back({x.id, x.sim});
  return out;
}

}  // namespace

TEST(Index, MockEmbedderMatchesOracle) {
  MockEmbedder e;
  for (std::string s : {"The resident filed an audit request", "  Mixed   CASE\ttext\n", "a", "地方自治法 第242条",
                        "Zalk Noxis resides on Mars."}) {
    auto got = e.embed(s);
    auto want = oracle_embed(s, 256, 2, 3);
    ASSERT_EQ(got.size(), 256u);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_FLOAT_EQ(got[i], want[i]) << s << " @" << i;
  }
  EmbedderConfig c;
  c.dim = 64;
  c.ngram_min = 1;
  c.ngram_max = 4;
  auto got = MockEmbedder(c).embed("Harbor permit");
  auto want = oracle_embed("Harbor permit", 64, 1, 4);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_FLOAT_EQ(got[i], want[i]);
}

TEST(Index, EmbeddingsAreUnitNorm) {
  MockEmbedder e;
  for (const auto& [id, text] : fact_texts(gold_graph(synth_corpus(2, 10)))) {
    auto v = e.embed(text);
    double ss = 0.0;
    for (float x : v) ss += double(x) * x;
    EXPECT_NEAR(std::sqrt(ss), 1.0, 1e-6) << id;
  }
  EXPECT_NEAR(dot(e.embed("same text"), e.embed("SAME   text")), 1.0f, 1e-6f);
}

TEST(Index, EmbedderErrors) {
  MockEmbedder e;
  try {
    e.embed(" \n ");
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyText);
  }
  EmbedderConfig bad;
  bad.dim = 0;
  EXPECT_THROW(bad.validate(), Error);
  EmbedderConfig remote;
  remote.mode = EmbedderMode::Remote;
  EXPECT_THROW(remote.validate(), Error);
  EmbedderConfig a, b;
  b.dim = 128;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), EmbedderConfig{}.fingerprint());
}

TEST(Index, BuildErrors) {
  MockEmbedder e;
  try {
    VectorIndex::build({}, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyIndex);
  }
  EXPECT_THROW(VectorIndex::build({{"a", "x y"}, {"a", "z w"}}, e), Error);
  auto idx = VectorIndex::build({{"a", "one fact"}}, e);
  std::vector<float> wrong(17, 0.0f);
  try {
    idx.query(wrong, 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_TRUE(VectorIndex().ids().empty());
  EXPECT_THROW(VectorIndex().query_exact(wrong, 1), Error);
}

TEST(Index, ExactMatchesBruteScan) {
  const auto& c = big_corpus();
  ASSERT_GE(c.ids.size(), 2000u);
  MockEmbedder e;
  auto idx = VectorIndex::build(c.facts, e);
  std::mt19937_64 rng(17);
  for (int q = 0; q < 500; ++q) {
    auto qi = rng() % c.ids.size();
    auto k = 1 + rng() % 10;
    std::set<std::string> ex = {c.ids[qi]};
    std::set<std::string, std::less<>> ex2 = {c.ids[qi]};
    auto want = as_neighbors(oracle::brute_scan(c.ids, c.rows, c.rows[qi], k, ex));
    ASSERT_EQ(idx.query_exact(c.rows[qi], k, ex2), want) << q;
    ASSERT_EQ(idx.query_exact_serial(c.rows[qi], k, ex2), want) << q;
  }
}

TEST(Index, ApproximateRecall) {
  const auto& c = big_corpus();
  MockEmbedder e;
  auto idx = VectorIndex::build(c.facts, e, IndexMode::Approximate);
  EXPECT_EQ(idx.mode(), IndexMode::Approximate);
  for (std::size_t k = 1; k <= 10; ++k) {
    std::size_t hit = 0, total = 0;
    for (std::size_t qi = 0; qi < c.ids.size(); qi += 7) {
      std::set<std::string, std::less<>> ex = {c.ids[qi]};
      auto exact = idx.query_exact(c.rows[qi], k, ex);
      auto approx = idx.query_approximate(c.rows[qi], k, ex);
      std::set<std::string> truth;
      for (const auto& n : exact) truth.insert(n.node_id);
      for (const auto& n : approx) hit += truth.count(n.node_id);
      total += exact.size();
      for (std::size_t i = 1; i < approx.size(); ++i) ASSERT_GE(approx[i - 1].similarity, approx[i].similarity);
    }
    EXPECT_GE(double(hit) / total, 0.95) << "k=" << k;
  }
}

TEST(Index, ExclusionAndSmallIndexes) {
  MockEmbedder e;
  auto idx = VectorIndex::build({{"f1", "the mayor approved the payment"}, {"f2", "the mayor refused the payment"},
                                 {"f3", "rain fell on the crater"}},
                                e);
  auto q = e.embed("the mayor approved the payment");
  auto top = idx.query(q, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].node_id, "f1");
  EXPECT_NEAR(top[0].similarity, 1.0f, 1e-6f);
  auto masked = idx.query(q, 1, {"f1"});
  EXPECT_EQ(masked[0].node_id, "f2");
  EXPECT_EQ(idx.query(q, 10).size(), 3u);
  EXPECT_EQ(idx.query(q, 10, {"f1", "f2", "f3"}).size(), 0u);
  auto approx = VectorIndex::build({{"f1", "the mayor approved the payment"}, {"f2", "rain"}}, e, IndexMode::Approximate);
  EXPECT_EQ(approx.query(q, 5).size(), 2u);
}

TEST(Index, DuplicateTextsTieBreakById) {
  MockEmbedder e;
  auto idx = VectorIndex::build({{"b", "same words"}, {"a", "same words"}, {"c", "other words"}}, e);
  auto r = idx.query(e.embed("same words"), 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].node_id, "a");
  EXPECT_EQ(r[1].node_id, "b");
}

TEST(Index, SaveLoadAndStale) {
  MockEmbedder e;
  auto facts = fact_texts(gold_graph(synth_corpus(4, 8)));
  auto idx = VectorIndex::build(facts, e, IndexMode::Approximate);
  idx.graph_fingerprint = "g123";
  auto path = testing::TempDir() + "index.json";
  idx.save(path);
  auto back = VectorIndex::load(path, e.fingerprint());
  EXPECT_EQ(back.ids(), idx.ids());
  EXPECT_EQ(back.mode(), IndexMode::Approximate);
  EXPECT_EQ(back.graph_fingerprint, "g123");
  auto q = e.embed(facts[0].second);
  EXPECT_EQ(back.query(q, 5), idx.query(q, 5));
  EmbedderConfig other;
  other.dim = 128;
  try {
    VectorIndex::load(path, other.fingerprint());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::StaleIndex);
  }
  EXPECT_THROW(VectorIndex::load(path + ".none"), Error);
}

TEST(Index, HttpEmbedderAgainstLocalServer) {
  httplib::Server srv;
  srv.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    std::vector<float> v = {3.0f, 4.0f, 0.0f, 0.0f};
    if (body.at("input") == "short") v.pop_back();
    res.set_content(nlohmann::json{{"data", {{{"embedding", v}}}}}.dump(), "application/json");
  });
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  EmbedderConfig c;
  c.mode = EmbedderMode::Remote;
  c.dim = 4;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/embeddings";
  auto e = make_embedder(c);
  auto v = e->embed("hello");
  EXPECT_FLOAT_EQ(v[0], 0.6f);
  EXPECT_FLOAT_EQ(v[1], 0.8f);
  try {
    e->embed("short");
    ADD_FAILURE();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DimensionMismatch);
  }
  srv.stop();
  t.join();
  try {
    e->embed("hello");
    ADD_FAILURE();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ProviderUnavailable);
  }
}

#include <gtest/gtest.h>

#include <queue>
#include <random>

#include "lkg/kernels.hpp"

using namespace lkg::kernels;

namespace {

Csr random_csr(std::uint64_t seed, std::size_t n, std::size_t m) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < m; ++i) {
    auto a = rng() % n, b = rng() % n;
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  Csr g;
  g.offsets.push_back(0);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.targets.insert(g.targets.end(), row.begin(), row.end());
    g.offsets.push_back(g.targets.size());
  }
  return g;
}

std::size_t naive_ecc(const Csr& g, std::size_t s) {
  std::vector<long> d(g.size(), -1);
  std::queue<std::size_t> q;
  d[s] = 0;
  q.push(s);
  std::size_t best = 0;
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    best = std::max<std::size_t>(best, d[u]);
    for (auto i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
      if (d[g.targets[i]] < 0) {
        d[g.targets[i]] = d[u] + 1;
        q.push(g.targets[i]);
      }
    }
  }
  return best;
}

}  // namespace

TEST(Kernels, DotScoresMatchSerialBitForBit) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> nd;
  for (std::size_t dim : {1u, 7u, 64u, 256u}) {
    std::size_t n = 1000;
    std::vector<float> rows(n * dim), q(dim);
    for (auto& v : rows) v = nd(rng);
    for (auto& v : q) v = nd(rng);
    std::vector<float> a(n), b(n);
    dot_scores(rows, dim, q, a);
    dot_scores_serial(rows, dim, q, b);
    EXPECT_EQ(a, b) << dim;
    float manual = 0.0f;
    for (std::size_t d = 0; d < dim; ++d) manual += rows[5 * dim + d] * q[d];
    EXPECT_NEAR(b[5], manual, 1e-4f * dim);
  }
}

TEST(Kernels, DotScoresEmpty) {
  std::vector<float> rows, q(4, 1.0f), out;
  dot_scores(rows, 4, q, out);
  dot_scores_serial(rows, 4, q, out);
  SUCCEED();
}

TEST(Kernels, EccentricitiesMatchSerialAndNaiveBfs) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto g = random_csr(seed, 50 + seed * 7, 40 + seed * 9);
    auto a = eccentricities(g);
    auto b = eccentricities_serial(g);
    ASSERT_EQ(a, b);
    for (std::size_t v = 0; v < g.size(); ++v) EXPECT_EQ(b[v], naive_ecc(g, v));
  }
}

TEST(Kernels, EccentricitiesOfPath) {
  Csr g{{0, 1, 3, 4}, {1, 0, 2, 1}};
  EXPECT_EQ(eccentricities(g), (std::vector<std::size_t>{2, 1, 2}));
  EXPECT_TRUE(eccentricities(Csr{}).empty());
}

// Serial reference vs OpenMP for each parallel kernel.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "lkg/corpus.hpp"
#include "lkg/eval.hpp"
#include "lkg/graph.hpp"
#include "lkg/index.hpp"
#include "lkg/kernels.hpp"
#include "lkg/search.hpp"

namespace {

using namespace lkg;

struct Rows {
  std::size_t dim = 256;
  std::vector<float> rows, query, scores;
  explicit Rows(std::size_t n) : rows(n * dim), query(dim), scores(n) {
    std::mt19937 rng(1);
    std::normal_distribution<float> d;
    for (auto& x : rows) x = d(rng);
    for (auto& x : query) x = d(rng);
  }
};

template <auto Fn>
void BM_dot_scores(benchmark::State& state) {
  Rows r(std::size_t(state.range(0)));
  for (auto _ : state) {
    Fn(r.rows, r.dim, r.query, r.scores);
    benchmark::DoNotOptimize(r.scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_dot_scores<kernels::dot_scores_serial>)->Name("dot_scores/serial")->Arg(4096)->Arg(65536);
BENCHMARK(BM_dot_scores<kernels::dot_scores>)->Name("dot_scores/omp")->Arg(4096)->Arg(65536);

kernels::Csr random_csr(std::size_t n) {
  std::mt19937_64 rng(2);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 1; i < n; ++i) {
    auto j = rng() % i;
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  kernels::Csr g;
  g.offsets.push_back(0);
  for (const auto& a : adj) {
    g.targets.insert(g.targets.end(), a.begin(), a.end());
    g.offsets.push_back(g.targets.size());
  }
  return g;
}

template <auto Fn>
void BM_eccentricities(benchmark::State& state) {
  auto g = random_csr(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(g));
}
BENCHMARK(BM_eccentricities<kernels::eccentricities_serial>)->Name("eccentricities/serial")->Arg(2000);
BENCHMARK(BM_eccentricities<kernels::eccentricities>)->Name("eccentricities/omp")->Arg(2000);

struct World {
  Graph graph = gold_graph(synth_corpus(7, 200));
  MockEmbedder embedder;
  VectorIndex index = VectorIndex::build(fact_texts(graph), embedder);
  GoldSet gold = build_gold(graph);
};

const World& world() {
  static const World w;
  return w;
}

template <bool Parallel>
void BM_predict_lkg(benchmark::State& state) {
  const auto& w = world();
  for (auto _ : state) {
    auto p = Parallel ? predict_lkg(w.gold, 3, w.graph, w.index, w.embedder)
                      : predict_lkg_serial(w.gold, 3, w.graph, w.index, w.embedder);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_predict_lkg<false>)->Name("predict_lkg/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_lkg<true>)->Name("predict_lkg/omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include "lkg/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace lkg::kernels {

namespace {

inline float dot(const float* a, const float* b, std::size_t dim) {
  float acc = 0.0f;
  for (std::size_t k = 0; k < dim; ++k) acc += a[k] * b[k];
  return acc;
}

std::size_t bfs_eccentricity(const Csr& g, std::size_t source, std::vector<std::uint32_t>& dist,
                             std::vector<std::size_t>& queue) {
  constexpr auto kUnseen = std::numeric_limits<std::uint32_t>::max();
  queue.clear();
  queue.push_back(source);
  dist[source] = 0;
  std::size_t ecc = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto u = queue[head];
    ecc = std::max<std::size_t>(ecc, dist[u]);
    for (auto k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      auto v = g.targets[k];
      if (dist[v] == kUnseen) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (auto v : queue) dist[v] = kUnseen;
  return ecc;
}

}  // namespace

void dot_scores(std::span<const float> rows, std::size_t dim, std::span<const float> query, std::span<float> scores) {
  const auto n = static_cast<std::ptrdiff_t>(scores.size());
  const float* base = rows.data();
  const float* q = query.data();
  float* out = scores.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = dot(base + static_cast<std::size_t>(i) * dim, q, dim);
  }
}

void dot_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                       std::span<float> scores) {
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = dot(rows.data() + i * dim, query.data(), dim);
}

std::vector<std::size_t> eccentricities(const Csr& graph) {
  const auto n = graph.size();
  std::vector<std::size_t> ecc(n, 0);
#pragma omp parallel
  {
    std::vector<std::uint32_t> dist(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<std::size_t> queue;
    queue.reserve(64);
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
      ecc[static_cast<std::size_t>(s)] = bfs_eccentricity(graph, static_cast<std::size_t>(s), dist, queue);
    }
  }
  return ecc;
}

std::vector<std::size_t> eccentricities_serial(const Csr& graph) {
  const auto n = graph.size();
  std::vector<std::size_t> ecc(n, 0);
  std::vector<std::uint32_t> dist(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) ecc[s] = bfs_eccentricity(graph, s, dist, queue);
  return ecc;
}

}  // namespace lkg::kernels

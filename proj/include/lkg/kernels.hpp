#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference with identical arithmetic; tests compare the two and the
// benchmark target times them.

#include <cstddef>
#include <span>
#include <vector>

namespace lkg::kernels {

// scores[i] = <rows[i*dim .. (i+1)*dim), query>
void dot_scores(std::span<const float> rows, std::size_t dim, std::span<const float> query, std::span<float> scores);
void dot_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                       std::span<float> scores);

// Undirected simple adjacency in CSR form.
struct Csr {
  std::vector<std::size_t> offsets;  // size n + 1
  std::vector<std::size_t> targets;
  std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

// Eccentricity of every vertex (longest BFS distance within its component).
std::vector<std::size_t> eccentricities(const Csr& graph);
std::vector<std::size_t> eccentricities_serial(const Csr& graph);

}  // namespace lkg::kernels

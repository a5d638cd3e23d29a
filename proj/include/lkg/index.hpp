#pragma once

// Fact embeddings and nearest-neighbor search.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lkg {

inline constexpr std::string_view kIndexFormat = "lkg-index/1";

enum class EmbedderMode { Mock, Remote };
std::string_view to_string(EmbedderMode mode);
EmbedderMode embedder_mode_from_string(std::string_view s);

struct EmbedderConfig {
  EmbedderMode mode = EmbedderMode::Mock;
  std::size_t dim = 256;
  int ngram_min = 2;
  int ngram_max = 3;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{60'000};

  // Throws InvalidParams.
  void validate() const;
  // Mode plus a hash of the parameters that change vectors.
  std::string fingerprint() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  // Unit-norm vector of dim() values. Throws EmptyText.
  virtual std::vector<float> embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string fingerprint() const = 0;
};

// Signed feature hashing of character n-grams (code points, lowercased,
// whitespace-normalized and space-padded), then L2 normalization.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(EmbedderConfig config = {});
  std::vector<float> embed(std::string_view text) const override;
  std::size_t dim() const override { return config_.dim; }
  std::string fingerprint() const override { return config_.fingerprint(); }

 private:
  EmbedderConfig config_;
};

// OpenAI-style embedding endpoint: {"input", "model"} in,
// data[0].embedding out. Throws ProviderUnavailable or DimensionMismatch.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(EmbedderConfig config);
  std::vector<float> embed(std::string_view text) const override;
  std::size_t dim() const override { return config_.dim; }
  std::string fingerprint() const override { return config_.fingerprint(); }

 private:
  EmbedderConfig config_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

// Normalizes in place; returns false for a zero vector.
bool l2_normalize(std::vector<float>& v);
float dot(std::span<const float> a, std::span<const float> b);

enum class IndexMode { Exact, Approximate };
std::string_view to_string(IndexMode mode);
IndexMode index_mode_from_string(std::string_view s);

// Random-projection forest parameters for approximate mode.
struct AnnParams {
  int n_trees = 20;
  std::size_t leaf_size = 16;
  // Distinct candidates scored per query; 0 selects max(256, 2 * k * n_trees).
  std::size_t search_k = 0;
  std::uint64_t seed = 20240601;
};

struct Neighbor {
  std::string node_id;
  float similarity = 0.0f;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

class VectorIndex {
 public:
  VectorIndex() = default;

  // Throws EmptyIndex for an empty list, DimensionMismatch when the embedder
  // output changes size, InvalidParams for duplicate ids.
  static VectorIndex build(const std::vector<std::pair<std::string, std::string>>& facts, const Embedder& embedder,
                           IndexMode mode = IndexMode::Exact, AnnParams params = {});
  static VectorIndex from_vectors(std::vector<std::string> ids, std::vector<float> values, std::size_t dim,
                                  IndexMode mode, AnnParams params, std::string embedder_fingerprint);

  // Top-k by cosine in the index's mode; similarity desc, then node_id asc.
  std::vector<Neighbor> query(std::span<const float> vector, std::size_t k,
                              const std::set<std::string, std::less<>>& exclude = {}) const;
  std::vector<Neighbor> query_exact(std::span<const float> vector, std::size_t k,
                                    const std::set<std::string, std::less<>>& exclude = {}) const;
  // Same contract, single-threaded scan.
  std::vector<Neighbor> query_exact_serial(std::span<const float> vector, std::size_t k,
                                           const std::set<std::string, std::less<>>& exclude = {}) const;
  std::vector<Neighbor> query_approximate(std::span<const float> vector, std::size_t k,
                                          const std::set<std::string, std::less<>>& exclude = {}) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  IndexMode mode() const { return mode_; }
  const AnnParams& params() const { return params_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> vector(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> position(std::string_view node_id) const;
  const std::string& embedder_fingerprint() const { return embedder_fingerprint_; }

  // Fingerprint of the graph the facts were taken from (informational).
  std::string graph_fingerprint;

  void save(const std::string& path) const;
  // Throws StaleIndex when expected_embedder is given and differs.
  static VectorIndex load(const std::string& path, const std::optional<std::string>& expected_embedder = std::nullopt);

 private:
  struct TreeNode {
    // Leaves have an empty normal and hold items[begin, end).
    std::vector<float> normal;
    float offset = 0.0f;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::size_t begin = 0;
    std::size_t end = 0;
  };
  struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<std::uint32_t> items;
  };

  void build_forest();
  std::int32_t build_node(Tree& tree, std::size_t begin, std::size_t end, std::mt19937_64& rng);
  void check_dim(std::span<const float> vector) const;
  std::vector<Neighbor> rank(const std::vector<float>& scores, const std::vector<std::uint32_t>* subset,
                             std::size_t k, const std::set<std::string, std::less<>>& exclude) const;

  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::size_t dim_ = 0;
  IndexMode mode_ = IndexMode::Exact;
  AnnParams params_;
  std::string embedder_fingerprint_;
  std::vector<Tree> forest_;
  std::vector<std::pair<std::string, std::size_t>> sorted_ids_;
};

}  // namespace lkg

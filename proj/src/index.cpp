#include "lkg/index.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/kernels.hpp"
#include "lkg/provider.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

std::string_view to_string(EmbedderMode mode) { return mode == EmbedderMode::Mock ? "mock" : "remote"; }

EmbedderMode embedder_mode_from_string(std::string_view s) {
  if (s == "mock") return EmbedderMode::Mock;
  if (s == "remote") return EmbedderMode::Remote;
  throw Error(ErrorCode::InvalidParams, "unknown embedder mode '" + std::string(s) + "'");
}

void EmbedderConfig::validate() const {
  if (dim == 0) throw Error(ErrorCode::InvalidParams, "embedding dimension must be positive");
  if (mode == EmbedderMode::Mock && (ngram_min < 1 || ngram_max < ngram_min)) {
    throw Error(ErrorCode::InvalidParams, "invalid n-gram range");
  }
  if (mode == EmbedderMode::Remote && (!endpoint || endpoint->empty())) {
    throw Error(ErrorCode::InvalidParams, "remote embedder requires an endpoint");
  }
}

std::string EmbedderConfig::fingerprint() const {
  std::string params = "dim=" + std::to_string(dim);
  if (mode == EmbedderMode::Mock) {
    params += ";n=" + std::to_string(ngram_min) + "-" + std::to_string(ngram_max) + ";fnv1a64";
  } else {
    params += ";endpoint=" + endpoint.value_or("") + ";model=" + model_name.value_or("");
  }
  return std::string(to_string(mode)) + ":" + text::hex64(text::fnv1a64(params));
}

bool l2_normalize(std::vector<float>& v) {
  double ss = 0.0;
  for (float x : v) ss += static_cast<double>(x) * x;
  if (ss <= 0.0) return false;
  double inv = 1.0 / std::sqrt(ss);
  for (float& x : v) x = static_cast<float>(x * inv);
  return true;
}

float dot(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace {

// Splits UTF-8 into code point byte strings; invalid bytes stand alone.
std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

MockEmbedder::MockEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.mode = EmbedderMode::Mock;
  config_.validate();
}

std::vector<float> MockEmbedder::embed(std::string_view input) const {
  auto norm = text::to_lower_ascii(text::normalize_whitespace(input));
  if (norm.empty()) throw Error(ErrorCode::EmptyText, "cannot embed empty text");
  auto cps = code_points(" " + norm + " ");
  std::vector<double> acc(config_.dim, 0.0);
  auto add = [&](std::string_view gram) {
    auto h = text::fnv1a64(gram);
    acc[h % config_.dim] += (h >> 63) ? -1.0 : 1.0;
  };
  bool any = false;
  for (int n = config_.ngram_min; n <= config_.ngram_max; ++n) {
    if (cps.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i) {
      std::string gram;
      for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) gram += cps[i + k];
      add(gram);
      any = true;
    }
  }
  if (!any) add(norm);
  double ss = 0.0;
  for (double x : acc) ss += x * x;
  if (ss == 0.0) {
    acc[text::fnv1a64(norm) % config_.dim] = 1.0;
    ss = 1.0;
  }
  double inv = 1.0 / std::sqrt(ss);
  std::vector<float> out(config_.dim);
  for (std::size_t i = 0; i < config_.dim; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

HttpEmbedder::HttpEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.mode = EmbedderMode::Remote;
  config_.validate();
}

std::vector<float> HttpEmbedder::embed(std::string_view input) const {
  if (text::trim(input).empty()) throw Error(ErrorCode::EmptyText, "cannot embed empty text");
  auto parts = split_endpoint(*config_.endpoint);
  httplib::Client client(parts.base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_read_timeout(static_cast<time_t>(secs), 0);
  httplib::Headers headers;
  if (config_.api_key && !config_.api_key->empty()) headers.emplace("Authorization", "Bearer " + *config_.api_key);
  json body = {{"input", std::string(input)}};
  if (config_.model_name) body["model"] = *config_.model_name;
  auto res = client.Post(parts.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable, "embedding request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable, "embedding endpoint returned HTTP " + std::to_string(res->status));
  }
  auto reply = json::parse(res->body, nullptr, false);
  const json* values = nullptr;
  if (reply.is_object() && reply.contains("data") && reply["data"].is_array() && !reply["data"].empty()) {
    values = &reply["data"][0]["embedding"];
  } else if (reply.is_object() && reply.contains("embedding")) {
    values = &reply["embedding"];
  }
  if (!values || !values->is_array()) throw Error(ErrorCode::ProviderUnavailable, "malformed embedding response");
  std::vector<float> out;
  for (const auto& x : *values) out.push_back(x.get<float>());
  if (out.size() != config_.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(config_.dim) + " values, got " + std::to_string(out.size()));
  }
  if (!l2_normalize(out)) throw Error(ErrorCode::ProviderUnavailable, "embedding endpoint returned a zero vector");
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  if (config.mode == EmbedderMode::Mock) return std::make_unique<MockEmbedder>(config);
  return std::make_unique<HttpEmbedder>(config);
}

std::string_view to_string(IndexMode mode) { return mode == IndexMode::Exact ? "exact" : "approximate"; }

IndexMode index_mode_from_string(std::string_view s) {
  if (s == "exact") return IndexMode::Exact;
  if (s == "approximate" || s == "approx") return IndexMode::Approximate;
  throw Error(ErrorCode::InvalidParams, "unknown index mode '" + std::string(s) + "'");
}

// --- VectorIndex -----------------------------------------------------------

VectorIndex VectorIndex::build(const std::vector<std::pair<std::string, std::string>>& facts, const Embedder& embedder,
                               IndexMode mode, AnnParams params) {
  if (facts.empty()) throw Error(ErrorCode::EmptyIndex, "no facts to index");
  std::vector<std::string> ids;
  std::vector<float> values;
  ids.reserve(facts.size());
  values.reserve(facts.size() * embedder.dim());
  for (const auto& [id, txt] : facts) {
    auto v = embedder.embed(txt);
    if (v.size() != embedder.dim()) throw Error(ErrorCode::DimensionMismatch, "embedder returned a vector of wrong size");
    ids.push_back(id);
    values.insert(values.end(), v.begin(), v.end());
  }
  return from_vectors(std::move(ids), std::move(values), embedder.dim(), mode, params, embedder.fingerprint());
}

VectorIndex VectorIndex::from_vectors(std::vector<std::string> ids, std::vector<float> values, std::size_t dim,
                                      IndexMode mode, AnnParams params, std::string embedder_fingerprint) {
  if (ids.empty()) throw Error(ErrorCode::EmptyIndex, "no vectors to index");
  if (dim == 0 || values.size() != ids.size() * dim) throw Error(ErrorCode::DimensionMismatch, "vector storage size mismatch");
  if (params.n_trees < 1 || params.leaf_size < 1) throw Error(ErrorCode::InvalidParams, "invalid forest parameters");
  VectorIndex idx;
  idx.ids_ = std::move(ids);
  idx.values_ = std::move(values);
  idx.dim_ = dim;
  idx.mode_ = mode;
  idx.params_ = params;
  idx.embedder_fingerprint_ = std::move(embedder_fingerprint);
  for (std::size_t i = 0; i < idx.ids_.size(); ++i) idx.sorted_ids_.emplace_back(idx.ids_[i], i);
  std::sort(idx.sorted_ids_.begin(), idx.sorted_ids_.end());
  for (std::size_t i = 1; i < idx.sorted_ids_.size(); ++i) {
    if (idx.sorted_ids_[i].first == idx.sorted_ids_[i - 1].first) {
      throw Error(ErrorCode::InvalidParams, "duplicate node id '" + idx.sorted_ids_[i].first + "' in index");
    }
  }
  if (mode == IndexMode::Approximate) idx.build_forest();
  return idx;
}

std::optional<std::size_t> VectorIndex::position(std::string_view node_id) const {
  auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), node_id,
                             [](const auto& p, std::string_view id) { return p.first < id; });
  if (it == sorted_ids_.end() || it->first != node_id) return std::nullopt;
  return it->second;
}

void VectorIndex::check_dim(std::span<const float> vector) const {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(vector.size()) + " values, index has " + std::to_string(dim_));
  }
}

std::vector<Neighbor> VectorIndex::rank(const std::vector<float>& scores, const std::vector<std::uint32_t>* subset,
                                        std::size_t k, const std::set<std::string, std::less<>>& exclude) const {
  std::vector<std::uint32_t> pool;
  if (subset) {
    pool = *subset;
  } else {
    pool.resize(ids_.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::uint32_t>(i);
  }
  if (!exclude.empty()) {
    std::erase_if(pool, [&](std::uint32_t i) { return exclude.count(ids_[i]) != 0; });
  }
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  };
  auto take = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(), better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({ids_[pool[i]], scores[pool[i]]});
  return out;
}

std::vector<Neighbor> VectorIndex::query(std::span<const float> vector, std::size_t k,
                                         const std::set<std::string, std::less<>>& exclude) const {
  return mode_ == IndexMode::Approximate ? query_approximate(vector, k, exclude) : query_exact(vector, k, exclude);
}

std::vector<Neighbor> VectorIndex::query_exact(std::span<const float> vector, std::size_t k,
                                               const std::set<std::string, std::less<>>& exclude) const {
  check_dim(vector);
  if (ids_.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
  std::vector<float> scores(ids_.size());
  kernels::dot_scores(values_, dim_, vector, scores);
  return rank(scores, nullptr, k, exclude);
}

std::vector<Neighbor> VectorIndex::query_exact_serial(std::span<const float> vector, std::size_t k,
                                                      const std::set<std::string, std::less<>>& exclude) const {
  check_dim(vector);
  if (ids_.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
  std::vector<float> scores(ids_.size());
  kernels::dot_scores_serial(values_, dim_, vector, scores);
  return rank(scores, nullptr, k, exclude);
}

void VectorIndex::build_forest() {
  forest_.clear();
  for (int t = 0; t < params_.n_trees; ++t) {
    std::mt19937_64 rng(params_.seed + static_cast<std::uint64_t>(t) * 0x9E3779B97F4A7C15ULL);
    Tree tree;
    tree.items.resize(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) tree.items[i] = static_cast<std::uint32_t>(i);
    build_node(tree, 0, tree.items.size(), rng);
    forest_.push_back(std::move(tree));
  }
}

std::int32_t VectorIndex::build_node(Tree& tree, std::size_t begin, std::size_t end, std::mt19937_64& rng) {
  auto self = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  tree.nodes[self].begin = begin;
  tree.nodes[self].end = end;
  const auto n = end - begin;
  if (n <= params_.leaf_size) return self;

  // Hyperplane bisecting two sampled points.
  auto a = tree.items[begin + rng() % n];
  auto b = tree.items[begin + rng() % n];
  for (int tries = 0; tries < 8 && a == b; ++tries) b = tree.items[begin + rng() % n];
  std::vector<float> normal(dim_);
  auto va = vector(a);
  auto vb = vector(b);
  for (std::size_t d = 0; d < dim_; ++d) normal[d] = va[d] - vb[d];
  float offset = 0.0f;
  for (std::size_t d = 0; d < dim_; ++d) offset += normal[d] * 0.5f * (va[d] + vb[d]);

  auto mid = std::partition(tree.items.begin() + static_cast<std::ptrdiff_t>(begin),
                            tree.items.begin() + static_cast<std::ptrdiff_t>(end),
                            [&](std::uint32_t i) { return dot(normal, vector(i)) - offset > 0.0f; });
  auto split = static_cast<std::size_t>(mid - tree.items.begin());
  if (split == begin || split == end) {
    // Degenerate plane (duplicates): halve arbitrarily.
    split = begin + n / 2;
    std::fill(normal.begin(), normal.end(), 0.0f);
    offset = 0.0f;
  }
  tree.nodes[self].normal = std::move(normal);
  tree.nodes[self].offset = offset;
  auto left = build_node(tree, begin, split, rng);
  auto right = build_node(tree, split, end, rng);
  tree.nodes[self].left = left;
  tree.nodes[self].right = right;
  return self;
}

std::vector<Neighbor> VectorIndex::query_approximate(std::span<const float> vector, std::size_t k,
                                                     const std::set<std::string, std::less<>>& exclude) const {
  check_dim(vector);
  if (ids_.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
  if (forest_.empty()) return query_exact(vector, k, exclude);
  std::size_t budget = params_.search_k;
  if (budget == 0) budget = std::max<std::size_t>(256, 2 * k * static_cast<std::size_t>(params_.n_trees));
  budget += exclude.size();

  using Entry = std::tuple<float, std::size_t, std::int32_t>;  // priority, tree, node
  std::priority_queue<Entry> queue;
  for (std::size_t t = 0; t < forest_.size(); ++t) queue.emplace(std::numeric_limits<float>::infinity(), t, 0);
  std::vector<char> seen(ids_.size(), 0);
  std::vector<std::uint32_t> candidates;
  while (!queue.empty() && candidates.size() < budget) {
    auto [prio, t, node] = queue.top();
    queue.pop();
    const auto& tree = forest_[t];
    const auto& tn = tree.nodes[static_cast<std::size_t>(node)];
    if (tn.left < 0) {
      for (auto i = tn.begin; i < tn.end; ++i) {
        auto item = tree.items[i];
        if (!seen[item]) {
          seen[item] = 1;
          candidates.push_back(item);
        }
      }
      continue;
    }
    float margin = dot(tn.normal, vector) - tn.offset;
    queue.emplace(std::min(prio, margin), t, tn.left);
    queue.emplace(std::min(prio, -margin), t, tn.right);
  }
  std::vector<float> scores(ids_.size(), 0.0f);
  for (auto i : candidates) scores[i] = dot(this->vector(i), vector);
  return rank(scores, &candidates, k, exclude);
}

void VectorIndex::save(const std::string& path) const {
  json vectors = json::array();
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    auto v = vector(i);
    vectors.push_back(std::vector<float>(v.begin(), v.end()));
  }
  json j = {{"version", kIndexFormat},
            {"embedder", embedder_fingerprint_},
            {"graph", graph_fingerprint},
            {"mode", to_string(mode_)},
            {"dim", dim_},
            {"params",
             {{"n_trees", params_.n_trees},
              {"leaf_size", params_.leaf_size},
              {"search_k", params_.search_k},
              {"seed", params_.seed}}},
            {"ids", ids_},
            {"vectors", std::move(vectors)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

VectorIndex VectorIndex::load(const std::string& path, const std::optional<std::string>& expected_embedder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  try {
    json j;
    in >> j;
    if (j.value("version", std::string()) != kIndexFormat) {
      throw Error(ErrorCode::InvalidFormat, path + " is not a " + std::string(kIndexFormat) + " file");
    }
    auto fp = j.at("embedder").get<std::string>();
    if (expected_embedder && *expected_embedder != fp) {
      throw Error(ErrorCode::StaleIndex, "index was built with embedder " + fp + ", expected " + *expected_embedder);
    }
    auto dim = j.at("dim").get<std::size_t>();
    AnnParams params;
    const auto& p = j.at("params");
    params.n_trees = p.at("n_trees").get<int>();
    params.leaf_size = p.at("leaf_size").get<std::size_t>();
    params.search_k = p.at("search_k").get<std::size_t>();
    params.seed = p.at("seed").get<std::uint64_t>();
    auto ids = j.at("ids").get<std::vector<std::string>>();
    std::vector<float> values;
    values.reserve(ids.size() * dim);
    for (const auto& v : j.at("vectors")) {
      if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "stored vector has wrong dimension");
      for (const auto& x : v) values.push_back(x.get<float>());
    }
    auto idx = from_vectors(std::move(ids), std::move(values), dim, index_mode_from_string(j.at("mode").get<std::string>()),
                            params, fp);
    idx.graph_fingerprint = j.value("graph", std::string());
    return idx;
  } catch (const json::exception& err) {
    throw Error(ErrorCode::InvalidFormat, path + ": " + err.what());
  }
}

}  // namespace lkg

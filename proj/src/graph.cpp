#include "lkg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/kernels.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Oracle: return "oracle";
    case Provenance::Mock: return "mock";
    case Provenance::Remote: return "remote";
    case Provenance::Imported: return "imported";
  }
  return "imported";
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::Oracle, Provenance::Mock, Provenance::Remote, Provenance::Imported}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::InvalidFormat, "unknown provenance '" + std::string(s) + "'");
}

namespace {

std::string node_key(const LkgNode& n) {
  std::string key;
  key.reserve(n.doc_id.size() + n.segment_id.size() + n.text.size() + 16);
  key += n.doc_id;
  key += '\x1f';
  key += n.segment_id;
  key += '\x1f';
  key += label_tag(n.label);
  key += '\x1f';
  key += n.text;
  if (n.provision) {
    key += '\x1f';
    key += canonical_string(*n.provision);
  }
  return key;
}

}  // namespace

Graph::Graph(GraphOptions options) : options_(options) {}

void Graph::require_frozen() const {
  if (!frozen_) throw Error(ErrorCode::GraphNotFrozen, "operation requires a frozen graph");
}

std::string Graph::add_node(LkgNode node) {
  if (frozen_) throw Error(ErrorCode::GraphFrozen, "cannot add nodes to a frozen graph");
  if (node.doc_id.empty()) throw Error(ErrorCode::SchemaViolation, "node without doc_id");
  if (node.segment_id.empty()) throw Error(ErrorCode::SchemaViolation, "node without segment_id");
  if (text::trim(node.text).empty()) throw Error(ErrorCode::SchemaViolation, "node with empty text");
  if ((node.label == NodeLabel::Provision) != node.provision.has_value()) {
    throw Error(ErrorCode::SchemaViolation, "provision id is required exactly for Provision nodes");
  }
  if (node.provision && !node.provision->valid()) {
    throw Error(ErrorCode::SchemaViolation, "invalid provision id");
  }

  auto key = node_key(node);
  if (auto it = by_key_.find(key); it != by_key_.end()) {
    const auto& existing = nodes_[it->second];
    if (!node.node_id.empty() && node.node_id != existing.node_id) {
      throw Error(ErrorCode::SchemaViolation, "node '" + node.node_id + "' duplicates '" + existing.node_id + "'");
    }
    return existing.node_id;
  }

  std::string slot = node.segment_id + ':' + label_tag(node.label);
  int& counter = per_segment_label_[slot];
  if (node.node_id.empty()) {
    do {
      node.node_id = slot + std::to_string(++counter);
    } while (by_id_.count(node.node_id) != 0);
  } else if (by_id_.count(node.node_id) != 0) {
    throw Error(ErrorCode::SchemaViolation, "duplicate node id '" + node.node_id + "'");
  } else {
    ++counter;
  }

  auto index = nodes_.size();
  by_id_.emplace(node.node_id, index);
  by_key_.emplace(std::move(key), index);
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  in_.emplace_back();
  return nodes_.back().node_id;
}

std::string Graph::add_edge(LkgEdge edge) {
  if (frozen_) throw Error(ErrorCode::GraphFrozen, "cannot add edges to a frozen graph");
  auto s = index_of(edge.src);
  if (!s) throw Error(ErrorCode::UnknownEndpoint, "unknown source node '" + edge.src + "'");
  auto d = index_of(edge.dst);
  if (!d) throw Error(ErrorCode::UnknownEndpoint, "unknown target node '" + edge.dst + "'");
  if (!is_canonical(edge.kind) && !options_.allow_same_category) {
    throw Error(ErrorCode::ExtendedKindDisabled, std::string(to_string(edge.kind)) + " edges are disabled");
  }
  const auto& src = nodes_[*s];
  const auto& dst = nodes_[*d];
  auto sig = signature(edge.kind);
  if (src.label != sig.src || dst.label != sig.dst) {
    throw Error(ErrorCode::LabelMismatch, std::string(to_string(edge.kind)) + " cannot connect " +
                                              std::string(to_string(src.label)) + " to " +
                                              std::string(to_string(dst.label)));
  }
  if (src.doc_id != dst.doc_id || (!edge.doc_id.empty() && edge.doc_id != src.doc_id)) {
    throw Error(ErrorCode::CrossDocumentEdge, "edge " + edge.src + " -> " + edge.dst + " crosses documents");
  }
  edge.doc_id = src.doc_id;

  auto index = edges_.size();
  if (edge.edge_id.empty()) {
    auto n = index;
    do {
      edge.edge_id = "e" + std::to_string(n++);
    } while (edge_ids_.count(edge.edge_id) != 0);
  } else if (edge_ids_.count(edge.edge_id) != 0) {
    throw Error(ErrorCode::SchemaViolation, "duplicate edge id '" + edge.edge_id + "'");
  }
  edge_ids_.insert(edge.edge_id);
  endpoints_.emplace_back(*s, *d);
  out_[*s].push_back(index);
  in_[*d].push_back(index);
  edges_.push_back(std::move(edge));
  return edges_.back().edge_id;
}

std::optional<std::size_t> Graph::index_of(std::string_view node_id) const {
  auto it = by_id_.find(node_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const LkgNode* Graph::find_node(std::string_view node_id) const {
  auto i = index_of(node_id);
  return i ? &nodes_[*i] : nullptr;
}

std::string Graph::fingerprint() const {
  std::uint64_t h = text::fnv1a64("lkg-graph");
  auto mix = [&h](std::string_view s) {
    h = text::fnv1a64(s, h);
    h = text::fnv1a64("\x1e", h);
  };
  for (const auto& n : nodes_) {
    mix(n.node_id);
    mix(node_key(n));
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    mix(edges_[i].edge_id);
    mix(to_string(edges_[i].kind));
    mix(std::to_string(endpoints_[i].first));
    mix(std::to_string(endpoints_[i].second));
  }
  return text::hex64(h);
}

// --- statistics ------------------------------------------------------------

double graph_density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  auto n = static_cast<double>(nodes);
  return static_cast<double>(edges) / (n * (n - 1.0));
}

std::vector<LabelStats> node_stats(const Graph& g) {
  g.require_frozen();
  std::vector<LabelStats> out;
  std::map<NodeLabel, std::size_t> slot;
  for (auto label : kAllLabels) {
    slot[label] = out.size();
    out.push_back(LabelStats{label, 0, 0.0, 0.0, 0});
  }
  std::vector<double> in_sum(out.size(), 0.0), out_sum(out.size(), 0.0);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto k = slot[g.node(i).label];
    ++out[k].nodes;
    in_sum[k] += static_cast<double>(g.in_edges(i).size());
    out_sum[k] += static_cast<double>(g.out_edges(i).size());
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& s = g.node(g.src_index(e));
    const auto& d = g.node(g.dst_index(e));
    if (s.segment_id != d.segment_id) continue;
    ++out[slot[s.label]].self_loops;
    if (d.label != s.label) ++out[slot[d.label]].self_loops;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].nodes == 0) continue;
    out[k].avg_in_degree = in_sum[k] / static_cast<double>(out[k].nodes);
    out[k].avg_out_degree = out_sum[k] / static_cast<double>(out[k].nodes);
  }
  return out;
}

std::vector<EdgeKindStats> edge_stats(const Graph& g) {
  g.require_frozen();
  std::vector<EdgeType> kinds(std::begin(kCanonicalEdgeTypes), std::end(kCanonicalEdgeTypes));
  if (g.options().allow_same_category) {
    kinds.push_back(EdgeType::FactToFact);
    kinds.push_back(EdgeType::NormToNorm);
  }
  std::vector<EdgeKindStats> out;
  for (auto kind : kinds) {
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t count = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (g.edge(e).kind != kind) continue;
      ++count;
      pairs.emplace(g.src_index(e), g.dst_index(e));
    }
    EdgeKindStats st{kind, count, pairs.size(), 0.0};
    if (!pairs.empty()) st.multiplicity = static_cast<double>(count) / static_cast<double>(pairs.size());
    out.push_back(st);
  }
  return out;
}

namespace {

kernels::Csr undirected_view(const Graph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    auto s = g.src_index(e);
    auto d = g.dst_index(e);
    if (s == d) continue;
    adj[s].push_back(d);
    adj[d].push_back(s);
  }
  kernels::Csr csr;
  csr.offsets.reserve(n + 1);
  csr.offsets.push_back(0);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    csr.targets.insert(csr.targets.end(), list.begin(), list.end());
    csr.offsets.push_back(csr.targets.size());
  }
  return csr;
}

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

NetworkStats network_stats(const Graph& g) {
  g.require_frozen();
  NetworkStats st;
  st.nodes = g.node_count();
  st.edges = g.edge_count();
  st.density = graph_density(st.nodes, st.edges);
  if (st.nodes == 0) return st;

  auto csr = undirected_view(g);
  const auto n = csr.size();
  std::vector<std::size_t> component(n, n);
  std::size_t wcc = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] != n) continue;
    component[s] = wcc;
    stack.push_back(s);
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto k = csr.offsets[u]; k < csr.offsets[u + 1]; ++k) {
        auto v = csr.targets[k];
        if (component[v] == n) {
          component[v] = wcc;
          stack.push_back(v);
        }
      }
    }
    ++wcc;
  }
  st.wcc_count = wcc;

  auto ecc = kernels::eccentricities(csr);
  std::vector<std::size_t> diameter(wcc, 0);
  for (std::size_t v = 0; v < n; ++v) diameter[component[v]] = std::max(diameter[component[v]], ecc[v]);
  std::vector<double> large;
  for (auto d : diameter) {
    if (d >= 2) large.push_back(static_cast<double>(d));
  }
  st.wcc_diameter_ge2 = large.size();
  if (!large.empty()) {
    st.mean_diameter = std::accumulate(large.begin(), large.end(), 0.0) / static_cast<double>(large.size());
    st.std_diameter = population_std(large);
  }

  std::vector<double> degree(n);
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = static_cast<double>(g.in_edges(v).size() + g.out_edges(v).size());
  }
  st.degree_std = population_std(degree);
  return st;
}

GraphStats graph_stats(const Graph& g) { return GraphStats{node_stats(g), edge_stats(g), network_stats(g)}; }

json stats_to_json(const GraphStats& stats) {
  json j;
  j["nodes"] = json::array();
  for (const auto& s : stats.by_label) {
    j["nodes"].push_back({{"label", to_string(s.label)},
                          {"nodes", s.nodes},
                          {"avg_in_degree", s.avg_in_degree},
                          {"avg_out_degree", s.avg_out_degree},
                          {"self_loops", s.self_loops}});
  }
  j["edges"] = json::array();
  for (const auto& s : stats.by_kind) {
    j["edges"].push_back({{"kind", to_string(s.kind)},
                          {"edges", s.edges},
                          {"distinct_pairs", s.distinct_pairs},
                          {"multiplicity", s.multiplicity}});
  }
  const auto& n = stats.network;
  j["network"] = {{"nodes", n.nodes},
                  {"edges", n.edges},
                  {"wcc_count", n.wcc_count},
                  {"wcc_diameter_ge2", n.wcc_diameter_ge2},
                  {"mean_diameter", n.mean_diameter},
                  {"std_diameter", n.std_diameter},
                  {"degree_std", n.degree_std},
                  {"density", n.density}};
  return j;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(2);
  os << v;
  return os.str();
}

std::string pad(std::string s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::string render_stats(const GraphStats& stats) {
  std::ostringstream os;
  os << pad("Node Class", 18, true) << pad("# Nodes", 10, false) << pad("Avg In-Degree", 15, false)
     << pad("Avg Out-Degree", 16, false) << pad("# Self-Loops", 14, false) << '\n';
  for (const auto& s : stats.by_label) {
    os << pad(std::string(to_string(s.label)), 18, true) << pad(std::to_string(s.nodes), 10, false)
       << pad(fixed(s.avg_in_degree, 2), 15, false) << pad(fixed(s.avg_out_degree, 2), 16, false)
       << pad(std::to_string(s.self_loops), 14, false) << '\n';
  }
  os << '\n'
     << pad("Edge Type", 18, true) << pad("# Edges", 10, false) << pad("# Pairs", 10, false)
     << pad("Avg Multiplicity", 18, false) << '\n';
  for (const auto& s : stats.by_kind) {
    os << pad(std::string(to_string(s.kind)), 18, true) << pad(std::to_string(s.edges), 10, false)
       << pad(std::to_string(s.distinct_pairs), 10, false) << pad(fixed(s.multiplicity, 2), 18, false) << '\n';
  }
  const auto& n = stats.network;
  os << '\n'
     << pad("Number of Nodes", 34, true) << n.nodes << '\n'
     << pad("Number of Edges", 34, true) << n.edges << '\n'
     << pad("Number of WCCs", 34, true) << n.wcc_count << '\n'
     << pad("Number of WCCs with diameter >= 2", 34, true) << n.wcc_diameter_ge2 << '\n'
     << pad("Avg. Diameter of WCCs (>= 2)", 34, true) << fixed(n.mean_diameter, 2) << '\n'
     << pad("Std. Dev. of Diameter", 34, true) << fixed(n.std_diameter, 2) << '\n'
     << pad("Std. Dev. of Degree", 34, true) << fixed(n.degree_std, 2) << '\n'
     << pad("Graph Density", 34, true) << sci(n.density) << '\n';
  return os.str();
}

// --- traversal -------------------------------------------------------------

std::vector<ReasoningPath> reasoning_paths(const Graph& g, std::string_view fact_id, std::size_t limit,
                                           bool include_partial) {
  g.require_frozen();
  auto fi = g.index_of(fact_id);
  if (!fi) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(fact_id) + "'");
  if (g.node(*fi).label != NodeLabel::Fact) {
    throw Error(ErrorCode::WrongLabel, "node '" + std::string(fact_id) + "' is not a Fact");
  }
  std::vector<ReasoningPath> out;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  auto emit = [&](std::size_t a, std::size_t n, std::size_t p) {
    if (out.size() >= limit) return;
    if (!seen.emplace(a, n, p).second) return;
    ReasoningPath path{g.node(*fi).node_id, g.node(a).node_id, std::nullopt, std::nullopt};
    if (n != SIZE_MAX) path.norm = g.node(n).node_id;
    if (p != SIZE_MAX) path.provision = g.node(p).node_id;
    out.push_back(std::move(path));
  };
  for (auto e : g.out_edges(*fi)) {
    if (g.edge(e).kind != EdgeType::ToFact) continue;
    auto a = g.dst_index(e);
    bool any_norm = false;
    for (auto e2 : g.in_edges(a)) {
      if (g.edge(e2).kind != EdgeType::AppliesNorm) continue;
      any_norm = true;
      auto n = g.src_index(e2);
      bool any_provision = false;
      for (auto e3 : g.in_edges(n)) {
        if (g.edge(e3).kind != EdgeType::DerivesNorm) continue;
        any_provision = true;
        emit(a, n, g.src_index(e3));
      }
      if (!any_provision && include_partial) emit(a, n, SIZE_MAX);
    }
    if (!any_norm && include_partial) emit(a, SIZE_MAX, SIZE_MAX);
  }
  return out;
}

// --- JSON-LD ---------------------------------------------------------------

namespace {

constexpr std::string_view kNodePrefix = "node:";
constexpr std::string_view kNodeBase = "urn:lkg:node:";

std::string_view property_for(EdgeType kind) {
  switch (kind) {
    case EdgeType::AppliesNorm: return "LKG:appliesNorm";
    case EdgeType::ToFact: return "LKG:toFact";
    case EdgeType::DerivesNorm: return "LKG:derivesNorm";
    case EdgeType::FactToFact: return "LKG:supportsFact";
    case EdgeType::NormToNorm: return "LKG:supportsNorm";
  }
  return "";
}

// The subject of the property: Application for appliesNorm/toFact, the
// source node otherwise.
bool subject_is_target(EdgeType kind) { return kind == EdgeType::AppliesNorm || kind == EdgeType::ToFact; }

constexpr EdgeType kPropertyOrder[] = {EdgeType::AppliesNorm, EdgeType::ToFact, EdgeType::DerivesNorm,
                                       EdgeType::FactToFact, EdgeType::NormToNorm};

json jsonld_context(bool with_extension) {
  json ctx = {{"LKG", kLkgNamespace},
              {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
              {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
              {"owl", "http://www.w3.org/2002/07/owl#"},
              {"schema", "https://schema.org/"},
              {"node", kNodeBase}};
  for (auto kind : kPropertyOrder) {
    if (is_canonical(kind) || with_extension) ctx[std::string(property_for(kind))] = {{"@type", "@id"}};
  }
  return ctx;
}

std::string node_iri(const std::string& id) { return std::string(kNodePrefix) + id; }

std::string strip_iri(const std::string& iri) {
  if (iri.rfind(kNodePrefix, 0) == 0) return iri.substr(kNodePrefix.size());
  if (iri.rfind(kNodeBase, 0) == 0) return iri.substr(kNodeBase.size());
  return iri;
}

}  // namespace

json export_jsonld(const Graph& g) {
  bool extended = false;
  bool derives = false;
  for (const auto& e : g.edges()) {
    extended = extended || !is_canonical(e.kind);
    derives = derives || e.kind == EdgeType::DerivesNorm;
  }
  json doc;
  doc["@context"] = jsonld_context(extended);
  if (g.node_count() == 0) return doc;

  json graph = json::array();
  if (derives) {
    graph.push_back({{"@id", "LKG:derivesNorm"},
                     {"@type", "rdf:Property"},
                     {"rdfs:label", "derives norm"},
                     {"rdfs:domain", "LKG:Provision"},
                     {"rdfs:range", "LKG:LegalNorm"},
                     {"rdfs:comment", "Extension property: not part of the base schema"}});
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(i);
    json obj = {{"@id", node_iri(n.node_id)},
                {"@type", "LKG:" + std::string(to_string(n.label))},
                {"schema:text", n.text},
                {"LKG:docId", n.doc_id},
                {"LKG:segmentId", n.segment_id}};
    if (n.provision) obj["LKG:provision"] = canonical_string(*n.provision);
    for (auto kind : kPropertyOrder) {
      json refs = json::array();
      if (subject_is_target(kind)) {
        for (auto e : g.in_edges(i)) {
          if (g.edge(e).kind == kind) refs.push_back(node_iri(g.edge(e).src));
        }
      } else {
        for (auto e : g.out_edges(i)) {
          if (g.edge(e).kind == kind) refs.push_back(node_iri(g.edge(e).dst));
        }
      }
      if (!refs.empty()) obj[std::string(property_for(kind))] = std::move(refs);
    }
    graph.push_back(std::move(obj));
  }
  doc["@graph"] = std::move(graph);
  return doc;
}

Graph import_jsonld(const json& doc, GraphOptions options) {
  auto violation = [](const std::string& msg) { return Error(ErrorCode::SchemaViolation, msg); };
  if (!doc.is_object() || !doc.contains("@context")) throw violation("document without @context");
  Graph g(options);
  if (!doc.contains("@graph")) {
    g.freeze();
    return g;
  }
  const auto& items = doc.at("@graph");
  if (!items.is_array()) throw violation("@graph must be an array");

  static const std::set<std::string, std::less<>> kNodeKeys = {
      "@id", "@type", "schema:text", "LKG:docId", "LKG:segmentId", "LKG:provision", "LKG:appliesNorm",
      "LKG:toFact", "LKG:derivesNorm", "LKG:supportsFact", "LKG:supportsNorm"};

  std::vector<const json*> node_objects;
  for (const auto& item : items) {
    if (!item.is_object()) throw violation("@graph entries must be objects");
    auto type = item.value("@type", std::string());
    if (type == "rdf:Property" || type == "owl:ObjectProperty" || type == "owl:Class") continue;
    node_objects.push_back(&item);
  }

  try {
    for (const auto* obj : node_objects) {
      for (const auto& [key, _] : obj->items()) {
        if (kNodeKeys.count(key) == 0) throw violation("unknown property '" + key + "'");
      }
      auto type = obj->value("@type", std::string());
      if (type.rfind("LKG:", 0) != 0) throw violation("unknown class '" + type + "'");
      auto label = node_label_from_string(std::string_view(type).substr(4));
      if (!label) throw violation("unknown class '" + type + "'");
      LkgNode n;
      n.node_id = strip_iri(obj->at("@id").get<std::string>());
      n.label = *label;
      n.text = obj->value("schema:text", std::string());
      n.doc_id = obj->value("LKG:docId", std::string());
      n.segment_id = obj->value("LKG:segmentId", std::string());
      if (obj->contains("LKG:provision")) {
        auto pid = parse_canonical(obj->at("LKG:provision").get<std::string>());
        if (!pid) throw violation("malformed provision on '" + n.node_id + "'");
        n.provision = std::move(*pid);
      }
      g.add_node(std::move(n));
    }
    for (const auto* obj : node_objects) {
      auto subject = strip_iri(obj->at("@id").get<std::string>());
      for (auto kind : kPropertyOrder) {
        auto prop = std::string(property_for(kind));
        if (!obj->contains(prop)) continue;
        const auto& refs = obj->at(prop);
        if (!refs.is_array()) throw violation(prop + " must be an array");
        for (const auto& ref : refs) {
          std::string other = strip_iri(ref.is_object() ? ref.at("@id").get<std::string>() : ref.get<std::string>());
          if (!g.index_of(other)) throw violation("dangling reference '" + other + "'");
          LkgEdge e;
          e.kind = kind;
          e.src = subject_is_target(kind) ? other : subject;
          e.dst = subject_is_target(kind) ? subject : other;
          e.provenance = Provenance::Imported;
          g.add_edge(std::move(e));
        }
      }
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::SchemaViolation) throw;
    throw violation(err.what());
  } catch (const json::exception& err) {
    throw violation(err.what());
  }
  g.freeze();
  return g;
}

// --- snapshot --------------------------------------------------------------

json snapshot_to_json(const Graph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes()) {
    json o = {{"id", n.node_id},
              {"label", to_string(n.label)},
              {"text", n.text},
              {"doc", n.doc_id},
              {"segment", n.segment_id}};
    if (n.provision) o["provision"] = canonical_string(*n.provision);
    nodes.push_back(std::move(o));
  }
  json edges = json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    edges.push_back({{"id", ed.edge_id},
                     {"kind", to_string(ed.kind)},
                     {"src", g.src_index(e)},
                     {"dst", g.dst_index(e)},
                     {"provenance", to_string(ed.provenance)}});
  }
  return {{"version", kSnapshotFormat},
          {"options", {{"allow_same_category", g.options().allow_same_category}}},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

Graph snapshot_from_json(const json& j) {
  try {
    if (j.value("version", std::string()) != kSnapshotFormat) {
      throw Error(ErrorCode::InvalidFormat, "expected a " + std::string(kSnapshotFormat) + " snapshot");
    }
    GraphOptions opts;
    if (j.contains("options")) opts.allow_same_category = j["options"].value("allow_same_category", false);
    Graph g(opts);
    std::vector<std::string> ids;
    for (const auto& o : j.at("nodes")) {
      LkgNode n;
      n.node_id = o.at("id").get<std::string>();
      auto label = node_label_from_string(o.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::InvalidFormat, "unknown label in snapshot");
      n.label = *label;
      n.text = o.at("text").get<std::string>();
      n.doc_id = o.at("doc").get<std::string>();
      n.segment_id = o.at("segment").get<std::string>();
      if (o.contains("provision")) {
        auto pid = parse_canonical(o["provision"].get<std::string>());
        if (!pid) throw Error(ErrorCode::InvalidFormat, "malformed provision in snapshot");
        n.provision = std::move(*pid);
      }
      ids.push_back(g.add_node(std::move(n)));
    }
    for (const auto& o : j.at("edges")) {
      auto kind = edge_type_from_string(o.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::InvalidFormat, "unknown edge kind in snapshot");
      auto s = o.at("src").get<std::size_t>();
      auto d = o.at("dst").get<std::size_t>();
      if (s >= ids.size() || d >= ids.size()) throw Error(ErrorCode::InvalidFormat, "edge index out of range");
      LkgEdge e;
      e.edge_id = o.value("id", std::string());
      e.kind = *kind;
      e.src = ids[s];
      e.dst = ids[d];
      e.provenance = provenance_from_string(o.value("provenance", std::string("imported")));
      g.add_edge(std::move(e));
    }
    g.freeze();
    return g;
  } catch (const json::exception& err) {
    throw Error(ErrorCode::InvalidFormat, err.what());
  }
}

void save_snapshot(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << snapshot_to_json(g).dump() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

Graph load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& err) {
    throw Error(ErrorCode::InvalidFormat, path + ": " + err.what());
  }
  return snapshot_from_json(j);
}

}  // namespace lkg

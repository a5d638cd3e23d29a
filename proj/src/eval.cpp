#include "lkg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/prompts.hpp"
#include "lkg/search.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

// --- gold ------------------------------------------------------------------

std::size_t GoldSet::total() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.provisions.size();
  return n;
}

const GoldQuery* GoldSet::find(std::string_view fact_id) const {
  for (const auto& q : queries) {
    if (q.fact_id == fact_id) return &q;
  }
  return nullptr;
}

GoldSet build_gold(const Graph& graph) {
  graph.require_frozen();
  GoldSet gold;
  for (const auto& n : graph.nodes()) {
    if (n.label != NodeLabel::Fact) continue;
    GoldQuery q{n.node_id, n.doc_id, {}};
    for (const auto& p : reasoning_paths(graph, n.node_id, std::numeric_limits<std::size_t>::max())) {
      q.provisions.insert(*graph.find_node(*p.provision)->provision);
    }
    if (!q.provisions.empty()) gold.queries.push_back(std::move(q));
  }
  return gold;
}

// --- predictors ------------------------------------------------------------

std::string PredictorSpec::name() const {
  switch (kind) {
    case PredictorKind::LkgRetrieval: return "LKG Retrieval (k=" + std::to_string(k) + ")";
    case PredictorKind::LlmSimple: return "LLM Simple";
    case PredictorKind::LlmWithContext: return "LLM With Context";
    case PredictorKind::LlmWithRag: return "LLM With RAG (m=" + std::to_string(m) + ")";
  }
  return {};
}

std::string PredictorSpec::token() const {
  switch (kind) {
    case PredictorKind::LkgRetrieval: return "lkg:k=" + std::to_string(k);
    case PredictorKind::LlmSimple: return "llm-simple";
    case PredictorKind::LlmWithContext: return "llm-context";
    case PredictorKind::LlmWithRag: return "llm-rag:m=" + std::to_string(m);
  }
  return {};
}

namespace {

std::size_t parse_count(std::string_view token, std::string_view prefix) {
  auto v = token.substr(prefix.size());
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || n == 0) {
    throw Error(ErrorCode::InvalidParams, "bad predictor parameter in '" + std::string(token) + "'");
  }
  return n;
}

}  // namespace

std::vector<PredictorSpec> parse_predictors(std::string_view list) {
  std::vector<PredictorSpec> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    auto token = text::trim(list.substr(pos, end - pos));
    pos = end + 1;
    if (token.empty()) continue;
    PredictorSpec spec;
    if (token == "lkg") {
      spec.kind = PredictorKind::LkgRetrieval;
    } else if (token.rfind("lkg:k=", 0) == 0) {
      spec.kind = PredictorKind::LkgRetrieval;
      spec.k = parse_count(token, "lkg:k=");
    } else if (token == "llm-simple") {
      spec.kind = PredictorKind::LlmSimple;
    } else if (token == "llm-context") {
      spec.kind = PredictorKind::LlmWithContext;
    } else if (token == "llm-rag") {
      spec.kind = PredictorKind::LlmWithRag;
    } else if (token.rfind("llm-rag:m=", 0) == 0) {
      spec.kind = PredictorKind::LlmWithRag;
      spec.m = parse_count(token, "llm-rag:m=");
    } else {
      throw Error(ErrorCode::InvalidParams, "unknown predictor '" + std::string(token) + "'");
    }
    out.push_back(spec);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidParams, "no predictors given");
  return out;
}

std::string MockBaselineProvider::complete(std::string_view prompt) {
  json surfaces = json::array();
  std::set<std::string> seen;
  for (const auto& p : parse_provision_ref(prompt)) {
    if (seen.insert(p.surface).second) surfaces.push_back(p.surface);
  }
  return json{{"provisions", surfaces}}.dump();
}

std::string build_baseline_prompt(PredictorKind kind, std::string_view fact, std::string_view overview,
                                  const std::vector<std::string>& passages) {
  switch (kind) {
    case PredictorKind::LlmSimple: return prompts::render("baseline_simple", {{"FACT", std::string(fact)}});
    case PredictorKind::LlmWithContext: {
      std::string ov = text::trim(overview).empty() ? "(none)" : std::string(text::trim(overview));
      return prompts::render("baseline_context", {{"OVERVIEW", ov}, {"FACT", std::string(fact)}});
    }
    case PredictorKind::LlmWithRag: {
      std::string joined;
      for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i) joined += "\n\n";
        joined += "[" + std::to_string(i + 1) + "] " + passages[i];
      }
      if (passages.empty()) joined = "(none)";
      return prompts::render("baseline_rag", {{"PASSAGES", joined}, {"FACT", std::string(fact)}});
    }
    case PredictorKind::LkgRetrieval: break;
  }
  throw Error(ErrorCode::InvalidParams, "retrieval predictor has no prompt");
}

std::vector<SectionPassage> corpus_passages(const std::vector<JudgmentDoc>& corpus) {
  std::vector<SectionPassage> out;
  for (const auto& doc : corpus) {
    for (const Section* s : sections_in_reading_order(doc)) {
      auto body = section_text(*s);
      if (text::trim(body).empty()) continue;
      out.push_back({doc.doc_id, std::move(body)});
    }
  }
  return out;
}

std::vector<std::size_t> top_passages(const std::vector<std::vector<float>>& passage_vectors,
                                      const std::vector<SectionPassage>& passages, std::span<const float> query,
                                      std::size_t m, std::string_view exclude_doc) {
  std::vector<std::pair<float, std::size_t>> scored;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (passages[i].doc_id == exclude_doc) continue;
    scored.emplace_back(dot(passage_vectors[i], query), i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scored.size() && i < m; ++i) out.push_back(scored[i].second);
  return out;
}

namespace {

Prediction predict_one(const GoldQuery& q, std::size_t k, const Graph& graph, const VectorIndex& index,
                       const Embedder& embedder) {
  SearchQuery query;
  query.fact_id = q.fact_id;
  query.k = k;
  query.mask = true;
  Prediction p{q.fact_id, {}};
  for (const auto& hit : retrieve_provisions(query, graph, index, embedder)) p.provisions.insert(hit.provision);
  return p;
}

}  // namespace

std::vector<Prediction> predict_lkg(const GoldSet& gold, std::size_t k, const Graph& graph, const VectorIndex& index,
                                    const Embedder& embedder) {
  const auto n = static_cast<std::ptrdiff_t>(gold.queries.size());
  std::vector<Prediction> out(gold.queries.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = predict_one(gold.queries[i], k, graph, index, embedder);
    } catch (...) {
#pragma omp critical(lkg_eval_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<Prediction> predict_lkg_serial(const GoldSet& gold, std::size_t k, const Graph& graph,
                                           const VectorIndex& index, const Embedder& embedder) {
  std::vector<Prediction> out;
  out.reserve(gold.queries.size());
  for (const auto& q : gold.queries) out.push_back(predict_one(q, k, graph, index, embedder));
  return out;
}

PredictorRun run_predictor(const GoldSet& gold, const PredictorSpec& spec, const EvalResources& res) {
  PredictorRun run;
  if (spec.kind == PredictorKind::LkgRetrieval) {
    if (!res.graph || !res.index || !res.embedder) {
      throw Error(ErrorCode::ResourceMissing, "retrieval needs a graph, an index and an embedder");
    }
    run.predictions = predict_lkg(gold, spec.k, *res.graph, *res.index, *res.embedder);
    return run;
  }
  if (!res.graph || !res.provider || !res.corpus) {
    throw Error(ErrorCode::ResourceMissing, "LLM baselines need a graph, a provider and the corpus");
  }
  if (spec.kind == PredictorKind::LlmWithRag && !res.embedder) {
    throw Error(ErrorCode::ResourceMissing, "the RAG baseline needs an embedder");
  }

  std::map<std::string_view, const JudgmentDoc*> docs;
  for (const auto& d : *res.corpus) docs[d.doc_id] = &d;
  std::map<std::string_view, AliasTable> aliases;
  for (const auto& q : gold.queries) {
    auto it = docs.find(q.doc_id);
    if (it == docs.end()) throw Error(ErrorCode::ResourceMissing, "corpus lacks document '" + q.doc_id + "'");
    if (!aliases.count(q.doc_id)) aliases.emplace(q.doc_id, document_aliases(*it->second, res.normalize));
  }

  std::vector<SectionPassage> passages;
  std::vector<std::vector<float>> passage_vectors;
  if (spec.kind == PredictorKind::LlmWithRag) {
    passages = corpus_passages(*res.corpus);
    for (const auto& p : passages) passage_vectors.push_back(res.embedder->embed(p.text));
  }

  const auto& queries = gold.queries;
  run.predictions.resize(queries.size());
  std::vector<std::string> warnings(queries.size());
  auto accept = [](const json& j) { return j.is_object() && j.contains("provisions") && j["provisions"].is_array(); };
  auto work = [&](std::size_t i) {
    const auto& q = queries[i];
    run.predictions[i].fact_id = q.fact_id;
    const auto* fact = res.graph->find_node(q.fact_id);
    const auto& doc = *docs.at(q.doc_id);
    std::vector<std::string> retrieved;
    if (spec.kind == PredictorKind::LlmWithRag) {
      auto v = res.embedder->embed(fact->text);
      for (auto idx : top_passages(passage_vectors, passages, v, spec.m, q.doc_id)) {
        retrieved.push_back(passages[idx].text);
      }
    }
    auto prompt = build_baseline_prompt(spec.kind, fact->text, doc.case_overview, retrieved);
    json reply;
    try {
      reply = complete_json(*res.provider, prompt, res.max_retries, accept);
    } catch (const Error& err) {
      warnings[i] = q.fact_id + ": " + err.what();
      return;
    }
    const auto& table = aliases.at(q.doc_id);
    for (const auto& item : reply["provisions"]) {
      if (!item.is_string()) continue;
      auto r = resolve(parse_provision_ref(item.get<std::string>()), table, nullptr, res.normalize.catalog);
      for (auto& id : r.resolved) run.predictions[i].provisions.insert(std::move(id));
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, res.max_in_flight)),
                                             std::max<std::size_t>(1, queries.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < queries.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& w : warnings) {
    if (!w.empty()) run.warnings.push_back(std::move(w));
  }
  return run;
}

// --- metrics ---------------------------------------------------------------

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsRow micro_row(std::string method, std::size_t pred, std::size_t tp, std::size_t gold_total) {
  MetricsRow row;
  row.method = std::move(method);
  row.pred = pred;
  row.tp = tp;
  row.micro_precision = ratio(tp, pred);
  row.micro_recall = ratio(tp, gold_total);
  row.micro_f1 = f1_score(row.micro_precision, row.micro_recall);
  return row;
}

MetricsRow compute_metrics(std::string method, const std::vector<Prediction>& predictions, const GoldSet& gold) {
  std::map<std::string_view, const GoldQuery*> by_fact;
  for (const auto& q : gold.queries) by_fact[q.fact_id] = &q;

  struct Counts {
    std::size_t pred = 0, tp = 0, gold = 0;
  };
  std::map<std::string_view, Counts> per_doc;
  for (const auto& q : gold.queries) per_doc[q.doc_id].gold += q.provisions.size();

  std::size_t pred = 0, tp = 0;
  for (const auto& p : predictions) {
    auto it = by_fact.find(p.fact_id);
    if (it == by_fact.end()) throw Error(ErrorCode::UnknownQuery, "prediction for unknown query '" + p.fact_id + "'");
    const auto& g = it->second->provisions;
    std::size_t hit = 0;
    for (const auto& id : p.provisions) hit += g.count(id);
    auto& c = per_doc[it->second->doc_id];
    c.pred += p.provisions.size();
    c.tp += hit;
    pred += p.provisions.size();
    tp += hit;
  }

  auto row = micro_row(std::move(method), pred, tp, gold.total());
  if (!per_doc.empty()) {
    double sum_p = 0.0, sum_r = 0.0;
    for (const auto& [doc, c] : per_doc) {
      sum_p += ratio(c.tp, c.pred);
      sum_r += ratio(c.tp, c.gold);
    }
    row.macro_precision = sum_p / static_cast<double>(per_doc.size());
    row.macro_recall = sum_r / static_cast<double>(per_doc.size());
    row.macro_f1 = f1_score(row.macro_precision, row.macro_recall);
  }
  return row;
}

namespace {

constexpr const char* kReportColumns[] = {"Method",          "Pred",           "TP",       "Macro Recall",
                                          "Micro Recall",    "Macro Precision", "Micro Precision",
                                          "Macro F1",        "Micro F1"};

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::vector<std::string> row_cells(const MetricsRow& r) {
  return {r.method,
          std::to_string(r.pred),
          std::to_string(r.tp),
          fixed3(r.macro_recall),
          fixed3(r.micro_recall),
          fixed3(r.macro_precision),
          fixed3(r.micro_precision),
          fixed3(r.macro_f1),
          fixed3(r.micro_f1)};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = text::codepoint_count(header[c]);
    for (const auto& r : rows) width[c] = std::max(width[c], text::codepoint_count(r[c]));
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto pad = std::string(width[c] - text::codepoint_count(cells[c]), ' ');
      if (c) os << "  ";
      if (c == 0) {
        os << cells[c] << pad;
      } else {
        os << pad << cells[c];
      }
    }
    os << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) emit(r);
  return os.str();
}

}  // namespace

std::string render_report_text(const MetricsReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : report.rows) rows.push_back(row_cells(r));
  auto out = render_table(std::vector<std::string>(std::begin(kReportColumns), std::end(kReportColumns)), rows);
  return out + "Gold labels: " + std::to_string(report.gold_total) + '\n';
}

std::string render_report_csv(const MetricsReport& report) {
  std::string out;
  for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
    if (c) out += ',';
    out += kReportColumns[c];
  }
  out += '\n';
  for (const auto& r : report.rows) {
    auto cells = row_cells(r);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += csv_field(cells[c]);
    }
    out += '\n';
  }
  return out;
}

MetricsReport parse_report_csv(std::string_view csv) {
  MetricsReport report;
  std::istringstream in{std::string(csv)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != std::size(kReportColumns)) throw Error(ErrorCode::InvalidFormat, "report row has wrong width");
    if (header) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c] != kReportColumns[c]) throw Error(ErrorCode::InvalidFormat, "unexpected report header");
      }
      header = false;
      continue;
    }
    MetricsRow r;
    try {
      r.method = cells[0];
      r.pred = std::stoull(cells[1]);
      r.tp = std::stoull(cells[2]);
      r.macro_recall = std::stod(cells[3]);
      r.micro_recall = std::stod(cells[4]);
      r.macro_precision = std::stod(cells[5]);
      r.micro_precision = std::stod(cells[6]);
      r.macro_f1 = std::stod(cells[7]);
      r.micro_f1 = std::stod(cells[8]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidFormat, "non-numeric report cell");
    }
    report.rows.push_back(std::move(r));
  }
  if (header) throw Error(ErrorCode::InvalidFormat, "report has no header");
  return report;
}

// --- annotation agreement --------------------------------------------------

std::set<std::string> AnnotationSet::doc_ids() const {
  std::set<std::string> out;
  for (const auto& n : nodes) out.insert(n.doc_id);
  return out;
}

AnnotationSet annotations_from_graph(const Graph& graph) {
  // Provision nodes that share a span (one per resolved id) collapse into
  // one annotation.
  AnnotationSet out;
  std::map<std::tuple<std::string, std::string, NodeLabel, std::string>, std::size_t> key_to_index;
  std::vector<std::size_t> node_map(graph.nodes().size());
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto& n = graph.node(i);
    auto key = std::make_tuple(n.doc_id, n.segment_id, n.label, n.text);
    auto [it, inserted] = key_to_index.emplace(key, out.nodes.size());
    if (inserted) out.nodes.push_back({n.doc_id, n.segment_id, n.label, n.text});
    node_map[i] = it->second;
  }
  std::set<std::tuple<EdgeType, std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    const auto& e = graph.edge(i);
    auto s = node_map[graph.src_index(i)];
    auto d = node_map[graph.dst_index(i)];
    if (seen.emplace(e.kind, s, d).second) out.edges.push_back({e.kind, s, d});
  }
  return out;
}

AnnotationSet annotations_from_gold(const std::vector<JudgmentDoc>& docs) {
  AnnotationSet out;
  for (const auto& doc : docs) {
    if (!doc.gold) continue;
    const auto base = out.nodes.size();
    for (const auto& n : doc.gold->nodes) out.nodes.push_back({doc.doc_id, n.segment_id, n.label, n.text});
    for (const auto& e : doc.gold->edges) out.edges.push_back({e.type, base + e.src, base + e.dst});
  }
  return out;
}

namespace {

double span_overlap(const std::string& a, const std::string& b) {
  if (text::normalize_whitespace(a) == text::normalize_whitespace(b)) return 1.0;
  return text::token_overlap(a, b);
}

AgreementRow make_row(std::string category, std::size_t tp, std::size_t fp, std::size_t fn) {
  AgreementRow r{std::move(category), tp, fp, fn, 0.0, 0.0, 0.0};
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

std::string_view label_category(NodeLabel label) {
  switch (label) {
    case NodeLabel::Provision: return "Provision";
    case NodeLabel::LegalNorm: return "Norm";
    case NodeLabel::LegalApplication: return "Application";
    case NodeLabel::Fact: return "Fact";
  }
  return "";
}

std::string_view edge_category(EdgeType kind) {
  switch (kind) {
    case EdgeType::DerivesNorm: return "Provision -> Norm";
    case EdgeType::AppliesNorm: return "Norm -> Application";
    case EdgeType::ToFact: return "Application -> Fact";
    case EdgeType::FactToFact: return "Fact -> Fact";
    case EdgeType::NormToNorm: return "Norm -> Norm";
  }
  return "";
}

}  // namespace

AgreementReport compare_annotations(const AnnotationSet& system, const AnnotationSet& reference,
                                    const MatchOptions& options) {
  if (system.doc_ids() != reference.doc_ids()) {
    throw Error(ErrorCode::DocumentMismatch, "system and reference cover different documents");
  }
  using Bucket = std::tuple<std::string, std::string, NodeLabel>;
  std::map<Bucket, std::vector<std::size_t>> ref_buckets;
  for (std::size_t j = 0; j < reference.nodes.size(); ++j) {
    const auto& n = reference.nodes[j];
    ref_buckets[{n.doc_id, n.segment_id, n.label}].push_back(j);
  }
  // Greedy one-to-one assignment, best overlap first.
  struct Pair {
    double overlap;
    std::size_t sys, ref;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < system.nodes.size(); ++i) {
    const auto& n = system.nodes[i];
    auto it = ref_buckets.find({n.doc_id, n.segment_id, n.label});
    if (it == ref_buckets.end()) continue;
    for (auto j : it->second) {
      double o = span_overlap(n.text, reference.nodes[j].text);
      if (o >= options.min_overlap) pairs.push_back({o, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.sys != b.sys) return a.sys < b.sys;
    return a.ref < b.ref;
  });
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> sys_to_ref(system.nodes.size(), kNone);
  std::vector<bool> ref_used(reference.nodes.size(), false);
  for (const auto& p : pairs) {
    if (sys_to_ref[p.sys] != kNone || ref_used[p.ref]) continue;
    sys_to_ref[p.sys] = p.ref;
    ref_used[p.ref] = true;
  }

  AgreementReport report;
  for (auto label : {NodeLabel::Provision, NodeLabel::LegalNorm, NodeLabel::LegalApplication, NodeLabel::Fact}) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < system.nodes.size(); ++i) {
      if (system.nodes[i].label != label) continue;
      (sys_to_ref[i] != kNone ? tp : fp)++;
    }
    for (std::size_t j = 0; j < reference.nodes.size(); ++j) {
      if (reference.nodes[j].label == label && !ref_used[j]) ++fn;
    }
    report.nodes.push_back(make_row(std::string(label_category(label)), tp, fp, fn));
  }

  std::multiset<std::tuple<EdgeType, std::size_t, std::size_t>> ref_edges;
  for (const auto& e : reference.edges) ref_edges.emplace(e.kind, e.src, e.dst);
  std::map<EdgeType, std::size_t> tp, fp, ref_count;
  for (const auto& e : reference.edges) ref_count[e.kind]++;
  for (const auto& e : system.edges) {
    auto s = sys_to_ref[e.src];
    auto d = sys_to_ref[e.dst];
    auto it = (s == kNone || d == kNone) ? ref_edges.end() : ref_edges.find({e.kind, s, d});
    if (it != ref_edges.end()) {
      ref_edges.erase(it);
      tp[e.kind]++;
    } else {
      fp[e.kind]++;
    }
  }
  for (auto kind : kCanonicalEdgeTypes) {
    report.edges.push_back(make_row(std::string(edge_category(kind)), tp[kind], fp[kind], ref_count[kind] - tp[kind]));
  }
  return report;
}

std::string render_agreement(const AgreementReport& report) {
  auto rows_of = [](const std::vector<AgreementRow>& rows) {
    std::vector<std::vector<std::string>> out;
    char buf[32];
    for (const auto& r : rows) {
      std::vector<std::string> cells{r.category, std::to_string(r.tp), std::to_string(r.fp), std::to_string(r.fn)};
      for (double v : {r.precision, r.recall, r.f1}) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        cells.emplace_back(buf);
      }
      out.push_back(std::move(cells));
    }
    return out;
  };
  return render_table({"Node Type", "TP", "FP", "FN", "Precision", "Recall", "F1"}, rows_of(report.nodes)) + "\n" +
         render_table({"Edge Type", "TP", "FP", "FN", "Precision", "Recall", "F1"}, rows_of(report.edges));
}

// --- run manifest ----------------------------------------------------------

json manifest_to_json(const RunManifest& m) {
  json preds = json::array();
  for (const auto& p : m.predictors) {
    json o = {{"predictor", p.token()}, {"name", p.name()}};
    if (p.kind == PredictorKind::LkgRetrieval) o["k"] = p.k;
    if (p.kind == PredictorKind::LlmWithRag) o["m"] = p.m;
    preds.push_back(std::move(o));
  }
  json out = {{"predictors", std::move(preds)},
              {"graph", m.graph_fingerprint},
              {"embedder", m.index_embedder},
              {"provider", m.provider},
              {"queries", m.queries},
              {"gold_total", m.gold_total}};
  if (m.corpus_seed) out["corpus_seed"] = *m.corpus_seed;
  return out;
}

}  // namespace lkg

#include "lkg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "lkg/error.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

AliasTable document_aliases(const JudgmentDoc& doc, const NormalizeOptions& options) {
  std::string all = doc.case_overview;
  for (const auto& s : segments_in_reading_order(doc)) {
    all += '\n';
    all += s.text;
  }
  AliasTable table = build_alias_table(all);
  if (options.aliases) {
    if (auto it = options.aliases->find(doc.doc_id); it != options.aliases->end()) {
      for (const auto& [alias, title] : it->second.aliases) table.aliases[alias] = title;
      if (it->second.default_title) table.default_title = it->second.default_title;
    }
  }
  return table;
}

void normalize_extraction(DocExtraction& extraction, const JudgmentDoc& doc, const NormalizeOptions& options,
                          Provider* provider, int max_retries) {
  auto aliases = document_aliases(doc, options);
  extraction.provisions.assign(extraction.candidates.size(), {});
  for (std::size_t i = 0; i < extraction.candidates.size(); ++i) {
    const auto& c = extraction.candidates[i];
    if (c.label != NodeLabel::Provision) continue;
    auto partials = parse_provision_ref(c.text);
    if (partials.empty()) {
      extraction.warnings.push_back(
          {WarningKind::UnresolvedReference, c.segment_id, c.text, "no provision reference recognized"});
      continue;
    }
    auto r = resolve(partials, aliases, provider, options.catalog, max_retries);
    for (const auto& w : r.warnings) {
      extraction.warnings.push_back({WarningKind::UnresolvedReference, c.segment_id, c.text, w});
    }
    std::vector<ProvisionId> ids;
    for (auto& id : r.resolved) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
    }
    extraction.provisions[i] = std::move(ids);
  }
}

std::vector<DocExtraction> extract_corpus(const std::vector<JudgmentDoc>& docs, const ProviderConfig& config,
                                          Provider* provider, const NormalizeOptions& options) {
  struct Item {
    std::size_t doc;
    const Section* section;
    ExtractionResult result;
    bool failed = false;
    std::string failure;
    std::exception_ptr error;
  };
  std::vector<Item> items;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (config.mode == ProviderMode::Oracle && !docs[d].gold) {
      throw Error(ErrorCode::OracleMissing, "document '" + docs[d].doc_id + "' has no gold annotations");
    }
    for (const Section* s : sections_in_reading_order(docs[d])) {
      if (s->paragraphs.empty()) continue;
      items.push_back(Item{d, s, {}, false, {}, nullptr});
    }
  }

  auto run = [&](Item& it) {
    try {
      it.result = extract_nodes(docs[it.doc], *it.section, config, provider);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::MalformedOutput) {
        it.failed = true;
        it.failure = err.what();
      } else {
        it.error = std::current_exception();
      }
    } catch (...) {
      it.error = std::current_exception();
    }
  };

  const std::size_t workers =
      config.mode == ProviderMode::Remote ? static_cast<std::size_t>(std::max(1, config.max_in_flight)) : 1;
  if (workers <= 1 || items.size() <= 1) {
    for (auto& it : items) run(it);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, items.size()); ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < items.size(); i = next++) run(items[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<DocExtraction> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) out[d].doc_id = docs[d].doc_id;
  for (auto& it : items) {
    if (it.error) std::rethrow_exception(it.error);
    auto& dst = out[it.doc];
    if (it.failed) {
      std::string sid = it.section->heading ? it.section->heading->segment_id : dst.doc_id + ":root";
      dst.failed_sections.push_back(sid);
      dst.warnings.push_back({WarningKind::SectionFailed, sid, "", it.failure});
      continue;
    }
    for (auto& c : it.result.candidates) dst.candidates.push_back(std::move(c));
    for (auto& w : it.result.warnings) dst.warnings.push_back(std::move(w));
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    normalize_extraction(out[d], docs[d], options, config.mode == ProviderMode::Remote ? provider : nullptr,
                         config.max_retries);
  }
  return out;
}

namespace {

json warning_to_json(const ValidationWarning& w) {
  return {{"kind", to_string(w.kind)}, {"segment", w.segment_id}, {"text", w.text}, {"message", w.message}};
}

ValidationWarning warning_from_json(const json& j) {
  return {warning_kind_from_string(j.at("kind").get<std::string>()), j.value("segment", std::string()),
          j.value("text", std::string()), j.value("message", std::string())};
}

}  // namespace

json extraction_to_json(const std::vector<DocExtraction>& extractions) {
  json docs = json::array();
  for (const auto& x : extractions) {
    json cands = json::array();
    for (std::size_t i = 0; i < x.candidates.size(); ++i) {
      const auto& c = x.candidates[i];
      json o = {{"label", to_string(c.label)},
                {"text", c.text},
                {"segment", c.segment_id},
                {"provenance", to_string(c.provenance)}};
      if (c.gold_index) o["gold"] = *c.gold_index;
      if (i < x.provisions.size() && c.label == NodeLabel::Provision) {
        json ids = json::array();
        for (const auto& id : x.provisions[i]) ids.push_back(canonical_string(id));
        o["provisions"] = std::move(ids);
      }
      cands.push_back(std::move(o));
    }
    json warns = json::array();
    for (const auto& w : x.warnings) warns.push_back(warning_to_json(w));
    docs.push_back({{"doc_id", x.doc_id},
                    {"candidates", std::move(cands)},
                    {"warnings", std::move(warns)},
                    {"failed_sections", x.failed_sections}});
  }
  return {{"version", kExtractionFormat}, {"documents", std::move(docs)}};
}

std::vector<DocExtraction> extraction_from_json(const json& j) {
  try {
    if (j.value("version", std::string()) != kExtractionFormat) {
      throw Error(ErrorCode::InvalidFormat, "expected " + std::string(kExtractionFormat));
    }
    std::vector<DocExtraction> out;
    for (const auto& d : j.at("documents")) {
      DocExtraction x;
      x.doc_id = d.at("doc_id").get<std::string>();
      for (const auto& o : d.at("candidates")) {
        NodeCandidate c;
        auto label = node_label_from_string(o.at("label").get<std::string>());
        if (!label) throw Error(ErrorCode::InvalidFormat, "unknown label in extraction file");
        c.label = *label;
        c.text = o.at("text").get<std::string>();
        c.segment_id = o.at("segment").get<std::string>();
        c.provenance = provenance_from_string(o.value("provenance", std::string("imported")));
        if (o.contains("gold")) c.gold_index = o["gold"].get<std::size_t>();
        std::vector<ProvisionId> ids;
        if (o.contains("provisions")) {
          for (const auto& s : o["provisions"]) {
            auto id = parse_canonical(s.get<std::string>());
            if (!id) throw Error(ErrorCode::InvalidFormat, "malformed provision id in extraction file");
            ids.push_back(std::move(*id));
          }
        }
        x.candidates.push_back(std::move(c));
        x.provisions.push_back(std::move(ids));
      }
      if (d.contains("warnings")) {
        for (const auto& w : d["warnings"]) x.warnings.push_back(warning_from_json(w));
      }
      if (d.contains("failed_sections")) x.failed_sections = d["failed_sections"].get<std::vector<std::string>>();
      out.push_back(std::move(x));
    }
    return out;
  } catch (const json::exception& err) {
    throw Error(ErrorCode::InvalidFormat, err.what());
  }
}

BuildResult build_graph(const std::vector<JudgmentDoc>& docs, const std::vector<DocExtraction>& extractions,
                        LinkContext ctx, GraphOptions options) {
  std::map<std::string_view, const DocExtraction*> by_doc;
  for (const auto& x : extractions) by_doc[x.doc_id] = &x;

  BuildResult out{Graph(options), {}};
  std::vector<std::vector<std::vector<std::string>>> gold_maps(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    auto it = by_doc.find(doc.doc_id);
    if (it == by_doc.end()) continue;
    const auto& x = *it->second;
    if (doc.gold) gold_maps[d].resize(doc.gold->nodes.size());
    for (std::size_t i = 0; i < x.candidates.size(); ++i) {
      const auto& c = x.candidates[i];
      if (!find_segment(doc, c.segment_id)) {
        throw Error(ErrorCode::InvalidFormat, "candidate refers to unknown segment '" + c.segment_id + "'");
      }
      std::vector<std::string> ids;
      if (c.label == NodeLabel::Provision) {
        if (i >= x.provisions.size()) continue;
        for (const auto& pid : x.provisions[i]) {
          ids.push_back(out.graph.add_node(LkgNode{"", c.label, c.text, doc.doc_id, c.segment_id, pid}));
        }
      } else {
        ids.push_back(out.graph.add_node(LkgNode{"", c.label, c.text, doc.doc_id, c.segment_id, std::nullopt}));
      }
      if (c.gold_index && *c.gold_index < gold_maps[d].size()) {
        auto& slot = gold_maps[d][*c.gold_index];
        slot.insert(slot.end(), ids.begin(), ids.end());
      }
    }
    for (const auto& w : x.warnings) out.warnings.push_back(w);
  }

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    if (by_doc.find(doc.doc_id) == by_doc.end()) continue;
    LinkContext doc_ctx = ctx;
    OracleEdges oracle;
    if (ctx.mode == ProviderMode::Oracle) {
      if (!doc.gold) throw Error(ErrorCode::OracleMissing, "document '" + doc.doc_id + "' has no gold annotations");
      oracle = OracleEdges(*doc.gold, gold_maps[d]);
      doc_ctx.oracle = &oracle;
    }
    DocLayout layout(doc, out.graph);
    auto linked = link_document(layout, doc_ctx);
    for (auto& e : linked.edges) out.graph.add_edge(std::move(e));
    for (auto& w : linked.warnings) out.warnings.push_back(std::move(w));
  }
  out.graph.freeze();
  return out;
}

Graph gold_graph(const std::vector<JudgmentDoc>& docs, const NormalizeOptions& options) {
  Graph g;
  for (const auto& doc : docs) {
    if (!doc.gold) continue;
    std::optional<AliasTable> aliases;
    std::vector<std::vector<std::string>> ids(doc.gold->nodes.size());
    for (std::size_t i = 0; i < doc.gold->nodes.size(); ++i) {
      const auto& n = doc.gold->nodes[i];
      if (n.label != NodeLabel::Provision) {
        ids[i].push_back(g.add_node(LkgNode{"", n.label, n.text, doc.doc_id, n.segment_id, std::nullopt}));
        continue;
      }
      std::vector<ProvisionId> pids;
      if (n.canonical) {
        pids.push_back(*n.canonical);
      } else {
        if (!aliases) aliases = document_aliases(doc, options);
        pids = resolve(parse_provision_ref(n.text), *aliases, nullptr, options.catalog).resolved;
      }
      for (const auto& pid : pids) {
        ids[i].push_back(g.add_node(LkgNode{"", n.label, n.text, doc.doc_id, n.segment_id, pid}));
      }
    }
    for (const auto& e : doc.gold->edges) {
      for (const auto& s : ids[e.src]) {
        for (const auto& d : ids[e.dst]) g.add_edge(LkgEdge{"", e.type, s, d, doc.doc_id, Provenance::Oracle});
      }
    }
  }
  g.freeze();
  return g;
}

}  // namespace lkg

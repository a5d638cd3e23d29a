#include "lkg/linker.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "lkg/error.hpp"
#include "lkg/prompts.hpp"
#include "lkg/text.hpp"

namespace lkg {

using nlohmann::json;

DocLayout::DocLayout(const JudgmentDoc& doc, const Graph& graph) {
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> where;  // segment -> (position, section)
  auto sections = sections_in_reading_order(doc);
  std::size_t position = 0;
  for (std::size_t si = 0; si < sections.size(); ++si) {
    const Section& s = *sections[si];
    if (s.heading) where[s.heading->segment_id] = {position++, si};
    for (const auto& p : s.paragraphs) where[p.segment_id] = {position++, si};
    excerpts_.push_back(section_text(s));
  }
  for (const auto& n : graph.nodes()) {
    if (n.doc_id != doc.doc_id) continue;
    auto it = where.find(n.segment_id);
    if (it == where.end()) {
      throw Error(ErrorCode::InvalidFormat, "node '" + n.node_id + "' refers to unknown segment '" + n.segment_id + "'");
    }
    nodes_.push_back(PlacedNode{n.node_id, n.label, n.text, n.segment_id, n.provision, it->second.first,
                                it->second.second});
  }
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const PlacedNode& a, const PlacedNode& b) { return a.position < b.position; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) by_id_.emplace(nodes_[i].node_id, i);
}

const PlacedNode* DocLayout::find(std::string_view node_id) const {
  auto it = by_id_.find(node_id);
  return it == by_id_.end() ? nullptr : &nodes_[it->second];
}

std::vector<const PlacedNode*> DocLayout::in_section(std::size_t section) const {
  std::vector<const PlacedNode*> out;
  for (const auto& n : nodes_) {
    if (n.section == section) out.push_back(&n);
  }
  return out;
}

LinkRequest assemble_history(const DocLayout& layout, std::string_view app_id, NodeLabel kind) {
  const auto* app = layout.find(app_id);
  if (!app) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(app_id) + "'");
  if (app->label != NodeLabel::LegalApplication) {
    throw Error(ErrorCode::WrongLabel, "node '" + std::string(app_id) + "' is not a LegalApplication");
  }
  LinkRequest req;
  req.target = app->node_id;
  req.target_text = app->text;
  req.kind = kind;
  for (const auto& n : layout.nodes()) {
    if (n.position > app->position) break;
    if (n.label != kind) continue;
    req.candidates.push_back(n.node_id);
    req.candidate_texts.push_back(n.text);
    req.candidate_sections.push_back(n.section);
    req.anchor_section = n.section;
  }
  req.source_excerpt = layout.section_excerpt(app->section);
  return req;
}

std::size_t estimate_tokens(std::string_view s) { return (text::codepoint_count(s) + 2) / 3; }

namespace {

std::string_view item_word(NodeLabel kind) {
  switch (kind) {
    case NodeLabel::Fact: return "Fact";
    case NodeLabel::LegalNorm: return "Norm";
    case NodeLabel::Provision: return "Law";
    case NodeLabel::LegalApplication: return "Application";
  }
  return "Item";
}

std::string candidate_line(NodeLabel kind, std::size_t one_based, const std::string& text) {
  return std::string(item_word(kind)) + " " + std::to_string(one_based) + ": " + text + "\n";
}

std::string_view template_for(NodeLabel kind) {
  return kind == NodeLabel::Fact ? "link_fact_application" : "link_norm_application";
}

std::string build_link_prompt(const LinkRequest& r) {
  std::string cands;
  for (std::size_t i = 0; i < r.candidates.size(); ++i) cands += candidate_line(r.kind, i + 1, r.candidate_texts[i]);
  return prompts::render(template_for(r.kind), {{"CANDIDATES", cands}, {"TARGET", "Application 1: " + r.target_text}});
}

std::vector<std::size_t> reply_indices(const json& v) {
  std::vector<std::size_t> out;
  auto take = [&out](const json& x) {
    if (x.is_number_integer() && x.get<long long>() > 0) {
      out.push_back(static_cast<std::size_t>(x.get<long long>()));
    } else if (x.is_string()) {
      if (auto n = parse_item_label(x.get<std::string>())) out.push_back(*n);
    }
  };
  if (v.is_array()) {
    for (const auto& x : v) take(x);
  } else {
    take(v);
  }
  return out;
}

}  // namespace

std::optional<std::size_t> parse_item_label(std::string_view label) {
  static const std::regex re(R"((\d+))");
  std::string s(label);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  try {
    auto n = std::stoull(m[1].str());
    if (n == 0) return std::nullopt;
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<LinkRequest> chunk_history(const LinkRequest& request, std::size_t budget_tokens) {
  LinkRequest empty = request;
  empty.candidates.clear();
  empty.candidate_texts.clear();
  empty.candidate_sections.clear();
  const std::size_t fixed = estimate_tokens(build_link_prompt(empty));

  std::vector<LinkRequest> out;
  LinkRequest cur = empty;
  std::size_t used = fixed;
  for (std::size_t i = 0; i < request.candidates.size(); ++i) {
    auto cost = estimate_tokens(candidate_line(request.kind, cur.candidates.size() + 1, request.candidate_texts[i]));
    if (!cur.candidates.empty() && used + cost > budget_tokens) {
      out.push_back(std::move(cur));
      cur = empty;
      used = fixed;
      cost = estimate_tokens(candidate_line(request.kind, 1, request.candidate_texts[i]));
    }
    cur.candidates.push_back(request.candidates[i]);
    cur.candidate_texts.push_back(request.candidate_texts[i]);
    cur.candidate_sections.push_back(request.candidate_sections[i]);
    used += cost;
  }
  if (!cur.candidates.empty() || out.empty()) out.push_back(std::move(cur));
  return out;
}

OracleEdges::OracleEdges(const GoldAnnotations& gold, const std::vector<std::vector<std::string>>& gold_to_nodes) {
  for (const auto& e : gold.edges) {
    if (e.src >= gold_to_nodes.size() || e.dst >= gold_to_nodes.size()) continue;
    for (const auto& s : gold_to_nodes[e.src]) {
      for (const auto& d : gold_to_nodes[e.dst]) ++edges_[{e.type, s, d}];
    }
  }
}

bool OracleEdges::contains(EdgeType type, std::string_view src, std::string_view dst) const {
  return edges_.count({type, std::string(src), std::string(dst)}) != 0;
}

namespace {

Provenance provenance_of(ProviderMode mode) {
  switch (mode) {
    case ProviderMode::Oracle: return Provenance::Oracle;
    case ProviderMode::Mock: return Provenance::Mock;
    case ProviderMode::Remote: return Provenance::Remote;
  }
  return Provenance::Mock;
}

LkgEdge make_edge(EdgeType kind, const std::string& src, const std::string& dst, const LinkContext& ctx) {
  LkgEdge e;
  e.kind = kind;
  e.src = src;
  e.dst = dst;
  e.provenance = provenance_of(ctx.mode);
  return e;
}

// A reply item names a list entry by its exact text or by its label ("Norm 2").
std::optional<std::size_t> match_item(const std::string& item, const std::vector<const PlacedNode*>& list) {
  const auto wanted = text::normalize_whitespace(item);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (text::normalize_whitespace(list[i]->text) == wanted) return i + 1;
  }
  return parse_item_label(item);
}

void require_provider(const LinkContext& ctx) {
  if (ctx.mode == ProviderMode::Remote && !ctx.provider) {
    throw Error(ErrorCode::ProviderUnavailable, "remote mode without a provider");
  }
  if (ctx.mode == ProviderMode::Oracle && !ctx.oracle) {
    throw Error(ErrorCode::OracleMissing, "oracle mode without gold edges");
  }
}

// Shared by the two history linkers.
LinkOutcome link_history(const LinkRequest& h, EdgeType kind, const LinkContext& ctx) {
  require_provider(ctx);
  LinkOutcome out;
  if (h.candidates.empty()) return out;
  switch (ctx.mode) {
    case ProviderMode::Oracle:
      for (const auto& c : h.candidates) {
        if (ctx.oracle->contains(kind, c, h.target)) out.edges.push_back(make_edge(kind, c, h.target, ctx));
      }
      break;
    case ProviderMode::Mock:
      for (std::size_t i = 0; i < h.candidates.size(); ++i) {
        bool link = kind == EdgeType::AppliesNorm
                        ? h.anchor_section && h.candidate_sections[i] == *h.anchor_section
                        : text::token_overlap(h.candidate_texts[i], h.target_text) >= ctx.mock_fact_overlap;
        if (link) out.edges.push_back(make_edge(kind, h.candidates[i], h.target, ctx));
      }
      break;
    case ProviderMode::Remote: {
      json reply;
      try {
        reply = complete_json(*ctx.provider, build_link_prompt(h), ctx.max_retries,
                              [](const json& j) { return j.is_object() || j.is_array(); });
      } catch (const Error& err) {
        if (err.code() != ErrorCode::MalformedOutput) throw;
        out.warnings.push_back({WarningKind::LinkFailed, "", h.target, err.what()});
        return out;
      }
      std::vector<std::size_t> picks;
      if (reply.is_array()) {
        picks = reply_indices(reply);
      } else {
        for (const auto& [key, value] : reply.items()) {
          auto idx = reply_indices(value);
          picks.insert(picks.end(), idx.begin(), idx.end());
        }
      }
      std::set<std::size_t> seen;
      for (auto p : picks) {
        if (p == 0 || p > h.candidates.size()) {
          out.warnings.push_back({WarningKind::IndexOutOfRange, "", h.target,
                                  std::string(item_word(h.kind)) + " " + std::to_string(p) + " is out of range"});
          continue;
        }
        if (!seen.insert(p).second) continue;
        out.edges.push_back(make_edge(kind, h.candidates[p - 1], h.target, ctx));
      }
      break;
    }
  }
  return out;
}

void check_history(const LinkRequest& h, NodeLabel expected) {
  if (h.kind != expected) {
    throw Error(ErrorCode::WrongLabel, "history candidates must be " + std::string(to_string(expected)));
  }
}

}  // namespace

LinkOutcome link_norm_application(const LinkRequest& history, const LinkContext& ctx) {
  check_history(history, NodeLabel::LegalNorm);
  return link_history(history, EdgeType::AppliesNorm, ctx);
}

LinkOutcome link_fact_application(const LinkRequest& history, const LinkContext& ctx) {
  check_history(history, NodeLabel::Fact);
  return link_history(history, EdgeType::ToFact, ctx);
}

LinkOutcome pair_provision_norm(const std::vector<const PlacedNode*>& section_nodes, std::string_view excerpt,
                                const LinkContext& ctx) {
  require_provider(ctx);
  std::vector<const PlacedNode*> laws, norms;
  for (const auto* n : section_nodes) {
    if (n->label == NodeLabel::Provision) laws.push_back(n);
    if (n->label == NodeLabel::LegalNorm) norms.push_back(n);
  }
  LinkOutcome out;
  if (laws.empty() || norms.empty()) return out;

  switch (ctx.mode) {
    case ProviderMode::Oracle:
      for (const auto* l : laws) {
        for (const auto* n : norms) {
          if (ctx.oracle->contains(EdgeType::DerivesNorm, l->node_id, n->node_id)) {
            out.edges.push_back(make_edge(EdgeType::DerivesNorm, l->node_id, n->node_id, ctx));
          }
        }
      }
      break;
    case ProviderMode::Mock: {
      std::set<std::string> titles;
      for (const auto* l : laws) {
        if (l->provision) titles.insert(l->provision->law_title);
      }
      for (const auto* l : laws) {
        for (const auto* n : norms) {
          bool link = titles.size() == 1 || (l->provision && text::contains_ci(n->text, l->provision->law_title));
          if (link) out.edges.push_back(make_edge(EdgeType::DerivesNorm, l->node_id, n->node_id, ctx));
        }
      }
      break;
    }
    case ProviderMode::Remote: {
      std::string law_list, norm_list;
      for (std::size_t i = 0; i < laws.size(); ++i) law_list += candidate_line(NodeLabel::Provision, i + 1, laws[i]->text);
      for (std::size_t i = 0; i < norms.size(); ++i) norm_list += candidate_line(NodeLabel::LegalNorm, i + 1, norms[i]->text);
      auto prompt = prompts::render("link_provision_norm",
                                    {{"LAWS", law_list}, {"NORMS", norm_list}, {"EXCERPT", std::string(excerpt)}});
      json reply;
      try {
        reply = complete_json(*ctx.provider, prompt, ctx.max_retries, [](const json& j) { return j.is_object(); });
      } catch (const Error& err) {
        if (err.code() != ErrorCode::MalformedOutput) throw;
        out.warnings.push_back({WarningKind::LinkFailed, laws.front()->segment_id, "", err.what()});
        return out;
      }
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (const auto& [key, value] : reply.items()) {
        std::optional<std::size_t> li = match_item(key, laws);
        if (!li || *li > laws.size()) {
          out.warnings.push_back({WarningKind::IndexOutOfRange, "", key, "law '" + key + "' is out of range"});
          continue;
        }
        std::vector<std::size_t> targets;
        auto take = [&](const json& v) {
          if (v.is_number_integer() && v.get<long long>() > 0) {
            targets.push_back(static_cast<std::size_t>(v.get<long long>()));
          } else if (v.is_string()) {
            if (auto ni = match_item(v.get<std::string>(), norms)) targets.push_back(*ni);
          }
        };
        if (value.is_array()) {
          for (const auto& v : value) take(v);
        } else {
          take(value);
        }
        for (auto ni : targets) {
          if (ni == 0 || ni > norms.size()) {
            out.warnings.push_back({WarningKind::IndexOutOfRange, "", key, "Norm " + std::to_string(ni) + " is out of range"});
            continue;
          }
          if (!seen.emplace(*li, ni).second) continue;
          out.edges.push_back(make_edge(EdgeType::DerivesNorm, laws[*li - 1]->node_id, norms[ni - 1]->node_id, ctx));
        }
      }
      break;
    }
  }
  return out;
}

LinkOutcome link_document(const DocLayout& layout, const LinkContext& ctx) {
  LinkOutcome out;
  auto absorb = [&out](LinkOutcome&& part) {
    for (auto& e : part.edges) out.edges.push_back(std::move(e));
    for (auto& w : part.warnings) out.warnings.push_back(std::move(w));
  };
  for (std::size_t s = 0; s < layout.section_count(); ++s) {
    absorb(pair_provision_norm(layout.in_section(s), layout.section_excerpt(s), ctx));
  }
  for (const auto& n : layout.nodes()) {
    if (n.label != NodeLabel::LegalApplication) continue;
    for (auto kind : {NodeLabel::LegalNorm, NodeLabel::Fact}) {
      auto history = assemble_history(layout, n.node_id, kind);
      for (const auto& chunk : chunk_history(history, ctx.budget_tokens)) {
        absorb(kind == NodeLabel::LegalNorm ? link_norm_application(chunk, ctx) : link_fact_application(chunk, ctx));
      }
    }
  }
  return out;
}

}  // namespace lkg

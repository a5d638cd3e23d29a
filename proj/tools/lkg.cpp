// lkg: pipeline driver. Every stage reads and writes files so stages compose
// through the filesystem.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lkg/config.hpp"
#include "lkg/corpus.hpp"
#include "lkg/error.hpp"
#include "lkg/eval.hpp"
#include "lkg/graph.hpp"
#include "lkg/index.hpp"
#include "lkg/pipeline.hpp"
#include "lkg/search.hpp"
#include "lkg/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lkg::Error(lkg::ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& err) {
    throw lkg::Error(lkg::ErrorCode::InvalidFormat, "'" + path + "': " + err.what());
  }
}

void write_file(const std::string& path, const std::string& data) {
  auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lkg::Error(lkg::ErrorCode::Io, "cannot write '" + path + "'");
  out << data;
  if (!out) throw lkg::Error(lkg::ErrorCode::Io, "write failed for '" + path + "'");
}

void log(const std::string& msg) { std::cerr << "lkg: " << msg << '\n'; }

std::vector<lkg::JudgmentDoc> ingest_path(const std::string& path) {
  if (!fs::exists(path)) throw lkg::Error(lkg::ErrorCode::Io, "no such path '" + path + "'");
  if (fs::is_regular_file(path)) {
    auto bytes = read_file(path);
    if (fs::path(path).extension() == ".json") {
      auto j = json::parse(bytes, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("version")) return lkg::corpus_from_json(j);
    }
    auto kind = fs::path(path).extension() == ".json" ? lkg::SourceKind::StructuredJson : lkg::SourceKind::Markup;
    return {lkg::parse_document({fs::path(path).stem().string(), kind, std::move(bytes)})};
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<lkg::JudgmentDoc> docs;
  for (const auto& f : files) {
    auto kind = f.extension() == ".json" ? lkg::SourceKind::StructuredJson : lkg::SourceKind::Markup;
    docs.push_back(lkg::parse_document({f.stem().string(), kind, read_file(f.string())}));
  }
  return docs;
}

struct NormalizeFiles {
  std::string aliases;
  std::string catalog;
  std::map<std::string, lkg::AliasTable> alias_tables;
  std::optional<lkg::StatuteCatalog> statute_catalog;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--aliases", aliases, "Alias override file ({doc_id: {alias: title}}, \"*\" sets the default title)");
    cmd->add_option("--catalog", catalog, "Statute catalog file (JSON array of canonical titles)");
  }
  lkg::NormalizeOptions load() {
    lkg::NormalizeOptions opts;
    if (!aliases.empty()) {
      alias_tables = lkg::load_alias_tables(read_json(aliases));
      opts.aliases = &alias_tables;
    }
    if (!catalog.empty()) {
      statute_catalog = lkg::StatuteCatalog::from_json(read_json(catalog));
      opts.catalog = &*statute_catalog;
    }
    return opts;
  }
};

std::string or_default(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

lkg::ProviderConfig provider_for(const lkg::RunConfig& config, const std::string& mode) {
  auto pc = config.provider;
  if (!mode.empty()) pc.mode = lkg::provider_mode_from_string(mode);
  pc.validate();
  return pc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Legal knowledge graph pipeline: build a Fact/Provision/Norm/Application graph from judgments and "
               "retrieve provisions for facts.",
               "lkg"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Run configuration file (JSON); LKG_* environment variables override it");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic annotated corpus");
  std::uint64_t synth_seed = 0;
  int synth_docs = 0;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "Generator seed (default: config synth.seed)");
  synth->add_option("--docs", synth_docs, "Number of documents (default: config synth.docs)")->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_out, "Output corpus file (default: config paths.corpus)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse raw judgments (directory or file) into a corpus file");
  std::string ingest_in, ingest_out;
  ingest->add_option("--corpus", ingest_in, "Corpus file, raw document, or directory of raw documents")->required();
  ingest->add_option("--out", ingest_out, "Output corpus file (default: config paths.corpus)");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract node candidates per section and normalize provisions");
  std::string extract_corpus, extract_out, extract_mode;
  NormalizeFiles extract_norm;
  extract->add_option("--corpus", extract_corpus, "Corpus file (default: config paths.corpus)");
  extract->add_option("--mode", extract_mode, "Provider mode (default: config provider.mode)")
      ->check(CLI::IsMember({"oracle", "mock", "remote"}));
  extract->add_option("--out", extract_out, "Output extraction file (default: config paths.extraction)");
  extract_norm.add_options(extract);

  // normalize
  auto* normalize = app.add_subcommand("normalize", "Re-resolve provision references of an extraction file");
  std::string norm_corpus, norm_in, norm_out, norm_mode;
  NormalizeFiles norm_files;
  normalize->add_option("--corpus", norm_corpus, "Corpus file (default: config paths.corpus)");
  normalize->add_option("--extraction", norm_in, "Extraction file (default: config paths.extraction)");
  normalize->add_option("--mode", norm_mode, "Provider mode for alias completion (default: config provider.mode)")
      ->check(CLI::IsMember({"oracle", "mock", "remote"}));
  normalize->add_option("--out", norm_out, "Output extraction file (default: overwrite the input)");
  norm_files.add_options(normalize);

  // link
  auto* link = app.add_subcommand("link", "Construct edges and write a frozen graph snapshot");
  std::string link_corpus, link_in, link_out, link_mode;
  bool link_extended = false;
  link->add_option("--corpus", link_corpus, "Corpus file (default: config paths.corpus)");
  link->add_option("--extraction", link_in, "Extraction file (default: config paths.extraction)");
  link->add_option("--mode", link_mode, "Provider mode (default: config provider.mode)")
      ->check(CLI::IsMember({"oracle", "mock", "remote"}));
  link->add_option("--out", link_out, "Output snapshot file (default: config paths.snapshot)");
  link->add_flag("--allow-same-category", link_extended, "Accept Fact->Fact and Norm->Norm edges");

  // stats
  auto* stats = app.add_subcommand("stats", "Print node, edge and network statistics of a snapshot");
  std::string stats_snapshot;
  bool stats_json = false;
  stats->add_option("--snapshot", stats_snapshot, "Snapshot file (default: config paths.snapshot)");
  stats->add_flag("--json", stats_json, "Print JSON instead of tables");

  // index build
  auto* index = app.add_subcommand("index", "Fact embedding index");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Embed every Fact node and write the index");
  std::string index_snapshot, index_out, index_mode;
  int index_trees = 0;
  index_build->add_option("--snapshot", index_snapshot, "Snapshot file (default: config paths.snapshot)");
  index_build->add_option("--out", index_out, "Output index file (default: config paths.index)");
  index_build->add_option("--mode", index_mode, "Search mode (default: config index.mode)")
      ->check(CLI::IsMember({"exact", "approximate"}));
  index_build->add_option("--trees", index_trees, "Random-projection trees for approximate mode")
      ->check(CLI::PositiveNumber);

  // search
  auto* search = app.add_subcommand("search", "Retrieve provisions for a fact");
  std::string search_snapshot, search_index, search_text, search_fact;
  std::size_t search_k = 3;
  bool search_no_mask = false, search_json = false;
  search->add_option("--snapshot", search_snapshot, "Snapshot file (default: config paths.snapshot)");
  search->add_option("--index", search_index, "Index file (default: config paths.index)");
  auto* text_opt = search->add_option("--text", search_text, "Free-text fact query");
  auto* fact_opt = search->add_option("--fact-id", search_fact, "Fact node id query");
  text_opt->excludes(fact_opt);
  search->add_option("--k", search_k, "Neighbor facts to retrieve")->check(CLI::Range(1, 100));
  search->add_flag("--no-mask", search_no_mask, "Keep the query fact among its own neighbors");
  search->add_flag("--json", search_json, "Print JSON instead of reasoning traces");

  // eval
  auto* eval = app.add_subcommand("eval", "Run predictors against gold labels derived from the snapshot");
  std::string eval_snapshot, eval_index, eval_corpus, eval_predictors, eval_report, eval_llm_mode;
  NormalizeFiles eval_norm;
  eval->add_option("--snapshot", eval_snapshot, "Snapshot file (default: config paths.snapshot)");
  eval->add_option("--index", eval_index, "Index file (default: config paths.index)");
  eval->add_option("--corpus", eval_corpus, "Corpus file, needed by LLM baselines (default: config paths.corpus)");
  eval->add_option("--predictors", eval_predictors,
                   "Comma-separated: lkg:k=N, llm-simple, llm-context, llm-rag:m=N (default: config eval.predictors)");
  eval->add_option("--llm-mode", eval_llm_mode, "Baseline provider: mock answers offline (default: mock)")
      ->check(CLI::IsMember({"mock", "remote"}));
  eval->add_option("--report", eval_report,
                   "Report path prefix; writes <prefix>.txt, .csv and .manifest.json (default: config paths.reports/report)");
  eval_norm.add_options(eval);

  // compare
  auto* compare = app.add_subcommand("compare", "Node and edge agreement of a snapshot against gold annotations");
  std::string compare_snapshot, compare_corpus;
  double compare_overlap = 0.8;
  compare->add_option("--snapshot", compare_snapshot, "System snapshot file (default: config paths.snapshot)");
  compare->add_option("--corpus", compare_corpus, "Annotated reference corpus (default: config paths.corpus)");
  compare->add_option("--min-overlap", compare_overlap, "Token overlap needed for a node match")
      ->check(CLI::Range(0.0, 1.0));

  // export
  auto* exp = app.add_subcommand("export", "Write the snapshot as JSON-LD");
  std::string export_snapshot, export_path;
  exp->add_option("--snapshot", export_snapshot, "Snapshot file (default: config paths.snapshot)");
  exp->add_option("--jsonld", export_path, "Output JSON-LD file")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the /v1 HTTP API over a snapshot and index");
  std::string serve_addr, serve_snapshot, serve_index, serve_cors;
  serve->add_option("--addr", serve_addr, "host:port (default: config service.addr)");
  serve->add_option("--snapshot", serve_snapshot, "Snapshot file (default: config paths.snapshot)");
  serve->add_option("--index", serve_index, "Index file (default: config paths.index)");
  serve->add_option("--cors", serve_cors, "Comma-separated allowed origins (default: config service.cors_origins)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    auto config = lkg::load_run_config(config_path.empty() ? std::nullopt : std::optional(config_path));
    const auto& P = config.paths;

    if (*synth) {
      auto seed = synth->count("--seed") ? synth_seed : config.seed;
      auto n = synth->count("--docs") ? synth_docs : config.docs;
      auto out = or_default(synth_out, P.corpus);
      lkg::save_corpus(out, lkg::synth_corpus(seed, n));
      log("wrote " + std::to_string(n) + " documents to " + out);
    } else if (*ingest) {
      auto docs = ingest_path(ingest_in);
      for (const auto& d : docs) lkg::validate_gold(d);
      auto out = or_default(ingest_out, P.corpus);
      lkg::save_corpus(out, docs);
      log("wrote " + std::to_string(docs.size()) + " documents to " + out);
    } else if (*extract) {
      auto docs = lkg::load_corpus(or_default(extract_corpus, P.corpus));
      auto pc = provider_for(config, extract_mode);
      auto provider = lkg::make_provider(pc);
      auto x = lkg::extract_corpus(docs, pc, provider.get(), extract_norm.load());
      auto out = or_default(extract_out, P.extraction);
      write_file(out, lkg::extraction_to_json(x).dump(1) + "\n");
      std::size_t n = 0, w = 0;
      for (const auto& d : x) {
        n += d.candidates.size();
        w += d.warnings.size();
      }
      log("wrote " + std::to_string(n) + " candidates (" + std::to_string(w) + " warnings) to " + out);
    } else if (*normalize) {
      auto docs = lkg::load_corpus(or_default(norm_corpus, P.corpus));
      auto in = or_default(norm_in, P.extraction);
      auto x = lkg::extraction_from_json(read_json(in));
      auto pc = provider_for(config, norm_mode);
      auto provider = lkg::make_provider(pc);
      auto opts = norm_files.load();
      std::map<std::string_view, const lkg::JudgmentDoc*> by_id;
      for (const auto& d : docs) by_id[d.doc_id] = &d;
      for (auto& d : x) {
        auto it = by_id.find(d.doc_id);
        if (it == by_id.end()) throw lkg::Error(lkg::ErrorCode::InvalidFormat, "corpus lacks '" + d.doc_id + "'");
        std::erase_if(d.warnings, [](const auto& w) { return w.kind == lkg::WarningKind::UnresolvedReference; });
        lkg::normalize_extraction(d, *it->second, opts, provider.get(), pc.max_retries);
      }
      auto out = or_default(norm_out, in);
      write_file(out, lkg::extraction_to_json(x).dump(1) + "\n");
      log("wrote " + out);
    } else if (*link) {
      auto docs = lkg::load_corpus(or_default(link_corpus, P.corpus));
      auto x = lkg::extraction_from_json(read_json(or_default(link_in, P.extraction)));
      auto pc = provider_for(config, link_mode);
      auto provider = lkg::make_provider(pc);
      lkg::LinkContext ctx;
      ctx.mode = pc.mode;
      ctx.provider = provider.get();
      ctx.max_retries = pc.max_retries;
      auto built = lkg::build_graph(docs, x, ctx, lkg::GraphOptions{link_extended});
      auto out = or_default(link_out, P.snapshot);
      lkg::save_snapshot(out, built.graph);
      log("wrote " + std::to_string(built.graph.node_count()) + " nodes, " +
          std::to_string(built.graph.edge_count()) + " edges (" + std::to_string(built.warnings.size()) +
          " warnings) to " + out);
    } else if (*stats) {
      auto g = lkg::load_snapshot(or_default(stats_snapshot, P.snapshot));
      auto s = lkg::graph_stats(g);
      if (stats_json) {
        std::cout << lkg::stats_to_json(s).dump(2) << '\n';
      } else {
        std::cout << lkg::render_stats(s);
      }
    } else if (*index_build) {
      auto snapshot_path = or_default(index_snapshot, P.snapshot);
      auto g = lkg::load_snapshot(snapshot_path);
      auto mode = index_mode.empty() ? config.index_mode : lkg::index_mode_from_string(index_mode);
      auto params = config.ann;
      if (index_trees > 0) params.n_trees = index_trees;
      config.embedder.validate();
      auto embedder = lkg::make_embedder(config.embedder);
      auto idx = lkg::VectorIndex::build(lkg::fact_texts(g), *embedder, mode, params);
      idx.graph_fingerprint = g.fingerprint();
      auto out = or_default(index_out, P.index);
      idx.save(out);
      log("indexed " + std::to_string(idx.size()) + " facts into " + out);
    } else if (*search) {
      if (search_text.empty() == search_fact.empty()) throw UsageError("give exactly one of --text and --fact-id");
      auto g = lkg::load_snapshot(or_default(search_snapshot, P.snapshot));
      auto embedder = lkg::make_embedder(config.embedder);
      auto idx = lkg::VectorIndex::load(or_default(search_index, P.index), embedder->fingerprint());
      lkg::SearchQuery q;
      if (!search_text.empty()) q.text = search_text;
      if (!search_fact.empty()) q.fact_id = search_fact;
      q.k = search_k;
      q.mask = !search_no_mask;
      auto hits = lkg::retrieve_provisions(q, g, idx, *embedder);
      if (search_json) {
        std::cout << json{{"hits", lkg::hits_to_json(hits)}}.dump(2) << '\n';
      } else if (hits.empty()) {
        std::cout << "no provisions found\n";
      } else {
        for (const auto& h : hits) std::cout << lkg::explain(h, g);
      }
    } else if (*eval) {
      auto g = lkg::load_snapshot(or_default(eval_snapshot, P.snapshot));
      auto specs = lkg::parse_predictors(or_default(eval_predictors, config.predictors));
      auto embedder = lkg::make_embedder(config.embedder);
      bool needs_index = false, needs_corpus = false;
      for (const auto& s : specs) {
        (s.kind == lkg::PredictorKind::LkgRetrieval ? needs_index : needs_corpus) = true;
      }
      std::optional<lkg::VectorIndex> idx;
      if (needs_index) idx = lkg::VectorIndex::load(or_default(eval_index, P.index), embedder->fingerprint());
      std::vector<lkg::JudgmentDoc> docs;
      if (needs_corpus) docs = lkg::load_corpus(or_default(eval_corpus, P.corpus));
      std::unique_ptr<lkg::Provider> provider;
      if (eval_llm_mode == "remote") {
        auto pc = provider_for(config, "remote");
        provider = lkg::make_provider(pc);
      } else {
        provider = std::make_unique<lkg::MockBaselineProvider>();
      }

      lkg::EvalResources res;
      res.graph = &g;
      res.index = idx ? &*idx : nullptr;
      res.embedder = embedder.get();
      res.provider = provider.get();
      res.corpus = &docs;
      res.normalize = eval_norm.load();
      res.max_retries = config.provider.max_retries;
      res.max_in_flight = eval_llm_mode == "remote" ? config.provider.max_in_flight : 1;

      auto gold = lkg::build_gold(g);
      lkg::MetricsReport report;
      report.gold_total = gold.total();
      for (const auto& spec : specs) {
        auto run = lkg::run_predictor(gold, spec, res);
        for (const auto& w : run.warnings) log("warning: " + w);
        report.rows.push_back(lkg::compute_metrics(spec.name(), run.predictions, gold));
      }
      lkg::RunManifest manifest;
      manifest.predictors = specs;
      manifest.graph_fingerprint = g.fingerprint();
      manifest.index_embedder = embedder->fingerprint();
      manifest.provider = provider->fingerprint();
      manifest.queries = gold.queries.size();
      manifest.gold_total = gold.total();

      auto prefix = or_default(eval_report, (fs::path(P.reports) / "report").string());
      write_file(prefix + ".txt", lkg::render_report_text(report));
      write_file(prefix + ".csv", lkg::render_report_csv(report));
      write_file(prefix + ".manifest.json", lkg::manifest_to_json(manifest).dump(2) + "\n");
      std::cout << lkg::render_report_text(report);
      log("wrote " + prefix + ".{txt,csv,manifest.json}");
    } else if (*compare) {
      auto g = lkg::load_snapshot(or_default(compare_snapshot, P.snapshot));
      auto docs = lkg::load_corpus(or_default(compare_corpus, P.corpus));
      auto system = lkg::annotations_from_graph(g);
      auto docs_in_graph = system.doc_ids();
      std::erase_if(docs, [&](const auto& d) { return !d.gold || !docs_in_graph.count(d.doc_id); });
      auto report = lkg::compare_annotations(system, lkg::annotations_from_gold(docs), {compare_overlap});
      std::cout << lkg::render_agreement(report);
    } else if (*exp) {
      auto g = lkg::load_snapshot(or_default(export_snapshot, P.snapshot));
      write_file(export_path, lkg::export_jsonld(g).dump(2) + "\n");
      log("wrote " + export_path);
    } else if (*serve) {
      if (!serve_addr.empty()) config.service.addr = serve_addr;
      if (!serve_snapshot.empty()) config.paths.snapshot = serve_snapshot;
      if (!serve_index.empty()) config.paths.index = serve_index;
      if (!serve_cors.empty()) {
        lkg::RunConfig tmp;
        lkg::apply_env(tmp, [&](std::string_view name) -> std::optional<std::string> {
          if (name == "LKG_CORS_ORIGINS") return serve_cors;
          return std::nullopt;
        });
        config.service.cors_origins = tmp.service.cors_origins;
      }
      log("listening on " + config.service.addr);
      lkg::run_service(config);
    }
  } catch (const UsageError& e) {
    std::cerr << "lkg: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lkg: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

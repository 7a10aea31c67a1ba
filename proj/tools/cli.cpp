#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "relict/error.hpp"
#include "relict/evalharness.hpp"
#include "relict/searchsim.hpp"
#include "relict/stopwords.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, std::string_view key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(fmt::format("config key '{}': '{}' is not a number", key, v));
}

std::size_t to_size(const std::string& v, std::string_view key) {
  const double d = to_double(v, key);
  if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
    throw Error(fmt::format("config key '{}': '{}' is not a non-negative integer", key, v));
  }
  return static_cast<std::size_t>(d);
}

void require_exists(const std::optional<fs::path>& p, std::string_view what) {
  if (p && !fs::exists(*p)) throw Error(fmt::format("{} '{}' does not exist", what, p->string()));
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const StopwordList& stopword_list(const CliConfig& cfg, std::optional<StopwordList>& holder) {
  if (!cfg.stopwords) return StopwordList::bundled();
  holder = StopwordList::load(*cfg.stopwords);
  return *holder;
}

std::shared_ptr<DfProvider> make_df_provider(const CliConfig& cfg,
                                             const std::shared_ptr<const Index>& index) {
  std::shared_ptr<DfProvider> p;
  if (cfg.df.kind == DfProviderKind::RemoteHitcount) {
    p = std::make_shared<RemoteHitcountDfProvider>(cfg.df);
  } else {
    p = std::make_shared<LocalIndexDfProvider>(index, cfg.df.provider_id);
  }
  if (cfg.df_cache) p = std::make_shared<CachedDfProvider>(p, *cfg.df_cache);
  return p;
}

struct Loaded {
  std::optional<StopwordList> stop_holder;
  const StopwordList* stopwords = nullptr;
  ExperimentCorpus corpus;
  std::shared_ptr<const Index> index;
};

void load_all(Loaded& l, const CliConfig& cfg, const fs::path& manifest,
              const std::optional<fs::path>& index_path) {
  l.stopwords = &stopword_list(cfg, l.stop_holder);
  l.corpus = load_corpus(CorpusManifest::load(manifest), CorpusFilter{}, *l.stopwords);
  if (index_path) {
    l.index = std::make_shared<const Index>(Index::load(*index_path));
  } else {
    const auto docs = l.corpus.index_documents();
    l.index = std::make_shared<const Index>(Index::build(docs, *l.stopwords));
  }
}

// Options every subcommand accepts.
struct Common {
  std::string config;
  std::string engine, engine_kind, engine_endpoint;
  std::string df_provider, df_endpoint, df_cache, stopwords;
  std::optional<double> tau;
  std::optional<std::size_t> jobs;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value settings file (or RELICT_CONFIG)");
    app->add_option("--engine", engine, "engine id");
    app->add_option("--engine-kind", engine_kind, "local-sim | fixture-replay | remote-generic");
    app->add_option("--engine-endpoint", engine_endpoint, "base URL or recordings file");
    app->add_option("--df-provider", df_provider, "local-index | remote-hitcount");
    app->add_option("--df-endpoint", df_endpoint, "hit-count URL template or file:// TSV");
    app->add_option("--df-cache", df_cache, "persistent df cache (TSV)");
    app->add_option("--stopwords", stopwords, "stop word list, one per line");
    app->add_option("--tau", tau, "title-skip threshold in [0,1]");
    app->add_option("--jobs", jobs, "worker threads");
  }

  CliConfig resolve() const {
    CliConfig cfg;
    std::string path = config;
    if (path.empty()) {
      if (const char* env = std::getenv("RELICT_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) apply_config_file(cfg, path);
    if (!engine_kind.empty()) {
      cfg.engine.kind = parse_engine_kind(engine_kind);
      if (engine.empty() && cfg.engine.engine_id == "local-sim") cfg.engine.engine_id = engine_kind;
    }
    if (!engine.empty()) cfg.engine.engine_id = engine;
    if (!engine_endpoint.empty()) cfg.engine.endpoint = engine_endpoint;
    if (!df_provider.empty()) {
      cfg.df.kind = parse_df_provider_kind(df_provider);
      cfg.df.provider_id = df_provider;
    }
    if (!df_endpoint.empty()) cfg.df.endpoint = df_endpoint;
    if (!df_cache.empty()) cfg.df_cache = df_cache;
    if (!stopwords.empty()) cfg.stopwords = stopwords;
    if (tau) cfg.title_skip_threshold = *tau;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
    return cfg;
  }
};

int cmd_build_index(const CliConfig& cfg, const fs::path& corpus, const fs::path& out,
                    std::ostream& os) {
  Loaded l;
  load_all(l, cfg, corpus, std::nullopt);
  const auto& index = *l.index;
  if (fs::exists(out) && Index::peek_content_hash(out) == index.content_hash()) {
    os << fmt::format("index unchanged {} ({} docs)\n", index.content_hash(), index.n_docs());
    return 0;
  }
  index.save(out);
  os << fmt::format("index written {} ({} docs, {} rejected) -> {}\n", index.content_hash(),
                    index.n_docs(), l.corpus.ingested.rejected.size(), out.string());
  return 0;
}

int cmd_rediscover(const CliConfig& cfg, const std::string& uri, const fs::path& corpus,
                   const std::optional<fs::path>& index_path, std::size_t top, std::ostream& os) {
  Loaded l;
  load_all(l, cfg, corpus, index_path);
  const ExtractedDoc* doc = l.corpus.find_doc(uri);
  if (!doc) throw Error(fmt::format("'{}' is not in the corpus", uri));

  auto df = make_df_provider(cfg, l.index);
  auto engine = make_engine(cfg.engine, EngineResources{l.index, nullptr});
  ExperimentOptions opts;
  opts.inlink_cap = cfg.inlink_cap;
  opts.stopwords = l.stopwords;
  const MethodInputs inputs = assemble_inputs(l.corpus, *doc, *df, opts);

  CombinationSpec spec = CombinationSpec::parse(cfg.combination);
  if (cfg.probability_table && doc->title) {
    std::ifstream in(*cfg.probability_table);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto table = parse_probability_table_csv(ss.str());
    const auto decision = predict_title_worth(*doc->title, table, cfg.title_skip_threshold);
    os << "predictor: " << to_string(decision) << "\n";
    if (decision == TitleDecision::SkipToLS) {
      std::vector<MethodId> rest;
      for (auto m : spec.steps) {
        if (m != MethodId::TI && m != MethodId::TIQ && m != MethodId::TI_NOSW) rest.push_back(m);
      }
      if (rest.empty()) rest.push_back(MethodId::LS5);
      spec.steps = std::move(rest);
    }
  }

  const auto result = run_combination(spec, doc->uri, *engine, inputs);
  for (const auto& r : result.trail) {
    const std::string rank = r.rank ? std::to_string(*r.rank) : "-";
    const std::string query = !r.available    ? "(unavailable)"
                              : r.quoted      ? "\"" + fmt::format("{}", fmt::join(r.query_terms, " ")) + "\""
                                              : fmt::format("{}", fmt::join(r.query_terms, " "));
    os << fmt::format("{}\t{}\t{}\t{}\n", to_string(r.method), query, to_string(r.rank_class),
                      rank);
  }
  const auto& hits = result.final_results.hits;
  for (std::size_t i = 0; i < hits.size() && i < top; ++i) {
    os << fmt::format("  {:>3}. {}  {:.6f}\n", i + 1, hits[i].uri, hits[i].score);
  }
  return result.final_record.rank_class == RankClass::Undiscovered ? 2 : 0;
}

int cmd_evaluate(const CliConfig& cfg, const fs::path& corpus, const std::string& methods,
                 const std::string& combos, const fs::path& out_dir, std::ostream& os) {
  Loaded l;
  load_all(l, cfg, corpus, std::nullopt);
  if (l.corpus.ingested.docs.empty()) throw Error("corpus is empty after filtering");

  std::vector<MethodId> ms;
  for (const auto& m : split_list(methods)) ms.push_back(parse_method(m));
  std::vector<CombinationSpec> cs;
  for (const auto& c : split_list(combos)) cs.push_back(CombinationSpec::parse(c));

  auto df = make_df_provider(cfg, l.index);
  auto engine = make_engine(cfg.engine, EngineResources{l.index, nullptr});
  ExperimentOptions opts;
  opts.inlink_cap = cfg.inlink_cap;
  opts.jobs = cfg.jobs;
  opts.stopwords = l.stopwords;
  const auto records = run_experiment(l.corpus, ms, cs, *engine, *df, opts);
  const auto table = aggregate(records);

  fs::create_directories(out_dir);
  std::string jsonl;
  for (const auto& r : records) jsonl += to_jsonl(r) + "\n";
  write_file(out_dir / "records.jsonl", jsonl);
  write_file(out_dir / "aggregate.csv", table.to_csv());
  std::string rej = "uri\treason\n";
  for (const auto& r : l.corpus.ingested.rejected) rej += r.uri + "\t" + r.reason + "\n";
  write_file(out_dir / "rejections.tsv", rej);

  json info;
  info["stopword_hash"] = l.stopwords->hash();
  info["index_hash"] = l.index->content_hash();
  info["n_docs"] = df->n_docs();
  info["df_provider"] = df->config().provider_id;
  info["engine"] = {{"engine_id", cfg.engine.engine_id},
                    {"kind", to_string(cfg.engine.kind)},
                    {"max_results", cfg.engine.max_results}};
  if (cfg.engine.endpoint) info["engine"]["endpoint"] = *cfg.engine.endpoint;
  info["accepted"] = l.corpus.ingested.docs.size();
  info["rejected"] = l.corpus.ingested.rejected.size();
  write_file(out_dir / "run_info.json", info.dump(2) + "\n");

  os << table.to_text();
  if (cfg.acceptance_threshold > 0) {
    for (const auto& row : table.rows) {
      const double found = 100.0 - row.undiscovered;
      if (found < cfg.acceptance_threshold * 100.0) {
        os << fmt::format("below threshold: {} {} {:.1f}%\n", row.label, row.engine_id, found);
      }
    }
  }
  return 0;
}

int cmd_analyze_titles(const CliConfig& cfg, const fs::path& corpus, const fs::path& records,
                       const fs::path& out_dir, std::ostream& os) {
  if (!fs::exists(records)) throw Error(fmt::format("records file '{}' does not exist", records.string()));
  std::optional<StopwordList> holder;
  const auto& stop = stopword_list(cfg, holder);
  const auto ingested = ingest(CorpusManifest::load(corpus), CorpusFilter{}, stop);
  const auto exp = load_experiment_records(records);
  std::vector<RankRecord> ranks;
  for (const auto& e : exp) {
    if (e.label == to_string(e.record.method)) ranks.push_back(e.record);
  }
  const auto analysis = title_analysis(ingested.docs, ranks, stop);
  fs::create_directories(out_dir);
  write_file(out_dir / "histograms.csv", analysis.histograms_csv());
  write_file(out_dir / "title_probabilities.csv", probability_table_csv(analysis.table));
  os << probability_table_csv(analysis.table);
  return 0;
}

}  // namespace

void CliConfig::validate() const {
  if (!(title_skip_threshold >= 0.0 && title_skip_threshold <= 1.0)) {
    throw Error(fmt::format("tau must be in [0,1], got {}", title_skip_threshold));
  }
  if (!(acceptance_threshold >= 0.0 && acceptance_threshold <= 1.0)) {
    throw Error(fmt::format("acceptance threshold must be in [0,1], got {}", acceptance_threshold));
  }
  if (jobs < 1) throw Error("jobs must be >= 1");
  require_exists(stopwords, "stop word list");
  require_exists(probability_table, "probability table");
  if (engine.kind == EngineKind::FixtureReplay && engine.endpoint) {
    require_exists(fs::path(*engine.endpoint), "recordings file");
  }
  engine.validate();
  df.validate();
  CombinationSpec::parse(combination);
}

void apply_config_text(CliConfig& c, std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(fmt::format("{}:{}: expected key = value", origin, lineno));
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string v = trim(std::string_view(line).substr(eq + 1));
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);

    if (key == "engine") c.engine.engine_id = v;
    else if (key == "engine_kind") c.engine.kind = parse_engine_kind(v);
    else if (key == "engine_endpoint") c.engine.endpoint = v;
    else if (key == "engine_rate_limit") c.engine.rate_limit = to_double(v, key);
    else if (key == "max_results") c.engine.max_results = to_size(v, key);
    else if (key == "df_provider") {
      c.df.kind = parse_df_provider_kind(v);
      c.df.provider_id = v;
    } else if (key == "df_provider_id") c.df.provider_id = v;
    else if (key == "df_endpoint") c.df.endpoint = v;
    else if (key == "df_rate_limit") c.df.rate_limit = to_double(v, key);
    else if (key == "df_n_docs") c.df.n_docs_override = to_size(v, key);
    else if (key == "df_cache") c.df_cache = v;
    else if (key == "stopwords") c.stopwords = v;
    else if (key == "combination") c.combination = v;
    else if (key == "acceptance_threshold") c.acceptance_threshold = to_double(v, key);
    else if (key == "tau") c.title_skip_threshold = to_double(v, key);
    else if (key == "probability_table") c.probability_table = v;
    else if (key == "inlink_cap") c.inlink_cap = to_size(v, key);
    else if (key == "jobs") c.jobs = to_size(v, key);
    else throw Error(fmt::format("{}:{}: unknown key '{}'", origin, lineno, key));
  }
}

void apply_config_file(CliConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path.string());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relict: rediscover missing web pages"};
  app.require_subcommand(1);

  Common common;
  std::string corpus, index_out, index_in, uri, combo, methods = "LS5,LS7,TI,TIQ,TA,LNLS5,LNLS7",
      combos = "TI-LS5", out_dir, records, probabilities;
  std::size_t top = 10;

  auto* build = app.add_subcommand("build-index", "extract a corpus and write its index");
  common.attach(build);
  build->add_option("--corpus", corpus, "manifest (JSONL)")->required();
  build->add_option("--out", index_out, "index file")->required();

  auto* red = app.add_subcommand("rediscover", "run a fallback combination for one URI");
  common.attach(red);
  red->add_option("uri", uri, "missing URI")->required();
  red->add_option("--corpus", corpus, "manifest (JSONL)")->required();
  red->add_option("--index", index_in, "prebuilt index file");
  red->add_option("--combo", combo, "combination, e.g. TI-LS5");
  red->add_option("--top", top, "candidates to print");
  red->add_option("--probabilities", probabilities, "title length probability table (CSV)");

  auto* eval = app.add_subcommand("evaluate", "run methods and combinations over a corpus");
  common.attach(eval);
  eval->add_option("--corpus", corpus, "manifest (JSONL)")->required();
  eval->add_option("--methods", methods, "comma-separated methods");
  eval->add_option("--combos", combos, "comma-separated combinations");
  eval->add_option("--out-dir", out_dir, "output directory")->required();

  auto* titles = app.add_subcommand("analyze-titles", "title histograms and probability table");
  common.attach(titles);
  titles->add_option("--corpus", corpus, "manifest (JSONL)")->required();
  titles->add_option("--records", records, "records.jsonl from evaluate")->required();
  titles->add_option("--out-dir", out_dir, "output directory")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    CliConfig cfg = common.resolve();
    if (!combo.empty()) {
      CombinationSpec::parse(combo);
      cfg.combination = combo;
    }
    if (!probabilities.empty()) {
      cfg.probability_table = probabilities;
      cfg.validate();
    }
    if (build->parsed()) return cmd_build_index(cfg, corpus, index_out, out);
    if (red->parsed()) {
      return cmd_rediscover(cfg, uri, corpus,
                            index_in.empty() ? std::nullopt : std::optional<fs::path>(index_in),
                            top, out);
    }
    if (eval->parsed()) return cmd_evaluate(cfg, corpus, methods, combos, out_dir, out);
    if (titles->parsed()) return cmd_analyze_titles(cfg, corpus, records, out_dir, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace relict::cli

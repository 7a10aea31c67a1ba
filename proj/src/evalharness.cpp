#include "relict/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "relict/error.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ManifestPage parse_page(const json& j, const fs::path& base_dir) {
  ManifestPage p;
  p.uri = j.at("uri").get<std::string>();
  if (j.contains("html")) p.html = j.at("html").get<std::string>();
  if (j.contains("html_path")) {
    fs::path path = j.at("html_path").get<std::string>();
    p.html_path = path.is_relative() ? base_dir / path : path;
  }
  if (!p.html && !p.html_path) {
    throw Error(fmt::format("entry '{}' has neither html nor html_path", p.uri));
  }
  return p;
}

void check_path(const ManifestPage& p) {
  if (p.html_path && !fs::exists(*p.html_path)) {
    throw Error(fmt::format("entry '{}': file '{}' does not exist", p.uri, p.html_path->string()));
  }
}

ExtractedDoc extract_page(const ManifestPage& p, const StopwordList& stopwords) {
  return extract_text(RawPage::make(p.uri, read_page_body(p)), stopwords);
}

}  // namespace

CorpusManifest CorpusManifest::parse(std::string_view jsonl, const fs::path& base_dir) {
  CorpusManifest m;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::string> seen;  // normalized -> raw
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (j.contains("manifest_version")) {
        m.version = j.at("manifest_version").is_string()
                        ? j.at("manifest_version").get<std::string>()
                        : j.at("manifest_version").dump();
        continue;
      }
      ManifestEntry e;
      e.page = parse_page(j, base_dir);
      check_path(e.page);
      if (j.contains("tags")) e.tags = j.at("tags").get<std::vector<std::string>>();
      if (j.contains("inlinks")) {
        for (const auto& il : j.at("inlinks")) {
          e.inlinks.push_back(parse_page(il, base_dir));
          check_path(e.inlinks.back());
        }
      }
      if (j.contains("inlink_paths")) {
        for (const auto& ip : j.at("inlink_paths")) {
          fs::path path = ip.get<std::string>();
          if (path.is_relative()) path = base_dir / path;
          ManifestPage p{"file://" + fs::absolute(path).lexically_normal().string(), std::nullopt,
                         path};
          check_path(p);
          e.inlinks.push_back(std::move(p));
        }
      }
      const auto norm = try_normalize_uri(e.page.uri);
      if (!norm) throw Error(fmt::format("entry URI '{}' does not normalize", e.page.uri));
      if (const auto [it, fresh] = seen.emplace(*norm, e.page.uri); !fresh) {
        throw Error(fmt::format("duplicate URI: '{}' and '{}' both normalize to '{}'", it->second,
                                e.page.uri, *norm));
      }
      m.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(fmt::format("manifest line {}: {}", lineno, ex.what()));
    } catch (const Error& ex) {
      throw Error(fmt::format("manifest line {}: {}", lineno, ex.what()));
    }
  }
  return m;
}

CorpusManifest CorpusManifest::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read manifest '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

std::string read_page_body(const ManifestPage& page) {
  if (page.html) return *page.html;
  std::ifstream in(*page.html_path, std::ios::binary);
  if (!in) {
    throw Error(fmt::format("entry '{}': cannot read '{}'", page.uri, page.html_path->string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

IngestResult ingest(const CorpusManifest& manifest, const CorpusFilter& filter,
                    const StopwordList& stopwords) {
  IngestResult out;
  for (const auto& e : manifest.entries) {
    auto doc = extract_page(e.page, stopwords);
    const auto verdict = passes_corpus_filter(doc, filter);
    if (verdict.accepted) {
      out.docs.push_back(std::move(doc));
    } else {
      out.rejected.push_back({doc.uri, verdict.reason});
    }
  }
  return out;
}

ExperimentCorpus load_corpus(const CorpusManifest& manifest, const CorpusFilter& filter,
                             const StopwordList& stopwords) {
  ExperimentCorpus c;
  c.ingested = ingest(manifest, filter, stopwords);
  for (const auto& e : manifest.entries) {
    if (e.tags) c.tags.add(e.page.uri, *e.tags);
    if (!e.inlinks.empty()) {
      std::vector<std::string> uris;
      for (const auto& il : e.inlinks) {
        const auto norm = normalize_uri(il.uri);
        uris.push_back(norm);
        if (!c.neighbor_pages.contains(norm)) {
          c.neighbor_pages.emplace(norm, extract_page(il, stopwords));
        }
      }
      c.backlinks.add(e.page.uri, std::move(uris));
    }
  }
  return c;
}

std::vector<ExtractedDoc> ExperimentCorpus::index_documents() const {
  std::vector<ExtractedDoc> out = ingested.docs;
  std::set<std::string> have;
  for (const auto& d : out) have.insert(d.uri);
  for (const auto& [uri, doc] : neighbor_pages) {
    if (have.insert(uri).second) out.push_back(doc);
  }
  return out;
}

const ExtractedDoc* ExperimentCorpus::find_doc(std::string_view uri) const {
  const auto norm = try_normalize_uri(uri);
  if (!norm) return nullptr;
  for (const auto& d : ingested.docs) {
    if (d.uri == *norm) return &d;
  }
  return nullptr;
}

MethodInputs assemble_inputs(const ExperimentCorpus& corpus, const ExtractedDoc& doc,
                             DfProvider& df, const ExperimentOptions& options) {
  MethodInputs in;
  in.doc = &doc;
  in.df = &df;
  in.stopwords = options.stopwords;
  in.max_results = options.max_results;
  in.tags = fetch_tags(doc.uri, corpus.tags);
  if (const auto links = fetch_inlinks(doc.uri, corpus.backlinks, options.inlink_cap)) {
    std::vector<ExtractedDoc> pages;
    for (const auto& link : links->inlinks) {
      if (const auto it = corpus.neighbor_pages.find(link); it != corpus.neighbor_pages.end()) {
        pages.push_back(it->second);
      } else if (const auto* d = corpus.find_doc(link)) {
        pages.push_back(*d);
      }
    }
    if (!pages.empty()) in.bucket = build_term_bucket(doc.uri, pages, options.inlink_cap);
  }
  return in;
}

std::string to_jsonl(const ExperimentRecord& r) {
  auto j = json::parse(to_jsonl(r.record));
  j["label"] = r.label;
  std::vector<std::string> trail;
  for (const MethodId m : r.trail) trail.push_back(to_string(m));
  j["trail"] = trail;
  return j.dump();
}

ExperimentRecord experiment_record_from_json(std::string_view line) {
  ExperimentRecord r;
  r.record = rank_record_from_json(line);
  try {
    const auto j = json::parse(line);
    r.label = j.value("label", to_string(r.record.method));
    if (j.contains("trail")) {
      for (const auto& m : j.at("trail")) r.trail.push_back(parse_method(m.get<std::string>()));
    } else {
      r.trail = {r.record.method};
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("bad experiment record: {}", e.what()));
  }
  return r;
}

std::vector<ExperimentRecord> load_experiment_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read records '{}'", path.string()));
  std::vector<ExperimentRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(experiment_record_from_json(line));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentCorpus& corpus,
                                             std::span<const MethodId> methods,
                                             std::span<const CombinationSpec> combos,
                                             SearchEngine& engine, DfProvider& df,
                                             const ExperimentOptions& options) {
  if (corpus.ingested.docs.empty()) throw Error("run_experiment: no documents");
  for (const auto& c : combos) c.validate();

  std::vector<const ExtractedDoc*> docs;
  for (const auto& d : corpus.ingested.docs) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(),
            [](const ExtractedDoc* a, const ExtractedDoc* b) { return a->uri < b->uri; });

  std::vector<std::vector<ExperimentRecord>> per_doc(docs.size());

  const auto run_doc = [&](std::size_t k) {
    const ExtractedDoc& doc = *docs[k];
    const MethodInputs inputs = assemble_inputs(corpus, doc, df, options);
    std::map<MethodId, MethodOutcome> memo;
    const MethodRunner runner = [&](MethodId m) -> MethodOutcome {
      if (const auto it = memo.find(m); it != memo.end()) return it->second;
      try {
        auto outcome = run_method(m, doc.uri, engine, inputs);
        memo.emplace(m, outcome);
        return outcome;
      } catch (const RetryableError& e) {
        throw RetryableError(fmt::format("{} / {}: {}", doc.uri, to_string(m), e.what()));
      } catch (const Error& e) {
        throw Error(fmt::format("{} / {}: {}", doc.uri, to_string(m), e.what()));
      }
    };
    auto& out = per_doc[k];
    for (const MethodId m : methods) out.push_back({to_string(m), runner(m).record, {m}});
    for (const auto& c : combos) {
      auto result = run_combination(c, runner, options.policy);
      std::vector<MethodId> trail;
      for (const auto& step : result.trail) trail.push_back(step.method);
      out.push_back({c.label(), std::move(result.final_record), std::move(trail)});
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, docs.size());
  if (jobs == 1) {
    for (std::size_t k = 0; k < docs.size(); ++k) run_doc(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
          for (std::size_t k = next++; k < docs.size(); k = next++) {
            try {
              run_doc(k);
            } catch (...) {
              std::lock_guard lock(failure_mu);
              if (!failure) failure = std::current_exception();
              next = docs.size();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ExperimentRecord> all;
  for (auto& v : per_doc) std::move(v.begin(), v.end(), std::back_inserter(all));
  return all;
}

long long percent_tenths(std::size_t count, std::size_t n) {
  if (n == 0) throw Error("percent of an empty group");
  // round(1000 * count / n), halves rounded up, in exact integer arithmetic
  const unsigned long long num = 2000ULL * count + n;
  return static_cast<long long>(num / (2ULL * n));
}

AggregateRow aggregate_group(std::string label, std::string engine_id,
                             std::span<const RankRecord> records) {
  if (records.empty()) throw Error(fmt::format("aggregate: group '{}' is empty", label));
  AggregateRow row;
  row.label = std::move(label);
  row.engine_id = std::move(engine_id);
  row.n = records.size();
  for (const auto& r : records) ++row.counts[static_cast<std::size_t>(r.rank_class)];
  row.top = percent_tenths(row.counts[0], row.n) / 10.0;
  row.top10 = percent_tenths(row.counts[1], row.n) / 10.0;
  row.top100 = percent_tenths(row.counts[2], row.n) / 10.0;
  row.undiscovered = percent_tenths(row.counts[3], row.n) / 10.0;
  return row;
}

AggregateTable aggregate(std::span<const ExperimentRecord> records) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<RankRecord>> groups;
  const auto add = [&](std::string label, const RankRecord& r) {
    auto key = std::make_pair(std::move(label), r.engine_id);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(r);
  };
  for (const auto& r : records) {
    if (r.label == "TA" && r.record.method == MethodId::TA) {
      if (!r.record.available) continue;
      add("TA[all-tagged]", r.record);
      if (r.record.query_terms.size() == kMaxTags) add("TA[10-tags]", r.record);
    } else {
      add(r.label, r.record);
    }
  }
  AggregateTable table;
  for (const auto& key : order) {
    table.rows.push_back(aggregate_group(key.first, key.second, groups.at(key)));
  }
  return table;
}

std::string AggregateTable::to_csv() const {
  std::string out = "label,engine_id,top,top10,top100,undiscovered,n\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.1f},{:.1f},{:.1f},{:.1f},{}\n", r.label, r.engine_id, r.top,
                       r.top10, r.top100, r.undiscovered, r.n);
  }
  return out;
}

std::string AggregateTable::to_text() const {
  std::string out = fmt::format("{:<16} {:<14} {:>6} {:>6} {:>7} {:>6} {:>5}\n", "method",
                                "engine", "Top", "Top10", "Top100", "Undis", "n");
  for (const auto& r : rows) {
    out += fmt::format("{:<16} {:<14} {:>6.1f} {:>6.1f} {:>7.1f} {:>6.1f} {:>5}\n", r.label,
                       r.engine_id, r.top, r.top10, r.top100, r.undiscovered, r.n);
  }
  return out;
}

std::string TitleAnalysis::histograms_csv() const {
  std::string out = "factor,value,rank_class,count\n";
  for (const auto& b : bins) {
    out += fmt::format("{},{},{},{}\n", b.factor, b.value, to_string(b.rank_class), b.count);
  }
  return out;
}

std::size_t TitleAnalysis::count(std::string_view factor, std::size_t value, RankClass c) const {
  for (const auto& b : bins) {
    if (b.factor == factor && b.value == value && b.rank_class == c) return b.count;
  }
  return 0;
}

TitleAnalysis title_analysis(std::span<const ExtractedDoc> docs,
                             std::span<const RankRecord> records, const StopwordList& stopwords) {
  std::map<std::string, std::string> titles;
  for (const auto& d : docs) {
    if (d.title) titles.emplace(d.uri, *d.title);
  }

  static constexpr std::array<std::string_view, 5> kFactors = {
      "length_terms", "length_chars", "mean_chars_per_term", "stopwords", "length_terms_nosw"};
  std::map<std::string_view, std::map<std::size_t, std::array<std::size_t, 4>>> hist;
  std::vector<RankRecord> ti;
  std::map<std::string, std::size_t> lengths;

  for (const auto& r : records) {
    if (r.method != MethodId::TI) continue;
    const auto it = titles.find(r.uri);
    if (it == titles.end()) continue;
    const TitleStats st = title_stats(it->second, stopwords);
    const std::size_t nosw =
        text::split_whitespace(strip_stopwords_from_title(it->second, stopwords)).size();
    const auto cls = static_cast<std::size_t>(r.rank_class);
    const std::array<std::size_t, 5> values = {
        st.term_count, st.char_count,
        static_cast<std::size_t>(std::floor(st.mean_chars_per_term + 0.5)), st.stopword_count,
        nosw};
    for (std::size_t f = 0; f < kFactors.size(); ++f) ++hist[kFactors[f]][values[f]][cls];
    ti.push_back(r);
    lengths[r.uri] = st.term_count;
  }

  TitleAnalysis out;
  for (const auto factor : kFactors) {
    const auto it = hist.find(factor);
    if (it == hist.end() || it->second.empty()) continue;
    const std::size_t lo = it->second.begin()->first;
    const std::size_t hi = it->second.rbegin()->first;
    for (std::size_t v = lo; v <= hi; ++v) {
      const auto cell = it->second.find(v);
      for (const RankClass c : kAllRankClasses) {
        const std::size_t n = cell == it->second.end() ? 0 : cell->second[static_cast<std::size_t>(c)];
        out.bins.push_back({std::string(factor), v, c, n});
      }
    }
  }
  out.table = build_probability_table(ti, lengths);
  return out;
}

}  // namespace relict

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relict/content.hpp"
#include "relict/dfsource.hpp"
#include "relict/pipeline.hpp"
#include "relict/webclients.hpp"

namespace relict {

struct ManifestPage {
  std::string uri;
  std::optional<std::string> html;
  std::optional<std::filesystem::path> html_path;
};

struct ManifestEntry {
  ManifestPage page;
  std::optional<std::vector<std::string>> tags;
  std::vector<ManifestPage> inlinks;
};

/// JSONL corpus description. An optional first line {"manifest_version": "1"}
/// names the format version. Each entry line:
///   {"uri": ..., "html": ... | "html_path": ..., "tags": [...],
///    "inlinks": [{"uri":..., "html"|"html_path": ...}], "inlink_paths": [...]}
/// Relative paths resolve against the manifest's directory; pages listed
/// only by path get a file:// URI.
struct CorpusManifest {
  std::string version = "1";
  std::vector<ManifestEntry> entries;

  /// Throws relict::Error on malformed lines, duplicate URIs (naming both
  /// spellings) and referenced files that do not exist.
  static CorpusManifest parse(std::string_view jsonl, const std::filesystem::path& base_dir);
  static CorpusManifest load(const std::filesystem::path& path);
};

/// Reads a page body, from inline html or from its file.
std::string read_page_body(const ManifestPage& page);

struct Rejection {
  std::string uri;
  std::string reason;
};

struct IngestResult {
  std::vector<ExtractedDoc> docs;  // accepted, manifest order
  std::vector<Rejection> rejected;
};

IngestResult ingest(const CorpusManifest& manifest, const CorpusFilter& filter,
                    const StopwordList& stopwords = StopwordList::bundled());

/// Everything an experiment needs, resolved from a manifest: accepted docs,
/// tag and backlink providers, and extracted inlink pages.
struct ExperimentCorpus {
  IngestResult ingested;
  FixtureTagProvider tags;
  FixtureBacklinkProvider backlinks;
  std::map<std::string, ExtractedDoc> neighbor_pages;  // by normalized URI

  /// Accepted docs plus inlink pages that are not themselves corpus docs.
  std::vector<ExtractedDoc> index_documents() const;
  const ExtractedDoc* find_doc(std::string_view uri) const;
};

ExperimentCorpus load_corpus(const CorpusManifest& manifest, const CorpusFilter& filter,
                             const StopwordList& stopwords = StopwordList::bundled());

struct ExperimentOptions {
  EscalationPolicy policy = EscalationPolicy::OnUndiscovered;
  std::size_t inlink_cap = kDefaultInlinkCap;
  std::size_t max_results = 100;
  std::size_t jobs = 1;
  const StopwordList* stopwords = &StopwordList::bundled();
};

/// Gathers tags, the neighborhood bucket and the cached copy for one doc.
MethodInputs assemble_inputs(const ExperimentCorpus& corpus, const ExtractedDoc& doc,
                             DfProvider& df, const ExperimentOptions& options);

/// One evaluated (doc, method) or (doc, combination) outcome.
struct ExperimentRecord {
  std::string label;  // method name or combination label
  RankRecord record;  // for combinations, the final step's record
  std::vector<MethodId> trail;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

std::string to_jsonl(const ExperimentRecord& r);
ExperimentRecord experiment_record_from_json(std::string_view line);
std::vector<ExperimentRecord> load_experiment_records(const std::filesystem::path& path);

/// One record per (doc, method), then one per (doc, combination); docs in
/// ascending URI order. Combinations reuse the single-method outcomes of the
/// same doc. Engine errors are rethrown naming the uri and method.
std::vector<ExperimentRecord> run_experiment(const ExperimentCorpus& corpus,
                                             std::span<const MethodId> methods,
                                             std::span<const CombinationSpec> combos,
                                             SearchEngine& engine, DfProvider& df,
                                             const ExperimentOptions& options = {});

/// Half-up rounding of 100 * count / n to one decimal, in tenths of a percent.
long long percent_tenths(std::size_t count, std::size_t n);

struct AggregateRow {
  std::string label;
  std::string engine_id;
  double top = 0, top10 = 0, top100 = 0, undiscovered = 0;  // disjoint buckets
  std::size_t n = 0;
  std::array<std::size_t, 4> counts{};
};

struct AggregateTable {
  std::vector<AggregateRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Disjoint-bucket percentages for one group of records.
AggregateRow aggregate_group(std::string label, std::string engine_id,
                             std::span<const RankRecord> records);

/// Groups by (label, engine) in first-appearance order. TA rows are split
/// into "TA[all-tagged]" (URIs with any tags) and "TA[10-tags]" (exactly
/// ten tags); untagged URIs do not count toward either. Empty groups are
/// dropped.
AggregateTable aggregate(std::span<const ExperimentRecord> records);

struct HistogramBin {
  std::string factor;
  std::size_t value = 0;
  RankClass rank_class = RankClass::Undiscovered;
  std::size_t count = 0;
};

struct TitleAnalysis {
  std::vector<HistogramBin> bins;  // dense over [min, max] of each factor
  std::vector<ProbabilityRow> table;

  /// `factor,value,rank_class,count`
  std::string histograms_csv() const;
  std::size_t count(std::string_view factor, std::size_t value, RankClass c) const;
};

/// Title factors (terms, characters, mean characters per term, stop words,
/// terms after stop word removal) bucketed by the TI rank class, plus the
/// per-length probability table. Records other than method TI are ignored,
/// as are docs without a title.
TitleAnalysis title_analysis(std::span<const ExtractedDoc> docs,
                             std::span<const RankRecord> records,
                             const StopwordList& stopwords = StopwordList::bundled());

}  // namespace relict

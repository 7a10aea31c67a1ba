// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "relict/content.hpp"
#include "relict/evalharness.hpp"
#include "relict/lexsig.hpp"
#include "relict/pipeline.hpp"
#include "relict/searchsim.hpp"
#include "relict/text.hpp"
#include "relict/transport.hpp"
#include "support.hpp"

using namespace relict;
namespace rt = relict::testing;
using SteadyClock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

RankRecord make_rec(const std::string& uri, MethodId m, std::optional<std::size_t> rank) {
  RankRecord r;
  r.uri = uri;
  r.method = m;
  r.engine_id = "scripted";
  r.rank_class =
      classify(rank ? std::optional<long long>(static_cast<long long>(*rank)) : std::nullopt);
  if (r.rank_class != RankClass::Undiscovered) r.rank = rank;
  return r;
}

std::string joined(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

// ---- 1 --------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = SteadyClock::now();
  std::mt19937_64 rng(20090615);
  std::size_t corpora = 0, sigs = 0;
  for (; corpora < 1200 && o.pass; ++corpora) {
    const auto corpus = rt::random_corpus(rng, 10, 50);
    std::vector<ExtractedDoc> docs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      docs.push_back(ExtractedDoc::from_tokens("http://r" + std::to_string(i) + ".org", corpus[i]));
    }
    auto index = std::make_shared<const Index>(Index::build(docs));
    LocalIndexDfProvider df(index);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const std::size_t n = 1 + rng() % 10;
      const auto sig = make_signature(docs[i], n, df);
      const auto want = rt::oracle_signature(corpus, i, n);
      ++sigs;
      o.require(sig.terms.size() == want.size(), fmt::format("corpus {} doc {}: length", corpora, i));
      for (std::size_t k = 0; o.pass && k < want.size(); ++k) {
        o.require(sig.terms[k].term == want[k].term,
                  fmt::format("corpus {} doc {}: position {} {} != {}", corpora, i, k,
                              sig.terms[k].term, want[k].term));
        o.require(std::abs(sig.terms[k].score - want[k].score) <= 1e-12,
                  fmt::format("corpus {} doc {}: score delta", corpora, i));
      }
    }
  }
  const double s = seconds_since(t0);
  o.require(s < 10.0, fmt::format("took {:.2f}s", s));
  if (o.pass) o.detail = fmt::format("{} corpora, {} signatures, {:.2f}s", corpora, sigs, s);
  return o;
}

// ---- 2 --------------------------------------------------------------------

Outcome self_retrieval() {
  Outcome o;
  const auto t0 = SteadyClock::now();
  const auto corpus = load_corpus(CorpusManifest::load(rt::data_dir() / "corpus" / "manifest.jsonl"), {});
  const auto docs = corpus.index_documents();
  auto index = std::make_shared<const Index>(Index::build(docs));
  LocalIndexDfProvider df(index);
  EngineBinding binding;
  auto engine = make_engine(binding, {index, nullptr});
  std::size_t top1 = 0;
  const auto& pages = corpus.ingested.docs;
  for (const auto& d : pages) {
    MethodInputs in;
    in.doc = &d;
    in.df = &df;
    const auto r = run_method(MethodId::LS5, d.uri, *engine, in);
    if (r.record.rank_class == RankClass::Top1) {
      ++top1;
    } else {
      o.require(false, fmt::format("{} -> {}", d.uri, to_string(r.record.rank_class)));
    }
  }
  o.require(pages.size() >= 100, fmt::format("only {} pages", pages.size()));
  const double s = seconds_since(t0);
  o.require(s < 5.0, fmt::format("took {:.2f}s", s));
  if (o.pass) o.detail = fmt::format("{}/{} Top1, {:.2f}s", top1, pages.size(), s);
  return o;
}

// ---- 3 --------------------------------------------------------------------

ExtractedDoc worked_page(const std::string& file, const std::string& uri) {
  return extract_text(RawPage::make(uri, rt::slurp(rt::worked_dir() / file)), StopwordList::bundled());
}

// Independent top-n from the hit-count table: tf * ln(N / max(df, 1)).
std::vector<std::string> fixture_oracle(const TermFreqs& freqs, std::size_t n) {
  std::map<std::string, double> df;
  std::istringstream in(rt::slurp(rt::worked_dir() / "df_hitcounts.tsv"));
  std::string term;
  double count;
  while (in >> term >> count) df[term] = count;
  double total = 0;
  for (const auto& [_, c] : freqs) total += static_cast<double>(c);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [t, c] : freqs) {
    const double d = std::max(1.0, df.count(t) ? df[t] : 0.0);
    scored.push_back({-(c / total) * std::log(2.5e10 / d), t});
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n && i < scored.size(); ++i) out.push_back(scored[i].second);
  return out;
}

Outcome worked_examples() {
  Outcome o;
  DfProviderConfig cfg;
  cfg.provider_id = "fixture-hits";
  cfg.kind = DfProviderKind::RemoteHitcount;
  cfg.endpoint = "file://" + (rt::worked_dir() / "df_hitcounts.tsv").string();
  RemoteHitcountDfProvider df(cfg);

  const auto nic = worked_page("nicnichols.html", "http://www.nicnichols.com/");
  const std::string ls7 = "nicnichols nichols nic stuff shoot command penitentiary";
  o.require(joined(fixture_oracle(nic.term_freqs, 7)) == ls7, "df fixture oracle disagrees on LS7");
  const auto sig = joined(make_signature(nic, 7, df).words());
  o.require(sig == ls7, "LS7 = " + sig);

  const auto tags = FixtureTagProvider::load(rt::worked_dir() / "tags.jsonl");
  MethodInputs in;
  in.doc = &nic;
  in.tags = fetch_tags("http://www.nicnichols.com/", tags);
  const auto ta = derive_query(MethodId::TA, in);
  const std::string want_tags =
      "photography blog photographer portifolio portfolio inspiration photographers";
  o.require(std::holds_alternative<SearchQuery>(ta) && std::get<SearchQuery>(ta).text() == want_tags,
            "tags differ");

  std::vector<ExtractedDoc> inlinks;
  for (const char* f : {"inlink_boonika.html", "inlink_phirebrush.html", "inlink_blog.html",
                        "inlink_forum.html"}) {
    inlinks.push_back(worked_page(f, std::string("http://") + f));
  }
  const auto bucket = build_term_bucket("http://www.nicnichols.com/", inlinks);
  const std::string lnls7 = "nicnichols photo spacer view phirebrush submission boonika";
  o.require(joined(fixture_oracle(bucket.term_freqs, 7)) == lnls7, "df fixture oracle disagrees on LNLS7");
  const auto lsig = joined(make_signature(bucket, 7, df).words());
  o.require(lsig == lnls7, "LNLS7 = " + lsig);

  const std::pair<const char*, const char*> titles[] = {
      {"smiledesigners.html", "Home"},
      {"redcrossla.html", "American Red Cross of Greater Los Angeles"},
      {"aircharter.html",
       "ACMI, Private Jet Charter, Private Jet Lease, Charter Flight Service: Air Charter "
       "International"}};
  for (const auto& [file, want] : titles) {
    const auto got = extract_title(rt::slurp(rt::worked_dir() / file));
    o.require(got && *got == want, std::string("title of ") + file);
  }
  if (o.pass) o.detail = "LS7, tags, LNLS7 and three titles exact";
  return o;
}

// ---- 4 --------------------------------------------------------------------

Outcome classification_boundaries() {
  Outcome o;
  const std::pair<std::optional<long long>, RankClass> cases[] = {
      {1, RankClass::Top1},      {2, RankClass::Top10},          {10, RankClass::Top10},
      {11, RankClass::Top100},   {100, RankClass::Top100},       {101, RankClass::Undiscovered},
      {std::nullopt, RankClass::Undiscovered}};
  for (const auto& [rank, want] : cases) {
    o.require(classify(rank) == want,
              fmt::format("rank {}", rank ? std::to_string(*rank) : std::string("absent")));
  }
  if (o.pass) o.detail = "7 boundary cases";
  return o;
}

// ---- 5 --------------------------------------------------------------------

Outcome combination_algebra() {
  Outcome o;
  std::mt19937_64 rng(4242);
  const std::vector<MethodId> pool(kAllMethods.begin(), kAllMethods.end());
  auto random_rank = [&]() -> std::optional<std::size_t> {
    if (rng() % 3 == 0) return std::nullopt;
    return 1 + rng() % 130;
  };
  std::size_t trials = 0;
  for (; trials < 10000 && o.pass; ++trials) {
    std::vector<MethodId> steps = pool;
    std::shuffle(steps.begin(), steps.end(), rng);
    steps.resize(2 + rng() % 2);
    const CombinationSpec spec{steps};
    const std::size_t n_uris = 1 + rng() % 12;

    std::vector<ExperimentRecord> records;
    std::size_t und_combo = 0, und_first = 0;
    std::array<std::size_t, 4> recount{};
    for (std::size_t u = 0; u < n_uris; ++u) {
      const std::string uri = "http://u" + std::to_string(u) + ".org";
      std::map<MethodId, std::optional<std::size_t>> ranks;
      for (auto m : steps) ranks[m] = random_rank();
      const MethodRunner runner = [&](MethodId m) {
        MethodOutcome out;
        out.record = make_rec(uri, m, ranks.at(m));
        return out;
      };
      const auto res = run_combination(spec, runner);
      const auto first = runner(steps[0]).record;
      if (first.rank_class != RankClass::Undiscovered) {
        o.require(res.final_record == first && res.trail.size() == 1, "short-circuit purity");
      }
      und_first += first.rank_class == RankClass::Undiscovered;
      und_combo += res.final_record.rank_class == RankClass::Undiscovered;
      ++recount[static_cast<std::size_t>(res.final_record.rank_class)];
      records.push_back({spec.label(), res.final_record, {}});
    }
    o.require(und_combo <= und_first, "fallback increased Undiscovered");
    const auto table = aggregate(records);
    o.require(table.rows.size() == 1, "one aggregate row");
    const auto& row = table.rows[0];
    const double got[4] = {row.top, row.top10, row.top100, row.undiscovered};
    for (int c = 0; c < 4; ++c) {
      // tenths, half-up, integer arithmetic
      const long long tenths = static_cast<long long>((2000 * recount[c] + n_uris) / (2 * n_uris));
      o.require(std::llround(got[c] * 10.0) == tenths, "aggregate disagrees with recount");
    }
  }

  const auto fixture = load_experiment_records(rt::fixture_dir() / "aggregate" / "ls5_yahoo_309.jsonl");
  const auto table = aggregate(fixture);
  o.require(table.rows.size() == 1 && table.rows[0].n == 309, "fixture has 309 records");
  if (o.pass) {
    const auto& r = table.rows[0];
    o.require(r.top == 67.6 && r.top10 == 7.8 && r.top100 == 2.3 && r.undiscovered == 22.3,
              fmt::format("fixture aggregates to {}/{}/{}/{}", r.top, r.top10, r.top100, r.undiscovered));
  }
  if (o.pass) o.detail = fmt::format("{} trials; 309-record fixture 67.6/7.8/2.3/22.3", trials);
  return o;
}

// ---- 6 --------------------------------------------------------------------

Outcome probability_table() {
  Outcome o;
  std::vector<RankRecord> recs;
  std::map<std::string, std::size_t> lengths;
  {
    std::ifstream in(rt::fixture_dir() / "probability" / "ti_records.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      recs.push_back(rank_record_from_json(line));
      const auto j = nlohmann::json::parse(line);
      lengths[recs.back().uri] = text::split_whitespace(j.at("title").get<std::string>()).size();
    }
  }
  const auto table = build_probability_table(recs, lengths);
  const auto csv = probability_table_csv(table);
  o.require(csv == rt::slurp(rt::fixture_dir() / "probability" / "expected.csv"),
            "hand-computed table differs:\n" + csv);

  // Records built to the published counts: 10 URIs per length.
  const double published[][4] = {
      {1, 0.3, 0.4, 0.5},  {2, 0.3, 0.7, 0.7},  {3, 0.7, 0.8, 0.8},  {4, 0.8, 0.9, 0.9},
      {5, 0.7, 0.8, 0.8},  {6, 0.9, 0.9, 0.9},  {7, 0.8, 0.8, 0.8},  {8, 0.9, 0.9, 0.9},
      {9, 0.7, 0.7, 0.7},  {10, 0.6, 0.6, 0.6}, {11, 0.7, 0.7, 0.7}, {12, 0.8, 0.8, 0.8},
      {13, 0.5, 0.5, 0.5}, {14, 0.5, 0.5, 0.5}, {15, 1.0, 1.0, 1.0}, {16, 0.3, 0.5, 0.5},
      {17, 0.5, 0.6, 0.6}, {18, 0.5, 0.5, 0.5}, {19, 0.5, 0.8, 0.8}, {24, 0.5, 0.5, 0.5},
      {33, 0.5, 0.5, 0.5}};
  std::vector<RankRecord> built;
  std::map<std::string, std::size_t> built_len;
  for (const auto& row : published) {
    const auto L = static_cast<std::size_t>(row[0]);
    const int n1 = static_cast<int>(std::lround(row[1] * 10));
    const int n10 = static_cast<int>(std::lround(row[2] * 10));
    const int n100 = static_cast<int>(std::lround(row[3] * 10));
    for (int i = 0; i < 10; ++i) {
      const std::string uri = fmt::format("http://len{}-{}.org", L, i);
      std::optional<std::size_t> rank;
      if (i < n1) rank = 1;
      else if (i < n10) rank = 6;
      else if (i < n100) rank = 42;
      built.push_back(make_rec(uri, MethodId::TI, rank));
      built_len[uri] = L;
    }
  }
  const auto rebuilt = build_probability_table(built, built_len);
  o.require(rebuilt.size() == 21, "21 rows");
  for (std::size_t i = 0; o.pass && i < rebuilt.size(); ++i) {
    const auto& r = rebuilt[i];
    o.require(r.p1 <= r.p10 && r.p10 <= r.p100, fmt::format("row {} not cumulative", r.title_length));
    o.require(r.title_length == static_cast<std::size_t>(published[i][0]) &&
                  std::abs(r.p1 - published[i][1]) < 1e-12 &&
                  std::abs(r.p10 - published[i][2]) < 1e-12 &&
                  std::abs(r.p100 - published[i][3]) < 1e-12,
              fmt::format("row {} differs", r.title_length));
  }
  auto row_of = [&](std::size_t L) {
    for (const auto& r : rebuilt) {
      if (r.title_length == L) return r;
    }
    return ProbabilityRow{};
  };
  const auto r4 = row_of(4), r15 = row_of(15);
  o.require(r4.p1 == 0.8 && r4.p10 == 0.9 && r4.p100 == 0.9, "L=4 row");
  o.require(r15.p1 == 1.0 && r15.p10 == 1.0 && r15.p100 == 1.0, "L=15 row");
  for (const auto& r : table) o.require(r.p1 <= r.p10 && r.p10 <= r.p100, "fixture not cumulative");
  if (o.pass) o.detail = "hand table exact; L=4 0.8/0.9/0.9; L=15 1.0/1.0/1.0";
  return o;
}

// ---- 7 --------------------------------------------------------------------

Outcome title_corpus() {
  Outcome o;
  std::ifstream in(rt::fixture_dir() / "titles" / "cases.jsonl");
  std::string line;
  std::size_t n = 0, ok = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ++n;
    try {
      const auto got = extract_title(j.at("html").get<std::string>());
      const auto& want = j.at("expected");
      const bool match = want.is_null() ? !got.has_value()
                                        : (got && *got == want.get<std::string>());
      if (match) ++ok;
      o.require(match, "case " + j.at("name").get<std::string>());
    } catch (const std::exception& e) {
      o.require(false, "case " + j.at("name").get<std::string>() + " threw " + e.what());
    }
  }
  o.require(n >= 20, fmt::format("only {} cases", n));
  if (o.pass) o.detail = fmt::format("{}/{} cases", ok, n);
  return o;
}

// ---- 8 --------------------------------------------------------------------

Outcome offline_guarantee(const std::shared_ptr<CountingTransport>& stub, SteadyClock::time_point t0) {
  Outcome o;
  // Run a full local experiment as well, so every engine-facing path is exercised.
  const auto corpus = load_corpus(CorpusManifest::load(rt::data_dir() / "corpus" / "manifest.jsonl"), {});
  const auto docs = corpus.index_documents();
  auto index = std::make_shared<const Index>(Index::build(docs));
  LocalIndexDfProvider df(index);
  EngineBinding binding;
  auto engine = make_engine(binding, {index, nullptr});
  const std::vector<MethodId> methods(kAllMethods.begin(), kAllMethods.end());
  const std::vector<CombinationSpec> combos = {default_combination(),
                                               CombinationSpec::parse("LS5-TI"),
                                               CombinationSpec::parse("LS7-TI-LS5")};
  const auto recs = run_experiment(corpus, methods, combos, *engine, df);
  o.require(!recs.empty(), "experiment produced no records");
  o.require(stub->calls() == 0, fmt::format("stub saw {} requests", stub->calls()));
  o.require(HttplibTransport::connections_attempted() == 0,
            fmt::format("{} real connections", HttplibTransport::connections_attempted()));
  const double s = seconds_since(t0);
  o.require(s < 60.0, fmt::format("suite took {:.2f}s", s));
  if (o.pass) o.detail = fmt::format("0 connections, {} records, suite {:.2f}s", recs.size(), s);
  return o;
}

}  // namespace

int main() {
  const auto t0 = SteadyClock::now();
  auto stub = std::make_shared<CountingTransport>();
  set_default_transport(stub);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"tf-idf oracle equivalence", oracle_equivalence},
      {"self-retrieval LS5 Top1", self_retrieval},
      {"worked-example fidelity", worked_examples},
      {"classification boundaries", classification_boundaries},
      {"combination algebra", combination_algebra},
      {"probability table", probability_table},
      {"title extraction corpus", title_corpus},
      {"offline guarantee", [&] { return offline_guarantee(stub, t0); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << fmt::format("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             o.detail);
  }
  return failed == 0 ? 0 : 1;
}

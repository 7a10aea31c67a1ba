#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "relict/content.hpp"
#include "relict/evalharness.hpp"
#include "relict/lexsig.hpp"
#include "relict/pipeline.hpp"
#include "relict/searchsim.hpp"
#include "support.hpp"

using namespace relict;
namespace rt = relict::testing;

namespace {

std::vector<ExtractedDoc> to_docs(const std::vector<std::vector<std::string>>& corpus) {
  std::vector<ExtractedDoc> docs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    docs.push_back(ExtractedDoc::from_tokens("http://p" + std::to_string(i) + ".org", corpus[i]));
  }
  return docs;
}

std::string random_markup(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "<title>", "</title>", "<TITLE x='>'>", "<", ">", "&lt;", "&gt;", "&amp;", "&#60;",
      "text", " ", "<!--", "-->", "<script>", "</script>", "<b>", "\"", "'", "&#x3e;", "<head>",
      "word", "\n", "<title", "&", ";"};
  std::string s;
  const std::size_t n = rng() % 30;
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

std::optional<std::size_t> random_rank(std::mt19937_64& rng) {
  if (rng() % 4 == 0) return std::nullopt;
  return 1 + rng() % 150;
}

RankRecord make_rec(std::string uri, MethodId m, std::optional<std::size_t> rank) {
  RankRecord r;
  r.uri = std::move(uri);
  r.method = m;
  r.engine_id = "e";
  r.rank_class = classify(rank ? std::optional<long long>(static_cast<long long>(*rank)) : std::nullopt);
  if (r.rank_class != RankClass::Undiscovered) r.rank = rank;
  return r;
}

}  // namespace

TEST(Properties, TitleNeverContainsAngleBrackets) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const auto m = random_markup(rng);
    const auto t = extract_title(m);
    if (t) {
      EXPECT_EQ(t->find_first_of("<>"), std::string::npos) << m;
      EXPECT_FALSE(t->empty());
    }
    const auto d = extract_text(RawPage::make("http://f.org", m), StopwordList::bundled());
    EXPECT_EQ(d.tokens.size(), d.token_count);
  }
}

TEST(Properties, ExtractionDeterministicAndStopwordFree) {
  std::mt19937_64 rng(12);
  const auto& sw = StopwordList::bundled();
  std::vector<std::string> vocab(sw.words().begin(), sw.words().end());
  for (int i = 0; i < 200; ++i) {
    std::string body;
    for (int k = 0; k < 50; ++k) {
      body += (rng() % 2 ? vocab[rng() % vocab.size()] : rt::pseudo_term(rng() % 60)) + " ";
      if (rng() % 7 == 0) body += "<br>";
    }
    const auto a = extract_text(RawPage::make("http://f.org", body), sw);
    const auto b = extract_text(RawPage::make("http://f.org", body), sw);
    EXPECT_EQ(a.tokens, b.tokens);
    for (const auto& [t, _] : a.term_freqs) EXPECT_FALSE(sw.contains(t));
  }
}

TEST(Properties, LocalDfMonotoneUnderIndexing) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto corpus = rt::random_corpus(rng, 8, 20);
    auto before = std::make_shared<const Index>(Index::build(to_docs(corpus)));
    corpus.push_back(rt::random_corpus(rng, 1, 20)[0]);
    auto after = std::make_shared<const Index>(Index::build(to_docs(corpus)));
    for (std::size_t t = 0; t < 20; ++t) {
      EXPECT_GE(after->df(rt::pseudo_term(t)), before->df(rt::pseudo_term(t)));
    }
    LocalIndexDfProvider p(before);
    const std::vector<std::string> terms = {rt::pseudo_term(0), rt::pseudo_term(3)};
    const auto r1 = p.lookup(terms);
    const auto r2 = p.lookup(terms);
    EXPECT_EQ(r1[0].df, r2[0].df);
    EXPECT_EQ(r1[1].df, r2[1].df);
  }
}

TEST(Properties, SignatureInvariants) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const auto corpus = rt::random_corpus(rng);
    const auto docs = to_docs(corpus);
    auto idx = std::make_shared<const Index>(Index::build(docs));
    LocalIndexDfProvider df(idx);
    for (const auto& d : docs) {
      const auto s5 = make_signature(d, 5, df);
      const auto s7 = make_signature(d, 7, df);
      // subset
      const auto w7 = s7.words();
      std::set<std::string> seven(w7.begin(), w7.end());
      for (const auto& w : s5.words()) EXPECT_TRUE(seven.contains(w));
      // non-increasing, distinct
      std::set<std::string> seen;
      for (std::size_t k = 0; k < s7.terms.size(); ++k) {
        EXPECT_TRUE(seen.insert(s7.terms[k].term).second);
        if (k) {
          EXPECT_LE(s7.terms[k].score, s7.terms[k - 1].score);
        }
      }
      // uniform tf scaling keeps the order
      std::vector<std::string> tripled;
      for (const auto& t : d.tokens) tripled.insert(tripled.end(), 3, t);
      const auto scaled = ExtractedDoc::from_tokens(d.uri, tripled);
      EXPECT_EQ(make_signature(scaled, 7, df).words(), s7.words());
      // zero-idf terms only appear once positive terms run out
      std::size_t positive = 0;
      for (const auto& [t, _] : d.term_freqs) positive += idx->df(t) < idx->n_docs();
      for (const auto& st : s7.terms) {
        if (idx->df(st.term) == idx->n_docs()) {
          EXPECT_LT(positive, 7u);
        }
      }
    }
  }
}

TEST(Properties, SearchDeterminismPhraseSubsetCap) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto docs = to_docs(rt::random_corpus(rng, 10, 8));
    const auto idx = Index::build(docs);
    SearchQuery q;
    for (std::size_t k = 0, n = 1 + rng() % 3; k < n; ++k) q.terms.push_back(rt::pseudo_term(rng() % 8));
    q.max_results = 1 + rng() % 12;
    const auto a = idx.search(q);
    EXPECT_EQ(a, idx.search(q));
    EXPECT_LE(a.hits.size(), q.max_results);
    for (std::size_t i = 1; i < a.hits.size(); ++i) EXPECT_GE(a.hits[i - 1].score, a.hits[i].score);
    q.max_results = 100;
    const auto keyword = idx.search(q);
    q.quoted = true;
    const auto phrase = idx.search(q);
    std::set<std::string> kw;
    for (const auto& h : keyword.hits) kw.insert(h.uri);
    for (const auto& h : phrase.hits) EXPECT_TRUE(kw.contains(h.uri));
  }
}

TEST(Properties, ProviderCapsHold) {
  std::mt19937_64 rng(16);
  FixtureTagProvider tags;
  FixtureBacklinkProvider links;
  for (int i = 0; i < 200; ++i) {
    const auto uri = "http://c" + std::to_string(i) + ".org";
    std::vector<std::string> t, l;
    for (std::size_t k = 0, n = rng() % 25; k < n; ++k) t.push_back("T" + std::to_string(rng() % 30));
    for (std::size_t k = 0, n = rng() % 120; k < n; ++k) {
      l.push_back(rng() % 10 ? "http://l" + std::to_string(rng() % 90) + ".org" : uri);
    }
    tags.add(uri, t);
    links.add(uri, l);
    const std::size_t cap = 1 + rng() % 60;
    if (const auto got = fetch_tags(uri, tags)) {
      EXPECT_LE(got->tags.size(), 10u);
      EXPECT_GE(got->tags.size(), 1u);
    }
    if (const auto got = fetch_inlinks(uri, links, cap)) {
      EXPECT_LE(got->inlinks.size(), cap);
      std::set<std::string> uniq(got->inlinks.begin(), got->inlinks.end());
      EXPECT_EQ(uniq.size(), got->inlinks.size());
      EXPECT_FALSE(uniq.contains(uri));
    }
  }
}

TEST(Properties, ClassifyMonotone) {
  for (long long r = 1; r < 300; ++r) {
    EXPECT_LE(static_cast<int>(classify(r)), static_cast<int>(classify(r + 1)));
  }
  EXPECT_LE(static_cast<int>(classify(1000)), static_cast<int>(classify(std::nullopt)));
}

TEST(Properties, FallbackDominanceAndPurity) {
  std::mt19937_64 rng(17);
  const std::vector<MethodId> pool(kAllMethods.begin(), kAllMethods.end());
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<MethodId> steps = pool;
    std::shuffle(steps.begin(), steps.end(), rng);
    steps.resize(1 + rng() % 4);
    std::map<MethodId, std::optional<std::size_t>> ranks;
    for (auto m : steps) ranks[m] = random_rank(rng);
    MethodRunner runner = [&](MethodId m) {
      MethodOutcome o;
      o.record = make_rec("http://u.org", m, ranks.at(m));
      return o;
    };
    CombinationSpec spec{steps};
    const auto res = run_combination(spec, runner);
    const auto first = runner(steps[0]).record;
    EXPECT_LE(static_cast<int>(res.final_record.rank_class), static_cast<int>(first.rank_class));
    if (first.rank_class != RankClass::Undiscovered) {
      EXPECT_EQ(res.final_record, first);
    }
  }
}

TEST(Properties, RandomProbabilityTablesCumulative) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RankRecord> recs;
    std::map<std::string, std::size_t> lengths;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 60); i < n; ++i) {
      const auto uri = "http://t" + std::to_string(i) + ".org";
      recs.push_back(make_rec(uri, MethodId::TI, random_rank(rng)));
      lengths[uri] = 1 + rng() % 12;
    }
    for (const auto& row : build_probability_table(recs, lengths)) {
      EXPECT_LE(row.p1, row.p10);
      EXPECT_LE(row.p10, row.p100);
      EXPECT_GE(row.p1, 0.0);
      EXPECT_LE(row.p100, 1.0);
    }
  }
}

TEST(Properties, AggregateClosureAndRecount) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RankRecord> recs;
    std::array<std::size_t, 4> counts{};
    for (int i = 0, n = 1 + static_cast<int>(rng() % 400); i < n; ++i) {
      recs.push_back(make_rec("http://a" + std::to_string(i) + ".org", MethodId::LS5, random_rank(rng)));
      ++counts[static_cast<std::size_t>(recs.back().rank_class)];
    }
    const auto row = aggregate_group("LS5", "e", recs);
    const double n = static_cast<double>(recs.size());
    const double got[4] = {row.top, row.top10, row.top100, row.undiscovered};
    double sum = 0;
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(row.counts[c], counts[c]);
      EXPECT_NEAR(got[c], std::floor(1000.0 * counts[c] / n + 0.5) / 10.0, 1e-9);
      sum += got[c];
    }
    EXPECT_NEAR(sum, 100.0, 0.2);
  }
}

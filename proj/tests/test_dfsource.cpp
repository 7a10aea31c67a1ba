#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "relict/dfsource.hpp"
#include "relict/error.hpp"
#include "relict/searchsim.hpp"
#include "relict/transport.hpp"
#include "support.hpp"

using namespace relict;
using namespace std::chrono_literals;
namespace rt = relict::testing;

namespace {

std::shared_ptr<const Index> three_doc_index() {
  std::vector<ExtractedDoc> docs = {
      ExtractedDoc::from_tokens("http://a.org", {"penitentiary", "stuff"}),
      ExtractedDoc::from_tokens("http://b.org", {"stuff", "camera"}),
      ExtractedDoc::from_tokens("http://c.org", {"camera", "stuff"}),
  };
  return std::make_shared<const Index>(Index::build(docs));
}

DfProviderConfig remote_config(std::string endpoint) {
  DfProviderConfig c;
  c.provider_id = "web";
  c.kind = DfProviderKind::RemoteHitcount;
  c.endpoint = std::move(endpoint);
  return c;
}

}  // namespace

TEST(DfSource, LocalExactCounts) {
  LocalIndexDfProvider p(three_doc_index());
  const std::vector<std::string> terms = {"penitentiary", "stuff", "absent"};
  const auto r = p.lookup(terms);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].df, 1u);
  EXPECT_EQ(r[0].n_docs, 3u);
  EXPECT_EQ(r[1].df, 3u);
  EXPECT_EQ(r[2].df, 0u);
  EXPECT_EQ(r[2].provider_id, "local-index");
}

TEST(DfSource, BatchOrderPreserved) {
  LocalIndexDfProvider p(three_doc_index());
  const std::vector<std::string> terms = {"stuff", "zed", "camera", "penitentiary", "a1", "b2", "camera"};
  const auto r = p.lookup(terms);
  ASSERT_EQ(r.size(), 7u);
  for (std::size_t i = 0; i < terms.size(); ++i) EXPECT_EQ(r[i].term, terms[i]);
  EXPECT_EQ(r[6].df, 2u);
}

TEST(DfSource, RejectsEmptyBatchAndTerms) {
  LocalIndexDfProvider p(three_doc_index());
  EXPECT_THROW(p.lookup({}), Error);
  const std::vector<std::string> bad = {"ok", ""};
  EXPECT_THROW(p.lookup(bad), Error);
}

TEST(DfSource, ConfigValidation) {
  DfProviderConfig c = remote_config("");
  c.endpoint.reset();
  EXPECT_THROW(c.validate(), Error);
  c = remote_config("http://x/{term}");
  c.n_docs_override = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_df_provider_kind("cache-wrapped"), DfProviderKind::CacheWrapped);
  EXPECT_THROW(parse_df_provider_kind("oracle"), Error);
}

TEST(DfSource, RemoteUsesTransportAndDefaultN) {
  auto t = std::make_shared<CountingTransport>();
  t->respond("http://hits.test/count?q=lo%20fi", {200, "1234\n"});
  t->respond("http://hits.test/count?q=holga", {200, "99"});
  RemoteHitcountDfProvider p(remote_config("http://hits.test/count?q={term}"), t);
  const std::vector<std::string> terms = {"lo fi", "holga"};
  const auto r = p.lookup(terms);
  EXPECT_EQ(r[0].df, 1234u);
  EXPECT_EQ(r[1].df, 99u);
  EXPECT_EQ(r[0].n_docs, kDefaultWebDocs);
  EXPECT_EQ(t->calls(), 2u);
}

TEST(DfSource, RemoteFailuresNameTheBatch) {
  auto t = std::make_shared<CountingTransport>();
  t->respond("http://h/503", {503, ""});
  t->respond("http://h/404", {404, ""});
  t->respond("http://h/junk", {200, "lots"});
  RemoteHitcountDfProvider p(remote_config("http://h/{term}"), t);
  const std::vector<std::string> batch = {"503", "other"};
  try {
    p.lookup(batch);
    FAIL() << "expected RetryableError";
  } catch (const RetryableError& e) {
    EXPECT_NE(std::string(e.what()).find("503, other"), std::string::npos) << e.what();
  }
  const std::vector<std::string> nf = {"404"};
  EXPECT_THROW(p.lookup(nf), Error);
  const std::vector<std::string> junk = {"junk"};
  EXPECT_THROW(p.lookup(junk), Error);
  const std::vector<std::string> unreachable = {"nowhere"};
  EXPECT_THROW(p.lookup(unreachable), RetryableError);
}

TEST(DfSource, FileFixtureEndpoint) {
  auto cfg = remote_config("file://" + (rt::worked_dir() / "df_hitcounts.tsv").string());
  cfg.n_docs_override = 1000;
  auto t = std::make_shared<CountingTransport>();
  RemoteHitcountDfProvider p(cfg, t);
  const std::vector<std::string> terms = {"nicnichols", "unlisted"};
  const auto r = p.lookup(terms);
  EXPECT_EQ(r[0].df, 2000u);
  EXPECT_EQ(r[1].df, 0u);
  EXPECT_EQ(p.n_docs(), 1000u);
  EXPECT_EQ(t->calls(), 0u);
}

TEST(DfSource, CacheHitSkipsProvider) {
  const auto dir = rt::scratch_dir("dfcache_hit");
  rt::MapDfProvider p({{"a", 3}, {"b", 5}}, 10);
  const std::vector<std::string> terms = {"a", "b"};
  const auto first = cache_get_or_fetch(terms, dir / "df.tsv", p, 3600s);
  EXPECT_EQ(p.calls, 1u);
  const auto second = cache_get_or_fetch(terms, dir / "df.tsv", p, 3600s);
  EXPECT_EQ(p.calls, 1u);
  ASSERT_EQ(second.size(), 2u);
  EXPECT_EQ(second[0].df, first[0].df);
  EXPECT_EQ(second[1].df, 5u);
}

TEST(DfSource, ExpiredRecordRefetched) {
  const auto dir = rt::scratch_dir("dfcache_expired");
  rt::MapDfProvider p({{"a", 3}}, 10);
  DfCache cache(dir / "df.tsv");
  const std::vector<std::string> terms = {"a"};
  const Timestamp then = parse_iso8601("2009-01-01T00:00:00Z");
  cache_get_or_fetch(terms, cache, p, 3600s, then);
  cache_get_or_fetch(terms, cache, p, 3600s, then + 10s);
  EXPECT_EQ(p.calls, 1u);
  cache_get_or_fetch(terms, cache, p, 3600s, then + 7200s);
  EXPECT_EQ(p.calls, 2u);
}

TEST(DfSource, CacheKeyedByProvider) {
  const auto dir = rt::scratch_dir("dfcache_keys");
  rt::MapDfProvider a({{"t", 1}}, 10, "alpha");
  rt::MapDfProvider b({{"t", 7}}, 10, "beta");
  DfCache cache(dir / "df.tsv");
  const std::vector<std::string> terms = {"t"};
  cache_get_or_fetch(terms, cache, a, 3600s);
  cache_get_or_fetch(terms, cache, b, 3600s);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.find("alpha", "t")->df, 1u);
  EXPECT_EQ(cache.find("beta", "t")->df, 7u);

  DfCache reloaded(dir / "df.tsv");
  EXPECT_EQ(reloaded.find("beta", "t")->df, 7u);
}

TEST(DfSource, LastRecordWins) {
  const auto dir = rt::scratch_dir("dfcache_last");
  {
    std::ofstream out(dir / "df.tsv");
    out << "p\tt\t1\t10\t2009-01-01T00:00:00Z\n"
        << "p\tt\t4\t10\t2009-01-02T00:00:00Z\n";
  }
  DfCache cache(dir / "df.tsv");
  EXPECT_EQ(cache.find("p", "t")->df, 4u);
}

TEST(DfSource, MalformedCacheIsHardError) {
  const auto dir = rt::scratch_dir("dfcache_bad");
  {
    std::ofstream out(dir / "df.tsv");
    out << "p\tt\t1\t10\t2009-01-01T00:00:00Z\n"
        << "p\tt\tnot-a-number\n";
  }
  EXPECT_THROW(DfCache cache(dir / "df.tsv"), Error);
}

TEST(DfSource, CachedProviderTransparent) {
  const auto dir = rt::scratch_dir("dfcache_transparent");
  auto inner = std::make_shared<rt::MapDfProvider>(std::map<std::string, std::uint64_t>{{"x", 2}, {"y", 9}}, 20);
  CachedDfProvider cached(inner, dir / "df.tsv");
  rt::MapDfProvider plain({{"x", 2}, {"y", 9}}, 20);
  const std::vector<std::string> terms = {"y", "x", "z"};
  for (int round = 0; round < 2; ++round) {
    const auto a = cached.lookup(terms);
    const auto b = plain.lookup(terms);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].term, b[i].term);
      EXPECT_EQ(a[i].df, b[i].df);
      EXPECT_EQ(a[i].n_docs, b[i].n_docs);
    }
  }
  EXPECT_EQ(inner->calls, 1u);
}

TEST(DfSource, ConcurrentCacheWrites) {
  const auto dir = rt::scratch_dir("dfcache_concurrent");
  DfCache cache(dir / "df.tsv");
  std::vector<std::jthread> threads;
  for (int k = 0; k < 4; ++k) {
    threads.emplace_back([&, k] {
      rt::MapDfProvider p({}, 10, "p" + std::to_string(k));
      for (int i = 0; i < 20; ++i) {
        const std::vector<std::string> terms = {"t" + std::to_string(i)};
        cache_get_or_fetch(terms, cache, p, 3600s);
      }
    });
  }
  threads.clear();
  EXPECT_EQ(cache.size(), 80u);
  EXPECT_EQ(DfCache(dir / "df.tsv").size(), 80u);
}

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "relict/searchsim.hpp"
#include "relict/timeutil.hpp"
#include "relict/transport.hpp"

namespace relict {

/// Web-scale corpus size used by remote providers unless overridden.
inline constexpr std::uint64_t kDefaultWebDocs = 25'000'000'000ULL;

/// Document frequency of one term under one provider. df is stored raw
/// (may be 0, may exceed n_docs for noisy hit counts); clamping happens only
/// inside IDF computation.
struct DfRecord {
  std::string term;
  std::uint64_t df = 0;
  std::uint64_t n_docs = 1;
  std::string provider_id;
  Timestamp fetched_at{};
};

enum class DfProviderKind { LocalIndex, RemoteHitcount, CacheWrapped };

std::string to_string(DfProviderKind kind);
DfProviderKind parse_df_provider_kind(std::string_view s);

struct DfProviderConfig {
  std::string provider_id;
  DfProviderKind kind = DfProviderKind::LocalIndex;
  std::optional<std::uint64_t> n_docs_override;
  double rate_limit = 0.0;  // requests per second, remote only; 0 = unlimited
  // Remote only. "{term}" is replaced by the URL-encoded term. A file://
  // endpoint names a local TSV of "term<TAB>count" lines instead.
  std::optional<std::string> endpoint;

  /// Throws relict::Error when the configuration is inconsistent.
  void validate() const;
};

class DfProvider {
 public:
  virtual ~DfProvider() = default;

  /// One record per input term, in input order. Throws relict::Error on an
  /// empty batch or empty term.
  virtual std::vector<DfRecord> lookup(std::span<const std::string> terms) = 0;
  virtual const DfProviderConfig& config() const = 0;
  /// Corpus size N reported in records.
  virtual std::uint64_t n_docs() const = 0;
};

/// Exact document frequencies over a local index.
class LocalIndexDfProvider final : public DfProvider {
 public:
  LocalIndexDfProvider(std::shared_ptr<const Index> index, std::string provider_id = "local-index");

  std::vector<DfRecord> lookup(std::span<const std::string> terms) override;
  const DfProviderConfig& config() const override { return config_; }
  std::uint64_t n_docs() const override { return index_->n_docs(); }

 private:
  std::shared_ptr<const Index> index_;
  DfProviderConfig config_;
};

/// Hit-count estimates: one request per term against an HTTP endpoint whose
/// response body is a decimal count, or a fixture TSV for file:// endpoints.
class RemoteHitcountDfProvider final : public DfProvider {
 public:
  explicit RemoteHitcountDfProvider(DfProviderConfig config,
                                    std::shared_ptr<Transport> transport = nullptr);

  std::vector<DfRecord> lookup(std::span<const std::string> terms) override;
  const DfProviderConfig& config() const override { return config_; }
  std::uint64_t n_docs() const override;

 private:
  std::uint64_t fetch_one(const std::string& term, std::span<const std::string> batch);

  DfProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  RateLimiter limiter_;
  std::optional<std::map<std::string, std::uint64_t, std::less<>>> fixture_;
};

/// Persistent append-only TSV cache:
///   provider_id \t term \t df \t n_docs \t fetched_at (ISO-8601)
/// Later lines win. Writes are serialized; reads may run concurrently.
class DfCache {
 public:
  /// Throws relict::Error when an existing file does not parse.
  explicit DfCache(std::filesystem::path path);

  std::optional<DfRecord> find(std::string_view provider_id, std::string_view term) const;
  /// Appends records and rewrites the file atomically (temp file + rename).
  void store(std::span<const DfRecord> records);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::vector<std::string> lines_;
  std::map<std::pair<std::string, std::string>, DfRecord, std::less<>> latest_;
};

/// Serves fresh cache hits and fetches misses from the provider, storing
/// them. Cache hits older than max_age are re-fetched.
std::vector<DfRecord> cache_get_or_fetch(std::span<const std::string> terms, DfCache& cache,
                                         DfProvider& provider, std::chrono::seconds max_age,
                                         Timestamp now = now_seconds());
std::vector<DfRecord> cache_get_or_fetch(std::span<const std::string> terms,
                                         const std::filesystem::path& cache_path,
                                         DfProvider& provider, std::chrono::seconds max_age);

/// Wraps another provider with a DfCache.
class CachedDfProvider final : public DfProvider {
 public:
  CachedDfProvider(std::shared_ptr<DfProvider> inner, std::filesystem::path cache_path,
                   std::chrono::seconds max_age = std::chrono::hours(24 * 365));

  std::vector<DfRecord> lookup(std::span<const std::string> terms) override;
  const DfProviderConfig& config() const override { return inner_->config(); }
  std::uint64_t n_docs() const override { return inner_->n_docs(); }
  const DfCache& cache() const { return cache_; }

 private:
  std::shared_ptr<DfProvider> inner_;
  DfCache cache_;
  std::chrono::seconds max_age_;
};

}  // namespace relict

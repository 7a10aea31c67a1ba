#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "relict/content.hpp"
#include "relict/searchsim.hpp"
#include "relict/transport.hpp"

namespace relict {

enum class EngineKind { LocalSim, RemoteGeneric, FixtureReplay };

std::string to_string(EngineKind kind);
EngineKind parse_engine_kind(std::string_view s);

struct EngineBinding {
  std::string engine_id = "local-sim";
  EngineKind kind = EngineKind::LocalSim;
  // Remote: base URL (falls back to RELICT_ENGINE_ENDPOINT). Replay: JSONL path.
  std::optional<std::string> endpoint;
  double rate_limit = 0.0;  // requests per second; 0 = unlimited
  std::size_t max_results = 100;

  void validate() const;
};

/// A search backend. Results are truncated to the binding's max_results.
class SearchEngine {
 public:
  virtual ~SearchEngine() = default;
  ResultPage search(const SearchQuery& query);
  const EngineBinding& binding() const { return binding_; }

 protected:
  explicit SearchEngine(EngineBinding binding);
  virtual ResultPage do_search(const SearchQuery& query) = 0;

 private:
  EngineBinding binding_;
  RateLimiter limiter_;
};

/// Delegates to the bundled local index.
class LocalSimEngine final : public SearchEngine {
 public:
  LocalSimEngine(EngineBinding binding, std::shared_ptr<const Index> index);

 private:
  ResultPage do_search(const SearchQuery& query) override;
  std::shared_ptr<const Index> index_;
};

/// Replays recorded responses from JSONL lines
///   {"engine_id":..., "terms":[...], "quoted":bool, "hits":[{"uri":..,"score":..}]}
/// keyed by (engine_id, terms, quoted). Unknown queries are a hard error.
class FixtureReplayEngine final : public SearchEngine {
 public:
  FixtureReplayEngine(EngineBinding binding, const std::filesystem::path& recordings);

 private:
  using Key = std::tuple<std::string, std::vector<std::string>, bool>;
  ResultPage do_search(const SearchQuery& query) override;
  std::map<Key, std::vector<Hit>> recorded_;
};

/// GET {endpoint}?q=<terms>&count=<n>; response is a JSON array of
/// {"url": ...} in rank order. RELICT_ENGINE_KEY, when set, is sent as a
/// bearer token.
class RemoteGenericEngine final : public SearchEngine {
 public:
  RemoteGenericEngine(EngineBinding binding, std::shared_ptr<Transport> transport = nullptr);

  /// The request URL for a query (exposed for tests).
  std::string request_url(const SearchQuery& query) const;

 private:
  ResultPage do_search(const SearchQuery& query) override;
  std::string endpoint_;
  std::shared_ptr<Transport> transport_;
};

struct EngineResources {
  std::shared_ptr<const Index> index;         // local-sim
  std::shared_ptr<Transport> transport;       // remote-generic, optional
};

std::unique_ptr<SearchEngine> make_engine(const EngineBinding& binding,
                                          const EngineResources& resources);

/// Convenience wrapper: one-shot search through a binding.
ResultPage engine_search(const EngineBinding& binding, const EngineResources& resources,
                         const SearchQuery& query);

inline constexpr std::size_t kMaxTags = 10;

struct TagSet {
  std::string uri;
  std::vector<std::string> tags;  // most frequent first, at most 10
};

struct InlinkSet {
  std::string uri;
  std::vector<std::string> inlinks;
};

class TagProvider {
 public:
  virtual ~TagProvider() = default;
  /// Absent when the provider has no annotations for the URI.
  virtual std::optional<TagSet> fetch_tags(std::string_view uri) const = 0;
};

class BacklinkProvider {
 public:
  virtual ~BacklinkProvider() = default;
  /// Raw provider order; filtering happens in fetch_inlinks().
  virtual std::optional<std::vector<std::string>> raw_inlinks(std::string_view uri) const = 0;
};

/// Tags from JSONL lines {"uri": ..., "tags": [...]}, or added directly.
class FixtureTagProvider final : public TagProvider {
 public:
  FixtureTagProvider() = default;
  static FixtureTagProvider load(const std::filesystem::path& jsonl);

  void add(std::string_view uri, std::vector<std::string> tags);
  std::optional<TagSet> fetch_tags(std::string_view uri) const override;

 private:
  std::map<std::string, std::vector<std::string>> tags_;
};

/// Inlinks from JSONL lines {"uri": ..., "inlinks": [...]}, or added directly.
class FixtureBacklinkProvider final : public BacklinkProvider {
 public:
  FixtureBacklinkProvider() = default;
  static FixtureBacklinkProvider load(const std::filesystem::path& jsonl);

  void add(std::string_view uri, std::vector<std::string> inlinks);
  std::optional<std::vector<std::string>> raw_inlinks(std::string_view uri) const override;

 private:
  std::map<std::string, std::vector<std::string>> inlinks_;
};

/// Lowercases, drops empty tags, keeps order, caps at 10.
std::optional<TagSet> fetch_tags(std::string_view uri, const TagProvider& source);

/// Up to `cap` inlinks in provider order, deduplicated by normalized URI,
/// with links to the centroid itself removed. Absent when none remain.
std::optional<InlinkSet> fetch_inlinks(std::string_view uri, const BacklinkProvider& source,
                                       std::size_t cap = 50);

/// Copies of pages by URI (the cached copies and inlink pages a run may use).
class PageStore {
 public:
  void put(RawPage page);
  const RawPage* get(std::string_view uri) const;
  std::size_t size() const { return pages_.size(); }

 private:
  std::map<std::string, RawPage, std::less<>> pages_;
};

}  // namespace relict

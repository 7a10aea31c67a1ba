#include "relict/webclients.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "relict/error.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: invalid JSON: {}", path.string(), lineno, e.what()));
    }
    try {
      fn(j);
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
}

}  // namespace

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::LocalSim: return "local-sim";
    case EngineKind::RemoteGeneric: return "remote-generic";
    case EngineKind::FixtureReplay: return "fixture-replay";
  }
  return "?";
}

EngineKind parse_engine_kind(std::string_view s) {
  if (s == "local-sim") return EngineKind::LocalSim;
  if (s == "remote-generic") return EngineKind::RemoteGeneric;
  if (s == "fixture-replay") return EngineKind::FixtureReplay;
  throw Error(fmt::format("unknown engine kind '{}'", s));
}

void EngineBinding::validate() const {
  if (engine_id.empty()) throw Error("engine binding: empty engine_id");
  if (max_results < 1) throw Error(fmt::format("engine '{}': max_results must be >= 1", engine_id));
  if (rate_limit < 0.0) throw Error(fmt::format("engine '{}': negative rate_limit", engine_id));
  if (kind == EngineKind::FixtureReplay && (!endpoint || endpoint->empty())) {
    throw Error(fmt::format("engine '{}': fixture-replay needs a recordings file", engine_id));
  }
}

SearchEngine::SearchEngine(EngineBinding binding)
    : binding_(std::move(binding)), limiter_(binding_.rate_limit) {
  binding_.validate();
}

ResultPage SearchEngine::search(const SearchQuery& query) {
  if (query.terms.empty()) throw Error("search: query has no terms");
  limiter_.acquire();
  SearchQuery capped = query;
  capped.max_results = std::min(query.max_results, binding_.max_results);
  ResultPage page = do_search(capped);
  page.engine_id = binding_.engine_id;
  if (page.hits.size() > capped.max_results) page.hits.resize(capped.max_results);
  return page;
}

LocalSimEngine::LocalSimEngine(EngineBinding binding, std::shared_ptr<const Index> index)
    : SearchEngine(std::move(binding)), index_(std::move(index)) {
  if (!index_) throw Error("local-sim engine: no index");
}

ResultPage LocalSimEngine::do_search(const SearchQuery& query) {
  return index_->search(query, binding().engine_id);
}

FixtureReplayEngine::FixtureReplayEngine(EngineBinding binding,
                                         const std::filesystem::path& recordings)
    : SearchEngine(std::move(binding)) {
  for_each_jsonl(recordings, [&](const json& j) {
    Key key{j.at("engine_id").get<std::string>(), j.at("terms").get<std::vector<std::string>>(),
            j.value("quoted", false)};
    std::vector<Hit> hits;
    for (const auto& h : j.at("hits")) {
      hits.push_back({h.at("uri").get<std::string>(), h.value("score", 0.0)});
    }
    recorded_[std::move(key)] = std::move(hits);
  });
}

ResultPage FixtureReplayEngine::do_search(const SearchQuery& query) {
  const auto it = recorded_.find(Key{binding().engine_id, query.terms, query.quoted});
  if (it == recorded_.end()) {
    throw Error(fmt::format("fixture-replay '{}': no recording for query {}", binding().engine_id,
                            query.text()));
  }
  ResultPage page;
  page.hits = it->second;
  return page;
}

RemoteGenericEngine::RemoteGenericEngine(EngineBinding binding,
                                         std::shared_ptr<Transport> transport)
    : SearchEngine(std::move(binding)), transport_(std::move(transport)) {
  if (this->binding().endpoint && !this->binding().endpoint->empty()) {
    endpoint_ = *this->binding().endpoint;
  } else if (const char* env = std::getenv("RELICT_ENGINE_ENDPOINT"); env && *env) {
    endpoint_ = env;
  } else {
    throw Error(fmt::format("engine '{}': remote-generic needs an endpoint "
                            "(binding or RELICT_ENGINE_ENDPOINT)",
                            this->binding().engine_id));
  }
  if (!transport_) transport_ = default_transport();
}

std::string RemoteGenericEngine::request_url(const SearchQuery& query) const {
  const char sep = endpoint_.find('?') == std::string::npos ? '?' : '&';
  return fmt::format("{}{}q={}&count={}", endpoint_, sep, url_encode(query.text()),
                     query.max_results);
}

ResultPage RemoteGenericEngine::do_search(const SearchQuery& query) {
  std::map<std::string, std::string> headers;
  if (const char* key = std::getenv("RELICT_ENGINE_KEY"); key && *key) {
    headers["Authorization"] = fmt::format("Bearer {}", key);
  }
  const auto res = transport_->get(request_url(query), headers);
  if (res.status >= 500 || res.status == 429 || res.status == 0) {
    throw RetryableError(
        fmt::format("engine '{}': HTTP {} for {}", binding().engine_id, res.status, query.text()));
  }
  if (res.status != 200) {
    throw Error(
        fmt::format("engine '{}': HTTP {} for {}", binding().engine_id, res.status, query.text()));
  }
  ResultPage page;
  try {
    const auto arr = json::parse(res.body);
    std::set<std::string> seen;
    for (const auto& item : arr) {
      const auto url = item.at("url").get<std::string>();
      const auto norm = try_normalize_uri(url);
      if (!norm || !seen.insert(*norm).second) continue;
      const double rank = static_cast<double>(page.hits.size() + 1);
      page.hits.push_back({*norm, 1.0 / rank});
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("engine '{}': malformed response: {}", binding().engine_id, e.what()));
  }
  return page;
}

std::unique_ptr<SearchEngine> make_engine(const EngineBinding& binding,
                                          const EngineResources& resources) {
  switch (binding.kind) {
    case EngineKind::LocalSim:
      return std::make_unique<LocalSimEngine>(binding, resources.index);
    case EngineKind::FixtureReplay:
      binding.validate();
      return std::make_unique<FixtureReplayEngine>(binding, *binding.endpoint);
    case EngineKind::RemoteGeneric:
      return std::make_unique<RemoteGenericEngine>(binding, resources.transport);
  }
  throw Error("make_engine: unknown kind");
}

ResultPage engine_search(const EngineBinding& binding, const EngineResources& resources,
                         const SearchQuery& query) {
  return make_engine(binding, resources)->search(query);
}

FixtureTagProvider FixtureTagProvider::load(const std::filesystem::path& jsonl) {
  FixtureTagProvider p;
  for_each_jsonl(jsonl, [&](const json& j) {
    p.add(j.at("uri").get<std::string>(), j.at("tags").get<std::vector<std::string>>());
  });
  return p;
}

void FixtureTagProvider::add(std::string_view uri, std::vector<std::string> tags) {
  tags_[normalize_uri(uri)] = std::move(tags);
}

std::optional<TagSet> FixtureTagProvider::fetch_tags(std::string_view uri) const {
  const auto norm = try_normalize_uri(uri);
  if (!norm) return std::nullopt;
  const auto it = tags_.find(*norm);
  if (it == tags_.end()) return std::nullopt;
  return TagSet{*norm, it->second};
}

FixtureBacklinkProvider FixtureBacklinkProvider::load(const std::filesystem::path& jsonl) {
  FixtureBacklinkProvider p;
  for_each_jsonl(jsonl, [&](const json& j) {
    p.add(j.at("uri").get<std::string>(), j.at("inlinks").get<std::vector<std::string>>());
  });
  return p;
}

void FixtureBacklinkProvider::add(std::string_view uri, std::vector<std::string> inlinks) {
  inlinks_[normalize_uri(uri)] = std::move(inlinks);
}

std::optional<std::vector<std::string>> FixtureBacklinkProvider::raw_inlinks(
    std::string_view uri) const {
  const auto norm = try_normalize_uri(uri);
  if (!norm) return std::nullopt;
  const auto it = inlinks_.find(*norm);
  if (it == inlinks_.end()) return std::nullopt;
  return it->second;
}

std::optional<TagSet> fetch_tags(std::string_view uri, const TagProvider& source) {
  auto found = source.fetch_tags(uri);
  if (!found) return std::nullopt;
  TagSet out;
  out.uri = normalize_uri(uri);
  for (const auto& t : found->tags) {
    auto tag = text::collapse_whitespace(text::to_lower_ascii(t));
    if (tag.empty()) continue;
    out.tags.push_back(std::move(tag));
    if (out.tags.size() == kMaxTags) break;
  }
  if (out.tags.empty()) return std::nullopt;
  return out;
}

std::optional<InlinkSet> fetch_inlinks(std::string_view uri, const BacklinkProvider& source,
                                       std::size_t cap) {
  if (cap < 1) throw Error("fetch_inlinks: cap must be >= 1");
  auto raw = source.raw_inlinks(uri);
  if (!raw) return std::nullopt;
  InlinkSet out;
  out.uri = normalize_uri(uri);
  std::set<std::string> seen;
  for (const auto& link : *raw) {
    const auto norm = try_normalize_uri(link);
    if (!norm || *norm == out.uri || !seen.insert(*norm).second) continue;
    out.inlinks.push_back(*norm);
    if (out.inlinks.size() == cap) break;
  }
  if (out.inlinks.empty()) return std::nullopt;
  return out;
}

void PageStore::put(RawPage page) {
  page.uri = normalize_uri(page.uri);
  auto key = page.uri;
  pages_.insert_or_assign(std::move(key), std::move(page));
}

const RawPage* PageStore::get(std::string_view uri) const {
  const auto norm = try_normalize_uri(uri);
  if (!norm) return nullptr;
  const auto it = pages_.find(*norm);
  return it == pages_.end() ? nullptr : &it->second;
}

}  // namespace relict

#include "relict/dfsource.hpp"

#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/uri.hpp"

namespace relict {

namespace {

void check_batch(std::span<const std::string> terms) {
  if (terms.empty()) throw Error("lookup_df: empty term batch");
  for (const auto& t : terms) {
    if (t.empty()) throw Error("lookup_df: empty term in batch");
  }
}

std::string describe_batch(std::span<const std::string> terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ", ";
    out += t;
  }
  return out;
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string format_record(const DfRecord& r) {
  return fmt::format("{}\t{}\t{}\t{}\t{}", r.provider_id, r.term, r.df, r.n_docs,
                     format_iso8601(r.fetched_at));
}

}  // namespace

std::string to_string(DfProviderKind kind) {
  switch (kind) {
    case DfProviderKind::LocalIndex: return "local-index";
    case DfProviderKind::RemoteHitcount: return "remote-hitcount";
    case DfProviderKind::CacheWrapped: return "cache-wrapped";
  }
  return "?";
}

DfProviderKind parse_df_provider_kind(std::string_view s) {
  if (s == "local-index") return DfProviderKind::LocalIndex;
  if (s == "remote-hitcount") return DfProviderKind::RemoteHitcount;
  if (s == "cache-wrapped") return DfProviderKind::CacheWrapped;
  throw Error(fmt::format("unknown df provider kind '{}'", s));
}

void DfProviderConfig::validate() const {
  if (provider_id.empty()) throw Error("df provider: empty provider_id");
  if (kind == DfProviderKind::RemoteHitcount && (!endpoint || endpoint->empty())) {
    throw Error(fmt::format("df provider '{}': remote kind requires an endpoint", provider_id));
  }
  if (n_docs_override && *n_docs_override < 1) {
    throw Error(fmt::format("df provider '{}': n_docs_override must be >= 1", provider_id));
  }
  if (rate_limit < 0.0) throw Error("df provider: negative rate_limit");
}

LocalIndexDfProvider::LocalIndexDfProvider(std::shared_ptr<const Index> index,
                                           std::string provider_id)
    : index_(std::move(index)) {
  if (!index_) throw Error("local df provider: null index");
  config_.provider_id = std::move(provider_id);
  config_.kind = DfProviderKind::LocalIndex;
  config_.validate();
}

std::vector<DfRecord> LocalIndexDfProvider::lookup(std::span<const std::string> terms) {
  check_batch(terms);
  const auto now = now_seconds();
  std::vector<DfRecord> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    out.push_back({t, index_->df(t), index_->n_docs(), config_.provider_id, now});
  }
  return out;
}

RemoteHitcountDfProvider::RemoteHitcountDfProvider(DfProviderConfig config,
                                                   std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)), limiter_(config_.rate_limit) {
  config_.kind = DfProviderKind::RemoteHitcount;
  config_.validate();
  const std::string& ep = *config_.endpoint;
  if (ep.starts_with("file://")) {
    const std::string path = ep.substr(7);
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("df fixture '{}' unreadable", path));
    fixture_.emplace();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto cols = split_tabs(line);
      const auto count = cols.size() == 2 ? parse_count(cols[1]) : std::nullopt;
      if (!count || cols[0].empty()) {
        throw Error(fmt::format("df fixture '{}' line {}: expected term<TAB>count", path, lineno));
      }
      (*fixture_)[std::string(cols[0])] = *count;
    }
  } else if (!transport_) {
    transport_ = default_transport();
  }
}

std::uint64_t RemoteHitcountDfProvider::n_docs() const {
  return config_.n_docs_override.value_or(kDefaultWebDocs);
}

std::uint64_t RemoteHitcountDfProvider::fetch_one(const std::string& term,
                                                  std::span<const std::string> batch) {
  if (fixture_) {
    const auto it = fixture_->find(term);
    return it == fixture_->end() ? 0 : it->second;
  }
  std::string url = *config_.endpoint;
  if (const auto pos = url.find("{term}"); pos != std::string::npos) {
    url.replace(pos, 6, url_encode(term));
  }
  limiter_.acquire();
  HttpResponse res;
  try {
    res = transport_->get(url, {});
  } catch (const RetryableError& e) {
    throw RetryableError(fmt::format("df lookup for batch [{}] failed: {}",
                                     describe_batch(batch), e.what()));
  }
  if (res.status >= 500 || res.status == 429 || res.status == 0) {
    throw RetryableError(fmt::format("df lookup for batch [{}]: HTTP {}",
                                     describe_batch(batch), res.status));
  }
  if (res.status != 200) {
    throw Error(fmt::format("df lookup for term '{}': HTTP {}", term, res.status));
  }
  const auto count = parse_count(res.body);
  if (!count) {
    throw Error(fmt::format("df lookup for term '{}': response is not a count", term));
  }
  return *count;
}

std::vector<DfRecord> RemoteHitcountDfProvider::lookup(std::span<const std::string> terms) {
  check_batch(terms);
  std::vector<DfRecord> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    const std::uint64_t df = fetch_one(t, terms);
    out.push_back({t, df, n_docs(), config_.provider_id, now_seconds()});
  }
  return out;
}

DfCache::DfCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;  // no cache yet
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    const auto df = cols.size() == 5 ? parse_count(cols[2]) : std::nullopt;
    const auto n = cols.size() == 5 ? parse_count(cols[3]) : std::nullopt;
    if (!df || !n || *n < 1 || cols[0].empty() || cols[1].empty()) {
      throw Error(fmt::format("df cache '{}' line {} is malformed", path_.string(), lineno));
    }
    DfRecord r{std::string(cols[1]), *df, *n, std::string(cols[0]), {}};
    try {
      r.fetched_at = parse_iso8601(cols[4]);
    } catch (const Error&) {
      throw Error(fmt::format("df cache '{}' line {} has a bad timestamp", path_.string(), lineno));
    }
    latest_[{r.provider_id, r.term}] = r;
    lines_.push_back(line);
  }
}

std::optional<DfRecord> DfCache::find(std::string_view provider_id, std::string_view term) const {
  std::shared_lock lock(mu_);
  const auto it = latest_.find(std::pair<std::string, std::string>(provider_id, term));
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

void DfCache::store(std::span<const DfRecord> records) {
  if (records.empty()) return;
  std::unique_lock lock(mu_);
  for (const auto& r : records) {
    lines_.push_back(format_record(r));
    latest_[{r.provider_id, r.term}] = r;
  }
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write df cache '{}'", path_.string()));
    for (const auto& l : lines_) out << l << '\n';
    if (!out.flush()) throw Error(fmt::format("cannot write df cache '{}'", path_.string()));
  }
  std::filesystem::rename(tmp, path_);
}

std::size_t DfCache::size() const {
  std::shared_lock lock(mu_);
  return latest_.size();
}

std::vector<DfRecord> cache_get_or_fetch(std::span<const std::string> terms, DfCache& cache,
                                         DfProvider& provider, std::chrono::seconds max_age,
                                         Timestamp now) {
  check_batch(terms);
  const std::string& pid = provider.config().provider_id;
  std::vector<std::optional<DfRecord>> slots(terms.size());
  std::vector<std::string> misses;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    auto hit = cache.find(pid, terms[k]);
    if (hit && now - hit->fetched_at <= max_age) {
      slots[k] = std::move(hit);
    } else if (std::find(misses.begin(), misses.end(), terms[k]) == misses.end()) {
      misses.push_back(terms[k]);
    }
  }
  if (!misses.empty()) {
    auto fetched = provider.lookup(misses);
    for (auto& r : fetched) r.fetched_at = now;
    cache.store(fetched);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (slots[k]) continue;
      for (const auto& r : fetched) {
        if (r.term == terms[k]) {
          slots[k] = r;
          break;
        }
      }
    }
  }
  std::vector<DfRecord> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(*std::move(s));
  return out;
}

std::vector<DfRecord> cache_get_or_fetch(std::span<const std::string> terms,
                                         const std::filesystem::path& cache_path,
                                         DfProvider& provider, std::chrono::seconds max_age) {
  DfCache cache(cache_path);
  return cache_get_or_fetch(terms, cache, provider, max_age);
}

CachedDfProvider::CachedDfProvider(std::shared_ptr<DfProvider> inner,
                                   std::filesystem::path cache_path, std::chrono::seconds max_age)
    : inner_(std::move(inner)), cache_(std::move(cache_path)), max_age_(max_age) {
  if (!inner_) throw Error("cached df provider: null inner provider");
}

std::vector<DfRecord> CachedDfProvider::lookup(std::span<const std::string> terms) {
  return cache_get_or_fetch(terms, cache_, *inner_, max_age_);
}

}  // namespace relict

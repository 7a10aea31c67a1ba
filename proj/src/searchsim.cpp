#include "relict/searchsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/hash.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'I', 'C', 'T', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_str(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("index file truncated");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string read_str(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > (1u << 30)) throw Error("index file corrupt: oversized string");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw Error("index file truncated");
  return s;
}

void read_header(std::istream& in, std::string& content_hash) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
    throw Error("not a relict index file");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw Error(fmt::format("unsupported index format version {}", version));
  }
  content_hash = read_str(in);
}

}  // namespace

std::string SearchQuery::text() const {
  std::string joined;
  for (const auto& t : terms) {
    if (!joined.empty()) joined.push_back(' ');
    joined += t;
  }
  return quoted ? "\"" + joined + "\"" : joined;
}

std::optional<std::size_t> rank_of(const ResultPage& result, std::string_view target) {
  const auto norm_target = try_normalize_uri(target);
  if (!norm_target) return std::nullopt;
  for (std::size_t i = 0; i < result.hits.size(); ++i) {
    const auto h = try_normalize_uri(result.hits[i].uri);
    if (h && *h == *norm_target) return i + 1;
  }
  return std::nullopt;
}

Index Index::build(std::span<const ExtractedDoc> corpus, const StopwordList& query_stopwords) {
  if (corpus.empty()) throw Error("build_index: empty corpus");

  std::vector<std::pair<std::string, const ExtractedDoc*>> ordered;
  ordered.reserve(corpus.size());
  for (const auto& d : corpus) ordered.emplace_back(normalize_uri(d.uri), &d);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < ordered.size(); ++k) {
    if (ordered[k].first == ordered[k - 1].first) {
      throw Error(fmt::format("build_index: duplicate URI '{}' (from '{}' and '{}')",
                              ordered[k].first, ordered[k - 1].second->uri,
                              ordered[k].second->uri));
    }
  }

  Index idx;
  idx.stopwords_ = query_stopwords;
  idx.stopword_hash_ = query_stopwords.hash();
  for (const auto& [uri, doc] : ordered) {
    idx.docs_.push_back({uri, doc->tokens.size()});
    idx.doc_tokens_.push_back(doc->tokens);
  }
  idx.finalize();
  return idx;
}

void Index::finalize() {
  postings_.clear();
  std::string canonical;
  for (std::uint32_t id = 0; id < doc_tokens_.size(); ++id) {
    const auto& toks = doc_tokens_[id];
    canonical += docs_[id].uri;
    canonical.push_back('\n');
    for (std::uint32_t pos = 0; pos < toks.size(); ++pos) {
      auto& list = postings_[toks[pos]];
      if (list.empty() || list.back().doc_id != id) list.push_back({id, {}});
      list.back().positions.push_back(pos);
      canonical += toks[pos];
      canonical.push_back(' ');
    }
    canonical.push_back('\n');
  }
  content_hash_ = sha256_hex(canonical);

  std::vector<double> sq(docs_.size(), 0.0);
  for (const auto& [term, list] : postings_) {
    const double w_idf = idf(list.size());
    for (const auto& p : list) {
      const double w = static_cast<double>(p.count()) * w_idf;
      sq[p.doc_id] += w * w;
    }
  }
  doc_norms_.resize(sq.size());
  std::transform(sq.begin(), sq.end(), doc_norms_.begin(), [](double v) { return std::sqrt(v); });
}

double Index::idf(std::size_t df) const {
  const double n = static_cast<double>(docs_.size());
  const double d = static_cast<double>(std::clamp<std::size_t>(df, 1, docs_.size()));
  return std::log(n / d);
}

std::span<const Index::Posting> Index::postings(std::string_view term) const {
  const auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

std::vector<std::string> Index::normalize_query_terms(std::span<const std::string> terms) const {
  std::vector<std::string> out;
  for (const auto& t : terms) {
    for (auto& tok : text::tokenize(t)) {
      if (!stopwords_.contains(tok)) out.push_back(std::move(tok));
    }
  }
  return out;
}

ResultPage Index::search(const SearchQuery& query, std::string_view engine_id) const {
  ResultPage page;
  page.engine_id = std::string(engine_id);
  const auto terms = normalize_query_terms(query.terms);
  if (terms.empty() || query.max_results == 0) return page;

  std::map<std::string_view, std::size_t> qtf;
  for (const auto& t : terms) ++qtf[t];

  double qnorm_sq = 0.0;
  std::unordered_map<std::uint32_t, double> dot;
  for (const auto& [term, count] : qtf) {
    const auto list = postings(term);
    if (list.empty()) continue;
    const double w_idf = idf(list.size());
    const double qw = static_cast<double>(count) * w_idf;
    qnorm_sq += qw * qw;
    for (const auto& p : list) dot[p.doc_id] += static_cast<double>(p.count()) * w_idf * qw;
  }

  std::vector<std::uint32_t> candidates;
  candidates.reserve(dot.size());
  for (const auto& [id, _] : dot) candidates.push_back(id);

  if (query.quoted) {
    std::erase_if(candidates, [&](std::uint32_t id) {
      const auto& toks = doc_tokens_[id];
      const auto first = std::find_if(postings(terms[0]).begin(), postings(terms[0]).end(),
                                      [&](const Posting& p) { return p.doc_id == id; });
      if (first == postings(terms[0]).end()) return true;
      for (const std::uint32_t start : first->positions) {
        if (start + terms.size() > toks.size()) break;
        bool all = true;
        for (std::size_t k = 1; k < terms.size() && all; ++k) all = toks[start + k] == terms[k];
        if (all) return false;
      }
      return true;
    });
  }

  const double qnorm = std::sqrt(qnorm_sq);
  page.hits.reserve(candidates.size());
  for (const std::uint32_t id : candidates) {
    const double denom = doc_norms_[id] * qnorm;
    page.hits.push_back({docs_[id].uri, denom > 0.0 ? dot[id] / denom : 0.0});
  }
  std::sort(page.hits.begin(), page.hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uri < b.uri;
  });
  if (page.hits.size() > query.max_results) page.hits.resize(query.max_results);
  return page;
}

void Index::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write index '{}'", path.string()));
    out.write(kMagic, 8);
    write_u32(out, kFormatVersion);
    write_str(out, content_hash_);
    write_str(out, stopword_hash_);
    write_u32(out, static_cast<std::uint32_t>(stopwords_.size()));
    for (const auto& w : stopwords_.words()) write_str(out, w);
    write_u32(out, static_cast<std::uint32_t>(docs_.size()));
    for (std::size_t id = 0; id < docs_.size(); ++id) {
      write_str(out, docs_[id].uri);
      write_u32(out, static_cast<std::uint32_t>(doc_tokens_[id].size()));
      for (const auto& t : doc_tokens_[id]) write_str(out, t);
    }
    if (!out.flush()) throw Error(fmt::format("cannot write index '{}'", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read index '{}'", path.string()));
  Index idx;
  std::string stored_hash;
  read_header(in, stored_hash);
  idx.stopword_hash_ = read_str(in);
  std::string words;
  const std::uint32_t n_words = read_u32(in);
  for (std::uint32_t k = 0; k < n_words; ++k) words += read_str(in) + "\n";
  idx.stopwords_ = StopwordList::parse(std::string_view(words));
  const std::uint32_t n_docs = read_u32(in);
  for (std::uint32_t id = 0; id < n_docs; ++id) {
    auto uri = read_str(in);
    const std::uint32_t n_tok = read_u32(in);
    std::vector<std::string> toks;
    toks.reserve(n_tok);
    for (std::uint32_t k = 0; k < n_tok; ++k) toks.push_back(read_str(in));
    idx.docs_.push_back({std::move(uri), toks.size()});
    idx.doc_tokens_.push_back(std::move(toks));
  }
  if (idx.docs_.empty()) throw Error("index file holds no documents");
  idx.finalize();
  if (idx.content_hash_ != stored_hash) {
    throw Error(fmt::format("index '{}' is corrupt: content hash mismatch", path.string()));
  }
  return idx;
}

std::optional<std::string> Index::peek_content_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    std::string hash;
    read_header(in, hash);
    return hash;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace relict

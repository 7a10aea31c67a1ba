#include "relict/lexsig.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/uri.hpp"

namespace relict {

namespace {

LexicalSignature signature_from(std::string uri, const TermFreqs& freqs, std::size_t n,
                                DfProvider& df, SignatureSource source) {
  if (freqs.empty() || n == 0) throw Error(fmt::format("no scoreable terms in '{}'", uri));
  std::vector<std::string> terms;
  terms.reserve(freqs.size());
  for (const auto& [t, _] : freqs) terms.push_back(t);
  const auto records = df.lookup(terms);

  LexicalSignature sig;
  sig.terms = top_terms(tfidf_score(freqs, records), n);
  sig.n = n;
  sig.source = source;
  sig.provider_id = df.config().provider_id;
  sig.n_docs = df.n_docs();
  sig.uri = std::move(uri);
  sig.is_short = freqs.size() < n;
  return sig;
}

}  // namespace

std::string to_string(SignatureSource s) {
  return s == SignatureSource::Page ? "page" : "neighborhood";
}

std::vector<std::string> LexicalSignature::words() const {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.term);
  return out;
}

double idf(std::uint64_t df, std::uint64_t n_docs) {
  if (n_docs == 0) throw Error("idf: corpus size must be >= 1");
  const std::uint64_t clamped = std::clamp<std::uint64_t>(df, 1, n_docs);
  return std::log(static_cast<double>(n_docs) / static_cast<double>(clamped));
}

std::map<std::string, double, std::less<>> tfidf_score(const TermFreqs& term_freqs,
                                                       std::span<const DfRecord> df_records) {
  std::map<std::string_view, const DfRecord*> by_term;
  for (const auto& r : df_records) by_term[r.term] = &r;

  std::size_t total = 0;
  for (const auto& [_, c] : term_freqs) total += c;

  std::map<std::string, double, std::less<>> scores;
  for (const auto& [term, count] : term_freqs) {
    const auto it = by_term.find(term);
    if (it == by_term.end()) throw Error(fmt::format("tfidf: no df record for term '{}'", term));
    const double tf = static_cast<double>(count) / static_cast<double>(total);
    scores.emplace(term, tf * idf(it->second->df, it->second->n_docs));
  }
  return scores;
}

std::vector<ScoredTerm> top_terms(const std::map<std::string, double, std::less<>>& scores,
                                  std::size_t n) {
  std::vector<ScoredTerm> all;
  all.reserve(scores.size());
  for (const auto& [t, s] : scores) all.push_back({t, s});
  const auto cmp = [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  };
  const std::size_t keep = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), cmp);
  all.resize(keep);
  return all;
}

LexicalSignature make_signature(const ExtractedDoc& doc, std::size_t n, DfProvider& df) {
  return signature_from(doc.uri, doc.term_freqs, n, df, SignatureSource::Page);
}

LexicalSignature make_signature(const TermBucket& bucket, std::size_t n, DfProvider& df) {
  return signature_from(bucket.uri, bucket.term_freqs, n, df, SignatureSource::Neighborhood);
}

TermBucket build_term_bucket(std::string_view centroid_uri,
                             std::span<const ExtractedDoc> inlink_pages, std::size_t cap) {
  TermBucket bucket;
  bucket.uri = normalize_uri(centroid_uri);
  std::set<std::string> seen;
  for (const auto& page : inlink_pages) {
    if (bucket.source_pages.size() >= cap) break;
    const std::string uri = normalize_uri(page.uri);
    if (uri == bucket.uri || !seen.insert(uri).second) continue;
    for (const auto& [t, c] : page.term_freqs) bucket.term_freqs[t] += c;
    bucket.source_pages.push_back(uri);
  }
  if (bucket.source_pages.empty()) {
    throw Error(fmt::format("no neighborhood for '{}'", bucket.uri));
  }
  return bucket;
}

std::string to_record_line(const LexicalSignature& sig) {
  std::string terms;
  for (const auto& t : sig.terms) {
    if (!terms.empty()) terms.push_back(',');
    terms += fmt::format("{}:{:.6f}", t.term, t.score);
  }
  return fmt::format("{}\t{}\t{}\t{}\t{}", sig.uri, sig.n, to_string(sig.source),
                     sig.provider_id, terms);
}

LexicalSignature parse_record_line(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (cols.size() != 5) throw Error("signature record: expected 5 tab-separated fields");

  LexicalSignature sig;
  sig.uri = std::string(cols[0]);
  if (std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), sig.n).ec != std::errc{}) {
    throw Error("signature record: bad n");
  }
  if (cols[2] == "page") {
    sig.source = SignatureSource::Page;
  } else if (cols[2] == "neighborhood") {
    sig.source = SignatureSource::Neighborhood;
  } else {
    throw Error(fmt::format("signature record: bad source '{}'", cols[2]));
  }
  sig.provider_id = std::string(cols[3]);
  std::string_view rest = cols[4];
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw Error("signature record: bad term:score item");
    }
    ScoredTerm st{std::string(item.substr(0, colon)), 0.0};
    const std::string score(item.substr(colon + 1));
    try {
      std::size_t used = 0;
      st.score = std::stod(score, &used);
      if (used != score.size()) throw Error("trailing");
    } catch (const std::exception&) {
      throw Error(fmt::format("signature record: bad score '{}'", score));
    }
    sig.terms.push_back(std::move(st));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  sig.is_short = sig.terms.size() < sig.n;
  return sig;
}

}  // namespace relict

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "relict/content.hpp"
#include "relict/dfsource.hpp"

namespace relict {

enum class SignatureSource { Page, Neighborhood };

std::string to_string(SignatureSource s);

struct ScoredTerm {
  std::string term;
  double score = 0.0;

  friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

/// Top-n terms of a document (or neighborhood bucket) by TF-IDF, ordered by
/// descending score then ascending term. `is_short` is set when the source
/// had fewer than n distinct terms.
struct LexicalSignature {
  std::vector<ScoredTerm> terms;
  std::size_t n = 0;
  SignatureSource source = SignatureSource::Page;
  std::string provider_id;
  std::uint64_t n_docs = 0;
  std::string uri;
  bool is_short = false;

  std::vector<std::string> words() const;
};

/// Term counts aggregated over the inlink pages of a centroid URI.
struct TermBucket {
  std::string uri;
  TermFreqs term_freqs;
  std::vector<std::string> source_pages;
};

inline constexpr std::size_t kDefaultInlinkCap = 50;

/// ln(N / clamp(df, 1, N)).
double idf(std::uint64_t df, std::uint64_t n_docs);

/// score(t) = count(t) / total_count * idf(df(t), N). Throws relict::Error
/// when a term has no DfRecord.
std::map<std::string, double, std::less<>> tfidf_score(const TermFreqs& term_freqs,
                                                       std::span<const DfRecord> df_records);

/// Orders scored terms by descending score, then ascending term, keeping n.
std::vector<ScoredTerm> top_terms(const std::map<std::string, double, std::less<>>& scores,
                                  std::size_t n);

/// Throws relict::Error("no scoreable terms") on an empty source or n == 0.
LexicalSignature make_signature(const ExtractedDoc& doc, std::size_t n, DfProvider& df);
LexicalSignature make_signature(const TermBucket& bucket, std::size_t n, DfProvider& df);

/// Sums term counts over the first `cap` distinct inlink pages. Pages whose
/// URI equals the centroid and repeated URIs are skipped. Throws
/// relict::Error("no neighborhood") when nothing remains.
TermBucket build_term_bucket(std::string_view centroid_uri,
                             std::span<const ExtractedDoc> inlink_pages,
                             std::size_t cap = kDefaultInlinkCap);

/// `uri \t n \t source \t provider_id \t term:score,...` with six decimals.
std::string to_record_line(const LexicalSignature& sig);
/// Inverse of to_record_line (scores at six-decimal precision, n_docs unset).
LexicalSignature parse_record_line(std::string_view line);

}  // namespace relict

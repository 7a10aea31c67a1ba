#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relict/content.hpp"
#include "relict/stopwords.hpp"

namespace relict {

struct SearchQuery {
  std::vector<std::string> terms;
  bool quoted = false;
  std::size_t max_results = 100;

  /// Space-joined terms, wrapped in double quotes when quoted.
  std::string text() const;
};

struct Hit {
  std::string uri;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct ResultPage {
  std::vector<Hit> hits;
  std::string engine_id;

  friend bool operator==(const ResultPage&, const ResultPage&) = default;
};

/// 1-based position of the first hit matching target under URI
/// normalization; absent when not in the page.
std::optional<std::size_t> rank_of(const ResultPage& result, std::string_view target);

/// Immutable positional inverted index over a local corpus.
///
/// Documents are numbered by ascending normalized URI, so the index (and its
/// serialized form) does not depend on input order.
class Index {
 public:
  struct Posting {
    std::uint32_t doc_id = 0;
    std::vector<std::uint32_t> positions;  // ascending
    std::size_t count() const { return positions.size(); }
  };

  struct DocEntry {
    std::string uri;
    std::size_t token_count = 0;
  };

  /// Throws relict::Error on an empty corpus or on two documents whose URIs
  /// normalize to the same string.
  static Index build(std::span<const ExtractedDoc> corpus,
                     const StopwordList& query_stopwords = StopwordList::bundled());

  std::size_t n_docs() const { return docs_.size(); }
  const std::string& content_hash() const { return content_hash_; }
  const std::string& stopword_hash() const { return stopword_hash_; }
  const std::vector<DocEntry>& doc_table() const { return docs_; }

  /// Empty span when the term is not indexed.
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t df(std::string_view term) const { return postings(term).size(); }
  const std::map<std::string, std::vector<Posting>, std::less<>>& all_postings() const {
    return postings_;
  }

  /// Query terms are re-tokenized like document text and stop words are
  /// dropped. Unquoted: documents matching any term, ranked by TF-IDF cosine.
  /// Quoted: only documents holding the exact consecutive token sequence.
  /// Ties are broken by ascending URI.
  ResultPage search(const SearchQuery& query, std::string_view engine_id = "local-sim") const;

  /// Query-side normalization used by search().
  std::vector<std::string> normalize_query_terms(std::span<const std::string> terms) const;

  void save(const std::filesystem::path& path) const;
  static Index load(const std::filesystem::path& path);
  /// Reads only the header hash of a saved index; nullopt if unreadable.
  static std::optional<std::string> peek_content_hash(const std::filesystem::path& path);

 private:
  Index() = default;
  void finalize();
  double idf(std::size_t df) const;

  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::vector<DocEntry> docs_;
  std::vector<std::vector<std::string>> doc_tokens_;
  std::vector<double> doc_norms_;
  StopwordList stopwords_;
  std::string content_hash_;
  std::string stopword_hash_;
};

}  // namespace relict

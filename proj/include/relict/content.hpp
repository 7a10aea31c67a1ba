#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relict/stopwords.hpp"
#include "relict/timeutil.hpp"

namespace relict {

using TermFreqs = std::map<std::string, std::size_t, std::less<>>;

/// A fetched (or cached) copy of a page.
struct RawPage {
  std::string uri;   // normalized
  std::string body;  // raw markup bytes, may be empty
  Timestamp fetched_at{};

  /// Normalizes uri; throws relict::Error when it does not normalize.
  static RawPage make(std::string_view uri, std::string body,
                      Timestamp fetched_at = now_seconds());
};

/// Plain-text view of a page after markup removal and stop word filtering.
///
/// Invariants: sum(term_freqs) == token_count == tokens.size(); no key of
/// term_freqs is a stop word; title, when present, is non-empty.
struct ExtractedDoc {
  std::string uri;
  std::vector<std::string> tokens;
  TermFreqs term_freqs;
  std::optional<std::string> title;
  std::size_t token_count = 0;
  // Tokens before stop word removal, and how many of those were stop words.
  std::size_t raw_token_count = 0;
  std::size_t stopword_hits = 0;

  /// Builds a document straight from an already tokenized stream (used for
  /// synthetic corpora). Tokens are taken verbatim.
  static ExtractedDoc from_tokens(std::string_view uri,
                                  std::vector<std::string> tokens,
                                  std::optional<std::string> title = std::nullopt);
};

struct TitleStats {
  std::size_t term_count = 0;
  std::size_t char_count = 0;
  double mean_chars_per_term = 0.0;
  std::size_t stopword_count = 0;
};

struct CorpusFilter {
  std::size_t min_terms = 50;
  // Minimum fraction of raw tokens that must be stop words to count as English.
  double english_threshold = 0.10;
  bool require_english = true;
};

struct FilterVerdict {
  bool accepted = true;
  std::string reason;  // "too-short", "non-english" or empty
};

/// Strips markup, script/style bodies and comments, then tokenizes.
/// The title is captured from the markup before any stop word removal.
ExtractedDoc extract_text(const RawPage& page, const StopwordList& stopwords);

/// Plain text of a page with markup removed and entities decoded.
std::string visible_text(std::string_view markup);

/// Inner text of the first <title> element, entity-decoded and
/// whitespace-collapsed. Absent when missing or empty.
std::optional<std::string> extract_title(const RawPage& page);
std::optional<std::string> extract_title(std::string_view markup);

/// Throws relict::Error on an empty title.
TitleStats title_stats(std::string_view title, const StopwordList& stopwords);

/// Removes stop-word terms from a title, keeping order; may return "".
std::string strip_stopwords_from_title(std::string_view title,
                                       const StopwordList& stopwords);

FilterVerdict passes_corpus_filter(const ExtractedDoc& doc,
                                   const CorpusFilter& filter = {});

}  // namespace relict

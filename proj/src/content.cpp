#include "relict/content.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict {

namespace {

bool iequal_at(std::string_view s, std::size_t pos, std::string_view needle) {
  if (pos + needle.size() > s.size()) return false;
  for (std::size_t k = 0; k < needle.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[pos + k])) != needle[k]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t p = from; p + needle.size() <= s.size(); ++p) {
    if (iequal_at(s, p, needle)) return p;
  }
  return std::string_view::npos;
}

// Position of the '>' closing a tag opened at `open`, honoring quoted
// attribute values. Falls back to the first '>' when a quote never closes.
std::size_t tag_end(std::string_view s, std::size_t open) {
  char quote = 0;
  for (std::size_t p = open + 1; p < s.size(); ++p) {
    const char c = s[p];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      // Only quotes that start an attribute value count.
      if (p > 0 && s[p - 1] == '=') quote = c;
    } else if (c == '>') {
      return p;
    }
  }
  return s.find('>', open + 1);
}

// Closing tag `</name ...>` at or after `from`; returns [start, end) of it.
std::pair<std::size_t, std::size_t> find_close(std::string_view s, std::string_view name,
                                               std::size_t from) {
  const std::string needle = fmt::format("</{}", name);
  std::size_t p = from;
  while ((p = ifind(s, needle, p)) != std::string_view::npos) {
    const std::size_t after = p + needle.size();
    if (after >= s.size() || !std::isalnum(static_cast<unsigned char>(s[after]))) {
      const std::size_t gt = s.find('>', after);
      return {p, gt == std::string_view::npos ? s.size() : gt + 1};
    }
    p = after;
  }
  return {std::string_view::npos, std::string_view::npos};
}

struct ScanResult {
  std::string text;  // markup removed, entities not yet decoded
  std::optional<std::string> title_raw;
};

ScanResult scan_markup(std::string_view s) {
  ScanResult out;
  out.text.reserve(s.size());
  bool title_seen = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c != '<' || i + 1 >= s.size()) {
      out.text.push_back(c);
      ++i;
      continue;
    }
    const char next = s[i + 1];
    if (s.compare(i, 4, "<!--") == 0) {
      const auto end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      out.text.push_back(' ');
      continue;
    }
    const bool closing = next == '/';
    const bool is_tag = closing || next == '!' || next == '?' ||
                        std::isalpha(static_cast<unsigned char>(next));
    if (!is_tag) {
      out.text.push_back(c);
      ++i;
      continue;
    }
    const std::size_t gt = tag_end(s, i);
    if (gt == std::string_view::npos) {
      // Unterminated tag: everything after it is unreadable markup.
      break;
    }
    std::size_t name_begin = i + (closing ? 2 : 1);
    std::size_t name_end = name_begin;
    while (name_end < gt && std::isalnum(static_cast<unsigned char>(s[name_end]))) ++name_end;
    const std::string name = text::to_lower_ascii(s.substr(name_begin, name_end - name_begin));
    out.text.push_back(' ');
    i = gt + 1;
    if (closing || next == '!' || next == '?') continue;
    const bool self_closed = gt > 0 && s[gt - 1] == '/';
    if (self_closed) continue;

    if (name == "script" || name == "style" || name == "noscript" || name == "template") {
      const auto [close_begin, close_end] = find_close(s, name, i);
      i = close_begin == std::string_view::npos ? s.size() : close_end;
    } else if (name == "title" && !title_seen) {
      title_seen = true;
      auto [close_begin, close_end] = find_close(s, "title", i);
      if (close_begin == std::string_view::npos) {
        // No closing tag: the title runs to the next tag.
        close_begin = s.find('<', i);
        if (close_begin == std::string_view::npos) close_begin = s.size();
        close_end = close_begin;
      }
      const std::string_view raw = s.substr(i, close_begin - i);
      out.title_raw = std::string(raw);
      out.text.append(raw);
      out.text.push_back(' ');
      i = close_end;
    }
  }
  return out;
}

std::optional<std::string> clean_title(std::string_view raw) {
  std::string t = visible_text(raw);
  std::replace_if(t.begin(), t.end(), [](char c) { return c == '<' || c == '>'; }, ' ');
  t = text::collapse_whitespace(t);
  if (t.empty()) return std::nullopt;
  return t;
}

// Lowercased title term with surrounding ASCII punctuation removed.
std::string title_term_key(std::string_view term) {
  std::size_t b = 0;
  std::size_t e = term.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(term[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(term[e - 1]))) --e;
  return text::to_lower_ascii(term.substr(b, e - b));
}

}  // namespace

RawPage RawPage::make(std::string_view uri, std::string body, Timestamp fetched_at) {
  return RawPage{normalize_uri(uri), std::move(body), fetched_at};
}

ExtractedDoc ExtractedDoc::from_tokens(std::string_view uri, std::vector<std::string> tokens,
                                       std::optional<std::string> title) {
  ExtractedDoc doc;
  doc.uri = normalize_uri(uri);
  doc.tokens = std::move(tokens);
  for (const auto& t : doc.tokens) ++doc.term_freqs[t];
  doc.token_count = doc.tokens.size();
  doc.raw_token_count = doc.token_count;
  doc.title = std::move(title);
  return doc;
}

std::string visible_text(std::string_view markup) {
  return text::decode_entities(scan_markup(markup).text);
}

std::optional<std::string> extract_title(std::string_view markup) {
  const std::string utf8 = text::to_utf8(markup);
  auto scan = scan_markup(utf8);
  if (!scan.title_raw) return std::nullopt;
  return clean_title(*scan.title_raw);
}

std::optional<std::string> extract_title(const RawPage& page) { return extract_title(page.body); }

ExtractedDoc extract_text(const RawPage& page, const StopwordList& stopwords) {
  const std::string utf8 = text::to_utf8(page.body);
  auto scan = scan_markup(utf8);

  ExtractedDoc doc;
  doc.uri = page.uri;
  if (scan.title_raw) doc.title = clean_title(*scan.title_raw);

  auto raw = text::tokenize(text::decode_entities(scan.text));
  doc.raw_token_count = raw.size();
  doc.tokens.reserve(raw.size());
  for (auto& tok : raw) {
    if (stopwords.contains(tok)) {
      ++doc.stopword_hits;
      continue;
    }
    ++doc.term_freqs[tok];
    doc.tokens.push_back(std::move(tok));
  }
  doc.token_count = doc.tokens.size();
  return doc;
}

TitleStats title_stats(std::string_view title, const StopwordList& stopwords) {
  const auto terms = text::split_whitespace(title);
  if (terms.empty()) throw Error("title_stats: empty title");
  TitleStats st;
  st.term_count = terms.size();
  st.char_count = text::codepoint_count(title);
  std::size_t term_chars = 0;
  for (const auto& t : terms) {
    term_chars += text::codepoint_count(t);
    if (stopwords.contains(title_term_key(t))) ++st.stopword_count;
  }
  st.mean_chars_per_term = static_cast<double>(term_chars) / static_cast<double>(st.term_count);
  return st;
}

std::string strip_stopwords_from_title(std::string_view title, const StopwordList& stopwords) {
  std::string out;
  for (const auto& t : text::split_whitespace(title)) {
    if (stopwords.contains(title_term_key(t))) continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

FilterVerdict passes_corpus_filter(const ExtractedDoc& doc, const CorpusFilter& filter) {
  if (doc.token_count < filter.min_terms) return {false, "too-short"};
  if (filter.require_english) {
    const double ratio = doc.raw_token_count == 0
                             ? 0.0
                             : static_cast<double>(doc.stopword_hits) /
                                   static_cast<double>(doc.raw_token_count);
    if (ratio < filter.english_threshold) return {false, "non-english"};
  }
  return {true, ""};
}

}  // namespace relict

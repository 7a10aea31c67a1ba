#include "relict/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <unordered_map>

namespace relict::text {

namespace {

// Decodes one code point starting at s[i]; advances i. Invalid sequences
// yield U+FFFD and advance by one byte.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong forms and surrogates count as invalid.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
      (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
    ++i;
    return 0xFFFD;
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

// Letters and digits. Beyond ASCII, anything outside the common punctuation,
// symbol and space blocks is treated as a letter.
bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp == 0xFEFF || cp == 0xFFFD) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  return true;
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;  // Latin-1 capitals
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Greek capitals
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;  // Cyrillic capitals
  if (cp >= 0x100 && cp <= 0x17F && (cp % 2) == 0 && cp != 0x130 && cp != 0x138) {
    return cp + 1;  // Latin Extended-A pairs (approximate)
  }
  return cp;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t before = i;
    const char32_t cp = next_codepoint(s, i);
    if (cp == 0xFFFD && i == before + 1 && static_cast<unsigned char>(s[before]) >= 0x80) {
      // Genuine U+FFFD is three bytes; one-byte advance means invalid input.
      return false;
    }
  }
  return true;
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = [] {
    std::unordered_map<std::string_view, char32_t> t{
        {"quot", 34},     {"amp", 38},      {"apos", 39},     {"lt", 60},
        {"gt", 62},       {"OElig", 338},   {"oelig", 339},   {"Scaron", 352},
        {"scaron", 353},  {"Yuml", 376},    {"circ", 710},    {"tilde", 732},
        {"ensp", 8194},   {"emsp", 8195},   {"thinsp", 8201}, {"zwnj", 8204},
        {"zwj", 8205},    {"lrm", 8206},    {"rlm", 8207},    {"ndash", 8211},
        {"mdash", 8212},  {"lsquo", 8216},  {"rsquo", 8217},  {"sbquo", 8218},
        {"ldquo", 8220},  {"rdquo", 8221},  {"bdquo", 8222},  {"dagger", 8224},
        {"Dagger", 8225}, {"permil", 8240}, {"lsaquo", 8249}, {"rsaquo", 8250},
        {"euro", 8364},   {"fnof", 402},    {"thetasym", 977}, {"upsih", 978},
        {"piv", 982},     {"bull", 8226},   {"hellip", 8230}, {"prime", 8242},
        {"Prime", 8243},  {"oline", 8254},  {"frasl", 8260},  {"weierp", 8472},
        {"image", 8465},  {"real", 8476},   {"trade", 8482},  {"alefsym", 8501},
        {"larr", 8592},   {"uarr", 8593},   {"rarr", 8594},   {"darr", 8595},
        {"harr", 8596},   {"crarr", 8629},  {"lArr", 8656},   {"uArr", 8657},
        {"rArr", 8658},   {"dArr", 8659},   {"hArr", 8660},   {"forall", 8704},
        {"part", 8706},   {"exist", 8707},  {"empty", 8709},  {"nabla", 8711},
        {"isin", 8712},   {"notin", 8713},  {"ni", 8715},     {"prod", 8719},
        {"sum", 8721},    {"minus", 8722},  {"lowast", 8727}, {"radic", 8730},
        {"prop", 8733},   {"infin", 8734},  {"ang", 8736},    {"and", 8743},
        {"or", 8744},     {"cap", 8745},    {"cup", 8746},    {"int", 8747},
        {"there4", 8756}, {"sim", 8764},    {"cong", 8773},   {"asymp", 8776},
        {"ne", 8800},     {"equiv", 8801},  {"le", 8804},     {"ge", 8805},
        {"sub", 8834},    {"sup", 8835},    {"nsub", 8836},   {"sube", 8838},
        {"supe", 8839},   {"oplus", 8853},  {"otimes", 8855}, {"perp", 8869},
        {"sdot", 8901},   {"lceil", 8968},  {"rceil", 8969},  {"lfloor", 8970},
        {"rfloor", 8971}, {"lang", 9001},   {"rang", 9002},   {"loz", 9674},
        {"spades", 9824}, {"clubs", 9827},  {"hearts", 9829}, {"diams", 9830},
    };
    static constexpr std::string_view kLatin1[] = {
        "nbsp",   "iexcl",  "cent",   "pound",  "curren", "yen",    "brvbar", "sect",
        "uml",    "copy",   "ordf",   "laquo",  "not",    "shy",    "reg",    "macr",
        "deg",    "plusmn", "sup2",   "sup3",   "acute",  "micro",  "para",   "middot",
        "cedil",  "sup1",   "ordm",   "raquo",  "frac14", "frac12", "frac34", "iquest",
        "Agrave", "Aacute", "Acirc",  "Atilde", "Auml",   "Aring",  "AElig",  "Ccedil",
        "Egrave", "Eacute", "Ecirc",  "Euml",   "Igrave", "Iacute", "Icirc",  "Iuml",
        "ETH",    "Ntilde", "Ograve", "Oacute", "Ocirc",  "Otilde", "Ouml",   "times",
        "Oslash", "Ugrave", "Uacute", "Ucirc",  "Uuml",   "Yacute", "THORN",  "szlig",
        "agrave", "aacute", "acirc",  "atilde", "auml",   "aring",  "aelig",  "ccedil",
        "egrave", "eacute", "ecirc",  "euml",   "igrave", "iacute", "icirc",  "iuml",
        "eth",    "ntilde", "ograve", "oacute", "ocirc",  "otilde", "ouml",   "divide",
        "oslash", "ugrave", "uacute", "ucirc",  "uuml",   "yacute", "thorn",  "yuml"};
    for (std::size_t k = 0; k < std::size(kLatin1); ++k) t.emplace(kLatin1[k], 160 + k);
    static constexpr std::string_view kGreekUpper[] = {
        "Alpha", "Beta", "Gamma",   "Delta", "Epsilon", "Zeta", "Eta", "Theta", "Iota",
        "Kappa", "Lambda", "Mu",    "Nu",    "Xi",      "Omicron", "Pi", "Rho", "",
        "Sigma", "Tau",  "Upsilon", "Phi",   "Chi",     "Psi",  "Omega"};
    static constexpr std::string_view kGreekLower[] = {
        "alpha", "beta", "gamma",   "delta", "epsilon", "zeta", "eta", "theta", "iota",
        "kappa", "lambda", "mu",    "nu",    "xi",      "omicron", "pi", "rho", "sigmaf",
        "sigma", "tau",  "upsilon", "phi",   "chi",     "psi",  "omega"};
    for (std::size_t k = 0; k < std::size(kGreekUpper); ++k) {
      if (!kGreekUpper[k].empty()) t.emplace(kGreekUpper[k], 913 + k);
      t.emplace(kGreekLower[k], 945 + k);
    }
    return t;
  }();
  return table;
}

// Entities commonly written without the trailing semicolon in old markup.
bool legacy_unterminated(std::string_view name) {
  return name == "amp" || name == "lt" || name == "gt" || name == "quot" ||
         name == "nbsp" || name == "copy" || name == "reg";
}

template <typename Fn>
void for_each_word(std::string_view s, Fn&& emit) {
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t cp = next_codepoint(s, i);
    if (is_word_char(cp)) {
      append_utf8(current, fold_case(cp));
    } else if (!current.empty()) {
      emit(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) emit(std::move(current));
}

}  // namespace

std::string to_utf8(std::string_view bytes) {
  if (valid_utf8(bytes)) return std::string(bytes);
  std::string out;
  out.reserve(bytes.size() + bytes.size() / 4);
  for (char c : bytes) append_utf8(out, static_cast<unsigned char>(c));
  return out;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i + 1;
    if (j < s.size() && s[j] == '#') {
      ++j;
      const bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      const std::size_t digits_begin = j;
      std::uint32_t value = 0;
      while (j < s.size() && j - digits_begin < 8 &&
             (hex ? std::isxdigit(static_cast<unsigned char>(s[j]))
                  : std::isdigit(static_cast<unsigned char>(s[j])))) {
        const char c = s[j];
        const std::uint32_t d = std::isdigit(static_cast<unsigned char>(c))
                                    ? c - '0'
                                    : (std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
        value = value * (hex ? 16 : 10) + d;
        ++j;
      }
      if (j == digits_begin) {
        out.push_back(s[i++]);
        continue;
      }
      if (j < s.size() && s[j] == ';') ++j;
      if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) value = 0xFFFD;
      append_utf8(out, value);
      i = j;
      continue;
    }
    while (j < s.size() && j - i <= 10 && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
    const std::string_view name = s.substr(i + 1, j - i - 1);
    const auto& table = named_entities();
    const auto it = table.find(name);
    if (it != table.end() && j < s.size() && s[j] == ';') {
      append_utf8(out, it->second);
      i = j + 1;
    } else if (it != table.end() && legacy_unterminated(name)) {
      append_utf8(out, it->second);
      i = j;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    const char32_t cp = next_codepoint(s, i);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> split_words(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_word(utf8, [&](std::string&& w) { out.push_back(std::move(w)); });
  return out;
}

std::vector<std::string> tokenize(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_word(utf8, [&](std::string&& w) {
    if (codepoint_count(w) < 2) return;
    if (std::all_of(w.begin(), w.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return;
    }
    out.push_back(std::move(w));
  });
  return out;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::string current;
  std::size_t i = 0;
  while (i < utf8.size()) {
    const std::size_t start = i;
    const char32_t cp = next_codepoint(utf8, i);
    if (is_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(utf8.substr(start, i - start));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t codepoint_count(std::string_view utf8) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < utf8.size()) {
    next_codepoint(utf8, i);
    ++n;
  }
  return n;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace relict::text

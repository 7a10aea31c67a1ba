#include "relict/stopwords.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "relict/error.hpp"
#include "relict/hash.hpp"
#include "relict/text.hpp"

namespace relict {

namespace detail {
extern const std::string_view kBundledStopwords;
}

StopwordList::StopwordList(std::set<std::string, std::less<>> words)
    : words_(std::move(words)) {
  std::string canonical;
  for (const auto& w : words_) {
    canonical += w;
    canonical += '\n';
  }
  hash_ = sha256_hex(canonical);
}

StopwordList StopwordList::parse(std::istream& in) {
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.insert(text::to_lower_ascii(std::string_view(line).substr(b, e - b + 1)));
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read stopword list '{}'", path.string()));
  return parse(in);
}

const StopwordList& StopwordList::bundled() {
  static const StopwordList list = parse(detail::kBundledStopwords);
  return list;
}

bool StopwordList::contains(std::string_view term) const {
  return words_.find(term) != words_.end();
}

}  // namespace relict

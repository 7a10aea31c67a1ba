#pragma once

#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>

namespace relict {

/// A fixed set of lowercase stop words plus the SHA-256 of its canonical
/// form (sorted, newline-joined), so results can name the exact list used.
class StopwordList {
 public:
  StopwordList() = default;

  /// One term per line, `#` starts a comment, blank lines ignored.
  static StopwordList parse(std::istream& in);
  static StopwordList parse(std::string_view text);
  static StopwordList load(const std::filesystem::path& path);

  /// The bundled English (SMART) list.
  static const StopwordList& bundled();

  bool contains(std::string_view term) const;
  std::size_t size() const { return words_.size(); }
  const std::string& hash() const { return hash_; }
  const std::set<std::string, std::less<>>& words() const { return words_; }

 private:
  explicit StopwordList(std::set<std::string, std::less<>> words);

  std::set<std::string, std::less<>> words_;
  std::string hash_;
};

}  // namespace relict

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relict/dfsource.hpp"
#include "relict/error.hpp"

namespace relict::testing {

inline std::filesystem::path fixture_dir() { return RELICT_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return RELICT_DATA_DIR; }
inline std::filesystem::path worked_dir() { return fixture_dir() / "worked_examples"; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("relict_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// df straight from a table; counts lookups.
class MapDfProvider final : public DfProvider {
 public:
  MapDfProvider(std::map<std::string, std::uint64_t> df, std::uint64_t n, std::string id = "map")
      : df_(std::move(df)), n_(n) {
    config_.provider_id = std::move(id);
  }
  std::vector<DfRecord> lookup(std::span<const std::string> terms) override {
    ++calls;
    std::vector<DfRecord> out;
    for (const auto& t : terms) {
      const auto it = df_.find(t);
      out.push_back({t, it == df_.end() ? 0 : it->second, n_, config_.provider_id, {}});
    }
    return out;
  }
  const DfProviderConfig& config() const override { return config_; }
  std::uint64_t n_docs() const override { return n_; }

  std::size_t calls = 0;

 private:
  std::map<std::string, std::uint64_t> df_;
  std::uint64_t n_;
  DfProviderConfig config_;
};

// ---- brute-force TF-IDF oracle -------------------------------------------

struct OracleTerm {
  std::string term;
  double score;
};

// Scores every distinct term of corpus[doc] by scanning the raw token lists,
// then selects the top n by repeated maximum.
inline std::vector<OracleTerm> oracle_signature(const std::vector<std::vector<std::string>>& corpus,
                                                std::size_t doc, std::size_t n) {
  const auto& tokens = corpus[doc];
  std::vector<std::string> distinct;
  for (const auto& t : tokens) {
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
  }
  const double N = static_cast<double>(corpus.size());
  std::vector<OracleTerm> all;
  for (const auto& t : distinct) {
    std::size_t count = 0;
    for (const auto& x : tokens) count += (x == t);
    std::size_t df = 0;
    for (const auto& d : corpus) df += std::find(d.begin(), d.end(), t) != d.end();
    df = std::max<std::size_t>(df, 1);
    const double tf = static_cast<double>(count) / static_cast<double>(tokens.size());
    all.push_back({t, tf * std::log(N / static_cast<double>(df))});
  }
  std::vector<OracleTerm> out;
  while (out.size() < n && !all.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i) {
      if (all[i].score > all[best].score ||
          (all[i].score == all[best].score && all[i].term < all[best].term)) {
        best = i;
      }
    }
    out.push_back(all[best]);
    all.erase(all.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

// Alphabetic pseudo-words that are never stop words.
inline std::string pseudo_term(std::size_t i) {
  std::string s = "zq";
  do {
    s.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i);
  return s;
}

// Up to max_docs documents over up to max_terms distinct terms; small
// counts so score ties occur often.
inline std::vector<std::vector<std::string>> random_corpus(std::mt19937_64& rng,
                                                           std::size_t max_docs = 10,
                                                           std::size_t max_terms = 50) {
  std::uniform_int_distribution<std::size_t> ndocs(1, max_docs), nterms(1, max_terms);
  const std::size_t D = ndocs(rng), T = nterms(rng);
  std::uniform_int_distribution<std::size_t> pick(0, T - 1), len(1, 40);
  std::vector<std::vector<std::string>> corpus(D);
  for (auto& d : corpus) {
    const std::size_t L = len(rng);
    for (std::size_t i = 0; i < L; ++i) d.push_back(pseudo_term(pick(rng)));
  }
  return corpus;
}

}  // namespace relict::testing

#include "relict/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "relict/error.hpp"
#include "relict/text.hpp"
#include "relict/uri.hpp"

namespace relict {

using nlohmann::json;

std::string to_string(MethodId m) {
  switch (m) {
    case MethodId::LS5: return "LS5";
    case MethodId::LS7: return "LS7";
    case MethodId::TI: return "TI";
    case MethodId::TIQ: return "TIQ";
    case MethodId::TA: return "TA";
    case MethodId::LNLS5: return "LNLS5";
    case MethodId::LNLS7: return "LNLS7";
    case MethodId::TI_NOSW: return "TI_NOSW";
  }
  return "?";
}

MethodId parse_method(std::string_view s) {
  for (const MethodId m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw Error(fmt::format("unknown method '{}'", s));
}

std::string to_string(RankClass c) {
  switch (c) {
    case RankClass::Top1: return "Top1";
    case RankClass::Top10: return "Top10";
    case RankClass::Top100: return "Top100";
    case RankClass::Undiscovered: return "Undiscovered";
  }
  return "?";
}

RankClass parse_rank_class(std::string_view s) {
  for (const RankClass c : kAllRankClasses) {
    if (to_string(c) == s) return c;
  }
  throw Error(fmt::format("unknown rank class '{}'", s));
}

RankClass classify(std::optional<long long> rank) {
  if (!rank) return RankClass::Undiscovered;
  if (*rank < 1) throw Error(fmt::format("classify: invalid rank {}", *rank));
  if (*rank == 1) return RankClass::Top1;
  if (*rank <= 10) return RankClass::Top10;
  if (*rank <= 100) return RankClass::Top100;
  return RankClass::Undiscovered;
}

std::string CombinationSpec::label() const {
  std::string out;
  for (const MethodId m : steps) {
    if (!out.empty()) out.push_back('-');
    out += to_string(m);
  }
  return out;
}

CombinationSpec CombinationSpec::parse(std::string_view label) {
  CombinationSpec spec;
  std::size_t start = 0;
  while (start <= label.size()) {
    const auto dash = label.find('-', start);
    const auto part = label.substr(start, dash == std::string_view::npos ? dash : dash - start);
    spec.steps.push_back(parse_method(part));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  spec.validate();
  return spec;
}

void CombinationSpec::validate() const {
  if (steps.empty()) throw Error("combination: no steps");
  std::set<MethodId> seen;
  for (const MethodId m : steps) {
    if (!seen.insert(m).second) {
      throw Error(fmt::format("combination: method {} repeated", to_string(m)));
    }
  }
}

CombinationSpec default_combination() { return {{MethodId::TI, MethodId::LS5}}; }

namespace {

SearchQuery make_query(std::vector<std::string> terms, bool quoted, std::size_t max_results) {
  SearchQuery q;
  q.terms = std::move(terms);
  q.quoted = quoted;
  q.max_results = max_results;
  return q;
}

DerivedQuery signature_query(const TermFreqs& freqs, std::size_t n, const MethodInputs& in,
                             bool neighborhood) {
  if (!in.df) throw Error("derive_query: signature methods need a df provider");
  if (freqs.empty()) return MethodUnavailable{"no scoreable terms"};
  LexicalSignature sig;
  if (neighborhood) {
    sig = make_signature(*in.bucket, n, *in.df);
  } else {
    sig = make_signature(*in.doc, n, *in.df);
  }
  return make_query(sig.words(), false, in.max_results);
}

}  // namespace

DerivedQuery derive_query(MethodId method, const MethodInputs& in) {
  switch (method) {
    case MethodId::LS5:
    case MethodId::LS7: {
      if (!in.doc) return MethodUnavailable{"no cached copy"};
      return signature_query(in.doc->term_freqs, method == MethodId::LS5 ? 5 : 7, in, false);
    }
    case MethodId::LNLS5:
    case MethodId::LNLS7: {
      if (!in.bucket) return MethodUnavailable{"no link neighborhood"};
      return signature_query(in.bucket->term_freqs, method == MethodId::LNLS5 ? 5 : 7, in,
                             true);
    }
    case MethodId::TI:
    case MethodId::TIQ:
    case MethodId::TI_NOSW: {
      if (!in.doc || !in.doc->title) return MethodUnavailable{"no title"};
      const std::string source = method == MethodId::TI_NOSW
                                     ? strip_stopwords_from_title(*in.doc->title, *in.stopwords)
                                     : *in.doc->title;
      auto words = text::split_words(source);
      if (words.empty()) return MethodUnavailable{"title has no terms"};
      return make_query(std::move(words), method == MethodId::TIQ, in.max_results);
    }
    case MethodId::TA: {
      if (!in.tags || in.tags->tags.empty()) return MethodUnavailable{"no tags"};
      return make_query(in.tags->tags, false, in.max_results);
    }
  }
  throw Error("derive_query: unknown method");
}

MethodOutcome run_method(MethodId method, std::string_view uri, SearchEngine& engine,
                         const MethodInputs& inputs) {
  MethodOutcome out;
  out.record.uri = normalize_uri(uri);
  out.record.method = method;
  out.record.engine_id = engine.binding().engine_id;

  auto derived = derive_query(method, inputs);
  if (std::holds_alternative<MethodUnavailable>(derived)) {
    out.record.available = false;
    out.record.rank_class = RankClass::Undiscovered;
    out.results.engine_id = engine.binding().engine_id;
    return out;
  }
  const auto& query = std::get<SearchQuery>(derived);
  out.record.query_terms = query.terms;
  out.record.quoted = query.quoted;
  out.results = engine.search(query);
  out.record.rank = rank_of(out.results, uri);
  out.record.rank_class =
      classify(out.record.rank ? std::optional<long long>(*out.record.rank) : std::nullopt);
  // Past the top 100 counts as not found.
  if (out.record.rank_class == RankClass::Undiscovered) out.record.rank.reset();
  return out;
}

CombinationResult run_combination(const CombinationSpec& spec, const MethodRunner& runner,
                                  EscalationPolicy policy) {
  spec.validate();
  CombinationResult result;
  for (const MethodId m : spec.steps) {
    MethodOutcome outcome = runner(m);
    result.trail.push_back(outcome.record);
    result.final_record = std::move(outcome.record);
    result.final_results = std::move(outcome.results);
    const bool escalate = policy == EscalationPolicy::OnUndiscovered
                              ? result.final_record.rank_class == RankClass::Undiscovered
                              : result.final_record.rank_class != RankClass::Top1;
    if (!escalate) break;
  }
  return result;
}

CombinationResult run_combination(const CombinationSpec& spec, std::string_view uri,
                                  SearchEngine& engine, const MethodInputs& inputs,
                                  EscalationPolicy policy) {
  return run_combination(
      spec, [&](MethodId m) { return run_method(m, uri, engine, inputs); }, policy);
}

std::vector<ProbabilityRow> build_probability_table(
    std::span<const RankRecord> records, const std::map<std::string, std::size_t>& title_lengths) {
  struct Counts {
    std::size_t n = 0, top1 = 0, top10 = 0, top100 = 0;
  };
  std::map<std::size_t, Counts> by_length;
  for (const auto& r : records) {
    const auto it = title_lengths.find(r.uri);
    if (it == title_lengths.end()) {
      throw Error(fmt::format("probability table: no title length for '{}'", r.uri));
    }
    auto& c = by_length[it->second];
    ++c.n;
    if (r.rank && *r.rank <= 1) ++c.top1;
    if (r.rank && *r.rank <= 10) ++c.top10;
    if (r.rank && *r.rank <= 100) ++c.top100;
  }
  std::vector<ProbabilityRow> rows;
  for (const auto& [len, c] : by_length) {
    const double n = static_cast<double>(c.n);
    rows.push_back({len, static_cast<double>(c.top1) / n, static_cast<double>(c.top10) / n,
                    static_cast<double>(c.top100) / n, c.n});
  }
  return rows;
}

std::string to_string(TitleDecision d) {
  switch (d) {
    case TitleDecision::RunTitleFirst: return "run-title-first";
    case TitleDecision::SkipToLS: return "skip-to-LS";
    case TitleDecision::UnknownLength: return "unknown-length";
  }
  return "?";
}

TitleDecision predict_title_worth(std::string_view title, std::span<const ProbabilityRow> table,
                                  double threshold) {
  const auto terms = text::split_whitespace(title);
  if (terms.empty()) throw Error("predict_title_worth: empty title");
  for (const auto& row : table) {
    if (row.title_length == terms.size()) {
      return row.p10 >= threshold ? TitleDecision::RunTitleFirst : TitleDecision::SkipToLS;
    }
  }
  return TitleDecision::UnknownLength;
}

std::string probability_table_csv(std::span<const ProbabilityRow> table) {
  std::string out = "title_length,p1,p10,p100\n";
  for (const auto& r : table) {
    out += fmt::format("{},{:.4f},{:.4f},{:.4f}\n", r.title_length, r.p1, r.p10, r.p100);
  }
  return out;
}

std::vector<ProbabilityRow> parse_probability_table_csv(std::string_view csv) {
  std::vector<ProbabilityRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.starts_with("title_length")) continue;
    ProbabilityRow r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ls(line);
    if (!(ls >> r.title_length >> c1 >> r.p1 >> c2 >> r.p10 >> c3 >> r.p100) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw Error(fmt::format("probability table line {}: expected length,p1,p10,p100", lineno));
    }
    if (r.title_length < 1 || r.p1 < 0 || r.p100 > 1 || r.p1 > r.p10 || r.p10 > r.p100) {
      throw Error(fmt::format("probability table line {}: invalid row", lineno));
    }
    rows.push_back(r);
  }
  return rows;
}

std::string to_jsonl(const RankRecord& r) {
  json j;
  j["uri"] = r.uri;
  j["method"] = to_string(r.method);
  j["engine_id"] = r.engine_id;
  j["rank"] = r.rank ? json(*r.rank) : json(nullptr);
  j["rank_class"] = to_string(r.rank_class);
  j["query_terms"] = r.query_terms;
  j["quoted"] = r.quoted;
  j["available"] = r.available;
  return j.dump();
}

RankRecord rank_record_from_json(std::string_view line) {
  try {
    const auto j = json::parse(line);
    RankRecord r;
    r.uri = j.at("uri").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.engine_id = j.at("engine_id").get<std::string>();
    if (!j.at("rank").is_null()) r.rank = j.at("rank").get<std::size_t>();
    r.rank_class = parse_rank_class(j.at("rank_class").get<std::string>());
    r.query_terms = j.at("query_terms").get<std::vector<std::string>>();
    r.quoted = j.at("quoted").get<bool>();
    r.available = j.value("available", true);
    const auto expected =
        classify(r.rank ? std::optional<long long>(static_cast<long long>(*r.rank)) : std::nullopt);
    if (expected != r.rank_class) throw Error("rank_class inconsistent with rank");
    return r;
  } catch (const json::exception& e) {
    throw Error(fmt::format("bad rank record: {}", e.what()));
  }
}

}  // namespace relict

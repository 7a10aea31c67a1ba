#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relict/content.hpp"
#include "relict/dfsource.hpp"
#include "relict/lexsig.hpp"
#include "relict/searchsim.hpp"
#include "relict/webclients.hpp"

namespace relict {

enum class MethodId { LS5, LS7, TI, TIQ, TA, LNLS5, LNLS7, TI_NOSW };

inline constexpr std::array<MethodId, 8> kAllMethods = {
    MethodId::LS5, MethodId::LS7,   MethodId::TI,    MethodId::TIQ,
    MethodId::TA,  MethodId::LNLS5, MethodId::LNLS7, MethodId::TI_NOSW};

std::string to_string(MethodId m);
MethodId parse_method(std::string_view s);

/// Ordered best to worst.
enum class RankClass { Top1 = 0, Top10 = 1, Top100 = 2, Undiscovered = 3 };

inline constexpr std::array<RankClass, 4> kAllRankClasses = {
    RankClass::Top1, RankClass::Top10, RankClass::Top100, RankClass::Undiscovered};

std::string to_string(RankClass c);
RankClass parse_rank_class(std::string_view s);

/// 1 -> Top1, 2..10 -> Top10, 11..100 -> Top100, absent or >100 ->
/// Undiscovered. Throws relict::Error for rank < 1.
RankClass classify(std::optional<long long> rank);

struct RankRecord {
  std::string uri;
  MethodId method = MethodId::LS5;
  std::string engine_id;
  std::optional<std::size_t> rank;
  RankClass rank_class = RankClass::Undiscovered;
  std::vector<std::string> query_terms;
  bool quoted = false;
  bool available = true;  // false when the method had no input (no title, no tags, ...)

  friend bool operator==(const RankRecord&, const RankRecord&) = default;
};

struct CombinationSpec {
  std::vector<MethodId> steps;

  /// "TI-LS5" style label.
  std::string label() const;
  /// Parses "TI-LS5"; throws on empty, unknown or repeated methods.
  static CombinationSpec parse(std::string_view label);
  void validate() const;
};

/// The default fallback: title first, then the 5-term signature.
CombinationSpec default_combination();

/// When a combination moves on to its next step.
enum class EscalationPolicy { OnUndiscovered, UnlessTop1 };

/// Everything the methods may draw on for one URI.
struct MethodInputs {
  const ExtractedDoc* doc = nullptr;         // the cached copy
  std::optional<TagSet> tags;
  std::optional<TermBucket> bucket;
  DfProvider* df = nullptr;                  // LS / LNLS
  const StopwordList* stopwords = &StopwordList::bundled();
  std::size_t max_results = 100;
};

struct MethodUnavailable {
  std::string reason;
};

using DerivedQuery = std::variant<SearchQuery, MethodUnavailable>;

DerivedQuery derive_query(MethodId method, const MethodInputs& inputs);

struct MethodOutcome {
  RankRecord record;
  ResultPage results;  // empty when the method was unavailable
};

MethodOutcome run_method(MethodId method, std::string_view uri, SearchEngine& engine,
                         const MethodInputs& inputs);

struct CombinationResult {
  RankRecord final_record;
  std::vector<RankRecord> trail;
  ResultPage final_results;
};

using MethodRunner = std::function<MethodOutcome(MethodId)>;

/// Runs steps in order, stopping at the first step that does not call for
/// escalation under `policy`.
CombinationResult run_combination(const CombinationSpec& spec, const MethodRunner& runner,
                                  EscalationPolicy policy = EscalationPolicy::OnUndiscovered);
CombinationResult run_combination(const CombinationSpec& spec, std::string_view uri,
                                  SearchEngine& engine, const MethodInputs& inputs,
                                  EscalationPolicy policy = EscalationPolicy::OnUndiscovered);

struct ProbabilityRow {
  std::size_t title_length = 0;
  double p1 = 0.0;
  double p10 = 0.0;
  double p100 = 0.0;
  std::size_t n = 0;  // URIs behind the row

  friend bool operator==(const ProbabilityRow&, const ProbabilityRow&) = default;
};

/// Cumulative success probabilities per title length (in terms). Lengths
/// with no URI are omitted; rows sorted by length. Throws when a record's
/// URI has no length.
std::vector<ProbabilityRow> build_probability_table(
    std::span<const RankRecord> records, const std::map<std::string, std::size_t>& title_lengths);

enum class TitleDecision { RunTitleFirst, SkipToLS, UnknownLength };

std::string to_string(TitleDecision d);

/// Exact-length lookup on the title's whitespace term count; compares P10
/// against threshold. Throws on an empty title.
TitleDecision predict_title_worth(std::string_view title, std::span<const ProbabilityRow> table,
                                  double threshold);

/// CSV `title_length,p1,p10,p100`.
std::string probability_table_csv(std::span<const ProbabilityRow> table);
std::vector<ProbabilityRow> parse_probability_table_csv(std::string_view csv);

/// JSON object per line:
/// {uri, method, engine_id, rank, rank_class, query_terms, quoted, available}
std::string to_jsonl(const RankRecord& r);
RankRecord rank_record_from_json(std::string_view line);

}  // namespace relict

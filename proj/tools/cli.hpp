#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relict/dfsource.hpp"
#include "relict/pipeline.hpp"
#include "relict/webclients.hpp"

namespace relict::cli {

/// Settings shared by all commands. Loaded from a key = value file, then
/// overridden by flags.
struct CliConfig {
  EngineBinding engine;
  DfProviderConfig df{"local-index", DfProviderKind::LocalIndex, std::nullopt, 0.0, std::nullopt};
  std::optional<std::filesystem::path> df_cache;
  std::optional<std::filesystem::path> stopwords;
  std::string combination = "TI-LS5";
  double acceptance_threshold = 0.0;  // minimum Top100 share reported by evaluate
  double title_skip_threshold = 0.5;  // tau
  std::optional<std::filesystem::path> probability_table;
  std::size_t inlink_cap = kDefaultInlinkCap;
  std::size_t jobs = 1;

  /// Throws relict::Error when a referenced path is missing or tau is
  /// outside [0, 1].
  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys throw.
void apply_config_text(CliConfig& config, std::string_view text, std::string_view origin);
void apply_config_file(CliConfig& config, const std::filesystem::path& path);

/// Runs one invocation; args exclude the program name. Returns the exit
/// status: 0 success, 1 usage or data error, 2 rediscovery exhausted.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relict::cli

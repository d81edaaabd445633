#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fsre/corpus.hpp"
#include "fsre/llm_client.hpp"
#include "fsre/prompting.hpp"

namespace fsre {

// Reserved prediction for completions that map to no single label.
inline constexpr std::string_view kUnparseable = "<UNPARSEABLE>";

struct Prediction {
  std::string instance_id;
  std::string predicted;
  std::string raw_completion;
  std::vector<std::string> prompt_demo_ids;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct IclRunConfig {
  PromptStyle style;
  std::size_t per_relation_demos = 1;
  BudgetConfig budget;
  std::uint64_t base_seed = 0;
  bool resample_per_query = true;

  double temperature = 0.0;
  int max_completion_tokens = 16;
  std::vector<std::string> stop_sequences = {"\n\n"};
  int max_concurrent_requests = 4;

  // Appends the gold verbalization as an oracle marker (mock_oracle harness).
  bool embed_oracle_marker = false;
  PromptTemplates templates = PromptTemplates::defaults();
};

/// Maps a free-text completion to a schema label.
///
/// The first non-empty line is lowercased and stripped of surrounding
/// whitespace and punctuation, then:
///   1. exact match against a verbalization or raw label;
///   2. otherwise the single label whose verbalization or raw name occurs as
///      a substring (occurrences nested inside a longer match do not count);
///   3. otherwise kUnparseable. Two surviving labels are never tie-broken.
std::string parse_relation(std::string_view completion, const RelationSchema& schema);

/// ICL over `test`, one Prediction per test instance in test order.
///
/// Query i uses seed base_seed + i when resample_per_query, base_seed
/// otherwise. Backend failures and over-budget queries become kUnparseable
/// predictions with the error text in raw_completion.
std::vector<Prediction> run_icl(const Dataset& test, const Dataset& train,
                                const RelationSchema& schema, const IclRunConfig& cfg,
                                Backend& backend,
                                std::vector<RenderedPrompt>* prompts_out = nullptr);

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(std::istream& in);

}  // namespace fsre

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsre/corpus.hpp"
#include "fsre/eval.hpp"
#include "fsre/llm_client.hpp"
#include "fsre/prompting.hpp"

namespace fsre::cli {

namespace fs = std::filesystem;

struct ExperimentConfig {
  nlohmann::json snapshot;  // fully merged config, as written to manifests

  std::optional<fs::path> schema;
  std::optional<fs::path> source;      // full training pool for `sample`
  std::optional<fs::path> train;
  std::optional<fs::path> validation;
  std::optional<fs::path> test;
  DatasetFormat format = DatasetFormat::jsonl_native;
  fs::path output_dir = "experiment";
  std::uint64_t seed = 13;

  std::vector<std::size_t> shot_ks{8, 16};
  std::uint64_t train_seed = 1;
  std::uint64_t validation_seed = 2;

  std::vector<PromptStyle> styles{PromptStyle{}};
  std::size_t per_relation_demos = 1;
  BudgetConfig budget;
  bool resample_per_query = true;
  bool dump_prompts = false;
  std::optional<fs::path> template_file;
  bool oracle_marker = false;
  UnparseablePolicy unparseable = UnparseablePolicy::automatic;
  std::size_t limit = 0;  // evaluate only the first N test instances when > 0

  BackendConfig backend;
  std::optional<fs::path> scripted_file;

  std::vector<std::string> generation_relations;
  std::size_t n_target = 16;
  bool constrained = true;
  std::size_t attempt_cap_factor = 5;
  std::size_t blocks_per_call = 4;
  std::size_t min_context_tokens = 6;
  std::optional<fs::path> generated_pool;

  std::vector<std::size_t> mixing_ks{8, 16, 32, 48};

  std::optional<fs::path> lexicon;
  double substitution_rate = 0.3;
  std::size_t copies_per_instance = 0;  // 0: enough copies to cover max(ks)

  double probe_alpha = 1.0;

  std::optional<fs::path> predictions;  // `report`

  std::size_t synth_per_relation = 40;
  std::size_t synth_test_per_relation = 20;
  std::size_t synth_script_calls = 30;
  bool synth_with_na = true;
};

// Every recognised key with its default value.
nlohmann::json default_config_json();

/// Merges the defaults, the optional JSON file, and dotted `key=value`
/// overrides (values are parsed as JSON, falling back to a plain string).
/// Unknown keys and ill-typed values raise ConfigError.
ExperimentConfig load_config(const std::optional<fs::path>& file,
                             const std::vector<std::string>& overrides);

// Throws ConfigError naming the first missing input.
void require_inputs(const ExperimentConfig& cfg,
                    std::initializer_list<std::pair<const char*, const std::optional<fs::path>*>> inputs);

}  // namespace fsre::cli

#include "cli/config.hpp"

#include <fstream>

#include "fsre/error.hpp"

namespace fsre::cli {

using nlohmann::json;

json default_config_json() {
  return json::parse(R"({
    "schema": null,
    "source": null,
    "train": null,
    "validation": null,
    "test": null,
    "dataset_format": "jsonl_native",
    "output_dir": "experiment",
    "seed": 13,
    "shots": {"ks": [8, 16], "train_seed": 1, "validation_seed": 2},
    "icl": {
      "styles": ["text"],
      "per_relation_demos": 1,
      "max_request_tokens": 4097,
      "completion_reserve": 64,
      "resample_per_query": true,
      "dump_prompts": false,
      "template_file": null,
      "oracle_marker": null,
      "unparseable": "auto",
      "limit": 0
    },
    "backend": {
      "kind": "mock_oracle",
      "endpoint_url": null,
      "model_name": null,
      "api_key_env": "OPENAI_API_KEY",
      "timeout_ms": 60000,
      "max_retries": 3,
      "retry_base_delay_ms": 500,
      "retry_max_delay_ms": 60000,
      "max_concurrent_requests": 4,
      "fixed_response": "",
      "scripted_file": null,
      "oracle_noise": 0.0,
      "oracle_na_text": "no relation",
      "seed": 0,
      "audit_log": null
    },
    "generation": {
      "relations": [],
      "n_target": 16,
      "constrained": true,
      "attempt_cap_factor": 5,
      "blocks_per_call": 4,
      "min_context_tokens": 6,
      "pool": null
    },
    "mixing": {"ks": [8, 16, 32, 48]},
    "augment": {"lexicon": null, "substitution_rate": 0.3, "copies_per_instance": 0},
    "probe": {"alpha": 1.0},
    "report": {"predictions": null},
    "synth": {"per_relation": 40, "test_per_relation": 20, "script_calls": 30, "with_na": true}
  })");
}

namespace {

void merge_into(json& base, const json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError("config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      merge_into(slot, value, path);
    } else {
      slot = value;
    }
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("config: '" + key + "' is a section, not a value");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  *node = std::move(value);
}

const json& at_path(const json& config, const std::string& key) {
  const json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    node = &node->at(key.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

template <typename T>
T get(const json& config, const std::string& key) {
  try {
    return at_path(config, key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_non_negative(const json& config, const std::string& key) {
  const auto& node = at_path(config, key);
  if (!node.is_number_integer() || node.get<std::int64_t>() < 0) {
    throw ConfigError("config: '" + key + "' must be a non-negative integer");
  }
  return node.get<T>();
}

std::optional<fs::path> get_path(const json& config, const std::string& key) {
  const auto& node = at_path(config, key);
  if (node.is_null()) return std::nullopt;
  if (!node.is_string()) throw ConfigError("config: '" + key + "' must be a path string");
  const auto text = node.get<std::string>();
  if (text.empty()) return std::nullopt;
  return fs::path(text);
}

std::vector<std::size_t> get_ks(const json& config, const std::string& key) {
  const auto& node = at_path(config, key);
  std::vector<std::size_t> ks;
  if (node.is_number_integer()) {
    ks.push_back(get_non_negative<std::size_t>(config, key));
  } else if (node.is_array()) {
    for (const auto& v : node) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError("config: '" + key + "' must hold non-negative integers");
      }
      ks.push_back(v.get<std::size_t>());
    }
  } else {
    throw ConfigError("config: '" + key + "' must be an integer list");
  }
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) throw ConfigError("config: '" + key + "' must be strictly increasing");
  }
  return ks;
}

std::vector<PromptStyle> get_styles(const json& config) {
  const auto& node = at_path(config, "icl.styles");
  std::vector<std::string> names;
  if (node.is_string()) {
    const auto text = node.get<std::string>();
    if (text == "all") return PromptStyle::all();
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      names.push_back(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  } else {
    names = get<std::vector<std::string>>(config, "icl.styles");
  }
  if (names.size() == 1 && names.front() == "all") return PromptStyle::all();
  std::vector<PromptStyle> styles;
  for (const auto& name : names) styles.push_back(PromptStyle::parse(name));
  if (styles.empty()) throw ConfigError("config: 'icl.styles' is empty");
  return styles;
}

}  // namespace

ExperimentConfig load_config(const std::optional<fs::path>& file,
                             const std::vector<std::string>& overrides) {
  json merged = default_config_json();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + file->string() + ": " + e.what());
    }
    merge_into(merged, doc, "");
  }
  for (const auto& assignment : overrides) apply_override(merged, assignment);

  ExperimentConfig cfg;
  cfg.snapshot = merged;
  cfg.schema = get_path(merged, "schema");
  cfg.source = get_path(merged, "source");
  cfg.train = get_path(merged, "train");
  cfg.validation = get_path(merged, "validation");
  cfg.test = get_path(merged, "test");
  cfg.format = parse_dataset_format(get<std::string>(merged, "dataset_format"));
  cfg.output_dir = get<std::string>(merged, "output_dir");
  cfg.seed = get<std::uint64_t>(merged, "seed");

  cfg.shot_ks = get_ks(merged, "shots.ks");
  cfg.train_seed = get<std::uint64_t>(merged, "shots.train_seed");
  cfg.validation_seed = get<std::uint64_t>(merged, "shots.validation_seed");

  cfg.styles = get_styles(merged);
  cfg.per_relation_demos = get_non_negative<std::size_t>(merged, "icl.per_relation_demos");
  cfg.budget.max_request_tokens = get_non_negative<std::size_t>(merged, "icl.max_request_tokens");
  cfg.budget.completion_reserve = get_non_negative<std::size_t>(merged, "icl.completion_reserve");
  cfg.budget.prompt_limit();
  cfg.resample_per_query = get<bool>(merged, "icl.resample_per_query");
  cfg.dump_prompts = get<bool>(merged, "icl.dump_prompts");
  cfg.template_file = get_path(merged, "icl.template_file");
  cfg.unparseable = parse_unparseable_policy(get<std::string>(merged, "icl.unparseable"));
  cfg.limit = get_non_negative<std::size_t>(merged, "icl.limit");

  auto& b = cfg.backend;
  b.kind = parse_backend_kind(get<std::string>(merged, "backend.kind"));
  if (const auto& url = at_path(merged, "backend.endpoint_url"); !url.is_null()) {
    b.endpoint_url = get<std::string>(merged, "backend.endpoint_url");
  }
  if (const auto& model = at_path(merged, "backend.model_name"); !model.is_null()) {
    b.model_name = get<std::string>(merged, "backend.model_name");
  }
  b.api_key_env = get<std::string>(merged, "backend.api_key_env");
  b.request_timeout_ms = get<int>(merged, "backend.timeout_ms");
  b.max_retries = get<int>(merged, "backend.max_retries");
  b.retry_base_delay_ms = get<int>(merged, "backend.retry_base_delay_ms");
  b.retry_max_delay_ms = get<int>(merged, "backend.retry_max_delay_ms");
  b.max_concurrent_requests = get<int>(merged, "backend.max_concurrent_requests");
  b.fixed_response = get<std::string>(merged, "backend.fixed_response");
  cfg.scripted_file = get_path(merged, "backend.scripted_file");
  b.oracle_noise = get<double>(merged, "backend.oracle_noise");
  b.oracle_na_text = get<std::string>(merged, "backend.oracle_na_text");
  b.seed = get<std::uint64_t>(merged, "backend.seed");
  if (const auto audit = get_path(merged, "backend.audit_log")) b.audit_log_path = audit->string();
  b.validate();

  const auto& marker = at_path(merged, "icl.oracle_marker");
  cfg.oracle_marker = marker.is_null() ? b.kind == BackendKind::mock_oracle
                                       : get<bool>(merged, "icl.oracle_marker");

  cfg.generation_relations = get<std::vector<std::string>>(merged, "generation.relations");
  cfg.n_target = get_non_negative<std::size_t>(merged, "generation.n_target");
  cfg.constrained = get<bool>(merged, "generation.constrained");
  cfg.attempt_cap_factor = get_non_negative<std::size_t>(merged, "generation.attempt_cap_factor");
  cfg.blocks_per_call = get_non_negative<std::size_t>(merged, "generation.blocks_per_call");
  if (cfg.blocks_per_call == 0) throw ConfigError("config: 'generation.blocks_per_call' must be positive");
  cfg.min_context_tokens = get_non_negative<std::size_t>(merged, "generation.min_context_tokens");
  cfg.generated_pool = get_path(merged, "generation.pool");

  cfg.mixing_ks = get_ks(merged, "mixing.ks");

  cfg.lexicon = get_path(merged, "augment.lexicon");
  cfg.substitution_rate = get<double>(merged, "augment.substitution_rate");
  if (!(cfg.substitution_rate >= 0.0 && cfg.substitution_rate <= 1.0)) {
    throw ConfigError("config: 'augment.substitution_rate' must lie in [0, 1]");
  }
  cfg.copies_per_instance = get_non_negative<std::size_t>(merged, "augment.copies_per_instance");

  cfg.probe_alpha = get<double>(merged, "probe.alpha");
  if (!(cfg.probe_alpha > 0.0)) throw ConfigError("config: 'probe.alpha' must be positive");

  cfg.predictions = get_path(merged, "report.predictions");

  cfg.synth_per_relation = get_non_negative<std::size_t>(merged, "synth.per_relation");
  cfg.synth_test_per_relation = get_non_negative<std::size_t>(merged, "synth.test_per_relation");
  cfg.synth_script_calls = get_non_negative<std::size_t>(merged, "synth.script_calls");
  cfg.synth_with_na = get<bool>(merged, "synth.with_na");
  return cfg;
}

void require_inputs(const ExperimentConfig&,
                    std::initializer_list<std::pair<const char*, const std::optional<fs::path>*>> inputs) {
  for (const auto& [key, path] : inputs) {
    if (!*path) throw ConfigError("config: '" + std::string(key) + "' is required for this command");
    if (!fs::exists(**path)) {
      throw ConfigError("config: '" + std::string(key) + "' points to a missing file: " + (*path)->string());
    }
  }
}

}  // namespace fsre::cli

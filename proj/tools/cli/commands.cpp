#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/manifest.hpp"
#include "fsre/augment.hpp"
#include "fsre/datagen.hpp"
#include "fsre/error.hpp"
#include "fsre/icl.hpp"
#include "fsre/probe.hpp"
#include "fsre/random.hpp"
#include "fsre/synthetic.hpp"

namespace fsre::cli {

using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string native_text(const Dataset& dataset) {
  std::ostringstream out;
  write_native(out, dataset);
  return out.str();
}

// Stable file stem for labels such as "org:top_members/employees".
std::string file_safe(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += keep ? c : (c == '+' ? '+' : '_');
  }
  return out;
}

struct Inputs {
  RelationSchema schema;
};

RelationSchema load_schema_input(const ExperimentConfig& cfg, Manifest& manifest) {
  manifest.add_input("schema", *cfg.schema);
  return load_schema(*cfg.schema);
}

Dataset load_input(const ExperimentConfig& cfg, const char* key, const fs::path& path,
                   const RelationSchema& schema, Manifest& manifest) {
  manifest.add_input(key, path);
  return load_dataset(path, cfg.format, schema);
}

std::vector<std::string> load_script_array(const json& doc, const fs::path& path) {
  if (!doc.is_array()) throw ConfigError("scripted file " + path.string() + " must hold a JSON array");
  std::vector<std::string> out;
  for (const auto& item : doc) {
    if (!item.is_string()) throw ConfigError("scripted file " + path.string() + " must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

BackendConfig backend_with_script(const ExperimentConfig& cfg, Manifest& manifest) {
  BackendConfig backend = cfg.backend;
  if (backend.kind == BackendKind::mock_scripted) {
    if (!cfg.scripted_file) throw ConfigError("mock_scripted needs backend.scripted_file");
    manifest.add_input("scripted_file", *cfg.scripted_file);
    backend.scripted_responses = load_script_array(read_json_file(*cfg.scripted_file), *cfg.scripted_file);
  }
  return backend;
}

std::string parseable_summary(const std::vector<Prediction>& predictions) {
  std::size_t parsed = 0;
  for (const auto& p : predictions) parsed += p.predicted != kUnparseable;
  return std::to_string(parsed) + "/" + std::to_string(predictions.size()) + " parseable";
}

}  // namespace

int cmd_synth(const ExperimentConfig& cfg, std::ostream& out) {
  Manifest manifest("synth", cfg.snapshot);
  SyntheticCorpusConfig corpus_cfg;
  corpus_cfg.with_na = cfg.synth_with_na;
  const SyntheticCorpus corpus(corpus_cfg);
  const auto& schema = corpus.schema();

  const auto source = corpus.generate(cfg.synth_per_relation, derive_seed(cfg.seed, "source"), "src");
  const auto test = corpus.generate(cfg.synth_test_per_relation, derive_seed(cfg.seed, "test"), "test");

  json script = json::object();
  std::size_t serial = 0;
  for (std::size_t r = 0; r < schema.labels().size(); ++r) {
    const auto& relation = schema.labels()[r];
    if (schema.is_na(relation)) continue;
    json responses = json::array();
    for (std::size_t call = 0; call < cfg.synth_script_calls; ++call) {
      std::string text;
      for (std::size_t b = 0; b < cfg.blocks_per_call; ++b, ++serial) {
        const auto inst = corpus.make_instance(r, derive_seed(cfg.seed ^ 0x9e37ULL, serial), "oracle");
        if (b > 0) text += "\n\n";
        text += format_demonstration(inst, schema, true);
      }
      responses.push_back(std::move(text));
    }
    script[relation] = std::move(responses);
  }

  const auto& dir = cfg.output_dir;
  write_file(dir / "schema.json", schema_to_json(schema) + "\n");
  write_file(dir / "source.jsonl", native_text(source));
  write_file(dir / "test.jsonl", native_text(test));
  write_file(dir / "generation_script.json", script.dump(2) + "\n");
  for (const auto* name : {"schema.json", "source.jsonl", "test.jsonl", "generation_script.json"}) {
    manifest.add_output(name);
  }
  manifest.details() = json{{"relations", schema.labels().size()},
                        {"source_instances", source.size()},
                        {"test_instances", test.size()}};
  manifest.write(dir);
  out << "wrote synthetic corpus to " << dir.string() << ": " << source.size() << " source, "
      << test.size() << " test instances, " << schema.labels().size() << " labels\n";
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg, std::ostream& out) {
  require_inputs(cfg, {{"schema", &cfg.schema}, {"source", &cfg.source}});
  Manifest manifest("sample", cfg.snapshot);
  const auto schema = load_schema_input(cfg, manifest);
  const auto source = load_input(cfg, "source", *cfg.source, schema, manifest);
  if (source.empty()) throw DataError("source dataset is empty");

  json splits = json::object();
  for (const auto k : cfg.shot_ks) {
    std::vector<std::string> warnings;
    SampleOptions train_opts{&schema, {}, &warnings};
    const auto train = sample_k_shot(source, {k, cfg.train_seed}, train_opts);

    SampleOptions val_opts{&schema, {}, &warnings};
    for (const auto& inst : train.instances) val_opts.exclude_ids.insert(inst.id);
    const auto validation = sample_k_shot(source, {k, cfg.validation_seed}, val_opts);

    const auto train_name = fs::path("splits") / ("train.k" + std::to_string(k) + ".jsonl");
    const auto val_name = fs::path("splits") / ("validation.k" + std::to_string(k) + ".jsonl");
    write_file(cfg.output_dir / train_name, native_text(train));
    write_file(cfg.output_dir / val_name, native_text(validation));
    manifest.add_output(train_name);
    manifest.add_output(val_name);
    for (const auto& w : warnings) manifest.warn("K=" + std::to_string(k) + ": " + w);

    const auto train_counts = label_histogram(train);
    std::size_t max_per_relation = 0;
    for (const auto& [label, n] : train_counts) max_per_relation = std::max(max_per_relation, n);
    splits["k" + std::to_string(k)] = {{"train_seed", cfg.train_seed},
                                       {"validation_seed", cfg.validation_seed},
                                       {"train_instances", train.size()},
                                       {"validation_instances", validation.size()},
                                       {"max_per_relation", max_per_relation},
                                       {"train_counts", train_counts},
                                       {"validation_counts", label_histogram(validation)}};
    out << "K=" << k << ": " << train.size() << " train, " << validation.size()
        << " validation instances (max " << max_per_relation << " per relation)\n";
  }
  manifest.details() = json{{"splits", splits}};
  manifest.write(cfg.output_dir);
  return kExitOk;
}

int cmd_icl(const ExperimentConfig& cfg, std::ostream& out) {
  require_inputs(cfg, {{"schema", &cfg.schema}, {"test", &cfg.test}, {"train", &cfg.train}});
  if (cfg.template_file) require_inputs(cfg, {{"icl.template_file", &cfg.template_file}});
  Manifest manifest("icl", cfg.snapshot);
  const auto schema = load_schema_input(cfg, manifest);
  auto test = load_input(cfg, "test", *cfg.test, schema, manifest);
  const auto train = load_input(cfg, "train", *cfg.train, schema, manifest);
  if (cfg.limit > 0 && test.instances.size() > cfg.limit) test.instances.resize(cfg.limit);
  const auto templates = cfg.template_file ? PromptTemplates::load(*cfg.template_file)
                                           : PromptTemplates::defaults();
  const auto backend_cfg = backend_with_script(cfg, manifest);

  std::vector<std::pair<std::string, EvalReport>> reports;
  std::size_t backend_failures = 0;
  std::size_t requests = 0;
  json runs = json::object();
  for (const auto& style : cfg.styles) {
    IclRunConfig run;
    run.style = style;
    run.per_relation_demos = cfg.per_relation_demos;
    run.budget = cfg.budget;
    run.base_seed = cfg.seed;
    run.resample_per_query = cfg.resample_per_query;
    run.max_concurrent_requests = backend_cfg.max_concurrent_requests;
    run.embed_oracle_marker = cfg.oracle_marker;
    run.templates = templates;

    auto backend = make_backend(backend_cfg);
    std::vector<RenderedPrompt> prompts;
    const auto predictions = run_icl(test, train, schema, run, *backend, cfg.dump_prompts ? &prompts : nullptr);
    const auto report = score(predictions, test, schema, cfg.unparseable);

    const auto stem = file_safe(style.name());
    std::ostringstream dump;
    write_predictions(dump, predictions);
    const auto pred_path = fs::path("predictions") / ("icl." + stem + ".jsonl");
    write_file(cfg.output_dir / pred_path, dump.str());
    manifest.add_output(pred_path);
    const auto report_stem = fs::path("reports") / ("icl." + stem);
    write_file(cfg.output_dir / (report_stem.string() + ".json"), report_to_json(report) + "\n");
    write_file(cfg.output_dir / (report_stem.string() + ".txt"), report_to_text(report));
    write_file(cfg.output_dir / (report_stem.string() + ".confusion.tsv"), confusion_to_tsv(report));
    manifest.add_output(report_stem.string() + ".json");
    if (cfg.dump_prompts) {
      std::string lines;
      for (const auto& p : prompts) {
        lines += json{{"query_id", p.query_id.value_or("")},
                      {"style", p.style.name()},
                      {"estimated_tokens", p.estimated_tokens},
                      {"demo_ids", p.demo_ids},
                      {"text", p.text}}
                     .dump();
        lines += '\n';
      }
      const auto prompt_path = fs::path("prompts") / ("icl." + stem + ".jsonl");
      write_file(cfg.output_dir / prompt_path, lines);
      manifest.add_output(prompt_path);
    }

    std::size_t failures = 0;
    for (const auto& p : predictions) {
      failures += p.predicted == kUnparseable && p.raw_completion.rfind("error: ", 0) == 0;
    }
    backend_failures += failures;
    requests += predictions.size();
    runs[style.name()] = {{"micro_f1", report.micro_f1}, {"errors", failures},
                          {"parseable", parseable_summary(predictions)}};
    out << style.name() << ": micro F1 " << percent1(report.micro_f1) << " ("
        << parseable_summary(predictions) << ")\n";
    reports.emplace_back(style.name(), report);
  }

  const auto table = compare_runs(reports);
  write_file(cfg.output_dir / "reports" / "icl.comparison.txt", table.to_text());
  write_file(cfg.output_dir / "reports" / "icl.comparison.jsonl", table.to_jsonl());
  manifest.add_output("reports/icl.comparison.txt");
  manifest.details() = json{{"seed", cfg.seed}, {"runs", runs}, {"test_instances", test.size()}};
  manifest.write(cfg.output_dir);
  out << table.to_text();

  if (requests > 0 && backend_failures == requests) {
    out << "every request failed at the backend\n";
    return kExitBackend;
  }
  return kExitOk;
}

int cmd_generate(const ExperimentConfig& cfg, std::ostream& out) {
  require_inputs(cfg, {{"schema", &cfg.schema}, {"train", &cfg.train}});
  Manifest manifest("generate", cfg.snapshot);
  const auto schema = load_schema_input(cfg, manifest);
  const auto train = load_input(cfg, "train", *cfg.train, schema, manifest);

  std::vector<std::string> relations = cfg.generation_relations;
  const auto counts = label_histogram(train);
  if (relations.empty()) {
    for (const auto& label : schema.labels()) {
      if (schema.is_na(label)) continue;
      const auto it = counts.find(label);
      const auto n = it == counts.end() ? 0 : it->second;
      if (n >= kGenerationDemoCount) {
        relations.push_back(label);
      } else {
        manifest.warn("skipped '" + label + "': " + std::to_string(n) + " training instances");
      }
    }
  } else {
    for (const auto& r : relations) {
      if (!schema.contains(r)) throw DataError("generation relation '" + r + "' is not in the schema");
    }
  }

  // A scripted file holding an object gives every relation its own script.
  std::optional<json> keyed_script;
  BackendConfig backend_cfg = cfg.backend;
  if (backend_cfg.kind == BackendKind::mock_scripted) {
    if (!cfg.scripted_file) throw ConfigError("mock_scripted needs backend.scripted_file");
    manifest.add_input("scripted_file", *cfg.scripted_file);
    auto doc = read_json_file(*cfg.scripted_file);
    if (doc.is_object()) {
      keyed_script = std::move(doc);
    } else {
      backend_cfg.scripted_responses = load_script_array(doc, *cfg.scripted_file);
    }
  }
  auto shared_backend = keyed_script ? nullptr : make_backend(backend_cfg);

  GenerationConfig gen;
  gen.n_target = cfg.n_target;
  gen.constrained = cfg.constrained;
  gen.seed = cfg.seed;
  gen.attempt_cap_factor = cfg.attempt_cap_factor;
  gen.blocks_per_call = cfg.blocks_per_call;
  gen.validation.min_context_tokens = cfg.min_context_tokens;
  gen.budget = cfg.budget;
  if (cfg.template_file) gen.templates = PromptTemplates::load(*cfg.template_file);

  Dataset pool;
  pool.schema_ref = cfg.schema->string();
  std::string report_lines;
  std::string rejected_lines;
  std::size_t total_raw = 0, total_accepted = 0;
  out << "relation\trequested\traw_blocks\taccepted\trejected\n";
  if (cfg.n_target > 0) {
    for (const auto& relation : relations) {
      std::unique_ptr<Backend> own;
      Backend* backend = shared_backend.get();
      if (keyed_script) {
        BackendConfig per = backend_cfg;
        per.scripted_responses = keyed_script->contains(relation)
                                     ? load_script_array((*keyed_script)[relation], *cfg.scripted_file)
                                     : std::vector<std::string>{};
        own = make_backend(per);
        backend = own.get();
      }
      auto result = generate_relation_data(relation, train, schema, gen, *backend);
      for (auto& inst : result.accepted) pool.instances.push_back(std::move(inst));
      report_lines += report_to_json(result.report) + "\n";
      for (const auto& cand : result.rejected) {
        auto line = json::parse(candidate_to_json(cand));
        line["relation"] = relation;
        rejected_lines += line.dump() + "\n";
      }
      total_raw += result.report.raw_blocks;
      total_accepted += result.report.accepted;
      out << relation << "\t" << result.report.requested << "\t" << result.report.raw_blocks << "\t"
          << result.report.accepted << "\t" << result.report.rejected() << "\n";
    }
  }

  write_file(cfg.output_dir / "generated" / "pool.jsonl", native_text(pool));
  write_file(cfg.output_dir / "generated" / "reports.jsonl", report_lines);
  write_file(cfg.output_dir / "generated" / "rejected.jsonl", rejected_lines);
  for (const auto* name : {"generated/pool.jsonl", "generated/reports.jsonl", "generated/rejected.jsonl"}) {
    manifest.add_output(name);
  }
  manifest.details() = json{{"seed", cfg.seed},
                        {"relations", relations},
                        {"raw_blocks", total_raw},
                        {"accepted", total_accepted},
                        {"constrained", cfg.constrained}};
  manifest.write(cfg.output_dir);
  out << "accepted " << total_accepted << " of " << total_raw << " generated blocks\n";
  return kExitOk;
}

namespace {

struct SweepRow {
  std::string variant;
  std::size_t k = 0;
  std::size_t train_size = 0;
  std::optional<EvalReport> validation;
  EvalReport test;
  bool best = false;
};

EvalReport evaluate_probe(const ProbeModel& model, const Dataset& data, const RelationSchema& schema) {
  std::vector<std::string> gold, predicted;
  for (const auto& inst : data.instances) {
    gold.push_back(inst.relation);
    predicted.push_back(predict_probe(model, inst));
  }
  return score_labels(gold, predicted, schema);
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  require_inputs(cfg, {{"schema", &cfg.schema}, {"train", &cfg.train}, {"test", &cfg.test}});
  if (cfg.validation) require_inputs(cfg, {{"validation", &cfg.validation}});
  if (cfg.generated_pool) require_inputs(cfg, {{"generation.pool", &cfg.generated_pool}});
  if (cfg.lexicon) require_inputs(cfg, {{"augment.lexicon", &cfg.lexicon}});
  if (!cfg.generated_pool && !cfg.lexicon) {
    throw ConfigError("sweep needs generation.pool and/or augment.lexicon");
  }

  Manifest manifest("sweep", cfg.snapshot);
  const auto schema = load_schema_input(cfg, manifest);
  const auto train = load_input(cfg, "train", *cfg.train, schema, manifest);
  const auto test = load_input(cfg, "test", *cfg.test, schema, manifest);
  std::optional<Dataset> validation;
  if (cfg.validation) validation = load_input(cfg, "validation", *cfg.validation, schema, manifest);
  if (train.empty()) throw DataError("training split is empty");

  std::vector<std::pair<std::string, Dataset>> variants;
  if (cfg.generated_pool) {
    variants.emplace_back("generated", load_input(cfg, "generation.pool", *cfg.generated_pool, schema, manifest));
  }
  if (cfg.lexicon) {
    manifest.add_input("augment.lexicon", *cfg.lexicon);
    const auto lexicon = load_lexicon(*cfg.lexicon);
    std::size_t copies = cfg.copies_per_instance;
    if (copies == 0) {
      std::size_t smallest = SIZE_MAX;
      for (const auto& [label, n] : label_histogram(train)) smallest = std::min(smallest, n);
      const auto max_k = cfg.mixing_ks.empty() ? 0 : cfg.mixing_ks.back();
      copies = std::max<std::size_t>(1, (max_k + smallest - 1) / smallest);
    }
    AugmentConfig aug{cfg.substitution_rate, copies, cfg.seed};
    variants.emplace_back("synonym", augment_dataset(train, lexicon, aug));
    manifest.details()["synonym_copies_per_instance"] = copies;
  }

  std::vector<std::size_t> ks{0};
  for (const auto k : cfg.mixing_ks) {
    if (k != 0) ks.push_back(k);
  }

  std::vector<SweepRow> rows;
  for (const auto& [variant, extra] : variants) {
    const auto first = rows.size();
    for (const auto k : ks) {
      const auto mixed = mix_generated(train, extra, k, cfg.seed);
      const auto model = train_probe(mixed, cfg.probe_alpha);
      SweepRow row;
      row.variant = variant;
      row.k = k;
      row.train_size = mixed.size();
      if (validation) row.validation = evaluate_probe(model, *validation, schema);
      row.test = evaluate_probe(model, test, schema);
      rows.push_back(std::move(row));
    }
    // Best k per variant: validation F1 when available, test F1 otherwise.
    auto selector = [](const SweepRow& r) { return r.validation ? r.validation->micro_f1 : r.test.micro_f1; };
    std::size_t best = first;
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (selector(rows[i]) > selector(rows[best])) best = i;
    }
    rows[best].best = true;
  }

  std::ostringstream text;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %4s %6s %8s %8s %8s %8s %8s %8s\n", "variant", "k", "train",
                "val_P", "val_R", "val_F1", "test_P", "test_R", "test_F1");
  text << line;
  std::string jsonl;
  for (const auto& row : rows) {
    auto cell = [](const std::optional<EvalReport>& r, double EvalReport::*field) {
      return r ? percent1((*r).*field) : std::string("-");
    };
    std::snprintf(line, sizeof line, "%-10s %4zu %6zu %8s %8s %8s %8s %8s %8s%s\n", row.variant.c_str(),
                  row.k, row.train_size, cell(row.validation, &EvalReport::micro_precision).c_str(),
                  cell(row.validation, &EvalReport::micro_recall).c_str(),
                  cell(row.validation, &EvalReport::micro_f1).c_str(),
                  percent1(row.test.micro_precision).c_str(), percent1(row.test.micro_recall).c_str(),
                  percent1(row.test.micro_f1).c_str(), row.best ? " *" : "");
    text << line;
    json record{{"variant", row.variant},
                {"k", row.k},
                {"train_size", row.train_size},
                {"test_precision", row.test.micro_precision},
                {"test_recall", row.test.micro_recall},
                {"test_f1", row.test.micro_f1},
                {"best", row.best}};
    if (row.validation) {
      record["validation_precision"] = row.validation->micro_precision;
      record["validation_recall"] = row.validation->micro_recall;
      record["validation_f1"] = row.validation->micro_f1;
    }
    jsonl += record.dump() + "\n";
  }
  write_file(cfg.output_dir / "reports" / "sweep.txt", text.str());
  write_file(cfg.output_dir / "reports" / "sweep.jsonl", jsonl);
  manifest.add_output("reports/sweep.txt");
  manifest.add_output("reports/sweep.jsonl");
  manifest.details()["ks"] = ks;
  manifest.details()["seed"] = cfg.seed;
  manifest.write(cfg.output_dir);
  out << text.str();
  return kExitOk;
}

int cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
  require_inputs(cfg, {{"schema", &cfg.schema}, {"test", &cfg.test}, {"report.predictions", &cfg.predictions}});
  Manifest manifest("report", cfg.snapshot);
  const auto schema = load_schema_input(cfg, manifest);
  const auto gold = load_input(cfg, "test", *cfg.test, schema, manifest);
  manifest.add_input("predictions", *cfg.predictions);
  std::ifstream in(*cfg.predictions);
  const auto predictions = read_predictions(in);
  const auto report = score(predictions, gold, schema, cfg.unparseable);

  const auto stem = "report." + file_safe(cfg.predictions->stem().string());
  write_file(cfg.output_dir / "reports" / (stem + ".json"), report_to_json(report) + "\n");
  write_file(cfg.output_dir / "reports" / (stem + ".txt"), report_to_text(report));
  write_file(cfg.output_dir / "reports" / (stem + ".confusion.tsv"), confusion_to_tsv(report));
  manifest.add_output("reports/" + stem + ".json");
  manifest.details() = json{{"micro_f1", report.micro_f1}};
  manifest.write(cfg.output_dir);
  out << report_to_text(report);
  return kExitOk;
}

}  // namespace fsre::cli

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "fsre/error.hpp"
#include "fixtures.hpp"
#include "fsre/eval.hpp"
#include "fsre/icl.hpp"
#include "fsre/probe.hpp"
#include "fsre/synthetic.hpp"

namespace fsre::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<json> jsonl(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fsre_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    ASSERT_EQ(run({"synth", "--out=" + dir_.string(), "--synth.per_relation=12", "--synth.test_per_relation=5"}).code,
              0);
    ASSERT_EQ(run({"sample", "-o", dir_.string(), "schema=" + path("schema.json"), "source=" + path("source.jsonl"),
                   "--shots.ks=[3,8]"})
                  .code,
              0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }
  std::vector<std::string> base(std::string command) const {
    return {std::move(command), "-o", dir_.string(), "schema=" + path("schema.json"),
            "train=" + path("splits/train.k8.jsonl"), "test=" + path("test.jsonl")};
  }

  fs::path dir_;
};

TEST_F(CliTest, SampleIsByteIdenticalOnRerunAndRespectsK) {
  const auto first = slurp(dir_ / "splits/train.k8.jsonl");
  const auto manifest = slurp(dir_ / "manifest.json");
  ASSERT_EQ(run({"sample", "-o", dir_.string(), "schema=" + path("schema.json"), "source=" + path("source.jsonl"),
                 "--shots.ks=[3,8]"})
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "splits/train.k8.jsonl"), first);
  EXPECT_EQ(slurp(dir_ / "manifest.json"), manifest);

  const auto doc = json::parse(manifest);
  const auto& details = doc.at("commands").at("sample").at("details").at("splits");
  EXPECT_LE(details.at("k8").at("max_per_relation").get<int>(), 8);
  EXPECT_LE(details.at("k3").at("max_per_relation").get<int>(), 3);
  EXPECT_EQ(doc.at("commands").at("sample").at("inputs").at("source").at("sha256").get<std::string>().size(), 64u);

  // Validation never reuses a training instance.
  std::set<std::string> train_ids;
  for (const auto& r : jsonl(dir_ / "splits/train.k8.jsonl")) train_ids.insert(r.at("id").get<std::string>());
  for (const auto& r : jsonl(dir_ / "splits/validation.k8.jsonl")) EXPECT_FALSE(train_ids.contains(r.at("id").get<std::string>()));
}

TEST_F(CliTest, IclAllStylesWithNoiselessOracle) {
  auto args = base("icl");
  args.insert(args.end(), {"--styles", "all", "--icl.dump_prompts=true"});
  const auto result = run(args);
  ASSERT_EQ(result.code, 0) << result.err;
  const auto rows = jsonl(dir_ / "reports/icl.comparison.jsonl");
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) EXPECT_EQ(row.at("f1").get<double>(), 1.0) << row.dump();
  EXPECT_TRUE(fs::exists(dir_ / "prompts/icl.instruct+schema.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "reports/icl.text.confusion.tsv"));
  EXPECT_EQ(slurp(dir_ / "prompts/icl.text.jsonl").find("oracle"), std::string::npos);

  const auto predictions = slurp(dir_ / "predictions/icl.text.jsonl");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(dir_ / "predictions/icl.text.jsonl"), predictions);
}

TEST_F(CliTest, IclScriptedMatchesHandScore) {
  // Five test instances per relation, ten relations; answer the first ten
  // correctly, the next ten with NA, then ten with garbage.
  const auto test = load_dataset(dir_ / "test.jsonl", DatasetFormat::jsonl_native);
  const auto schema = load_schema(dir_ / "schema.json");
  json script = json::array();
  std::vector<std::string> expected;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& gold = test.instances[i].relation;
    if (i < 10) {
      script.push_back(schema.verbalize(gold));
    } else if (i < 20) {
      script.push_back("no relation");
    } else {
      script.push_back("I am not sure.");
    }
  }
  std::ofstream(dir_ / "script.json") << script.dump();
  // correct = 10, predicted positive = 10 + 0 (unparseable -> NA), gold positive = 50.
  const double p = 1.0, r = 10.0 / 50.0;
  const double hand_f1 = 2 * p * r / (p + r);

  auto args = base("icl");
  args.insert(args.end(), {"--styles=text", "backend.kind=mock_scripted", "backend.scripted_file=" + path("script.json")});
  const auto result = run(args);
  ASSERT_EQ(result.code, 0) << result.err;
  const auto report = json::parse(slurp(dir_ / "reports/icl.text.json"));
  EXPECT_NEAR(report.at("micro_f1").get<double>(), hand_f1, 1e-12);
}

TEST_F(CliTest, MissingTestFileFailsBeforeAnyCall) {
  auto args = base("icl");
  args[5] = "test=" + path("nope.jsonl");
  const auto result = run(args);
  EXPECT_EQ(result.code, kExitConfig);
  EXPECT_NE(result.err.find("nope.jsonl"), std::string::npos) << result.err;
  EXPECT_FALSE(fs::exists(dir_ / "predictions"));
}

TEST_F(CliTest, ConfigAndDataErrorsMapToExitCodes) {
  EXPECT_EQ(run({"icl", "--no.such.key=1"}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({"sample", "-o", dir_.string(), "--shots.ks=[8,3]", "schema=" + path("schema.json"),
                 "source=" + path("source.jsonl")})
                .code,
            kExitConfig);
  std::ofstream(dir_ / "bad.jsonl") << R"({"id": "x", "tokens": ["a"], "head_start": 0, "head_end": 4})" << "\n";
  auto args = base("icl");
  args[5] = "test=" + path("bad.jsonl");
  EXPECT_EQ(run(args).code, kExitData);
}

TEST_F(CliTest, BackendFailureOnEveryRequestExitsThree) {
  auto args = base("icl");
  std::ofstream(dir_ / "empty.json") << "[]";
  args.insert(args.end(), {"backend.kind=mock_scripted", "backend.scripted_file=" + path("empty.json")});
  EXPECT_EQ(run(args).code, kExitBackend);
  EXPECT_TRUE(fs::exists(dir_ / "predictions/icl.text.jsonl"));
}

TEST_F(CliTest, GenerateAcceptsScriptedValidBlocks) {
  auto args = base("generate");
  args.insert(args.end(), {"backend.kind=mock_scripted", "backend.scripted_file=" + path("generation_script.json"),
                           "generation.n_target=6", "--generation.relations=[\"per:born_in\",\"org:led_by\"]"});
  const auto result = run(args);
  ASSERT_EQ(result.code, 0) << result.err;
  const auto reports = jsonl(dir_ / "generated/reports.jsonl");
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.at("accepted"), 6);
    EXPECT_EQ(r.at("raw_blocks"), 6);  // stops inside the second call
  }
  EXPECT_EQ(jsonl(dir_ / "generated/pool.jsonl").size(), 12u);
}

TEST_F(CliTest, GenerateWithZeroTargetIsEmpty) {
  auto args = base("generate");
  args.push_back("generation.n_target=0");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_TRUE(slurp(dir_ / "generated/pool.jsonl").empty());
  EXPECT_TRUE(slurp(dir_ / "generated/reports.jsonl").empty());
}

TEST_F(CliTest, ConstrainedAcceptsExactlyOneFewer) {
  const auto schema = load_schema(dir_ / "schema.json");
  const SyntheticCorpus corpus;
  std::string text;
  for (int i = 0; i < 3; ++i) {
    text += format_demonstration(corpus.make_instance(0, 500 + i, "x"), schema, true) + "\n\n";
  }
  text += "Context: Ada Moreau spent many years working with the team at Acme Corp.\n"
          "Head Type: PERSON. Head Entity: Ada Moreau.\nTail Type: CITY. Tail Entity: Acme Corp.\n"
          "Relation: per:employee of.";
  std::ofstream(dir_ / "one_bad.json") << json{{"per:employee_of", {text}}}.dump();

  std::size_t accepted[2];
  for (int constrained = 0; constrained < 2; ++constrained) {
    auto args = base("generate");
    args.insert(args.end(), {"backend.kind=mock_scripted", "backend.scripted_file=" + path("one_bad.json"),
                             "generation.n_target=4", "generation.attempt_cap_factor=1",
                             "--generation.relations=[\"per:employee_of\"]",
                             std::string("generation.constrained=") + (constrained ? "true" : "false")});
    ASSERT_EQ(run(args).code, 0);
    accepted[constrained] = jsonl(dir_ / "generated/reports.jsonl").at(0).at("accepted");
  }
  EXPECT_EQ(accepted[0], 4u);
  EXPECT_EQ(accepted[1], 3u);
}

TEST_F(CliTest, SweepRowsAndBaselineIdentity) {
  auto gen = base("generate");
  gen.insert(gen.end(), {"backend.kind=mock_scripted", "backend.scripted_file=" + path("generation_script.json"),
                         "generation.n_target=16"});
  ASSERT_EQ(run(gen).code, 0);

  auto args = base("sweep");
  args.insert(args.end(), {"validation=" + path("splits/validation.k8.jsonl"),
                           "generation.pool=" + path("generated/pool.jsonl"),
                           "augment.lexicon=" + (testing::data_dir() / "lexicon/demo_synonyms.tsv").string(),
                           "--mixing.ks=[8,16]"});
  const auto result = run(args);
  ASSERT_EQ(result.code, 0) << result.err;
  const auto rows = jsonl(dir_ / "reports/sweep.jsonl");
  ASSERT_EQ(rows.size(), 6u);  // (|ks| + 1) rows for each of two variants

  const auto schema = load_schema(dir_ / "schema.json");
  const auto train = load_dataset(dir_ / "splits/train.k8.jsonl", DatasetFormat::jsonl_native);
  const auto test = load_dataset(dir_ / "test.jsonl", DatasetFormat::jsonl_native);
  const auto model = train_probe(train);
  std::vector<std::string> gold, predicted;
  for (const auto& inst : test.instances) {
    gold.push_back(inst.relation);
    predicted.push_back(predict_probe(model, inst));
  }
  const double baseline = score_labels(gold, predicted, schema).micro_f1;
  std::size_t best = 0;
  for (const auto& row : rows) {
    if (row.at("k") == 0) {
      EXPECT_EQ(row.at("test_f1").get<double>(), baseline);
    }
    best += row.at("best").get<bool>();
  }
  EXPECT_EQ(best, 2u);
  EXPECT_TRUE(fs::exists(dir_ / "reports/sweep.txt"));
}

TEST_F(CliTest, ReportScoresPredictionsFile) {
  ASSERT_EQ(run(base("icl")).code, 0);
  const auto result = run({"report", "-o", dir_.string(), "schema=" + path("schema.json"),
                           "test=" + path("test.jsonl"), "report.predictions=" + path("predictions/icl.text.jsonl")});
  ASSERT_EQ(result.code, 0) << result.err;
  EXPECT_NE(result.out.find("100.0 / 100.0 / 100.0"), std::string::npos) << result.out;
}

TEST(CliConfig, ConfigFileAndOverrides) {
  const auto file = fs::temp_directory_path() / "fsre_cfg_test.json";
  std::ofstream(file) << R"({"seed": 5, "icl": {"styles": "text,instruct"}, "mixing": {"ks": [4, 8]}})";
  const auto cfg = load_config(file, {"seed=9", "backend.oracle_noise=0.25"});
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.styles.size(), 2u);
  EXPECT_EQ(cfg.mixing_ks, (std::vector<std::size_t>{4, 8}));
  EXPECT_DOUBLE_EQ(cfg.backend.oracle_noise, 0.25);
  EXPECT_EQ(cfg.snapshot.at("seed"), 9);
  fs::remove(file);
  EXPECT_THROW(load_config(std::nullopt, {"mixing.ks=[8,8]"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, {"seed=\"abc\""}), ConfigError);
}

}  // namespace
}  // namespace fsre::cli

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "fsre/corpus.hpp"
#include "fsre/error.hpp"

namespace fsre {
namespace {

using testing::make_instance;
using testing::toy_dataset;
using testing::toy_schema;

std::string tacred_record(const std::string& id, const std::string& relation, int subj_end = 0) {
  nlohmann::json r{{"id", id},           {"token", {"Alice", "works", "at", "Acme", "."}},
                   {"subj_start", 0},    {"subj_end", subj_end},
                   {"obj_start", 3},     {"obj_end", 3},
                   {"subj_type", "PERSON"}, {"obj_type", "ORGANIZATION"},
                   {"relation", relation}};
  return r.dump();
}

TEST(Corpus, TacredFileWith42LabelsHas42DistinctRelations) {
  const auto schema = testing::tacred_schema();
  ASSERT_EQ(schema.labels().size(), 42u);
  std::string doc = "[";
  for (std::size_t i = 0; i < schema.labels().size(); ++i) {
    if (i) doc += ",";
    doc += tacred_record("t" + std::to_string(i), schema.labels()[i]);
  }
  doc += "]";
  std::istringstream in(doc);
  const auto data = parse_dataset(in, DatasetFormat::tacred_json);
  EXPECT_EQ(data.size(), 42u);
  EXPECT_EQ(label_histogram(data).size(), 42u);
  EXPECT_NO_THROW(check_dataset(data, schema));
}

TEST(Corpus, TacredEndIndicesBecomeHalfOpen) {
  std::istringstream in("[" + tacred_record("a", "per:employee_of") + "]");
  const auto data = parse_dataset(in, DatasetFormat::tacred_json);
  EXPECT_EQ(data.instances[0].head, (Span{0, 1}));
  EXPECT_EQ(data.instances[0].tail, (Span{3, 4}));
  EXPECT_EQ(data.instances[0].tail_mention(), "Acme");
}

TEST(Corpus, EmptyArrayGivesEmptyDataset) {
  std::istringstream in("[]");
  EXPECT_TRUE(parse_dataset(in, DatasetFormat::tacred_json).empty());
  std::istringstream native("");
  EXPECT_TRUE(parse_dataset(native, DatasetFormat::jsonl_native).empty());
}

TEST(Corpus, SubjectSpanBeyondTokensNamesTheRecord) {
  std::istringstream in("[" + tacred_record("ok", "per:title") + "," + tacred_record("bad", "per:title", 9) + "]");
  try {
    parse_dataset(in, DatasetFormat::tacred_json);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
  }
}

TEST(Corpus, MissingFieldIsNamed) {
  std::istringstream in(R"({"id": "x", "tokens": ["a", "b"], "head_start": 0, "head_end": 1})");
  try {
    parse_dataset(in, DatasetFormat::jsonl_native);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tail_start"), std::string::npos) << e.what();
  }
}

TEST(Corpus, NativeRoundTrip) {
  const auto data = toy_dataset({2, 3});
  std::ostringstream out;
  write_native(out, data);
  std::istringstream in(out.str());
  auto back = parse_dataset(in, DatasetFormat::jsonl_native);
  EXPECT_EQ(back.instances, data.instances);
}

TEST(Corpus, DuplicateIdsRejected) {
  auto data = toy_dataset({2});
  data.instances[1].id = data.instances[0].id;
  EXPECT_THROW(check_unique_ids(data), DataError);
}

TEST(Schema, SciercHasSevenLabelsAndNoNa) {
  const auto schema = testing::scierc_schema();
  EXPECT_EQ(schema.labels().size(), 7u);
  EXPECT_FALSE(schema.na_label().has_value());
  EXPECT_EQ(schema.constraints_for("COMPARE"), nullptr);
}

TEST(Schema, NaLabelMustBeALabel) {
  EXPECT_THROW(parse_schema(R"({"labels": ["a", "b"], "na_label": "none"})"), DataError);
}

TEST(Schema, DefaultVerbalizationReplacesUnderscores) {
  const auto schema = parse_schema(R"({"labels": ["org:founded_by"]})");
  EXPECT_EQ(schema.verbalize("org:founded_by"), "org:founded by");
  EXPECT_EQ(default_verbalization("per:city_of_birth"), "per:city of birth");
}

TEST(Schema, RejectsDuplicatesAndUnknownReferences) {
  EXPECT_THROW(parse_schema(R"({"labels": ["a", "a"]})"), DataError);
  EXPECT_THROW(parse_schema(R"({"labels": ["a"], "type_constraints": {"b": [["X", "Y"]]}})"), DataError);
  EXPECT_THROW(parse_schema(R"({"labels": ["a", "b"], "verbalizations": {"a": "same", "b": "same"}})"), DataError);
  EXPECT_THROW(
      parse_schema(R"({"labels": ["a"], "entity_types": ["X"], "type_constraints": {"a": [["X", "Z"]]}})"),
      DataError);
}

TEST(Schema, TypeConstraintsAndResolve) {
  const auto schema = testing::tacred_schema();
  EXPECT_TRUE(schema.allows("per:title", "PERSON", "TITLE"));
  EXPECT_FALSE(schema.allows("per:title", "PERSON", "PERSON"));
  EXPECT_EQ(schema.resolve("  Org:Founded By "), std::optional<std::string>("org:founded_by"));
  EXPECT_EQ(schema.resolve("founded"), std::nullopt);
  EXPECT_TRUE(schema.is_na("no_relation"));
}

TEST(Schema, JsonRoundTrip) {
  const auto schema = testing::tacred_schema();
  EXPECT_EQ(parse_schema(schema_to_json(schema)), schema);
}

TEST(Sampler, CountsAreMinOfKAndAvailable) {
  const auto data = toy_dataset({20, 5});
  const auto sample = sample_k_shot(data, {8, 3});
  const auto hist = label_histogram(sample);
  EXPECT_EQ(hist.at("r0"), 8u);
  EXPECT_EQ(hist.at("r1"), 5u);
  EXPECT_EQ(sample.size(), 13u);
}

TEST(Sampler, ZeroShotIsEmpty) { EXPECT_TRUE(sample_k_shot(toy_dataset({4, 4}), {0, 1}).empty()); }

TEST(Sampler, SameSeedSameIds) {
  const auto data = toy_dataset({10, 10, 10});
  EXPECT_EQ(sample_k_shot(data, {4, 9}), sample_k_shot(data, {4, 9}));
  EXPECT_NE(sample_k_shot(data, {4, 9}), sample_k_shot(data, {4, 10}));
}

TEST(Sampler, ProjectionWithoutDuplicatesAndNestedInK) {
  const auto data = toy_dataset({12, 7, 3});
  std::set<std::string> source_ids;
  for (const auto& inst : data.instances) source_ids.insert(inst.id);
  const auto small = sample_k_shot(data, {2, 5});
  const auto large = sample_k_shot(data, {6, 5});
  std::set<std::string> large_ids;
  for (const auto& inst : large.instances) {
    EXPECT_TRUE(source_ids.contains(inst.id));
    EXPECT_TRUE(large_ids.insert(inst.id).second);
  }
  for (const auto& inst : small.instances) EXPECT_TRUE(large_ids.contains(inst.id));
}

TEST(Sampler, ExcludedIdsAreNeverDrawnAndShortfallWarns) {
  const auto data = toy_dataset({3, 10});
  std::vector<std::string> warnings;
  SampleOptions opts;
  opts.exclude_ids = {"x-1-0", "x-1-1"};
  opts.warnings = &warnings;
  const auto sample = sample_k_shot(data, {8, 1}, opts);
  for (const auto& inst : sample.instances) EXPECT_FALSE(opts.exclude_ids.contains(inst.id));
  EXPECT_EQ(label_histogram(sample).at("r1"), 8u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("r0"), std::string::npos);
}

TEST(Histogram, Basics) {
  EXPECT_TRUE(label_histogram(Dataset{}).empty());
  EXPECT_EQ(label_histogram(toy_dataset({3})), (std::map<std::string, std::size_t>{{"r0", 3}}));
  // Hand tally of a mixed 10-instance set: r0 x4, r1 x1, r2 x5.
  const auto mixed = toy_dataset({4, 1, 5});
  const auto hist = label_histogram(mixed);
  EXPECT_EQ(hist.at("r0"), 4u);
  EXPECT_EQ(hist.at("r1"), 1u);
  EXPECT_EQ(hist.at("r2"), 5u);
}

TEST(Spans, CheckSpansRejectsBadSpans) {
  EXPECT_NO_THROW(check_spans(make_instance("a", "x y z", {0, 1}, {2, 3}, "r")));
  EXPECT_THROW(check_spans(make_instance("a", "x y z", {0, 1}, {0, 1}, "r")), DataError);
  EXPECT_THROW(check_spans(make_instance("a", "x y z", {1, 1}, {2, 3}, "r")), DataError);
  EXPECT_THROW(check_spans(make_instance("a", "x y z", {0, 1}, {2, 4}, "r")), DataError);
}

}  // namespace
}  // namespace fsre

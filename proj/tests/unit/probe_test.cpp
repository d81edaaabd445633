#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "fsre/error.hpp"
#include "fsre/probe.hpp"
#include "fsre/synthetic.hpp"
#include "oracles.hpp"

namespace fsre {
namespace {

using testing::make_instance;

TEST(Features, AdjacentMentionsGiveDistanceZero) {
  const auto inst = make_instance("a", "Alice Acme works", {0, 1}, {1, 2}, "r", "PERSON", "ORGANIZATION");
  EXPECT_TRUE(extract_features(inst).contains("dist=0"));
  EXPECT_EQ(distance_bucket(2), "1-3");
  EXPECT_EQ(distance_bucket(7), "4-10");
  EXPECT_EQ(distance_bucket(11), ">10");
}

TEST(Features, TypePairFeature) {
  const auto inst = make_instance("a", "Mary Brown is CEO", {0, 2}, {3, 4}, "per:title", "PERSON", "TITLE");
  EXPECT_TRUE(extract_features(inst).contains("tpair=PERSON|TITLE"));
}

TEST(Features, FullMultisetForFiveTokens) {
  const auto inst = make_instance("a", "Ann met the Bob .", {0, 1}, {3, 4}, "r", "P", "Q");
  const std::map<std::string, std::size_t> expected{
      {"w=ann", 1}, {"w=met", 1},       {"w=the", 1},   {"w=bob", 1}, {"w=.", 1},
      {"ht=P", 1},  {"tt=Q", 1},        {"tpair=P|Q", 1}, {"hm=ann", 1}, {"tm=bob", 1},
      {"btw=met", 1}, {"btw=the", 1}, {"dist=1-3", 1}};
  EXPECT_EQ(extract_features(inst).counts, expected);
}

TEST(Train, EqualCountsGiveEqualPriors) {
  const auto model = train_probe(testing::toy_dataset({3, 3}));
  EXPECT_DOUBLE_EQ(model.label_log_priors.at("r0"), model.label_log_priors.at("r1"));
  EXPECT_DOUBLE_EQ(model.label_log_priors.at("r0"), std::log(0.5));
}

TEST(Train, SingleLabelAlwaysPredicted) {
  const auto model = train_probe(testing::toy_dataset({4}));
  EXPECT_EQ(predict_probe(model, make_instance("q", "zz yy xx", {0, 1}, {2, 3}, "?", "A", "B")), "r0");
}

TEST(Train, RejectsEmptyDataAndBadAlpha) {
  EXPECT_THROW(train_probe(Dataset{}), DataError);
  EXPECT_THROW(train_probe(testing::toy_dataset({1}), 0.0), DataError);
}

TEST(Posterior, MatchesHandComputation) {
  Dataset train;
  train.instances = {
      make_instance("1", "Ann joined Acme", {0, 1}, {2, 3}, "emp", "P", "O"),
      make_instance("2", "Bob joined Initech", {0, 1}, {2, 3}, "emp", "P", "O"),
      make_instance("3", "Cy joined Acme", {0, 1}, {2, 3}, "emp", "P", "O"),
      make_instance("4", "Dee founded Acme", {0, 1}, {2, 3}, "fnd", "P", "O"),
      make_instance("5", "Eve founded Globex", {0, 1}, {2, 3}, "fnd", "P", "O"),
      make_instance("6", "Ann lives Paris", {0, 1}, {2, 3}, "res", "P", "C"),
  };
  const auto query = make_instance("q", "Ann founded Initech today", {0, 1}, {2, 3}, "?", "P", "O");

  // The hand oracle sees the same feature lists, spelled out explicitly.
  auto features_of = [](const RelationInstance& inst) {
    std::vector<std::string> out;
    for (const auto& [key, count] : extract_features(inst).counts) {
      for (std::size_t i = 0; i < count; ++i) out.push_back(key);
    }
    return out;
  };
  std::vector<testing::HandExample> hand;
  for (const auto& inst : train.instances) hand.push_back({inst.relation, features_of(inst)});

  const auto expected = testing::hand_nb_posterior(hand, features_of(query), 1.0);
  const auto got = posterior(train_probe(train, 1.0), query);
  ASSERT_EQ(got.size(), expected.size());
  for (const auto& [label, p] : expected) EXPECT_NEAR(got.at(label), p, 1e-9) << label;
  const auto best = std::max_element(expected.begin(), expected.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  EXPECT_EQ(predict_probe(train_probe(train), query), best->first);
}

TEST(Predict, TrainingCopyOnSeparableData) {
  const SyntheticCorpus corpus;
  const auto train = corpus.generate(10, 3, "t");
  const auto model = train_probe(train);
  for (const auto& inst : train.instances) EXPECT_EQ(predict_probe(model, inst), inst.relation) << inst.id;
}

TEST(Predict, UnseenFeaturesFallBackToPrior) {
  Dataset train = testing::toy_dataset({3, 1});
  const auto model = train_probe(train);
  RelationInstance unseen;
  unseen.tokens = {"qq", "rr"};
  unseen.head = {0, 1};
  unseen.tail = {1, 2};
  unseen.head_type = "Z1";
  unseen.tail_type = "Z2";
  // dist=0 is seen by neither label, so only the prior decides.
  EXPECT_EQ(predict_probe(model, unseen), "r0");
}

TEST(Predict, TiesGoToSmallerLabel) {
  Dataset train;
  train.instances = {make_instance("1", "a b c", {0, 1}, {2, 3}, "beta", "T", "T"),
                     make_instance("2", "a b c", {0, 1}, {2, 3}, "alpha", "T", "T")};
  EXPECT_EQ(predict_probe(train_probe(train), train.instances[0]), "alpha");
}

TEST(Model, DeterministicAndSerializable) {
  const SyntheticCorpus corpus;
  const auto train = corpus.generate(5, 9, "t");
  const auto a = train_probe(train, 0.5);
  EXPECT_EQ(a, train_probe(train, 0.5));
  const auto back = probe_from_json(probe_to_json(a));
  EXPECT_EQ(back.vocabulary, a.vocabulary);
  for (const auto& inst : corpus.generate(3, 10, "q").instances) {
    EXPECT_EQ(predict_probe(back, inst), predict_probe(a, inst));
  }
}

TEST(Model, DoublingDataAndAlphaKeepsPredictions) {
  const SyntheticCorpus corpus;
  const auto train = corpus.generate(6, 4, "t");
  auto doubled = train;
  doubled.instances.insert(doubled.instances.end(), train.instances.begin(), train.instances.end());
  const auto base = train_probe(train, 1.0);
  const auto twice = train_probe(doubled, 2.0);
  for (const auto& inst : corpus.generate(5, 8, "q").instances) {
    EXPECT_EQ(predict_probe(base, inst), predict_probe(twice, inst));
  }
}

}  // namespace
}  // namespace fsre

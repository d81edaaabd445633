#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "fsre/corpus.hpp"

namespace fsre {

// Feature key -> multiplicity.
struct FeatureVector {
  std::map<std::string, std::size_t> counts;

  std::size_t total() const;
  bool contains(const std::string& key) const { return counts.contains(key); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Sparse features for the naive Bayes probe:
///   w=<token>        lowercased context unigrams
///   ht=, tt=         head and tail types
///   tpair=<H>|<T>    ordered type pair
///   hm=, tm=         lowercased mention tokens
///   btw=<token>      lowercased tokens strictly between the spans
///   dist=<bucket>    gap between spans: 0, 1-3, 4-10, >10
FeatureVector extract_features(const RelationInstance& instance);

std::string distance_bucket(std::size_t gap);

/// Multinomial naive Bayes with additive smoothing.
///
/// log P(f | c) = log((count(f, c) + alpha) / (total(c) + alpha * |V|)).
/// Features outside the vocabulary are ignored at prediction time.
struct ProbeModel {
  std::map<std::string, double> label_log_priors;
  std::map<std::string, std::map<std::string, double>> feature_log_likelihoods;
  std::set<std::string> vocabulary;
  double smoothing_alpha = 1.0;

  friend bool operator==(const ProbeModel&, const ProbeModel&) = default;
};

// Throws DataError on an empty dataset or non-positive alpha.
ProbeModel train_probe(const Dataset& data, double alpha = 1.0);

// Unnormalized log joint per label.
std::map<std::string, double> log_joint(const ProbeModel& model,
                                        const RelationInstance& instance);
// Normalized posterior per label.
std::map<std::string, double> posterior(const ProbeModel& model,
                                        const RelationInstance& instance);

// Argmax of the posterior; ties go to the lexicographically smallest label.
std::string predict_probe(const ProbeModel& model, const RelationInstance& instance);

std::string probe_to_json(const ProbeModel& model);
ProbeModel probe_from_json(std::string_view json_text);

}  // namespace fsre

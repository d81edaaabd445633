#include "fsre/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "fsre/error.hpp"
#include "fsre/text.hpp"

namespace fsre {

using nlohmann::json;

std::size_t FeatureVector::total() const {
  std::size_t n = 0;
  for (const auto& [key, count] : counts) n += count;
  return n;
}

std::string distance_bucket(std::size_t gap) {
  if (gap == 0) return "0";
  if (gap <= 3) return "1-3";
  if (gap <= 10) return "4-10";
  return ">10";
}

FeatureVector extract_features(const RelationInstance& inst) {
  FeatureVector fv;
  auto add = [&](std::string key) { ++fv.counts[std::move(key)]; };

  for (const auto& token : inst.tokens) add("w=" + to_lower(token));
  add("ht=" + inst.head_type);
  add("tt=" + inst.tail_type);
  add("tpair=" + inst.head_type + "|" + inst.tail_type);
  for (std::size_t i = inst.head.start; i < inst.head.end && i < inst.tokens.size(); ++i) {
    add("hm=" + to_lower(inst.tokens[i]));
  }
  for (std::size_t i = inst.tail.start; i < inst.tail.end && i < inst.tokens.size(); ++i) {
    add("tm=" + to_lower(inst.tokens[i]));
  }

  const Span& first = inst.head.start <= inst.tail.start ? inst.head : inst.tail;
  const Span& second = inst.head.start <= inst.tail.start ? inst.tail : inst.head;
  std::size_t gap = 0;
  if (first.end <= second.start) {
    gap = second.start - first.end;
    for (std::size_t i = first.end; i < second.start; ++i) add("btw=" + to_lower(inst.tokens[i]));
  }
  add("dist=" + distance_bucket(gap));
  return fv;
}

ProbeModel train_probe(const Dataset& data, double alpha) {
  if (data.empty()) throw DataError("cannot train the probe on an empty dataset");
  if (!(alpha > 0.0)) throw DataError("smoothing alpha must be positive");

  std::map<std::string, std::size_t> label_counts;
  std::map<std::string, std::map<std::string, double>> feature_counts;
  std::map<std::string, double> totals;
  ProbeModel model;
  model.smoothing_alpha = alpha;

  for (const auto& inst : data.instances) {
    ++label_counts[inst.relation];
    auto& per_label = feature_counts[inst.relation];
    for (const auto& [key, count] : extract_features(inst).counts) {
      per_label[key] += static_cast<double>(count);
      totals[inst.relation] += static_cast<double>(count);
      model.vocabulary.insert(key);
    }
  }

  const auto n = static_cast<double>(data.size());
  const auto vocab = static_cast<double>(model.vocabulary.size());
  for (const auto& [label, count] : label_counts) {
    model.label_log_priors[label] = std::log(static_cast<double>(count) / n);
    const auto& counts = feature_counts[label];
    const double denominator = totals[label] + alpha * vocab;
    auto& table = model.feature_log_likelihoods[label];
    for (const auto& feature : model.vocabulary) {
      const auto it = counts.find(feature);
      const double c = it == counts.end() ? 0.0 : it->second;
      table.emplace_hint(table.end(), feature, std::log((c + alpha) / denominator));
    }
  }
  return model;
}

std::map<std::string, double> log_joint(const ProbeModel& model, const RelationInstance& instance) {
  const auto features = extract_features(instance);
  std::map<std::string, double> scores;
  for (const auto& [label, prior] : model.label_log_priors) {
    const auto& table = model.feature_log_likelihoods.at(label);
    double score = prior;
    for (const auto& [key, count] : features.counts) {
      const auto it = table.find(key);
      if (it != table.end()) score += static_cast<double>(count) * it->second;
    }
    scores.emplace(label, score);
  }
  return scores;
}

std::map<std::string, double> posterior(const ProbeModel& model, const RelationInstance& instance) {
  auto scores = log_joint(model, instance);
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& [label, s] : scores) peak = std::max(peak, s);
  double sum = 0.0;
  for (auto& [label, s] : scores) {
    s = std::exp(s - peak);
    sum += s;
  }
  for (auto& [label, s] : scores) s /= sum;
  return scores;
}

std::string predict_probe(const ProbeModel& model, const RelationInstance& instance) {
  const auto scores = log_joint(model, instance);
  std::string best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [label, s] : scores) {
    if (best.empty() || s > best_score) {
      best = label;
      best_score = s;
    }
  }
  return best;
}

std::string probe_to_json(const ProbeModel& model) {
  json doc{{"smoothing_alpha", model.smoothing_alpha},
           {"label_log_priors", model.label_log_priors},
           {"feature_log_likelihoods", model.feature_log_likelihoods},
           {"vocabulary", model.vocabulary}};
  return doc.dump();
}

ProbeModel probe_from_json(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    ProbeModel model;
    model.smoothing_alpha = doc.at("smoothing_alpha").get<double>();
    model.label_log_priors = doc.at("label_log_priors").get<std::map<std::string, double>>();
    model.feature_log_likelihoods =
        doc.at("feature_log_likelihoods").get<std::map<std::string, std::map<std::string, double>>>();
    model.vocabulary = doc.at("vocabulary").get<std::set<std::string>>();
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("probe model JSON: ") + e.what());
  }
}

}  // namespace fsre

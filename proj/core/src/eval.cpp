#include "fsre/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "fsre/error.hpp"

namespace fsre {

using nlohmann::json;

UnparseablePolicy parse_unparseable_policy(std::string_view name) {
  if (name == "auto" || name == "automatic") return UnparseablePolicy::automatic;
  if (name == "as_na" || name == "na") return UnparseablePolicy::as_na;
  if (name == "as_wrong" || name == "wrong") return UnparseablePolicy::as_wrong;
  throw ConfigError("unknown unparseable policy '" + std::string(name) + "'");
}

double f1_from(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport score_labels(std::span<const std::string> gold, std::span<const std::string> predicted,
                        const RelationSchema& schema, UnparseablePolicy policy) {
  if (gold.size() != predicted.size()) {
    throw DataError("score: " + std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(predicted.size()) + " predictions");
  }
  const auto& na = schema.na_label();
  const bool unparseable_as_na =
      na && (policy == UnparseablePolicy::as_na || policy == UnparseablePolicy::automatic);

  EvalReport report;
  report.n_instances = gold.size();
  report.na_label_used = na;

  std::map<std::string, std::size_t> correct_by, predicted_by, gold_by;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    std::string p = predicted[i];
    if (p == kUnparseable && unparseable_as_na) p = *na;
    ++report.confusion[{g, p}];

    const bool gold_pos = !(na && g == *na);
    const bool pred_pos = !(na && p == *na);
    if (gold_pos) {
      ++report.gold_positive;
      ++gold_by[g];
    }
    if (pred_pos) {
      ++report.predicted_positive;
      ++predicted_by[p];
    }
    if (gold_pos && p == g) {
      ++report.correct;
      ++correct_by[g];
    }
  }

  report.micro_precision = ratio(report.correct, report.predicted_positive);
  report.micro_recall = ratio(report.correct, report.gold_positive);
  report.micro_f1 = f1_from(report.micro_precision, report.micro_recall);

  std::set<std::string> labels;
  for (const auto& [label, n] : gold_by) labels.insert(label);
  for (const auto& [label, n] : predicted_by) {
    if (label != kUnparseable) labels.insert(label);
  }
  for (const auto& label : labels) {
    RelationScore s;
    s.precision = ratio(correct_by[label], predicted_by[label]);
    s.recall = ratio(correct_by[label], gold_by[label]);
    s.f1 = f1_from(s.precision, s.recall);
    s.support = gold_by[label];
    report.per_relation.emplace(label, s);
  }
  return report;
}

EvalReport score(std::span<const Prediction> predictions, const Dataset& gold,
                 const RelationSchema& schema, UnparseablePolicy policy) {
  std::unordered_map<std::string, const Prediction*> by_id;
  std::vector<std::string> duplicates;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.instance_id, &p).second) duplicates.push_back(p.instance_id);
  }
  std::vector<std::string> missing;
  std::set<std::string> gold_ids;
  std::vector<std::string> gold_labels, predicted_labels;
  gold_labels.reserve(gold.size());
  predicted_labels.reserve(gold.size());
  for (const auto& inst : gold.instances) {
    gold_ids.insert(inst.id);
    const auto it = by_id.find(inst.id);
    if (it == by_id.end()) {
      missing.push_back(inst.id);
      continue;
    }
    gold_labels.push_back(inst.relation);
    predicted_labels.push_back(it->second->predicted);
  }
  std::vector<std::string> extra;
  for (const auto& p : predictions) {
    if (!gold_ids.contains(p.instance_id)) extra.push_back(p.instance_id);
  }
  if (!missing.empty() || !extra.empty() || !duplicates.empty()) {
    auto list = [](const std::vector<std::string>& ids) {
      std::string out;
      for (std::size_t i = 0; i < ids.size() && i < 10; ++i) out += (i ? ", " : "") + ids[i];
      if (ids.size() > 10) out += ", ... (" + std::to_string(ids.size()) + " total)";
      return out;
    };
    std::string message = "prediction ids do not match gold ids;";
    if (!missing.empty()) message += " missing: " + list(missing) + ";";
    if (!extra.empty()) message += " extra: " + list(extra) + ";";
    if (!duplicates.empty()) message += " duplicated: " + list(duplicates) + ";";
    throw DataError(message);
  }
  return score_labels(gold_labels, predicted_labels, schema, policy);
}

std::string percent1(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", value * 100.0);
  return buffer;
}

ComparisonTable compare_runs(const std::vector<std::pair<std::string, EvalReport>>& reports) {
  if (reports.empty()) throw ConfigError("compare_runs needs at least one report");
  ComparisonTable table;
  std::size_t best = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& [name, report] = reports[i];
    table.rows.push_back({name, report.micro_precision, report.micro_recall, report.micro_f1, false});
    if (report.micro_f1 > reports[best].second.micro_f1) best = i;
  }
  table.rows[best].is_max = true;
  return table;
}

std::string ComparisonTable::to_text() const {
  std::size_t width = 3;
  for (const auto& row : rows) width = std::max(width, row.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %7s %7s %7s\n", static_cast<int>(width), "run", "P", "R", "F1");
  out << line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%-*s %7s %7s %7s%s\n", static_cast<int>(width),
                  row.name.c_str(), percent1(row.precision).c_str(), percent1(row.recall).c_str(),
                  percent1(row.f1).c_str(), row.is_max ? " *" : "");
    out << line;
  }
  return out.str();
}

std::string ComparisonTable::to_jsonl() const {
  std::string out;
  for (const auto& row : rows) {
    out += json{{"run", row.name},
                {"precision", row.precision},
                {"recall", row.recall},
                {"f1", row.f1},
                {"is_max", row.is_max}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  json per = json::object();
  for (const auto& [label, s] : report.per_relation) {
    per[label] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  json confusion = json::array();
  for (const auto& [key, count] : report.confusion) {
    confusion.push_back({{"gold", key.first}, {"predicted", key.second}, {"count", count}});
  }
  json doc{{"micro_precision", report.micro_precision},
           {"micro_recall", report.micro_recall},
           {"micro_f1", report.micro_f1},
           {"correct", report.correct},
           {"predicted_positive", report.predicted_positive},
           {"gold_positive", report.gold_positive},
           {"n_instances", report.n_instances},
           {"na_label", report.na_label_used ? json(*report.na_label_used) : json(nullptr)},
           {"per_relation", std::move(per)},
           {"confusion", std::move(confusion)}};
  return doc.dump(2);
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "instances: " << report.n_instances << "\n";
  out << "NA label: " << report.na_label_used.value_or("(none)") << "\n";
  out << "micro P/R/F1: " << percent1(report.micro_precision) << " / "
      << percent1(report.micro_recall) << " / " << percent1(report.micro_f1) << "\n\n";
  std::size_t width = 8;
  for (const auto& [label, s] : report.per_relation) width = std::max(width, label.size());
  char line[512];
  std::snprintf(line, sizeof line, "%-*s %7s %7s %7s %8s\n", static_cast<int>(width), "relation",
                "P", "R", "F1", "support");
  out << line;
  for (const auto& [label, s] : report.per_relation) {
    std::snprintf(line, sizeof line, "%-*s %7s %7s %7s %8zu\n", static_cast<int>(width),
                  label.c_str(), percent1(s.precision).c_str(), percent1(s.recall).c_str(),
                  percent1(s.f1).c_str(), s.support);
    out << line;
  }
  return out.str();
}

std::string confusion_to_tsv(const EvalReport& report) {
  std::string out = "gold\tpredicted\tcount\n";
  for (const auto& [key, count] : report.confusion) {
    out += key.first + "\t" + key.second + "\t" + std::to_string(count) + "\n";
  }
  return out;
}

}  // namespace fsre

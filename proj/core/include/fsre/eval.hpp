#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsre/corpus.hpp"
#include "fsre/icl.hpp"

namespace fsre {

/// How kUnparseable predictions are scored. `automatic` means as_na when the
/// schema has an NA label and as_wrong otherwise.
enum class UnparseablePolicy { automatic, as_na, as_wrong };

UnparseablePolicy parse_unparseable_policy(std::string_view name);

struct RelationScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  std::size_t correct = 0;
  std::size_t predicted_positive = 0;
  std::size_t gold_positive = 0;
  std::map<std::string, RelationScore> per_relation;
  // (gold, scored prediction) -> count
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
  std::size_t n_instances = 0;
  std::optional<std::string> na_label_used;
};

double f1_from(double precision, double recall);

/// Micro P/R/F1. With an NA label n: correct = #(pred == gold != n),
/// predicted_positive = #(pred != n), gold_positive = #(gold != n). Without
/// one, every instance counts in both denominators. Throws DataError when the
/// prediction ids do not cover the gold ids exactly.
EvalReport score(std::span<const Prediction> predictions, const Dataset& gold,
                 const RelationSchema& schema,
                 UnparseablePolicy policy = UnparseablePolicy::automatic);

// Label-only form used by the probe and the sweep.
EvalReport score_labels(std::span<const std::string> gold, std::span<const std::string> predicted,
                        const RelationSchema& schema,
                        UnparseablePolicy policy = UnparseablePolicy::automatic);

struct ComparisonRow {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool is_max = false;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  // Fixed-width text, percentages with one decimal, max row starred.
  std::string to_text() const;
  // One JSON object per row.
  std::string to_jsonl() const;
};

// Throws ConfigError on an empty list. The first row with the highest F1 is flagged.
ComparisonTable compare_runs(const std::vector<std::pair<std::string, EvalReport>>& reports);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
// gold \t predicted \t count
std::string confusion_to_tsv(const EvalReport& report);

// "82.4"
std::string percent1(double value);

}  // namespace fsre

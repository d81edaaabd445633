#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fsre {

// Half-open token interval [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct RelationInstance {
  std::string id;
  std::vector<std::string> tokens;
  Span head;
  Span tail;
  std::string head_type;
  std::string tail_type;
  std::string relation;

  std::string head_mention() const;
  std::string tail_mention() const;

  friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

// Throws DataError unless both spans lie in range, are non-empty and differ.
void check_spans(const RelationInstance& instance);

using TypePair = std::pair<std::string, std::string>;

/// The label space plus its structural priors.
///
/// Built only through `RelationSchema::create` (or the loaders), which
/// enforces: unique labels, na_label in labels, constraints keyed by known
/// labels, unique verbalizations. Missing verbalizations default to the label
/// with underscores replaced by spaces.
class RelationSchema {
 public:
  struct Spec {
    std::vector<std::string> labels;
    std::optional<std::string> na_label;
    std::map<std::string, std::string> verbalizations;
    std::map<std::string, std::set<TypePair>> type_constraints;
    std::set<std::string> entity_types;
  };

  static RelationSchema create(Spec spec);

  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<std::string>& na_label() const { return na_label_; }
  const std::set<std::string>& entity_types() const { return entity_types_; }
  const std::map<std::string, std::set<TypePair>>& type_constraints() const {
    return type_constraints_;
  }
  const std::map<std::string, std::string>& verbalizations() const {
    return verbalizations_;
  }

  bool contains(std::string_view label) const;
  bool is_na(std::string_view label) const;
  // Position in `labels()`; throws DataError for unknown labels.
  std::size_t index_of(std::string_view label) const;
  const std::string& verbalize(std::string_view label) const;

  // Constraint set for `relation`, or nullptr when the relation is unconstrained.
  const std::set<TypePair>* constraints_for(std::string_view relation) const;
  bool allows(std::string_view relation, std::string_view head_type,
              std::string_view tail_type) const;

  // Label whose raw name or verbalization equals `text` after lowercasing and
  // trimming; nullopt otherwise.
  std::optional<std::string> resolve(std::string_view text) const;

  friend bool operator==(const RelationSchema&, const RelationSchema&) = default;

 private:
  RelationSchema() = default;

  std::vector<std::string> labels_;
  std::optional<std::string> na_label_;
  std::map<std::string, std::string> verbalizations_;
  std::map<std::string, std::set<TypePair>> type_constraints_;
  std::set<std::string> entity_types_;
};

// "org:founded_by" -> "org:founded by".
std::string default_verbalization(std::string_view label);

struct Dataset {
  std::vector<RelationInstance> instances;
  std::string schema_ref;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ShotConfig {
  std::size_t k_per_relation = 8;
  std::uint64_t seed = 0;
};

enum class DatasetFormat { tacred_json, jsonl_native };

DatasetFormat parse_dataset_format(std::string_view name);

// Record order is preserved. TACRED inclusive end indices become half-open.
// Errors name the record index and the offending field.
Dataset parse_dataset(std::istream& in, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Same as above, then rejects any relation that is not a schema label.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const RelationSchema& schema);

// Throws DataError on duplicate ids, bad spans, or labels outside the schema.
void check_dataset(const Dataset& dataset, const RelationSchema& schema);
void check_unique_ids(const Dataset& dataset);

// Native JSONL: one flat object per line.
void write_native(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

RelationSchema parse_schema(std::string_view json_text);
RelationSchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const RelationSchema& schema);

struct SampleOptions {
  // Fixes the relation order of the output; sorted label order otherwise.
  const RelationSchema* schema = nullptr;
  // Instances whose id is listed here are never drawn.
  std::set<std::string> exclude_ids;
  // Receives one message per relation with fewer than K candidates.
  std::vector<std::string>* warnings = nullptr;
};

/// Draws min(K, count(r)) instances per relation without replacement.
///
/// Candidates of each relation are ordered by id before drawing, and every
/// relation has its own derived stream, so the result depends only on the set
/// of instances and the seed, never on file order. The draw for K is a prefix
/// of the draw for any larger K.
Dataset sample_k_shot(const Dataset& dataset, const ShotConfig& cfg,
                      const SampleOptions& options = {});

std::map<std::string, std::size_t> label_histogram(const Dataset& dataset);

// Instances of `relation`, in dataset order.
std::vector<const RelationInstance*> instances_of(const Dataset& dataset,
                                                  std::string_view relation);

}  // namespace fsre

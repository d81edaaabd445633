#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fsre/corpus.hpp"

namespace fsre {

/// Separable toy corpus: the relation is a function of the entity type pair
/// and one trigger token placed between the mentions. Relations come in
/// pairs sharing a type pair, so types alone never decide the label.
struct SyntheticCorpusConfig {
  std::size_t n_relations = 10;
  std::size_t triggers_per_relation = 6;
  std::size_t filler_tokens = 6;
  bool with_na = false;
};

class SyntheticCorpus {
 public:
  explicit SyntheticCorpus(SyntheticCorpusConfig cfg = {});

  const RelationSchema& schema() const { return schema_; }
  const SyntheticCorpusConfig& config() const { return cfg_; }

  // `per_relation` instances of every relation; ids "<prefix>-<n>".
  Dataset generate(std::size_t per_relation, std::uint64_t seed,
                   const std::string& id_prefix) const;

  RelationInstance make_instance(std::size_t relation_index, std::uint64_t seed,
                                 std::string id) const;

  const std::vector<std::string>& triggers(std::size_t relation_index) const {
    return triggers_[relation_index];
  }

 private:
  SyntheticCorpusConfig cfg_;
  std::vector<std::string> relation_names_;
  std::vector<TypePair> type_pairs_;
  RelationSchema schema_;  // filled after the two vectors above
  std::vector<std::vector<std::string>> triggers_;
};

}  // namespace fsre

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fsre/corpus.hpp"
#include "fsre/llm_client.hpp"
#include "fsre/prompting.hpp"

namespace fsre {

enum class Verdict { pending, accepted, rejected };

enum class RejectReason {
  parse_failure,
  entity_not_in_context,
  unknown_entity_type,
  type_pair_violates_schema,
  relation_mismatch,
  duplicate,
  context_too_short,
};

std::string_view to_string(Verdict verdict);
std::string_view to_string(RejectReason reason);

// The six labeled values as they appeared in a block, trailing period removed.
struct GeneratedFields {
  std::string context;
  std::string head_type;
  std::string head_entity;
  std::string tail_type;
  std::string tail_entity;
  std::string relation;
};

struct GenerationCandidate {
  std::string raw_block;
  std::optional<GeneratedFields> fields;
  // Present once both mentions were located in the context. `relation` holds
  // the raw field text until validation resolves it against the schema.
  std::optional<RelationInstance> parsed;
  Verdict verdict = Verdict::pending;
  std::optional<RejectReason> reject_reason;
};

struct GenerationReport {
  std::string relation;
  std::size_t requested = 0;
  std::size_t raw_blocks = 0;
  std::size_t accepted = 0;
  std::map<RejectReason, std::size_t> rejections_by_reason;

  std::size_t rejected() const;
};

// Normalized contexts already accepted for one relation.
class DedupIndex {
 public:
  bool contains(std::string_view context) const;
  void insert(std::string_view context);
  std::size_t size() const { return seen_.size(); }

 private:
  std::unordered_set<std::string> seen_;
};

/// Splits a completion into blank-line separated blocks and reads the six
/// fields from each (field names are case-insensitive, any order). Context,
/// both entities and the relation are required; the two type fields may be
/// absent, which unconstrained prompts ask for.
///
/// Mentions are located as the first exact token subsequence of the context.
/// The context is whitespace-tokenized; if a mention is missing there, the
/// punctuation-split tokenization is tried instead. A mention that occurs in
/// the text only inside a larger token is a parse_failure; a mention absent
/// from the text leaves `parsed` empty for validation to reject.
std::vector<GenerationCandidate> parse_generated(std::string_view completion);

struct ValidationOptions {
  std::size_t min_context_tokens = 6;
  // Unconstrained generation skips the type-pair check and tolerates blocks
  // without type fields.
  bool enforce_type_constraints = true;
};

/// Runs the checks in order, first failure wins: mentions located, entity
/// types known, type pair allowed for `requested_relation`, relation field
/// equals `requested_relation`, context not a duplicate, context long enough.
/// On success the candidate is accepted and its context added to `seen`.
GenerationCandidate validate_candidate(GenerationCandidate candidate,
                                       const RelationSchema& schema,
                                       std::string_view requested_relation,
                                       DedupIndex& seen,
                                       const ValidationOptions& options = {});

struct GenerationConfig {
  std::size_t n_target = 16;
  bool constrained = true;
  std::uint64_t seed = 0;
  // The loop stops after attempt_cap_factor * n_target raw blocks.
  std::size_t attempt_cap_factor = 5;
  // Examples requested per completion call.
  std::size_t blocks_per_call = 4;
  double temperature = 1.0;
  int max_completion_tokens = 512;
  ValidationOptions validation;
  BudgetConfig budget;
  PromptTemplates templates = PromptTemplates::defaults();
};

struct GenerationResult {
  std::vector<RelationInstance> accepted;
  GenerationReport report;
  std::vector<GenerationCandidate> rejected;
};

/// Prompts for `relation` with three seeded demonstrations per call until
/// n_target candidates are accepted or the raw-block cap is reached. Accepted
/// instances get ids "gen:<relation>:<n>". Throws DataError when the training
/// set has fewer than three instances of the relation; backend errors
/// propagate.
GenerationResult generate_relation_data(std::string_view relation, const Dataset& train,
                                        const RelationSchema& schema,
                                        const GenerationConfig& cfg, Backend& backend);

/// Appends min(k, available_r) pool instances per relation to `original`.
/// Each relation's pool is shuffled once per seed and cut to a prefix, so the
/// additions for k1 <= k2 are nested.
Dataset mix_generated(const Dataset& original, const Dataset& generated_pool, std::size_t k,
                      std::uint64_t seed);

std::string report_to_json(const GenerationReport& report);
std::string candidate_to_json(const GenerationCandidate& candidate);

}  // namespace fsre

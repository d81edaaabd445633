#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsre/corpus.hpp"

namespace fsre {

enum class PromptKind { text, instruct };

struct PromptStyle {
  PromptKind kind = PromptKind::text;
  bool with_schema = false;

  // "text", "text+schema", "instruct", "instruct+schema".
  std::string name() const;
  static PromptStyle parse(std::string_view name);
  static std::vector<PromptStyle> all();

  friend bool operator==(const PromptStyle&, const PromptStyle&) = default;
};

struct BudgetConfig {
  std::size_t max_request_tokens = 4097;
  std::size_t completion_reserve = 64;

  // Tokens a prompt may use. Throws ConfigError when reserve >= max.
  std::size_t prompt_limit() const;
};

struct RenderedPrompt {
  std::string text;
  std::size_t estimated_tokens = 0;
  PromptStyle style;
  std::vector<std::string> demo_ids;
  std::optional<std::string> query_id;
};

/// Instruction wording for the INSTRUCT header and the generation prompt.
///
/// `generation_instruction` accepts the placeholders {relation}, {n} and
/// {fields}. Override files are plain text with `[instruction]` and
/// `[generation_instruction]` section markers; a section left out keeps its
/// default.
struct PromptTemplates {
  std::string instruction;
  std::string generation_instruction;

  static PromptTemplates defaults();
  static PromptTemplates parse(std::string_view text);
  static PromptTemplates load(const std::filesystem::path& path);
};

// max(whitespace word count, ceil(chars / 4)).
std::size_t estimate_tokens(std::string_view text);

/// One labeled example:
///
///   Context: <tokens joined by spaces>
///   Head Type: <t_h>. Head Entity: <h>.
///   Tail Type: <t_t>. Tail Entity: <t>.
///   Relation: <verbalized label>.
///
/// The two "Type" clauses are left out when `with_schema` is false.
std::string format_demonstration(const RelationInstance& instance,
                                 const RelationSchema& schema, bool with_schema);

// Same block with an empty "Relation:" slot for the model to fill.
std::string format_query(const RelationInstance& instance, bool with_schema);

// Up to `per_relation` instances per relation, drawn without replacement and
// then shuffled as one list.
std::vector<RelationInstance> select_demonstrations(const Dataset& train,
                                                    std::size_t per_relation,
                                                    std::uint64_t seed);

/// [instruction header] + candidate list + demonstrations + query.
///
/// Demonstrations are dropped from the back until the prompt fits
/// `budget.prompt_limit()`. Throws DataError("query exceeds budget") when the
/// prompt does not fit even with no demonstrations.
RenderedPrompt build_icl_prompt(const PromptStyle& style, const RelationSchema& schema,
                                std::span<const RelationInstance> demos,
                                const RelationInstance& query,
                                const BudgetConfig& budget = {},
                                const PromptTemplates& templates = PromptTemplates::defaults());

// Instruction + exactly three demonstrations of `relation`, plus the allowed
// type pairs when `constrained`. Throws DataError on a wrong demo count or a
// demo carrying another relation.
RenderedPrompt build_generation_prompt(
    std::string_view relation, std::span<const RelationInstance> demos,
    const RelationSchema& schema, std::size_t n_requested, bool constrained,
    const BudgetConfig& budget = {},
    const PromptTemplates& templates = PromptTemplates::defaults());

inline constexpr std::size_t kGenerationDemoCount = 3;

}  // namespace fsre

#include "fsre/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "fsre/error.hpp"
#include "fsre/random.hpp"
#include "fsre/text.hpp"

namespace fsre {
namespace {

constexpr std::string_view kDefaultInstruction =
    "You are given a context and two entities; choose exactly one relation from the candidate "
    "list that holds between the head and tail entity.";

constexpr std::string_view kDefaultGenerationInstruction =
    "Generate {n} new relation extraction examples for the relation \"{relation}\". "
    "Write each example with the fields {fields}, in the same format as the examples below, "
    "and separate examples with a blank line.";

constexpr std::string_view kBlockSeparator = "\n\n";

struct TextSize {
  std::size_t words = 0;
  std::size_t chars = 0;

  TextSize& operator+=(const TextSize& other) {
    words += other.words;
    chars += other.chars;
    return *this;
  }
  std::size_t estimate() const { return std::max(words, (chars + 3) / 4); }
};

// Pieces joined here always end in whitespace, so word and character counts
// of the concatenation are the sums of the parts.
TextSize measure(std::string_view text) {
  return {split_whitespace(text).size(), text.size()};
}

std::string entity_lines(const RelationInstance& inst, bool with_schema) {
  std::string out;
  if (with_schema) out += "Head Type: " + inst.head_type + ". ";
  out += "Head Entity: " + inst.head_mention() + ".\n";
  if (with_schema) out += "Tail Type: " + inst.tail_type + ". ";
  out += "Tail Entity: " + inst.tail_mention() + ".\n";
  return out;
}

std::string candidate_line(const RelationSchema& schema) {
  std::string out = "Candidate relations: ";
  for (std::size_t i = 0; i < schema.labels().size(); ++i) {
    if (i > 0) out += ", ";
    out += schema.verbalize(schema.labels()[i]);
  }
  out += ".";
  return out;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

std::string PromptStyle::name() const {
  std::string out = kind == PromptKind::text ? "text" : "instruct";
  if (with_schema) out += "+schema";
  return out;
}

PromptStyle PromptStyle::parse(std::string_view name) {
  const auto lowered = to_lower(trim(name));
  for (const auto& style : all()) {
    if (style.name() == lowered) return style;
  }
  throw ConfigError("unknown prompt style '" + std::string(name) +
                    "' (expected text, text+schema, instruct or instruct+schema)");
}

std::vector<PromptStyle> PromptStyle::all() {
  return {{PromptKind::text, false},
          {PromptKind::text, true},
          {PromptKind::instruct, false},
          {PromptKind::instruct, true}};
}

std::size_t BudgetConfig::prompt_limit() const {
  if (completion_reserve == 0 || completion_reserve >= max_request_tokens) {
    throw ConfigError("completion_reserve must be positive and below max_request_tokens");
  }
  return max_request_tokens - completion_reserve;
}

PromptTemplates PromptTemplates::defaults() {
  return {std::string(kDefaultInstruction), std::string(kDefaultGenerationInstruction)};
}

PromptTemplates PromptTemplates::parse(std::string_view text) {
  PromptTemplates out = defaults();
  std::map<std::string, std::string> sections;
  std::string current;
  std::string body;
  auto flush = [&] {
    if (!current.empty()) sections[current] = std::string(trim(body));
    body.clear();
  };
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto stripped = trim(line);
    if (stripped.size() > 2 && stripped.front() == '[' && stripped.back() == ']') {
      flush();
      current = std::string(stripped.substr(1, stripped.size() - 2));
      if (current != "instruction" && current != "generation_instruction") {
        throw ConfigError("template file: unknown section [" + current + "]");
      }
      continue;
    }
    if (current.empty()) {
      if (!stripped.empty()) throw ConfigError("template file: text before the first section");
      continue;
    }
    body += line;
    body += '\n';
  }
  flush();
  if (auto it = sections.find("instruction"); it != sections.end()) out.instruction = it->second;
  if (auto it = sections.find("generation_instruction"); it != sections.end()) {
    out.generation_instruction = it->second;
  }
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::size_t estimate_tokens(std::string_view text) { return measure(text).estimate(); }

std::string format_demonstration(const RelationInstance& instance, const RelationSchema& schema,
                                 bool with_schema) {
  return "Context: " + detokenize(instance.tokens) + "\n" + entity_lines(instance, with_schema) +
         "Relation: " + schema.verbalize(instance.relation) + ".";
}

std::string format_query(const RelationInstance& instance, bool with_schema) {
  return "Context: " + detokenize(instance.tokens) + "\n" + entity_lines(instance, with_schema) +
         "Relation:";
}

std::vector<RelationInstance> select_demonstrations(const Dataset& train, std::size_t per_relation,
                                                    std::uint64_t seed) {
  std::map<std::string, std::vector<const RelationInstance*>> by_relation;
  for (const auto& inst : train.instances) by_relation[inst.relation].push_back(&inst);

  SeededRng rng(seed);
  std::vector<const RelationInstance*> picked;
  for (auto& [relation, members] : by_relation) {
    std::stable_sort(members.begin(), members.end(),
                     [](const auto* a, const auto* b) { return a->id < b->id; });
    rng.shuffle(std::span(members));
    const auto take = std::min(per_relation, members.size());
    picked.insert(picked.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  rng.shuffle(std::span(picked));

  std::vector<RelationInstance> out;
  out.reserve(picked.size());
  for (const auto* inst : picked) out.push_back(*inst);
  return out;
}

RenderedPrompt build_icl_prompt(const PromptStyle& style, const RelationSchema& schema,
                                std::span<const RelationInstance> demos,
                                const RelationInstance& query, const BudgetConfig& budget,
                                const PromptTemplates& templates) {
  const auto limit = budget.prompt_limit();

  std::string prefix;
  if (style.kind == PromptKind::instruct) {
    prefix += templates.instruction;
    prefix += kBlockSeparator;
  }
  prefix += candidate_line(schema);
  prefix += kBlockSeparator;
  const std::string query_block = format_query(query, style.with_schema);

  std::vector<std::string> blocks;
  blocks.reserve(demos.size());
  TextSize fixed = measure(prefix);
  fixed += measure(query_block);
  std::vector<TextSize> sizes;
  for (const auto& demo : demos) {
    blocks.push_back(format_demonstration(demo, schema, style.with_schema));
    blocks.back() += kBlockSeparator;
    sizes.push_back(measure(blocks.back()));
  }
  if (fixed.estimate() > limit) {
    throw DataError("query exceeds budget: " + std::to_string(fixed.estimate()) + " > " +
                    std::to_string(limit) + " tokens for query '" + query.id + "'");
  }

  std::size_t kept = blocks.size();
  TextSize total = fixed;
  for (const auto& size : sizes) total += size;
  while (kept > 0 && total.estimate() > limit) {
    --kept;
    total.words -= sizes[kept].words;
    total.chars -= sizes[kept].chars;
  }

  RenderedPrompt out;
  out.style = style;
  out.query_id = query.id;
  out.text = prefix;
  for (std::size_t i = 0; i < kept; ++i) {
    out.text += blocks[i];
    out.demo_ids.push_back(demos[i].id);
  }
  out.text += query_block;
  out.estimated_tokens = estimate_tokens(out.text);

  std::vector<std::string> ids = out.demo_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw DataError("demonstration ids are not unique");
  }
  return out;
}

RenderedPrompt build_generation_prompt(std::string_view relation,
                                       std::span<const RelationInstance> demos,
                                       const RelationSchema& schema, std::size_t n_requested,
                                       bool constrained, const BudgetConfig& budget,
                                       const PromptTemplates& templates) {
  if (demos.size() != kGenerationDemoCount) {
    throw DataError("generation prompt needs exactly 3 demonstrations, got " +
                    std::to_string(demos.size()));
  }
  if (!schema.contains(relation)) {
    throw DataError("relation '" + std::string(relation) + "' is not in the schema");
  }
  for (const auto& demo : demos) {
    if (demo.relation != relation) {
      throw DataError("demonstration '" + demo.id + "' has relation '" + demo.relation +
                      "', expected '" + std::string(relation) + "'");
    }
  }
  if (n_requested == 0) throw DataError("n_requested must be positive");

  const std::string fields = constrained
                                 ? "Context, Head Type, Head Entity, Tail Type, Tail Entity, Relation"
                                 : "Context, Head Entity, Tail Entity, Relation";
  std::string instruction = templates.generation_instruction;
  instruction = replace_all(instruction, "{relation}", schema.verbalize(relation));
  instruction = replace_all(instruction, "{n}", std::to_string(n_requested));
  instruction = replace_all(instruction, "{fields}", fields);

  RenderedPrompt out;
  out.style = {PromptKind::instruct, constrained};
  out.text = instruction;
  out.text += kBlockSeparator;
  for (const auto& demo : demos) {
    out.text += format_demonstration(demo, schema, constrained);
    out.text += kBlockSeparator;
    out.demo_ids.push_back(demo.id);
  }
  if (constrained) {
    if (const auto* pairs = schema.constraints_for(relation)) {
      out.text += "Allowed (Head Type, Tail Type) pairs for " + schema.verbalize(relation) + ": ";
      bool first = true;
      for (const auto& [head, tail] : *pairs) {
        if (!first) out.text += "; ";
        out.text += "(" + head + ", " + tail + ")";
        first = false;
      }
      out.text += ".";
      out.text += kBlockSeparator;
    }
  }
  out.estimated_tokens = estimate_tokens(out.text);
  if (out.estimated_tokens > budget.prompt_limit()) {
    throw DataError("generation prompt for '" + std::string(relation) + "' exceeds budget");
  }
  return out;
}

}  // namespace fsre

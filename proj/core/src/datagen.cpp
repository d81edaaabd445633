#include "fsre/datagen.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

#include "fsre/error.hpp"
#include "fsre/random.hpp"
#include "fsre/text.hpp"

namespace fsre {

using nlohmann::json;

namespace {

enum class Field { context, head_type, head_entity, tail_type, tail_entity, relation };

constexpr std::array<std::pair<std::string_view, Field>, 6> kFieldNames{{
    {"context", Field::context},
    {"head type", Field::head_type},
    {"head entity", Field::head_entity},
    {"tail type", Field::tail_type},
    {"tail entity", Field::tail_entity},
    {"relation", Field::relation},
}};

struct FieldHit {
  Field field;
  std::size_t label_begin;
  std::size_t value_begin;
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_blocks(std::string_view completion) {
  std::vector<std::string> blocks;
  std::string current;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    const auto newline = completion.find('\n', pos);
    const auto end = newline == std::string_view::npos ? completion.size() : newline;
    const auto line = completion.substr(pos, end - pos);
    if (trim(line).empty()) {
      if (!trim(current).empty()) blocks.push_back(current);
      current.clear();
    } else {
      current += line;
      current += '\n';
    }
    if (newline == std::string_view::npos) break;
    pos = newline + 1;
  }
  if (!trim(current).empty()) blocks.push_back(current);
  return blocks;
}

// Field labels start a line or follow whitespace and end in an optional run
// of spaces plus ':'. The first occurrence of each field wins.
std::vector<FieldHit> find_fields(std::string_view block) {
  const auto lowered = to_lower(block);
  std::vector<FieldHit> hits;
  std::array<bool, kFieldNames.size()> seen{};
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    if (i > 0 && !is_space(lowered[i - 1])) continue;
    for (std::size_t f = 0; f < kFieldNames.size(); ++f) {
      const auto& [name, field] = kFieldNames[f];
      if (lowered.compare(i, name.size(), name) != 0) continue;
      auto j = i + name.size();
      while (j < lowered.size() && lowered[j] == ' ') ++j;
      if (j >= lowered.size() || lowered[j] != ':') continue;
      if (!seen[f]) {
        seen[f] = true;
        hits.push_back({field, i, j + 1});
      }
      i = j;
      break;
    }
  }
  return hits;
}

std::string field_value(std::string_view block, std::size_t begin, std::size_t end, bool strip_period) {
  auto value = trim(block.substr(begin, end - begin));
  if (strip_period && !value.empty() && value.back() == '.') {
    value.remove_suffix(1);
    value = trim(value);
  }
  return std::string(value);
}

struct Located {
  std::vector<std::string> tokens;
  Span head;
  Span tail;
};

std::optional<Located> locate(std::vector<std::string> tokens, const std::vector<std::string>& head,
                              const std::vector<std::string>& tail) {
  const auto h = find_subsequence(tokens, head);
  if (!h) return std::nullopt;
  const bool same_shape = head.size() == tail.size();
  const auto t = find_subsequence(tokens, tail, same_shape ? std::optional(*h) : std::nullopt);
  if (!t) return std::nullopt;
  return Located{std::move(tokens), {*h, *h + head.size()}, {*t, *t + tail.size()}};
}

GenerationCandidate reject(GenerationCandidate c, RejectReason reason) {
  c.verdict = Verdict::rejected;
  c.reject_reason = reason;
  return c;
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pending: return "pending";
    case Verdict::accepted: return "accepted";
    case Verdict::rejected: return "rejected";
  }
  return "pending";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::parse_failure: return "parse_failure";
    case RejectReason::entity_not_in_context: return "entity_not_in_context";
    case RejectReason::unknown_entity_type: return "unknown_entity_type";
    case RejectReason::type_pair_violates_schema: return "type_pair_violates_schema";
    case RejectReason::relation_mismatch: return "relation_mismatch";
    case RejectReason::duplicate: return "duplicate";
    case RejectReason::context_too_short: return "context_too_short";
  }
  return "parse_failure";
}

std::size_t GenerationReport::rejected() const {
  std::size_t total = 0;
  for (const auto& [reason, n] : rejections_by_reason) total += n;
  return total;
}

bool DedupIndex::contains(std::string_view context) const {
  return seen_.contains(normalize_for_dedup(context));
}

void DedupIndex::insert(std::string_view context) { seen_.insert(normalize_for_dedup(context)); }

std::vector<GenerationCandidate> parse_generated(std::string_view completion) {
  std::vector<GenerationCandidate> out;
  for (auto& block : split_blocks(completion)) {
    GenerationCandidate cand;
    cand.raw_block = std::move(block);
    const std::string_view text = cand.raw_block;

    const auto hits = find_fields(text);
    GeneratedFields fields;
    std::array<bool, kFieldNames.size()> present{};
    for (std::size_t h = 0; h < hits.size(); ++h) {
      const auto end = h + 1 < hits.size() ? hits[h + 1].label_begin : text.size();
      const auto field = hits[h].field;
      auto value = field_value(text, hits[h].value_begin, end, field != Field::context);
      present[static_cast<std::size_t>(field)] = !value.empty();
      switch (field) {
        case Field::context: fields.context = std::move(value); break;
        case Field::head_type: fields.head_type = std::move(value); break;
        case Field::head_entity: fields.head_entity = std::move(value); break;
        case Field::tail_type: fields.tail_type = std::move(value); break;
        case Field::tail_entity: fields.tail_entity = std::move(value); break;
        case Field::relation: fields.relation = std::move(value); break;
      }
    }
    const bool complete = present[static_cast<std::size_t>(Field::context)] &&
                          present[static_cast<std::size_t>(Field::head_entity)] &&
                          present[static_cast<std::size_t>(Field::tail_entity)] &&
                          present[static_cast<std::size_t>(Field::relation)];
    if (!hits.empty()) cand.fields = fields;
    if (!complete) {
      out.push_back(reject(std::move(cand), RejectReason::parse_failure));
      continue;
    }

    auto located = locate(split_whitespace(fields.context), split_whitespace(fields.head_entity),
                          split_whitespace(fields.tail_entity));
    if (!located) {
      located = locate(split_words_and_punctuation(fields.context),
                       split_words_and_punctuation(fields.head_entity),
                       split_words_and_punctuation(fields.tail_entity));
    }
    if (!located) {
      const bool inside_tokens = fields.context.find(fields.head_entity) != std::string::npos &&
                                 fields.context.find(fields.tail_entity) != std::string::npos;
      if (inside_tokens) cand = reject(std::move(cand), RejectReason::parse_failure);
      out.push_back(std::move(cand));
      continue;
    }

    RelationInstance inst;
    inst.tokens = std::move(located->tokens);
    inst.head = located->head;
    inst.tail = located->tail;
    inst.head_type = fields.head_type;
    inst.tail_type = fields.tail_type;
    inst.relation = fields.relation;
    cand.parsed = std::move(inst);
    out.push_back(std::move(cand));
  }
  return out;
}

GenerationCandidate validate_candidate(GenerationCandidate cand, const RelationSchema& schema,
                                       std::string_view requested_relation, DedupIndex& seen,
                                       const ValidationOptions& options) {
  if (cand.verdict == Verdict::rejected) return cand;
  if (!cand.fields) return reject(std::move(cand), RejectReason::parse_failure);
  if (!cand.parsed) return reject(std::move(cand), RejectReason::entity_not_in_context);

  auto& inst = *cand.parsed;
  const auto& known = schema.entity_types();
  auto type_ok = [&](const std::string& type) {
    if (type.empty()) return !options.enforce_type_constraints;
    return known.empty() || known.contains(type);
  };
  if (!type_ok(inst.head_type) || !type_ok(inst.tail_type)) {
    return reject(std::move(cand), RejectReason::unknown_entity_type);
  }
  if (options.enforce_type_constraints &&
      !schema.allows(requested_relation, inst.head_type, inst.tail_type)) {
    return reject(std::move(cand), RejectReason::type_pair_violates_schema);
  }
  const auto resolved = schema.resolve(inst.relation);
  if (!resolved || *resolved != requested_relation) {
    return reject(std::move(cand), RejectReason::relation_mismatch);
  }
  inst.relation = *resolved;
  if (seen.contains(cand.fields->context)) return reject(std::move(cand), RejectReason::duplicate);
  if (inst.tokens.size() < options.min_context_tokens) {
    return reject(std::move(cand), RejectReason::context_too_short);
  }
  seen.insert(cand.fields->context);
  cand.verdict = Verdict::accepted;
  cand.reject_reason.reset();
  return cand;
}

GenerationResult generate_relation_data(std::string_view relation, const Dataset& train,
                                        const RelationSchema& schema, const GenerationConfig& cfg,
                                        Backend& backend) {
  auto pool = instances_of(train, relation);
  if (pool.size() < kGenerationDemoCount) {
    throw DataError("relation '" + std::string(relation) + "' has " + std::to_string(pool.size()) +
                    " training instances; generation needs at least 3");
  }
  std::stable_sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

  GenerationResult result;
  result.report.relation = std::string(relation);
  result.report.requested = cfg.n_target;
  if (cfg.n_target == 0) return result;

  const auto cap = cfg.attempt_cap_factor * cfg.n_target;
  ValidationOptions validation = cfg.validation;
  validation.enforce_type_constraints = cfg.constrained;
  SeededRng rng(derive_seed(cfg.seed, relation));
  DedupIndex seen;
  auto& report = result.report;

  while (report.accepted < cfg.n_target && report.raw_blocks < cap) {
    rng.shuffle(std::span(pool));
    std::vector<RelationInstance> demos;
    for (std::size_t i = 0; i < kGenerationDemoCount; ++i) demos.push_back(*pool[i]);

    const auto n_requested = std::min(std::max<std::size_t>(cfg.blocks_per_call, 1),
                                      cfg.n_target - report.accepted);
    const auto prompt = build_generation_prompt(relation, demos, schema, n_requested,
                                                cfg.constrained, cfg.budget, cfg.templates);
    CompletionRequest request{prompt.text, cfg.temperature, cfg.max_completion_tokens, {}};
    const auto response = backend.complete(request);

    auto candidates = parse_generated(response.text);
    if (candidates.empty()) {
      GenerationCandidate empty;
      empty.raw_block = response.text;
      candidates.push_back(reject(std::move(empty), RejectReason::parse_failure));
    }
    for (auto& cand : candidates) {
      if (report.accepted >= cfg.n_target || report.raw_blocks >= cap) break;
      ++report.raw_blocks;
      auto checked = validate_candidate(std::move(cand), schema, relation, seen, validation);
      if (checked.verdict == Verdict::accepted) {
        auto inst = std::move(*checked.parsed);
        inst.id = "gen:" + std::string(relation) + ":" + std::to_string(report.accepted);
        result.accepted.push_back(std::move(inst));
        ++report.accepted;
      } else {
        ++report.rejections_by_reason[*checked.reject_reason];
        result.rejected.push_back(std::move(checked));
      }
    }
  }
  return result;
}

Dataset mix_generated(const Dataset& original, const Dataset& generated_pool, std::size_t k,
                      std::uint64_t seed) {
  Dataset out = original;
  if (k == 0) return out;
  std::map<std::string, std::vector<const RelationInstance*>> by_relation;
  for (const auto& inst : generated_pool.instances) by_relation[inst.relation].push_back(&inst);
  for (auto& [relation, members] : by_relation) {
    std::stable_sort(members.begin(), members.end(),
                     [](const auto* a, const auto* b) { return a->id < b->id; });
    SeededRng rng(derive_seed(seed, relation));
    rng.shuffle(std::span(members));
    const auto take = std::min(k, members.size());
    for (std::size_t i = 0; i < take; ++i) out.instances.push_back(*members[i]);
  }
  return out;
}

std::string report_to_json(const GenerationReport& report) {
  json reasons = json::object();
  for (const auto& [reason, n] : report.rejections_by_reason) reasons[std::string(to_string(reason))] = n;
  return json{{"relation", report.relation},
              {"requested", report.requested},
              {"raw_blocks", report.raw_blocks},
              {"accepted", report.accepted},
              {"rejections_by_reason", std::move(reasons)}}
      .dump();
}

std::string candidate_to_json(const GenerationCandidate& candidate) {
  json doc{{"raw_block", candidate.raw_block}, {"verdict", to_string(candidate.verdict)}};
  doc["reject_reason"] =
      candidate.reject_reason ? json(std::string(to_string(*candidate.reject_reason))) : json(nullptr);
  return doc.dump();
}

}  // namespace fsre

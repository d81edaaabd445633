#include "fsre/synthetic.hpp"

#include <array>

#include "fsre/error.hpp"
#include "fsre/random.hpp"

namespace fsre {
namespace {

struct RelationSeed {
  const char* name;
  const char* head_type;
  const char* tail_type;
};

// Consecutive entries share a type pair.
constexpr std::array<RelationSeed, 10> kRelations{{
    {"per:employee_of", "PERSON", "ORGANIZATION"},
    {"per:founder_of", "PERSON", "ORGANIZATION"},
    {"per:born_in", "PERSON", "CITY"},
    {"per:lives_in", "PERSON", "CITY"},
    {"org:based_in", "ORGANIZATION", "CITY"},
    {"org:founded_in", "ORGANIZATION", "CITY"},
    {"per:born_on", "PERSON", "DATE"},
    {"per:died_on", "PERSON", "DATE"},
    {"org:led_by", "ORGANIZATION", "PERSON"},
    {"org:owned_by", "ORGANIZATION", "PERSON"},
}};

constexpr std::array<const char*, 10> kSyllables{"ba", "ko", "ri", "mu", "te", "lo", "sa", "ne", "vi", "du"};

const std::vector<std::vector<std::string>>& mentions_for(const std::string& type) {
  static const std::vector<std::vector<std::string>> people{
      {"Ada", "Moreau"}, {"Ben", "Okafor"}, {"Chen", "Wei"},      {"Dara", "Lind"},
      {"Eli", "Novak"},  {"Fay", "Ortiz"},  {"Gus", "Hale"},      {"Hana", "Sato"},
      {"Ivo", "Brandt"}, {"Jo", "Adeyemi"}, {"Kai", "Lindqvist"}, {"Lea", "Ruiz"}};
  static const std::vector<std::vector<std::string>> orgs{
      {"Acme", "Corp"},       {"Borealis", "Labs"}, {"Cobalt", "Group"}, {"Delta", "Works"},
      {"Ember", "Holdings"},  {"Fjord", "Systems"}, {"Granite", "Bank"}, {"Helix", "Media"},
      {"Ion", "Foundation"},  {"Juniper", "Trust"}};
  static const std::vector<std::vector<std::string>> cities{
      {"Lisbon"}, {"Osaka"}, {"Quito"}, {"Tallinn"}, {"Accra"}, {"Perth"},
      {"Bergen"}, {"Tucson"}, {"Kraków"}, {"Nantes"}};
  static const std::vector<std::vector<std::string>> dates{
      {"1901"}, {"1934"}, {"1958"}, {"1962"}, {"1977"}, {"1983"},
      {"March", "1990"}, {"May", "2001"}, {"July", "1969"}, {"June", "2011"}};
  if (type == "PERSON") return people;
  if (type == "ORGANIZATION") return orgs;
  if (type == "CITY") return cities;
  return dates;
}

const std::vector<std::string>& fillers() {
  static const std::vector<std::string> words{
      "the",    "report", "said",    "that",   "last",   "year",  "and",    "in",
      "a",      "recent", "interview", "noted", "while",  "local", "sources", "also",
      "after",  "months", "of",      "talks",  "when",   "asked", "about",  "plans",
      "which",  "were",   "later",   "confirmed", "by",  "officials", "during", "visit"};
  return words;
}

std::string trigger_word(std::size_t relation, std::size_t j) {
  return std::string(kSyllables[relation % kSyllables.size()]) + kSyllables[j % kSyllables.size()] +
         (relation >= kSyllables.size() ? std::to_string(relation) : std::string()) + "s";
}

RelationSchema make_schema(const SyntheticCorpusConfig& cfg, std::vector<std::string>& names,
                           std::vector<TypePair>& pairs) {
  RelationSchema::Spec spec;
  for (std::size_t r = 0; r < cfg.n_relations; ++r) {
    const auto& seed = kRelations[r % kRelations.size()];
    std::string name = seed.name;
    if (r >= kRelations.size()) name += "_" + std::to_string(r / kRelations.size());
    names.push_back(name);
    pairs.emplace_back(seed.head_type, seed.tail_type);
    spec.labels.push_back(name);
    spec.type_constraints[name].insert(pairs.back());
  }
  if (cfg.with_na) {
    spec.labels.push_back("no_relation");
    spec.na_label = "no_relation";
  }
  spec.entity_types = {"PERSON", "ORGANIZATION", "CITY", "DATE"};
  return RelationSchema::create(std::move(spec));
}

}  // namespace

SyntheticCorpus::SyntheticCorpus(SyntheticCorpusConfig cfg)
    : cfg_(cfg), relation_names_(), type_pairs_(), schema_(make_schema(cfg_, relation_names_, type_pairs_)) {
  if (cfg_.n_relations == 0 || cfg_.triggers_per_relation == 0) {
    throw ConfigError("synthetic corpus needs at least one relation and one trigger");
  }
  if (cfg_.triggers_per_relation > kSyllables.size()) {
    throw ConfigError("synthetic corpus supports at most 10 triggers per relation");
  }
  for (std::size_t r = 0; r < cfg_.n_relations; ++r) {
    auto& list = triggers_.emplace_back();
    for (std::size_t j = 0; j < cfg_.triggers_per_relation; ++j) list.push_back(trigger_word(r, j));
  }
}

RelationInstance SyntheticCorpus::make_instance(std::size_t relation_index, std::uint64_t seed,
                                                std::string id) const {
  SeededRng rng(seed);
  const auto& [head_type, tail_type] = type_pairs_[relation_index];
  auto pick = [&](const auto& list) -> const auto& { return list[rng.uniform_index(list.size())]; };

  const auto& head = pick(mentions_for(head_type));
  auto tail = pick(mentions_for(tail_type));
  while (tail == head) tail = pick(mentions_for(tail_type));
  const auto& trigger = pick(triggers_[relation_index]);

  const auto& words = fillers();
  const auto total = cfg_.filler_tokens;
  const auto before = static_cast<std::size_t>(rng.uniform_index(total + 1));
  const auto between = std::min<std::size_t>(total - before, rng.uniform_index(3));
  const auto after = total - before - between;

  RelationInstance inst;
  inst.id = std::move(id);
  for (std::size_t i = 0; i < before; ++i) inst.tokens.push_back(pick(words));
  inst.head = {inst.tokens.size(), inst.tokens.size() + head.size()};
  inst.tokens.insert(inst.tokens.end(), head.begin(), head.end());
  inst.tokens.push_back(trigger);
  for (std::size_t i = 0; i < between; ++i) inst.tokens.push_back(pick(words));
  inst.tail = {inst.tokens.size(), inst.tokens.size() + tail.size()};
  inst.tokens.insert(inst.tokens.end(), tail.begin(), tail.end());
  for (std::size_t i = 0; i < after; ++i) inst.tokens.push_back(pick(words));
  inst.tokens.push_back(".");
  inst.head_type = head_type;
  inst.tail_type = tail_type;
  inst.relation = relation_names_[relation_index];
  return inst;
}

Dataset SyntheticCorpus::generate(std::size_t per_relation, std::uint64_t seed,
                                  const std::string& id_prefix) const {
  Dataset out;
  out.schema_ref = "synthetic";
  std::size_t n = 0;
  for (std::size_t r = 0; r < cfg_.n_relations; ++r) {
    for (std::size_t i = 0; i < per_relation; ++i, ++n) {
      out.instances.push_back(
          make_instance(r, derive_seed(seed, n), id_prefix + "-" + std::to_string(n)));
    }
  }
  return out;
}

}  // namespace fsre

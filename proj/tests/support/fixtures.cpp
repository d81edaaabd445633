#include "fixtures.hpp"

#include <set>

#include "fsre/text.hpp"

#ifndef FSRE_TEST_DATA_DIR
#error "FSRE_TEST_DATA_DIR must point at the repository data/ directory"
#endif

namespace fsre::testing {

std::filesystem::path data_dir() { return FSRE_TEST_DATA_DIR; }

RelationSchema tacred_schema() { return load_schema(data_dir() / "schemas" / "tacred.json"); }

RelationSchema scierc_schema() { return load_schema(data_dir() / "schemas" / "scierc.json"); }

RelationInstance make_instance(std::string id, const std::string& text, Span head, Span tail,
                               std::string relation, std::string head_type, std::string tail_type) {
  RelationInstance inst;
  inst.id = std::move(id);
  inst.tokens = split_whitespace(text);
  inst.head = head;
  inst.tail = tail;
  inst.relation = std::move(relation);
  inst.head_type = std::move(head_type);
  inst.tail_type = std::move(tail_type);
  return inst;
}

RelationSchema toy_schema(std::size_t n_relations, bool with_na) {
  RelationSchema::Spec spec;
  for (std::size_t i = 0; i < n_relations; ++i) spec.labels.push_back("r" + std::to_string(i));
  if (with_na) {
    spec.labels.push_back("NA");
    spec.na_label = "NA";
  }
  spec.entity_types = {"T0", "T1", "T2", "T3"};
  return RelationSchema::create(std::move(spec));
}

Dataset toy_dataset(const std::vector<std::size_t>& per_relation, const std::string& prefix) {
  Dataset out;
  for (std::size_t r = 0; r < per_relation.size(); ++r) {
    for (std::size_t j = 0; j < per_relation[r]; ++j) {
      const auto tag = std::to_string(r) + "-" + std::to_string(j);
      out.instances.push_back(make_instance(prefix + "-" + tag, "alpha beta gamma delta w" + tag + " epsilon",
                                            {0, 1}, {2, 3}, "r" + std::to_string(r), "T0", "T1"));
    }
  }
  return out;
}

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the", "company", "announced", "on", "monday", "that", "it", "would", "expand", "its",
      "operations", "after", "a", "long", "review", "by", "board", "members", "and", "several",
      "investors", "who", "had", "asked", "for", "changes", "in", "strategy", "during", "year"};
  return words;
}

const std::vector<std::string>& name_parts() {
  static const std::vector<std::string> parts{
      "Alder", "Birch", "Cedar", "Dorn", "Elm", "Fenwick", "Garrow", "Hollis", "Ingram", "Jessop",
      "Kestrel", "Lowry", "Marlow", "Norcross", "Oakes", "Pryor", "Quill", "Redfern", "Selby", "Thorne"};
  return parts;
}

}  // namespace

RelationInstance random_unique_instance(SeededRng& rng, const RelationSchema& schema, std::string id) {
  std::vector<std::string> relations;
  for (const auto& label : schema.labels()) {
    if (!schema.is_na(label)) relations.push_back(label);
  }
  RelationInstance inst;
  inst.id = std::move(id);
  inst.relation = relations[rng.uniform_index(relations.size())];
  if (const auto* pairs = schema.constraints_for(inst.relation); pairs && !pairs->empty()) {
    auto it = pairs->begin();
    std::advance(it, static_cast<long>(rng.uniform_index(pairs->size())));
    inst.head_type = it->first;
    inst.tail_type = it->second;
  } else {
    std::vector<std::string> types(schema.entity_types().begin(), schema.entity_types().end());
    inst.head_type = types[rng.uniform_index(types.size())];
    inst.tail_type = types[rng.uniform_index(types.size())];
  }

  // Mention tokens come from a pool disjoint from the filler words, drawn
  // without replacement so each mention occurs exactly once.
  auto names = name_parts();
  rng.shuffle(std::span<std::string>(names));
  const auto head_len = 1 + rng.uniform_index(3);
  const auto tail_len = 1 + rng.uniform_index(3);
  std::vector<std::string> head(names.begin(), names.begin() + static_cast<long>(head_len));
  std::vector<std::string> tail(names.begin() + static_cast<long>(head_len),
                                names.begin() + static_cast<long>(head_len + tail_len));

  const auto& words = filler_words();
  auto fill = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) inst.tokens.push_back(words[rng.uniform_index(words.size())]);
  };
  const bool head_first = rng.bernoulli(0.5);
  fill(rng.uniform_index(5));
  const auto place = [&](const std::vector<std::string>& mention) {
    Span span{inst.tokens.size(), inst.tokens.size() + mention.size()};
    inst.tokens.insert(inst.tokens.end(), mention.begin(), mention.end());
    return span;
  };
  if (head_first) {
    inst.head = place(head);
    fill(rng.uniform_index(6));
    inst.tail = place(tail);
  } else {
    inst.tail = place(tail);
    fill(rng.uniform_index(6));
    inst.head = place(head);
  }
  fill(3 + rng.uniform_index(6));
  inst.tokens.push_back(".");
  return inst;
}

std::vector<ReferenceBlock> reference_blocks() {
  return {
      {"cancer_society",
       "Context: The American Cancer Society is headquartered in Atlanta and was founded in 1913 by 15 "
       "trained laywomen.\nHead Type: ORGANIZATION. Head Entity: American Cancer Society.\nTail Type: "
       "ORGANIZATION. Tail Entity: 15 trained laywomen.\nRelation: org:founded_by.",
       "org:founded_by"},
      {"mary_brown",
       "Context: Mary Brown, CEO of Brown Corp and renowned businesswoman, is a regular speaker at industry "
       "conferences and events.\nHead Type: PERSON. Head Entity: Mary Brown.\nTail Type: PERSON. Tail "
       "Entity: CEO.\nRelation: per:title.",
       "per:title"},
      {"mahler",
       "Context: Gustav Mahler was born in Kalischt, Bohemia on July 7th, 1860.\nHead Type: PERSON. Head "
       "Entity: Gustav Mahler.\nTail Type: PERSON. Tail Entity: 1860.\nRelation: per:country_of_birth.",
       "per:country_of_birth"},
      {"mtn",
       "Context: MTN Nigeria, a subsidiary of South African-based MTN Group, has begun to list its shares on "
       "the Nigerian Stock Exchange.\nHead Type: ORGANIZATION. Head Entity: MTN Group.\nTail Type: "
       "ORGANIZATION. Tail Entity: MTN Nigeria.\nRelation: org:subsidiaries.",
       "org:subsidiaries"},
      {"pope",
       "Context: Pope John Paul II was a hugely popular Catholic leader who was based in the Vatican City for "
       "most of his papacy.\nHead Type: PERSON. Head Entity: Pope John Paul II.\nTail Type: PERSON. Tail "
       "Entity: Vatican City.\nRelation: per:countries_of_residence.",
       "per:countries_of_residence"},
      {"sanofi",
       "Context: French drug manufacturer Sanofi-Aventis dissolved its Chinese subsidiary Guangzhou Pharma "
       "following a bribery scandal.\nHead Type: ORGANIZATION. Head Entity: Sanofi-Aventis.\nTail Type: "
       "ORGANIZATION. Tail Entity: Guangzhou Pharma.\nRelation: org:dissolved.",
       "org:dissolved"},
      {"compare",
       "Context: The comparison between the two approaches indicates that the neural method produces far "
       "better results than the rule-based system.\nHead Type: Method. Head Entity: neural method.\nTail "
       "Type: Method. Tail Entity: rule-based system.\nRelation: COMPARE.",
       "COMPARE", true},
      {"chromatography",
       "Context: The combination of chromatography and mass spectrometry has enabled scientists to achieve "
       "unparalleled levels of proteome analysis.\nHead Type: Method. Head Entity: mass spectrometry.\nTail "
       "Type: Method. Tail Entity: chromatography.\nRelation: FEATURE-OF.",
       "CONJUNCTION", true},
  };
}

}  // namespace fsre::testing

#include "fsre/augment.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "fsre/error.hpp"
#include "fsre/random.hpp"
#include "fsre/text.hpp"

namespace fsre {

const std::vector<std::string>* SynonymLexicon::find(const std::string& word) const {
  const auto it = entries.find(to_lower(word));
  return it == entries.end() ? nullptr : &it->second;
}

SynonymLexicon parse_lexicon(std::istream& in) {
  SynonymLexicon lexicon;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.emplace_back(trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2) {
      throw DataError("lexicon line " + std::to_string(line_number) + ": expected a tab after the headword");
    }
    const auto key = to_lower(fields.front());
    if (key.empty() || split_whitespace(key).size() != 1) {
      throw DataError("lexicon line " + std::to_string(line_number) +
                      ": headword must be a single token");
    }
    auto& synonyms = lexicon.entries[key];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto& synonym = fields[i];
      if (synonym.empty() || to_lower(synonym) == key) continue;
      if (std::find(synonyms.begin(), synonyms.end(), synonym) == synonyms.end()) {
        synonyms.push_back(synonym);
      }
    }
    if (synonyms.empty()) lexicon.entries.erase(key);
  }
  return lexicon;
}

SynonymLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon " + path.string());
  return parse_lexicon(in);
}

std::vector<RelationInstance> synonym_substitute(const RelationInstance& instance,
                                                 const SynonymLexicon& lexicon,
                                                 const AugmentConfig& cfg) {
  std::vector<RelationInstance> copies;
  copies.reserve(cfg.copies_per_instance);
  const auto n = instance.tokens.size();
  for (std::size_t c = 0; c < cfg.copies_per_instance; ++c) {
    SeededRng rng(derive_seed(derive_seed(cfg.seed, instance.id), c));
    RelationInstance copy = instance;
    copy.id = instance.id + "#aug" + std::to_string(c);
    copy.tokens.clear();

    // new_index[i] is where original token i starts in the copy.
    std::vector<std::size_t> new_index(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      new_index[i] = copy.tokens.size();
      const auto& token = instance.tokens[i];
      const bool protected_token = instance.head.contains(i) || instance.tail.contains(i);
      const auto* synonyms = protected_token ? nullptr : lexicon.find(token);
      if (synonyms != nullptr && rng.bernoulli(cfg.substitution_rate)) {
        const auto& pick = (*synonyms)[rng.uniform_index(synonyms->size())];
        auto parts = split_whitespace(pick);
        if (!parts.empty()) {
          for (auto& part : parts) copy.tokens.push_back(std::move(part));
          continue;
        }
      }
      copy.tokens.push_back(token);
    }
    new_index[n] = copy.tokens.size();

    copy.head = {new_index[instance.head.start], new_index[instance.head.end - 1] + 1};
    copy.tail = {new_index[instance.tail.start], new_index[instance.tail.end - 1] + 1};
    copies.push_back(std::move(copy));
  }
  return copies;
}

Dataset augment_dataset(const Dataset& dataset, const SynonymLexicon& lexicon,
                        const AugmentConfig& cfg) {
  Dataset out;
  out.schema_ref = dataset.schema_ref;
  for (const auto& inst : dataset.instances) {
    for (auto& copy : synonym_substitute(inst, lexicon, cfg)) out.instances.push_back(std::move(copy));
  }
  return out;
}

}  // namespace fsre

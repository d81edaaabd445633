#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fsre/corpus.hpp"

namespace fsre {

// Lowercase single-token headword -> synonyms (possibly multi-word).
struct SynonymLexicon {
  std::map<std::string, std::vector<std::string>> entries;

  const std::vector<std::string>* find(const std::string& word) const;
  std::size_t size() const { return entries.size(); }
};

// Tab-separated: headword, then synonyms. Blank lines and '#' comments are
// skipped. Self-synonyms and empty lists are dropped.
SynonymLexicon parse_lexicon(std::istream& in);
SynonymLexicon load_lexicon(const std::filesystem::path& path);

struct AugmentConfig {
  double substitution_rate = 0.3;
  std::size_t copies_per_instance = 1;
  std::uint64_t seed = 0;
};

/// Synonym-substituted copies of `instance`. Tokens inside either entity span
/// are never touched; multi-word synonyms are split into tokens and the spans
/// shifted to match. Copy c has id "<id>#aug<c>" and its own derived stream.
std::vector<RelationInstance> synonym_substitute(const RelationInstance& instance,
                                                 const SynonymLexicon& lexicon,
                                                 const AugmentConfig& cfg);

Dataset augment_dataset(const Dataset& dataset, const SynonymLexicon& lexicon,
                        const AugmentConfig& cfg);

}  // namespace fsre

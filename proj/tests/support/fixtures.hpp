#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsre/corpus.hpp"
#include "fsre/random.hpp"

namespace fsre::testing {

std::filesystem::path data_dir();
RelationSchema tacred_schema();
RelationSchema scierc_schema();

// Tokens split on single spaces; spans are half-open token ranges.
RelationInstance make_instance(std::string id, const std::string& text, Span head, Span tail,
                               std::string relation, std::string head_type = "",
                               std::string tail_type = "");

// Labels r0..r{n-1}, optionally with "NA"; types T0..T3 unconstrained.
RelationSchema toy_schema(std::size_t n_relations, bool with_na);

// `per_relation[i]` instances of toy label r<i>, ids "<prefix>-<i>-<j>".
Dataset toy_dataset(const std::vector<std::size_t>& per_relation, const std::string& prefix = "x");

// Random valid instance whose two mentions each occur once in the context.
RelationInstance random_unique_instance(SeededRng& rng, const RelationSchema& schema, std::string id);

struct ReferenceBlock {
  std::string name;
  std::string text;             // the generated block as printed
  std::string requested;        // relation the generation prompt asked for
  bool scierc = false;
};

// The eight generated blocks of the error table, one per row.
std::vector<ReferenceBlock> reference_blocks();

}  // namespace fsre::testing

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsre {

// Splits on ASCII whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

// Whitespace split followed by peeling leading/trailing punctuation
// (.,;:!?"'()[]{}) off each token as separate tokens. "Kalischt," becomes
// {"Kalischt", ","}; interior punctuation ("Sanofi-Aventis", "Cain's") stays.
std::vector<std::string> split_words_and_punctuation(std::string_view text);

// Joins tokens with single spaces. No punctuation re-attachment.
std::string detokenize(std::span<const std::string> tokens);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

// Lowercases, collapses runs of whitespace to one space, trims, then strips
// trailing punctuation. Used for duplicate detection of generated contexts.
std::string normalize_for_dedup(std::string_view text);

// First index i such that haystack[i, i + needle.size()) == needle and the
// resulting interval is not `avoid`; nullopt when absent or needle is empty.
std::optional<std::size_t> find_subsequence(
    std::span<const std::string> haystack, std::span<const std::string> needle,
    std::optional<std::size_t> avoid_start = std::nullopt);

bool is_ascii_punct(char c);

}  // namespace fsre

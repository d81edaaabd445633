#include "fsre/text.hpp"

#include <algorithm>
#include <cctype>

namespace fsre {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool is_ascii_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}':
      return true;
    default:
      return false;
  }
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::string> split_words_and_punctuation(std::string_view text) {
  std::vector<std::string> tokens;
  for (const auto& word : split_whitespace(text)) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_ascii_punct(word[begin])) ++begin;
    while (end > begin && is_ascii_punct(word[end - 1])) --end;
    for (std::size_t i = 0; i < begin; ++i) tokens.emplace_back(1, word[i]);
    if (end > begin) tokens.emplace_back(word.substr(begin, end - begin));
    for (std::size_t i = std::max(end, begin); i < word.size(); ++i) {
      tokens.emplace_back(1, word[i]);
    }
  }
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

std::string normalize_for_dedup(std::string_view text) {
  std::string out = detokenize(split_whitespace(to_lower(text)));
  while (!out.empty() && (is_ascii_punct(out.back()) || out.back() == ' ')) out.pop_back();
  return out;
}

std::optional<std::size_t> find_subsequence(std::span<const std::string> haystack,
                                            std::span<const std::string> needle,
                                            std::optional<std::size_t> avoid_start) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (avoid_start && *avoid_start == i) continue;
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(i))) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace fsre

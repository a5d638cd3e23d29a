#pragma once

// Small text utilities shared by the parsers, the mock providers and the
// metric code. All functions operate on UTF-8 and treat non-ASCII code
// points as opaque word characters.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lkg::text {

bool is_valid_utf8(std::string_view s);
std::size_t codepoint_count(std::string_view s);

std::string_view trim(std::string_view s);
// Collapses every whitespace run to one ASCII space and trims.
std::string normalize_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);
// Folds fullwidth ASCII (U+FF01..U+FF5E) and the ideographic space to ASCII.
std::string fold_width(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Lowercased alphanumeric tokens; non-ASCII bytes are kept inside tokens.
std::vector<std::string> tokens(std::string_view s);
// Tokens minus a small English stopword list.
std::vector<std::string> content_tokens(std::string_view s);

// |A ∩ B| / min(|A|, |B|) over distinct content tokens; 0 when either side
// is empty.
double token_overlap(std::string_view a, std::string_view b);

// Sentence split on '.', '!', '?', '。' followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view s);

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace lkg::text

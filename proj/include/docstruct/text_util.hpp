#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the filters, the merge step and the summarizer.
// Invalid byte sequences decode as U+FFFD one byte at a time.
namespace docstruct::text {

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Decodes the code point starting at byte offset pos; advances pos.
char32_t decode_next(std::string_view s, std::size_t& pos);

/// Byte offset where the last code point of s starts (s.size() if empty).
std::size_t last_codepoint_start(std::string_view s);

char32_t first_codepoint(std::string_view s);
char32_t last_codepoint(std::string_view s);

std::size_t codepoint_count(std::string_view s);

/// First max_cp code points of s.
std::string take_front(std::string_view s, std::size_t max_cp);
/// Last max_cp code points of s.
std::string take_back(std::string_view s, std::size_t max_cp);

bool is_cjk(char32_t c);
bool is_space(char32_t c);
bool is_ascii_upper(char32_t c);
bool is_ascii_lower(char32_t c);
bool is_letter(char32_t c); // ASCII letters and Latin-1/Latin Extended letters

bool ends_with(std::string_view s, std::string_view suffix);
bool starts_with(std::string_view s, std::string_view prefix);
std::string to_lower_ascii(std::string_view s);

/// Joins two fragments of one logical paragraph or cell.
///  - tail ends with '-' directly after a letter: hyphen elided, no space
///  - tail ends with '-' or '/' otherwise (split dates, numbers): no space
///  - CJK code point on either side of the seam: no space
///  - whitespace already at the seam: plain concatenation
///  - otherwise a single space
std::string join_fragments(std::string_view tail, std::string_view head);

/// Characters join_fragments may add or remove at a seam. Used by the
/// conservation checks: stripping these from both sides must leave equal text.
std::string strip_join_chars(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

} // namespace docstruct::text

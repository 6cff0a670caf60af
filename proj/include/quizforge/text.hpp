#pragma once

// UTF-8 and Unicode helpers shared by the corpus cleaner, the ROUGE
// normalizer and the serializers. All functions accept arbitrary bytes;
// malformed UTF-8 sequences decode to U+FFFD.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace quizforge::text {

std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);

/// Canonical composition (NFC).
std::string nfc(std::string_view s);

/// Turkish-aware lowercase: U+0130 (İ) -> i and I -> ı (U+0131) first,
/// then the default Unicode lowercase mapping for everything else.
/// Input is NFC-normalized first so a decomposed "I + U+0307" also maps to i.
std::string turkish_lower(std::string_view s);

bool is_alnum(char32_t cp);
bool is_space(char32_t cp);
/// Extended_Pictographic plus the emoji components that never stand alone
/// in prose (skin-tone modifiers, regional indicators, VS16, ZWJ, keycap).
bool is_emoji(char32_t cp);
bool is_control(char32_t cp);

/// Maximal runs of alphanumeric code points (combining marks stay attached
/// to the run they follow).
std::vector<std::string> word_tokens(std::string_view s);
std::size_t count_word_tokens(std::string_view s);

/// Chunks separated by Unicode whitespace.
std::vector<std::string> whitespace_tokens(std::string_view s);

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

/// ASCII-only case-insensitive prefix test.
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Replaces invalid UTF-8 with U+FFFD and applies NFC.
std::string sanitize(std::string_view s);

}  // namespace quizforge::text

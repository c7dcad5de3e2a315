#ifndef TERMFORGE_TEXT_H_
#define TERMFORGE_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

// Unicode helpers shared by the corpus, candidate and clustering modules.
// Everything operates on UTF-8; invalid sequences are replaced by U+FFFD.
namespace termforge::text {

std::string nfc(std::string_view utf8);
std::string to_lower(std::string_view utf8);
std::string case_fold(std::string_view utf8);
// Uppercases only the first code point.
std::string upper_first(std::string_view utf8);

// Splits on Unicode white space (White_Space property).
std::vector<std::string> split_whitespace(std::string_view utf8);

bool is_punctuation_only(std::string_view utf8);
bool contains_line_break(std::string_view utf8);

// Drops leading and trailing punctuation code points; interior ones
// (hyphens, apostrophes) stay.
std::string trim_punctuation(std::string_view utf8);

// Splits at white space and punctuation, discarding both.
std::vector<std::string> split_words(std::string_view utf8);

// Token used for occurrence matching: NFC, lowercase, edge punctuation
// trimmed. A punctuation-only token is returned unchanged so it still
// breaks contiguity.
std::string match_token(std::string_view raw_token);
std::vector<std::string> match_tokens(std::string_view sentence);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace termforge::text

#endif  // TERMFORGE_TEXT_H_

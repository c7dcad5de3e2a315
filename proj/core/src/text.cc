#include "termforge/text.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "termforge/error.h"

namespace termforge::text {
namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Visits each code point with its byte range.
template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c < 0) c = 0xFFFD;
    fn(c, static_cast<size_t>(start), static_cast<size_t>(i));
  }
}

bool is_punct(UChar32 c) { return u_ispunct(c); }

bool is_space(UChar32 c) { return u_isUWhiteSpace(c); }

}  // namespace

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString out = norm->normalize(from_utf8(utf8), status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kFormat, "NFC normalization failed");
  }
  return to_utf8(out);
}

std::string to_lower(std::string_view utf8) {
  icu::UnicodeString u = from_utf8(utf8);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string case_fold(std::string_view utf8) {
  icu::UnicodeString u = from_utf8(utf8);
  u.foldCase();
  return to_utf8(u);
}

std::string upper_first(std::string_view utf8) {
  if (utf8.empty()) return {};
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  int32_t end = 0;
  UChar32 c;
  U8_NEXT(bytes, end, static_cast<int32_t>(utf8.size()), c);
  icu::UnicodeString head = from_utf8(utf8.substr(0, static_cast<size_t>(end)));
  head.toUpper(icu::Locale::getRoot());
  return to_utf8(head) + std::string(utf8.substr(static_cast<size_t>(end)));
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> tokens;
  size_t begin = std::string_view::npos;
  for_each_code_point(utf8, [&](UChar32 c, size_t start, size_t) {
    if (is_space(c)) {
      if (begin != std::string_view::npos) {
        tokens.emplace_back(utf8.substr(begin, start - begin));
        begin = std::string_view::npos;
      }
    } else if (begin == std::string_view::npos) {
      begin = start;
    }
  });
  if (begin != std::string_view::npos) tokens.emplace_back(utf8.substr(begin));
  return tokens;
}

bool is_punctuation_only(std::string_view utf8) {
  if (utf8.empty()) return false;
  bool all = true;
  for_each_code_point(utf8, [&](UChar32 c, size_t, size_t) {
    if (!is_punct(c)) all = false;
  });
  return all;
}

bool contains_line_break(std::string_view utf8) {
  bool found = false;
  for_each_code_point(utf8, [&](UChar32 c, size_t, size_t) {
    if (c == '\n' || c == '\r' || c == 0x0B || c == 0x0C || c == 0x85 ||
        c == 0x2028 || c == 0x2029) {
      found = true;
    }
  });
  return found;
}

std::string trim_punctuation(std::string_view utf8) {
  size_t first = std::string_view::npos;
  size_t last = 0;
  for_each_code_point(utf8, [&](UChar32 c, size_t start, size_t end) {
    if (!is_punct(c)) {
      if (first == std::string_view::npos) first = start;
      last = end;
    }
  });
  if (first == std::string_view::npos) return {};
  return std::string(utf8.substr(first, last - first));
}

std::vector<std::string> split_words(std::string_view utf8) {
  std::vector<std::string> words;
  size_t begin = std::string_view::npos;
  for_each_code_point(utf8, [&](UChar32 c, size_t start, size_t) {
    if (is_space(c) || is_punct(c)) {
      if (begin != std::string_view::npos) {
        words.emplace_back(utf8.substr(begin, start - begin));
        begin = std::string_view::npos;
      }
    } else if (begin == std::string_view::npos) {
      begin = start;
    }
  });
  if (begin != std::string_view::npos) words.emplace_back(utf8.substr(begin));
  return words;
}

std::string match_token(std::string_view raw_token) {
  std::string lowered = to_lower(nfc(raw_token));
  std::string trimmed = trim_punctuation(lowered);
  return trimmed.empty() ? lowered : trimmed;
}

std::vector<std::string> match_tokens(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(nfc(sentence))) {
    out.push_back(match_token(raw));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace termforge::text

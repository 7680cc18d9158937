#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace memroute {

namespace detail {

inline bool is_word_code_point(UChar32 c) {
  if (c == '_') return true;
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  // Combining marks stay attached to their base letter.
  return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

inline void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

inline void flush_token(std::string& current, std::vector<std::string>& out) {
  // Leading/trailing underscores are separators; inner ones join vocabulary
  // terms such as "mixed_drink".
  const auto first = current.find_first_not_of('_');
  if (first != std::string::npos) {
    const auto last = current.find_last_not_of('_');
    out.emplace_back(current.substr(first, last - first + 1));
  }
  current.clear();
}

}  // namespace detail

/// Splits UTF-8 text into case-folded tokens on non-alphanumeric boundaries.
///
/// A token is a maximal run of letters, digits, combining marks and inner
/// underscores. Case folding is ICU simple default folding, so the result is
/// stable under re-tokenization. Invalid UTF-8 bytes act as separators.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && detail::is_word_code_point(c)) {
      if (c < 0x80) {
        current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + ('a' - 'A') : c));
      } else {
        detail::append_utf8(current, u_foldCase(c, U_FOLD_CASE_DEFAULT));
      }
    } else if (!current.empty()) {
      detail::flush_token(current, out);
    }
  }
  if (!current.empty()) detail::flush_token(current, out);
  return out;
}

/// True when `term` is already a single normalized token.
inline bool is_single_token(std::string_view term) {
  const auto tokens = tokenize(term);
  return tokens.size() == 1 && tokens.front() == term;
}

}  // namespace memroute

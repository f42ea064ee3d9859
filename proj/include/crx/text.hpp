// Copyright 2026 The CRX Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRX_TEXT_HPP_
#define CRX_TEXT_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace crx::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
inline bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

inline std::string_view trim_left(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

inline std::string_view trim_right(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string_view trim(std::string_view s) {
  return trim_right(trim_left(s));
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

inline std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (is_lower(c)) c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool iequals_ascii(std::string_view a, std::string_view b) {
  return a.size() == b.size() && to_lower_ascii(a) == to_lower_ascii(b);
}

// Splits on every occurrence of `sep`; keeps empty pieces.
inline std::vector<std::string_view> split(std::string_view s,
                                           std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

// Parses a plain decimal integer; no sign, no surrounding text.
inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  if (!all_digits(s) || s.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

// Decodes UTF-8 into code points. Ill-formed bytes decode to U+FFFD, one per
// offending byte sequence, so arbitrary input is accepted.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

inline bool is_valid_utf8(std::string_view s) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    if (c < 0) return false;
  }
  return true;
}

namespace detail {

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline icu::UnicodeString decompose(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkd = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) return s;
  icu::UnicodeString out = nfkd->normalize(s, status);
  return U_FAILURE(status) ? s : out;
}

template <typename Keep>
icu::UnicodeString filter(const icu::UnicodeString& s, Keep keep) {
  icu::UnicodeString out;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    if (keep(c)) out.append(c);
    i += U16_LENGTH(c);
  }
  return out;
}

inline bool is_mark(UChar32 c) {
  auto t = u_charType(c);
  return t == U_NON_SPACING_MARK || t == U_COMBINING_SPACING_MARK ||
         t == U_ENCLOSING_MARK;
}

inline icu::UnicodeString collapse_space(const icu::UnicodeString& s) {
  icu::UnicodeString out;
  bool pending = false;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending = !out.isEmpty();
      continue;
    }
    if (pending) out.append(UChar32{' '});
    pending = false;
    out.append(c);
  }
  return out;
}

// Applies `step` until the output stops changing.
template <typename Step>
std::string fixed_point(std::string_view s, Step step) {
  icu::UnicodeString cur = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  for (int round = 0; round < 8; ++round) {
    icu::UnicodeString next = step(cur);
    if (next == cur) break;
    cur = next;
  }
  return to_utf8(cur);
}

}  // namespace detail

// Lowercases, strips punctuation and collapses whitespace.
inline std::string normalize_field(std::string_view s) {
  return detail::fixed_point(s, [](const icu::UnicodeString& in) {
    icu::UnicodeString t(in);
    t.toLower(icu::Locale::getRoot());
    t = detail::filter(t, [](UChar32 c) { return !u_ispunct(c); });
    return detail::collapse_space(t);
  });
}

// normalize_field plus compatibility decomposition with combining marks
// removed, so "Müller" and "Muller" compare equal.
inline std::string fold_name(std::string_view s) {
  return detail::fixed_point(s, [](const icu::UnicodeString& in) {
    icu::UnicodeString t = detail::decompose(in);
    t = detail::filter(t, [](UChar32 c) { return !detail::is_mark(c); });
    t.toLower(icu::Locale::getRoot());
    t = detail::decompose(t);
    t = detail::filter(
        t, [](UChar32 c) { return !detail::is_mark(c) && !u_ispunct(c); });
    return detail::collapse_space(t);
  });
}

// Classic two-row dynamic program over code points.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// 1 - distance / longer length, over code points. Two empty strings are
// identical.
inline double levenshtein_similarity(std::string_view a, std::string_view b) {
  std::u32string ua = decode_utf8(a);
  std::u32string ub = decode_utf8(b);
  std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) /
                   static_cast<double>(longest);
}

}  // namespace crx::text

#endif  // CRX_TEXT_HPP_

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

// Name and field mapping shared by the two vendor codecs.

#ifndef CRX_CONVERT_HPP_
#define CRX_CONVERT_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crx/text.hpp"

namespace crx::convert {

// Fields a conversion could not carry over, with occurrence counts.
struct LossReport {
  std::map<std::string, std::int64_t> publication_fields;
  std::map<std::string, std::int64_t> reference_fields;

  void drop_field(const std::string& name, std::int64_t n = 1) {
    publication_fields[name] += n;
  }
  void drop_cr_field(const std::string& name, std::int64_t n = 1) {
    reference_fields[name] += n;
  }
  bool empty() const {
    return publication_fields.empty() && reference_fields.empty();
  }

  std::string to_text() const {
    std::string out;
    if (empty()) return "no fields dropped\n";
    for (const auto& [k, n] : publication_fields) {
      out += "dropped publication field '" + k + "' (" + std::to_string(n) +
             " records)\n";
    }
    for (const auto& [k, n] : reference_fields) {
      out += "dropped " + k + " (" + std::to_string(n) + " values)\n";
    }
    return out;
  }
};

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 13>
    kScopusToWosColumns{{
        {"Authors", "AU"},
        {"Title", "TI"},
        {"Source title", "SO"},
        {"Year", "PY"},
        {"Volume", "VL"},
        {"Issue", "IS"},
        {"Page start", "BP"},
        {"Page end", "EP"},
        {"DOI", "DI"},
        {"Abstract", "AB"},
        {"Author Keywords", "DE"},
        {"Cited by", "TC"},
        {"Document Type", "DT"},
    }};

// Commas and newlines would change how a segment re-splits.
inline std::string flatten_segment(std::string_view s) {
  std::string out;
  for (char c : text::trim(s)) {
    if (c == ',' || c == '\n' || c == '\r') {
      if (!out.empty() && out.back() != ' ') out += ' ';
      continue;
    }
    if (c == ' ' && !out.empty() && out.back() == ' ') continue;
    out += c;
  }
  return std::string(text::trim(out));
}

namespace detail {

inline bool looks_like_initials(std::string_view tok) {
  if (tok.empty() || tok.size() > 12) return false;
  int letters = 0;
  for (char c : tok) {
    if (text::is_upper(c)) {
      ++letters;
    } else if (c != '.' && c != '-') {
      return false;
    }
  }
  return letters >= 1 && letters <= 4;
}

struct NameParts {
  std::string family;
  std::string initials;  // letters only, e.g. "EJ"
};

// Accepts "Garfield, E.", "Garfield E.", "GARFIELD E", "Garfield, Eugene".
inline NameParts split_name(std::string_view name) {
  name = text::trim(name);
  NameParts parts;
  std::string_view given;
  if (auto comma = name.find(','); comma != std::string_view::npos) {
    parts.family = std::string(text::trim(name.substr(0, comma)));
    given = text::trim(name.substr(comma + 1));
  } else if (auto sp = name.find_last_of(' ');
             sp != std::string_view::npos &&
             looks_like_initials(name.substr(sp + 1))) {
    parts.family = std::string(text::trim(name.substr(0, sp)));
    given = name.substr(sp + 1);
  } else {
    parts.family = std::string(name);
  }
  if (looks_like_initials(given)) {
    for (char c : given) {
      if (text::is_upper(c)) parts.initials += c;
    }
    return parts;
  }
  // Full given names reduce to their first letters.
  bool at_word_start = true;
  for (char c : given) {
    if (text::is_alpha(c) && at_word_start) {
      parts.initials += text::to_upper_ascii(std::string_view(&c, 1));
    }
    at_word_start = c == ' ' || c == '.' || c == '-';
  }
  return parts;
}

}  // namespace detail

// Cited-reference author in WoS form: "GARFIELD E".
inline std::string wos_author(std::string_view name) {
  auto parts = detail::split_name(name);
  std::string out = flatten_segment(parts.family);
  if (!parts.initials.empty()) out += " " + parts.initials;
  return out;
}

// AU line form: "Garfield, E".
inline std::string wos_publication_author(std::string_view name) {
  auto parts = detail::split_name(name);
  if (parts.initials.empty()) return parts.family;
  return parts.family + ", " + parts.initials;
}

// Scopus form: "Garfield, E." / "Van Raan, A.F.J.".
inline std::string scopus_author(std::string_view name) {
  auto parts = detail::split_name(name);
  std::string out = flatten_segment(parts.family);
  if (parts.initials.empty()) return out;
  out += ", ";
  for (char c : parts.initials) {
    out += c;
    out += '.';
  }
  return out;
}

// The Authors column separates people with ", " ("Garfield E., Small H.") or,
// in newer exports, with "; ".
inline std::vector<std::string> split_scopus_authors(std::string_view cell) {
  std::vector<std::string> out;
  cell = text::trim(cell);
  if (cell.empty() || text::iequals_ascii(cell, "[No author name available]")) {
    return out;
  }
  std::string_view sep = cell.find("; ") != std::string_view::npos ? "; " : ", ";
  for (auto piece : text::split(cell, sep)) {
    piece = text::trim(piece);
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

}  // namespace crx::convert

#endif  // CRX_CONVERT_HPP_

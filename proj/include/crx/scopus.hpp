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

// Scopus CSV export. One row per citing publication; the References cell
// holds "; "-separated reference strings of the shape
//
//   Garfield, E., Citation indexes for science (1955) Science, 122, pp. 108-111
//
// which are often incomplete, so parse_scopus_cr extracts what it can and
// leaves the rest in `raw`.

#ifndef CRX_SCOPUS_HPP_
#define CRX_SCOPUS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crx/convert.hpp"
#include "crx/errors.hpp"
#include "crx/model.hpp"
#include "crx/text.hpp"
#include "crx/wos.hpp"

namespace crx::scopus {

inline constexpr std::string_view kReferencesColumn = "References";

inline constexpr std::string_view kMinimumColumns[] = {
    "Authors", "Title", "Year",  "Source title",
    "Volume",  "Page start", "DOI", "References"};

namespace detail {

struct YearMatch {
  int year = 0;
  std::size_t begin = 0;  // position of '('
  std::size_t end = 0;    // one past ')'
};

// First "(dddd)" whose value is a plausible year.
inline std::optional<YearMatch> find_year(std::string_view s) {
  for (std::size_t i = 0; i + 6 <= s.size(); ++i) {
    if (s[i] != '(' || s[i + 5] != ')') continue;
    std::string_view digits = s.substr(i + 1, 4);
    if (!text::all_digits(digits)) continue;
    int y = *text::parse_int(digits);
    if (valid_rpy(y)) return YearMatch{y, i, i + 6};
  }
  return std::nullopt;
}

inline bool is_name_byte(char c) {
  return text::is_alpha(c) || static_cast<unsigned char>(c) >= 0x80 ||
         c == ' ' || c == '-' || c == '\'' || c == '.';
}

// "E.", "A.F.J.", "J.-P.", "Th." starting at `pos`; returns one past the
// initials or npos.
inline std::size_t match_initials(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  bool any = false;
  while (i < s.size() && text::is_upper(s[i])) {
    std::size_t j = i + 1;
    if (j < s.size() && text::is_lower(s[j])) ++j;
    if (j >= s.size() || s[j] != '.') break;
    i = j + 1;
    any = true;
    if (i + 1 < s.size() && (s[i] == '-' || s[i] == ' ') &&
        text::is_upper(s[i + 1])) {
      ++i;
    }
  }
  return any ? i : std::string_view::npos;
}

// One "Surname, I." author at `pos`; returns one past it or npos.
inline std::size_t match_author(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  if (i >= s.size() || !(text::is_alpha(s[i]) ||
                         static_cast<unsigned char>(s[i]) >= 0x80)) {
    return std::string_view::npos;
  }
  while (i < s.size() && i - pos <= 64 && s[i] != ',' && is_name_byte(s[i])) ++i;
  if (i + 1 >= s.size() || s[i] != ',' || s[i + 1] != ' ') {
    return std::string_view::npos;
  }
  std::size_t end = match_initials(s, i + 2);
  if (end == std::string_view::npos) return end;
  if (end < s.size() && s[end] != ',') return std::string_view::npos;
  return end;
}

// A lone name without initials ("ANON", "[Anonymous]").
inline bool is_bare_name(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    if (!(is_name_byte(c) || c == '[' || c == ']')) return false;
  }
  return true;
}

inline std::string_view strip_commas(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.front() == ',') s = text::trim(s.substr(1));
  while (!s.empty() && s.back() == ',') s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

// Digits next to a "p." / "pp." marker: "pp. 108-111" -> 108, "113p." -> 113.
inline std::optional<std::string> find_page(std::string_view s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] != 'p') continue;
    bool single = s[i + 1] == '.';
    bool dbl = s[i + 1] == 'p' && i + 2 < s.size() && s[i + 2] == '.';
    if (!single && !dbl) continue;
    std::size_t marker_end = single ? i + 2 : i + 3;
    std::size_t d = i;
    while (d > 0 && text::is_digit(s[d - 1])) --d;
    if (d < i) return std::string(s.substr(d, i - d));
    if (i > 0 && text::is_alpha(s[i - 1])) continue;
    std::size_t j = marker_end;
    while (j < s.size() && s[j] == ' ') ++j;
    std::size_t k = j;
    while (k < s.size() && text::is_digit(s[k])) ++k;
    if (k > j) return std::string(s.substr(j, k - j));
  }
  return std::nullopt;
}

inline std::optional<std::string> find_doi(std::string_view s) {
  for (std::size_t i = 0; i + 4 < s.size(); ++i) {
    std::string_view head = s.substr(i, 4);
    if (!text::iequals_ascii(head, "DOI ") && !text::iequals_ascii(head, "doi:")) {
      continue;
    }
    if (i > 0 && text::is_alnum(s[i - 1])) continue;
    std::string_view rest = text::trim_left(s.substr(i + 4));
    std::size_t stop = rest.find(", ");
    if (stop != std::string_view::npos) rest = rest.substr(0, stop);
    std::string doi = normalize_doi(strip_commas(rest));
    if (!doi.empty()) return doi;
  }
  return std::nullopt;
}

// "p. 12", "pp. 1-9", "DOI 10.1/x": never a source.
inline bool is_marker_segment(std::string_view seg) {
  auto starts = [&](std::string_view p) {
    return seg.size() >= p.size() && text::iequals_ascii(seg.substr(0, p.size()), p);
  };
  return starts("p. ") || starts("pp. ") || starts("DOI ") || starts("doi:");
}

// Volume digits of "122" or "122 (3159)"; the issue is dropped.
inline std::optional<std::string> volume_of(std::string_view seg) {
  seg = text::trim(seg);
  std::size_t i = 0;
  while (i < seg.size() && text::is_digit(seg[i])) ++i;
  if (i == 0) return std::nullopt;
  std::string_view rest = text::trim(seg.substr(i));
  if (!rest.empty() && !(rest.front() == '(' && rest.back() == ')')) {
    return std::nullopt;
  }
  return std::string(seg.substr(0, i));
}

}  // namespace detail

// Total: never throws and `raw` is the input byte-for-byte.
inline CitedReference parse_scopus_cr(std::string_view input) {
  CitedReference cr;
  cr.origin = Origin::kScopus;
  cr.raw = std::string(input);
  std::string_view s = input;

  std::size_t pos = 0;
  while (true) {
    std::size_t end = detail::match_author(s, pos);
    if (end == std::string_view::npos) break;
    cr.authors.emplace_back(text::trim(s.substr(pos, end - pos)));
    pos = end;
    if (s.substr(pos, 2) == ", ") pos += 2;
  }

  auto year = detail::find_year(s);
  if (year && year->begin >= pos) {
    std::string_view before = s.substr(pos, year->begin - pos);
    std::string_view trimmed = text::trim(before);
    if (!trimmed.empty() && trimmed.back() == ',' &&
        detail::is_bare_name(detail::strip_commas(trimmed))) {
      cr.authors.emplace_back(detail::strip_commas(trimmed));
    } else if (auto title = detail::strip_commas(before); !title.empty()) {
      cr.title = std::string(title);
    }
  }
  if (year) {
    cr.rpy = year->year;
    std::string_view after = s.substr(year->end);
    auto segs = text::split(after, ",");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      std::string_view seg = text::trim(segs[i]);
      if (seg.empty() || detail::is_marker_segment(seg)) continue;
      cr.source = std::string(seg);
      if (i + 1 < segs.size()) cr.volume = detail::volume_of(segs[i + 1]);
      break;
    }
    cr.page = detail::find_page(after);
  } else {
    cr.page = detail::find_page(s);
  }
  cr.doi = detail::find_doi(s);
  return cr;
}

namespace detail {

inline bool same_bibliography(const CitedReference& a, const CitedReference& b) {
  return a.authors == b.authors && a.title == b.title && a.source == b.source &&
         a.rpy == b.rpy && a.volume == b.volume && a.page == b.page &&
         a.doi == b.doi;
}

// Keeps a rebuilt segment from re-splitting or growing a year marker.
inline std::string scrub(std::string_view s, bool parens) {
  std::string out = convert::flatten_segment(s);
  for (char& c : out) {
    if (c == ';') c = ' ';
    if (parens && c == '(') c = '[';
    if (parens && c == ')') c = ']';
  }
  return out;
}

// An author that re-parses as an author, never as title text.
inline std::string author_segment(std::string_view name) {
  std::string out = convert::scopus_author(scrub(name, true));
  if (match_author(out + ", ", 0) == out.size() || is_bare_name(out)) return out;
  std::string kept;
  for (char c : out) {
    if (is_name_byte(c)) kept += c;
  }
  kept = std::string(text::trim(kept));
  return is_bare_name(kept) ? kept : std::string();
}

inline std::string digits_only(std::string_view v) {
  v = text::trim(v);
  std::size_t i = 0;
  while (i < v.size() && text::is_alpha(v[i])) ++i;
  return std::string(v.substr(i));
}

}  // namespace detail

// One reference string. Unmerged Scopus references are written verbatim;
// anything else is rebuilt from its fields, and references without a title
// (all WoS-origin ones) get an empty title segment.
inline std::string format_scopus_cr(const CitedReference& cr) {
  if (cr.origin == Origin::kScopus && !cr.raw.empty() &&
      cr.raw.find("; ") == std::string::npos &&
      cr.raw.find('\n') == std::string::npos &&
      text::trim(cr.raw).size() == cr.raw.size() &&
      detail::same_bibliography(parse_scopus_cr(cr.raw), cr)) {
    return cr.raw;
  }
  std::vector<std::string> authors;
  for (const auto& a : cr.authors) {
    std::string name = detail::author_segment(a);
    if (!name.empty()) authors.push_back(std::move(name));
  }
  std::string out = text::join(authors, ", ");
  if (cr.rpy) {
    std::string title = cr.title ? detail::scrub(*cr.title, true) : "";
    if (!title.empty()) {
      out += out.empty() ? "" : ", ";
      out += title;
      out += " ";
    } else if (!out.empty()) {
      out += ", ";
    }
    out += "(" + std::to_string(*cr.rpy) + ")";
    std::string source = cr.source ? detail::scrub(*cr.source, false) : "";
    if (!source.empty()) {
      out += " " + source;
      std::string vol = cr.volume ? detail::digits_only(*cr.volume) : "";
      if (detail::volume_of(vol)) out += ", " + vol;
    }
  } else if (cr.source) {
    std::string source = detail::scrub(*cr.source, true);
    if (!source.empty()) out += (out.empty() ? "" : ", ") + source;
  }
  if (cr.page) {
    std::string page = detail::digits_only(*cr.page);
    if (text::all_digits(page)) out += (out.empty() ? "" : ", ") + ("p. " + page);
  }
  if (cr.doi && !cr.doi->empty()) {
    out += (out.empty() ? "" : ", ") + ("DOI " + detail::scrub(*cr.doi, false));
  }
  if (out.empty()) out = detail::scrub(cr.raw, true);
  if (out.empty()) out = "[unparsed reference]";
  return out;
}

// RFC 4180 reader.
struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> cells;
  std::optional<std::string> error;
};

inline std::vector<CsvRow> read_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRow> rows;
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < text.size()) {
    CsvRow row;
    row.line = line;
    std::string cell;
    bool done = false;
    bool blank = true;
    while (!done) {
      if (i >= text.size()) {
        row.cells.push_back(std::move(cell));
        break;
      }
      char c = text[i];
      if (c == '"' && cell.empty()) {
        // Quoted cell.
        blank = false;
        ++i;
        bool closed = false;
        while (i < text.size()) {
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              cell += '"';
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (text[i] == '\n') ++line;
          cell += text[i++];
        }
        if (!closed) {
          row.error = "unterminated quoted cell";
          row.cells.push_back(std::move(cell));
          done = true;
          break;
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' &&
            text[i] != '\r') {
          row.error = "text after closing quote";
          while (i < text.size() && text[i] != '\n') ++i;
        }
        continue;
      }
      if (c == ',') {
        blank = false;
        row.cells.push_back(std::move(cell));
        cell.clear();
        ++i;
        continue;
      }
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
        ++i;
        continue;
      }
      if (c == '\n') {
        row.cells.push_back(std::move(cell));
        ++i;
        ++line;
        done = true;
        continue;
      }
      if (c == '"') {
        row.error = "quote inside unquoted cell";
      }
      blank = false;
      cell += c;
      ++i;
    }
    if (blank && row.cells.size() == 1 && row.cells[0].empty() && !row.error) {
      continue;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string quote_cell(std::string_view cell) {
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct ScopusSource {
  std::string name;
  std::string text;
};

struct RowError {
  std::string source;
  std::size_t row = 0;  // 1-based data row number
  std::size_t line = 0;
  std::string message;
};

struct ScopusImport {
  Dataset dataset;
  std::vector<RowError> errors;
};

// Splits a References cell on "; "; empty pieces are dropped.
inline std::vector<std::string> split_references(std::string_view cell) {
  std::vector<std::string> out;
  for (auto piece : text::split(cell, "; ")) {
    piece = text::trim(piece);
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

inline ScopusImport parse_scopus_csv(const std::vector<ScopusSource>& sources) {
  DatasetBuilder builder(DatasetOrigin::kScopus);
  std::vector<RowError> errors;
  for (const auto& src : sources) {
    builder.add_source({src.name, "scopus", src.text});
    auto rows = read_csv(src.text);
    if (rows.empty()) throw MissingColumn(std::string(kReferencesColumn));
    const auto& header = rows.front().cells;
    std::optional<std::size_t> refs_col;
    std::optional<std::size_t> year_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
      auto name = text::trim(header[c]);
      if (!refs_col && text::iequals_ascii(name, kReferencesColumn)) refs_col = c;
      if (!year_col && text::iequals_ascii(name, "Year")) year_col = c;
    }
    if (!refs_col) throw MissingColumn(std::string(kReferencesColumn));

    for (std::size_t r = 1; r < rows.size(); ++r) {
      auto& row = rows[r];
      if (row.error || row.cells.size() > header.size()) {
        errors.push_back({src.name, r, row.line,
                          row.error.value_or("more cells than header columns")});
        continue;
      }
      row.cells.resize(header.size());
      FieldList fields;
      fields.reserve(header.size());
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == *refs_col) {
          fields.emplace_back(header[c], std::vector<std::string>{});
        } else {
          fields.emplace_back(header[c], std::vector<std::string>{row.cells[c]});
        }
      }
      std::vector<CitedReference> refs;
      for (auto& piece : split_references(row.cells[*refs_col])) {
        refs.push_back(parse_scopus_cr(piece));
      }
      std::optional<int> year;
      if (year_col) year = text::parse_int(row.cells[*year_col]);
      builder.add_publication(std::move(fields), year, std::move(refs));
    }
  }
  return {std::move(builder).finish(), std::move(errors)};
}

inline ScopusImport parse_scopus_csv(std::string_view text,
                                     std::string name = "<input>") {
  return parse_scopus_csv({ScopusSource{std::move(name), std::string(text)}});
}

namespace detail {

inline bool is_references(std::string_view column) {
  return text::iequals_ascii(text::trim(column), kReferencesColumn);
}

// WoS tag values mapped onto Scopus columns.
inline std::vector<std::pair<std::string, std::string>> wos_to_scopus_cells(
    const CitingPublication& pub, convert::LossReport* loss) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [tag, values] : pub.fields) {
    if (tag == "CR" || tag == "NR" || tag == "PT" || tag == "ER") continue;
    std::string_view column;
    for (const auto& [col, t] : convert::kScopusToWosColumns) {
      if (t == tag) column = col;
    }
    if (column.empty()) {
      if (loss && !values.empty()) loss->drop_field(tag);
      continue;
    }
    std::string value;
    if (tag == "AU") {
      std::vector<std::string> names;
      for (const auto& v : values) {
        auto parts = convert::scopus_author(v);
        // "Garfield, E." -> "Garfield E." as in the Authors column.
        if (auto comma = parts.find(", "); comma != std::string::npos) {
          parts.erase(comma, 1);
        }
        names.push_back(parts);
      }
      value = text::join(names, ", ");
    } else {
      value = text::join(values, " ");
    }
    out.emplace_back(std::string(column), std::move(value));
  }
  return out;
}

}  // namespace detail

// Header is the union of all publications' columns in first-seen order plus
// any missing minimum column. Every cell is quoted.
inline std::string write_scopus_csv(const Dataset& ds,
                                    convert::LossReport* loss = nullptr) {
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  std::vector<std::string> header;
  auto has_column = [&](std::string_view name) {
    for (const auto& h : header) {
      if (text::iequals_ascii(text::trim(h), text::trim(name))) return true;
    }
    return false;
  };

  for (const auto& pub : ds.publications) {
    std::vector<std::pair<std::string, std::string>> cells;
    if (pub.fields.empty() || !wos::has_wos_fields(pub)) {
      for (const auto& [k, v] : pub.fields) {
        cells.emplace_back(k, v.empty() ? "" : v.front());
      }
    } else {
      cells = detail::wos_to_scopus_cells(pub, loss);
    }
    std::vector<std::string> refs;
    refs.reserve(pub.cr_ids.size());
    for (const auto& id : pub.cr_ids) {
      const auto& cr = ds.crs.at(id);
      refs.push_back(format_scopus_cr(cr));
    }
    bool wrote_refs = false;
    for (auto& [k, v] : cells) {
      if (detail::is_references(k)) {
        v = text::join(refs, "; ");
        wrote_refs = true;
      }
      if (!has_column(k)) header.push_back(k);
    }
    if (!wrote_refs) cells.emplace_back(std::string(kReferencesColumn), text::join(refs, "; "));
    rows.push_back(std::move(cells));
  }
  for (auto col : kMinimumColumns) {
    if (!has_column(col)) header.emplace_back(col);
  }

  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out += ',';
    out += quote_cell(header[c]);
  }
  out += "\r\n";
  for (const auto& cells : rows) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c > 0) out += ',';
      std::string value;
      for (const auto& [k, v] : cells) {
        if (k == header[c]) {
          value = v;
          break;
        }
      }
      if (value.empty()) {
        for (const auto& [k, v] : cells) {
          if (text::iequals_ascii(text::trim(k), text::trim(header[c]))) {
            value = v;
            break;
          }
        }
      }
      out += quote_cell(value);
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace crx::scopus

#endif  // CRX_SCOPUS_HPP_

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

// Web of Science tagged plain-text export ("Other Reference Software").
//
//   FN Clarivate Analytics Web of Science
//   VR 1.0
//   PT J
//   AU Garfield, E
//   CR SMITH J, 1990, NATURE, V345, P12
//      JONES K, 1991, SCIENCE, V250, P1
//   NR 2
//   UT WOS:000000000000001
//   ER
//
//   EF
//
// A line is a 2-character tag, a space and a value; continuation lines start
// with three spaces and belong to the most recent tag. Each CR line is one
// cited-reference slot.

#ifndef CRX_WOS_HPP_
#define CRX_WOS_HPP_

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "crx/convert.hpp"
#include "crx/errors.hpp"
#include "crx/model.hpp"
#include "crx/text.hpp"

namespace crx::wos {

inline constexpr std::string_view kHeaderFn =
    "FN Clarivate Analytics Web of Science";
inline constexpr std::string_view kHeaderVr = "VR 1.0";

namespace detail {

inline bool is_year_segment(std::string_view seg) {
  return seg.size() == 4 && text::all_digits(seg);
}

inline bool is_volume_segment(std::string_view seg) {
  return seg.size() >= 2 && seg[0] == 'V' &&
         text::all_digits(seg.substr(1));
}

// "P108", "PE1234". Digit-free candidates such as "PNAS" only count as a page
// once the source is known.
inline bool is_page_segment(std::string_view seg, bool have_source) {
  if (seg.size() < 2 || seg[0] != 'P') return false;
  bool digit = false;
  for (char c : seg.substr(1)) {
    if (!text::is_alnum(c)) return false;
    digit = digit || text::is_digit(c);
  }
  return digit || have_source;
}

inline bool is_doi_segment(std::string_view seg) {
  return seg.size() > 4 && text::iequals_ascii(seg.substr(0, 4), "DOI ");
}

}  // namespace detail

// Positional grammar: AUTHOR, YEAR, SOURCE, V<vol>, P<page>, DOI <doi>.
// Never fails; unrecognized segments remain only in `raw`, which keeps the
// input byte for byte.
inline CitedReference parse_wos_cr(std::string_view line) {
  CitedReference cr;
  cr.origin = Origin::kWos;
  cr.raw = std::string(line);
  std::string_view raw = text::trim(line);

  std::size_t pos = 0;
  bool first = true;
  bool year_seen = false;
  while (pos <= raw.size()) {
    std::size_t next = raw.find(", ", pos);
    std::size_t end = next == std::string_view::npos ? raw.size() : next;
    std::string_view seg = text::trim(raw.substr(pos, end - pos));

    if (first && !detail::is_year_segment(seg)) {
      if (!seg.empty()) cr.authors.emplace_back(seg);
    } else if (detail::is_doi_segment(seg)) {
      std::string_view rest = text::trim(raw.substr(pos));
      std::string doi = normalize_doi(rest.substr(4));
      if (!doi.empty()) cr.doi = std::move(doi);
      break;
    } else if (!year_seen && detail::is_year_segment(seg) &&
               valid_rpy(*text::parse_int(seg))) {
      cr.rpy = *text::parse_int(seg);
      year_seen = true;
    } else if (detail::is_volume_segment(seg)) {
      if (!cr.volume) cr.volume = std::string(seg);
    } else if (detail::is_page_segment(seg, cr.source.has_value())) {
      if (!cr.page) cr.page = std::string(seg);
    } else if (year_seen && !cr.source && !seg.empty()) {
      cr.source = std::string(seg);
    }
    first = false;
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  return cr;
}

namespace detail {

inline bool is_tag_char(char c) { return text::is_upper(c) || text::is_digit(c); }

inline bool is_tag_line(std::string_view line) {
  return line.size() >= 2 && text::is_upper(line[0]) && is_tag_char(line[1]) &&
         (line.size() == 2 || line[2] == ' ');
}

inline std::string tag_value(std::string_view line) {
  return line.size() > 3 ? std::string(text::trim_right(line.substr(3))) : "";
}

inline std::string continuation_value(std::string_view line) {
  std::size_t skip = 0;
  while (skip < 3 && skip < line.size() && line[skip] == ' ') ++skip;
  return std::string(text::trim_right(line.substr(skip)));
}

struct PendingRecord {
  std::size_t start_line = 0;
  FieldList fields;
  std::vector<std::string> cr_lines;
  std::string text;

  bool field(std::string_view tag) const {
    for (const auto& f : fields) {
      if (f.first == tag) return true;
    }
    return false;
  }
};

inline std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string_view> lines = text::split(text, "\n");
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

}  // namespace detail

struct WosSource {
  std::string name;
  std::string text;
};

// Parses one or more export files into a single dataset, in input order.
// Records whose UT (or, lacking one, whose full text) was already seen are
// skipped.
inline Dataset parse_wos(const std::vector<WosSource>& sources) {
  DatasetBuilder builder(DatasetOrigin::kWos);
  std::unordered_set<std::string> seen;

  for (const auto& src : sources) {
    builder.add_source({src.name, "wos", src.text});
    auto lines = detail::split_lines(src.text);

    bool saw_fn = false;
    bool saw_ef = false;
    bool in_cr = false;
    std::optional<detail::PendingRecord> rec;

    auto finish = [&](detail::PendingRecord& r) {
      std::string key;
      std::optional<int> year;
      for (const auto& [tag, values] : r.fields) {
        if (tag == "UT" && key.empty() && !values.empty()) {
          key = "UT:" + std::string(text::trim(values.front()));
        }
        if (tag == "PY" && !year && !values.empty()) {
          year = text::parse_int(values.front());
        }
      }
      if (key.empty()) key = "TEXT:" + r.text;
      if (!seen.insert(key).second) return;
      std::vector<CitedReference> refs;
      refs.reserve(r.cr_lines.size());
      for (const auto& l : r.cr_lines) refs.push_back(parse_wos_cr(text::trim(l)));
      builder.add_publication(std::move(r.fields), year, std::move(refs));
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      std::string_view line = lines[i];
      if (text::trim(line).empty()) continue;
      if (saw_ef) {
        throw MalformedFile(src.name, lineno, "content after EF");
      }
      if (!saw_fn) {
        if (!detail::is_tag_line(line) || line.substr(0, 2) != "FN") {
          throw MalformedFile(src.name, lineno, "missing FN header");
        }
        saw_fn = true;
        continue;
      }

      if (!detail::is_tag_line(line)) {
        if (!rec) {
          throw MalformedFile(src.name, lineno, "text outside a record");
        }
        std::string value = detail::continuation_value(line);
        rec->text += value;
        rec->text += '\n';
        if (in_cr) {
          rec->cr_lines.push_back(std::move(value));
        } else {
          rec->fields.back().second.push_back(std::move(value));
        }
        continue;
      }

      std::string tag(line.substr(0, 2));
      std::string value = detail::tag_value(line);
      if (tag == "EF") {
        if (rec) {
          throw MalformedRecord(src.name, rec->start_line,
                                "record not terminated by ER");
        }
        saw_ef = true;
        continue;
      }
      if (!rec) {
        if (tag == "FN" || tag == "VR") continue;
        if (tag == "ER") {
          throw MalformedRecord(src.name, lineno, "ER without a record");
        }
        rec.emplace();
        rec->start_line = lineno;
      }
      if (tag == "ER") {
        finish(*rec);
        rec.reset();
        in_cr = false;
        continue;
      }
      rec->text += std::string(line);
      rec->text += '\n';
      in_cr = tag == "CR";
      if (in_cr) {
        // A repeated CR tag folds into the position of the first one.
        if (!rec->field("CR")) rec->fields.emplace_back("CR", std::vector<std::string>{});
        if (!value.empty()) rec->cr_lines.push_back(std::move(value));
        continue;
      }
      rec->fields.emplace_back(std::move(tag), std::vector<std::string>{std::move(value)});
    }

    if (rec) {
      throw MalformedRecord(src.name, rec->start_line,
                            "record not terminated by ER");
    }
    if (!saw_fn) throw MalformedFile(src.name, 1, "missing FN header");
    if (!saw_ef) {
      throw MalformedFile(src.name, lines.size(), "missing EF terminator");
    }
  }
  return std::move(builder).finish();
}

inline Dataset parse_wos(std::string_view text, std::string name = "<input>") {
  return parse_wos({WosSource{std::move(name), std::string(text)}});
}

namespace detail {

inline bool same_bibliography(const CitedReference& a, const CitedReference& b) {
  return a.authors == b.authors && a.title == b.title && a.source == b.source &&
         a.rpy == b.rpy && a.volume == b.volume && a.page == b.page &&
         a.doi == b.doi;
}

inline std::string marked(std::string_view value, char marker) {
  std::string v(text::trim(value));
  std::size_t i = 0;
  while (i < v.size() && (v[i] == marker || v[i] == marker + ('a' - 'A'))) ++i;
  return std::string(1, marker) + v.substr(i);
}

}  // namespace detail

// One WoS CR line. Emits at most the first author and never a title.
inline std::string format_wos_cr(const CitedReference& cr) {
  if (cr.origin == Origin::kWos &&
      detail::same_bibliography(parse_wos_cr(cr.raw), cr) &&
      !cr.raw.empty() && text::trim(cr.raw) == cr.raw &&
      cr.raw.find_first_of("\r\n") == std::string::npos) {
    return cr.raw;
  }
  std::vector<std::string> parts;
  if (!cr.authors.empty()) {
    std::string author = convert::wos_author(cr.authors.front());
    if (!author.empty() && !detail::is_year_segment(author)) {
      parts.push_back(std::move(author));
    }
  }
  if (cr.rpy) parts.push_back(std::to_string(*cr.rpy));
  if (cr.source && cr.rpy) parts.push_back(convert::flatten_segment(*cr.source));
  if (cr.volume) parts.push_back(detail::marked(*cr.volume, 'V'));
  if (cr.page) parts.push_back(detail::marked(*cr.page, 'P'));
  if (cr.doi) parts.push_back("DOI " + *cr.doi);
  if (parts.empty()) return convert::flatten_segment(cr.raw);
  return text::join(parts, ", ");
}

inline bool has_wos_fields(const CitingPublication& pub) {
  for (const auto& [k, v] : pub.fields) {
    if (!detail::is_tag_line(k)) return false;
  }
  return !pub.fields.empty();
}

namespace detail {

inline void emit(std::string& out, std::string_view tag,
                 const std::vector<std::string>& values) {
  out += tag;
  if (values.empty()) {
    out += '\n';
    return;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == 0) {
      if (!values[0].empty()) {
        out += ' ';
        out += values[0];
      }
    } else {
      out += "   ";
      out += values[i];
    }
    out += '\n';
  }
}

inline std::vector<std::string> cr_lines(const Dataset& ds,
                                         const CitingPublication& pub) {
  std::vector<std::string> out;
  out.reserve(pub.cr_ids.size());
  for (const auto& id : pub.cr_ids) out.push_back(format_wos_cr(ds.crs.at(id)));
  return out;
}

// Scopus column -> WoS tag for the columns with a WoS counterpart.
inline FieldList scopus_to_wos_fields(const CitingPublication& pub,
                                      convert::LossReport* loss) {
  FieldList out;
  out.emplace_back("PT", std::vector<std::string>{"J"});
  auto cell = [&](std::string_view column) -> std::string {
    for (const auto& [k, v] : pub.fields) {
      if (text::iequals_ascii(text::trim(k), column) && !v.empty()) {
        return std::string(text::trim(v.front()));
      }
    }
    return {};
  };
  std::vector<std::string> authors;
  for (const auto& a : convert::split_scopus_authors(cell("Authors"))) {
    authors.push_back(convert::wos_publication_author(a));
  }
  if (!authors.empty()) out.emplace_back("AU", authors);
  for (const auto& [column, tag] : convert::kScopusToWosColumns) {
    if (column == "Authors") continue;
    std::string v = cell(column);
    if (!v.empty()) out.emplace_back(std::string(tag), std::vector<std::string>{v});
  }
  out.emplace_back("CR", std::vector<std::string>{});
  out.emplace_back("NR", std::vector<std::string>{});
  std::string eid = cell("EID");
  if (!eid.empty()) out.emplace_back("UT", std::vector<std::string>{eid});
  if (loss) {
    for (const auto& [k, v] : pub.fields) {
      bool mapped = text::iequals_ascii(text::trim(k), "References") ||
                    text::iequals_ascii(text::trim(k), "EID");
      for (const auto& [column, tag] : convert::kScopusToWosColumns) {
        mapped = mapped || text::iequals_ascii(text::trim(k), column);
      }
      bool empty = v.empty() || text::trim(v.front()).empty();
      if (!mapped && !empty) loss->drop_field(std::string(text::trim(k)));
    }
  }
  return out;
}

}  // namespace detail

// Serializes a dataset of any origin. Publications that came from Scopus are
// mapped column-by-column; columns without a WoS tag are dropped and, when
// `loss` is given, counted there.
inline std::string write_wos(const Dataset& ds,
                             convert::LossReport* loss = nullptr) {
  std::string out;
  out += kHeaderFn;
  out += '\n';
  out += kHeaderVr;
  out += '\n';
  for (const auto& pub : ds.publications) {
    FieldList fields = has_wos_fields(pub)
                           ? pub.fields
                           : detail::scopus_to_wos_fields(pub, loss);
    bool wrote_cr = false;
    std::vector<std::string> refs = detail::cr_lines(ds, pub);
    if (loss) {
      for (const auto& id : pub.cr_ids) {
        const auto& cr = ds.crs.at(id);
        if (cr.authors.size() > 1) {
          loss->drop_cr_field("additional CR authors", cr.authors.size() - 1);
        }
        if (cr.title) loss->drop_cr_field("CR title", 1);
      }
    }
    for (const auto& [tag, values] : fields) {
      if (tag == "ER") continue;
      if (tag == "CR") {
        if (!wrote_cr && !refs.empty()) detail::emit(out, "CR", refs);
        wrote_cr = true;
        continue;
      }
      if (tag == "NR") {
        detail::emit(out, "NR", {std::to_string(pub.cr_ids.size())});
        continue;
      }
      detail::emit(out, tag, values);
    }
    if (!wrote_cr && !refs.empty()) detail::emit(out, "CR", refs);
    out += "ER\n\n";
  }
  out += "EF\n";
  return out;
}

}  // namespace crx::wos

#endif  // CRX_WOS_HPP_

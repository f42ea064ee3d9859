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

// Shared data model: publications, cited references (CRs), datasets and
// match decisions, plus the normalization every other module keys on.

#ifndef CRX_MODEL_HPP_
#define CRX_MODEL_HPP_

#include <compare>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crx/errors.hpp"
#include "crx/text.hpp"

namespace crx {

template <typename Tag>
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;
  friend bool operator==(const Identifier&, const Identifier&) = default;

 private:
  std::string value_;
};

using CrId = Identifier<struct CrIdTag>;
using PublicationId = Identifier<struct PublicationIdTag>;

inline constexpr int kMinRpy = 1000;
inline constexpr int kMaxRpy = 2999;

inline bool valid_rpy(int year) { return year >= kMinRpy && year <= kMaxRpy; }

enum class Origin { kWos, kScopus };
enum class DatasetOrigin { kWos, kScopus, kMixed };

inline std::string_view to_string(Origin o) {
  return o == Origin::kWos ? "WOS" : "SCOPUS";
}

inline std::string_view to_string(DatasetOrigin o) {
  switch (o) {
    case DatasetOrigin::kWos:
      return "WOS";
    case DatasetOrigin::kScopus:
      return "SCOPUS";
    case DatasetOrigin::kMixed:
      return "MIXED";
  }
  return "MIXED";
}

struct CitedReference {
  CrId id;
  std::string raw;
  std::vector<std::string> authors;
  std::optional<std::string> title;
  std::optional<std::string> source;
  std::optional<int> rpy;
  std::optional<std::string> volume;
  std::optional<std::string> page;
  std::optional<std::string> doi;
  Origin origin = Origin::kWos;
  std::int64_t n_cr = 1;

  // Number of bibliographic fields present (authors count as one).
  int present_fields() const {
    return (authors.empty() ? 0 : 1) + title.has_value() + source.has_value() +
           rpy.has_value() + volume.has_value() + page.has_value() +
           doi.has_value();
  }

  friend bool operator==(const CitedReference&,
                         const CitedReference&) = default;
};

// Vendor fields in source order. WoS: tag -> lines; Scopus: column -> one
// cell. Duplicate keys are allowed and kept in place.
using FieldList = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct CitingPublication {
  PublicationId id;
  FieldList fields;
  std::optional<int> pub_year;
  std::vector<CrId> cr_ids;

  const std::vector<std::string>* field(std::string_view key) const {
    for (const auto& [k, v] : fields) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  friend bool operator==(const CitingPublication&,
                         const CitingPublication&) = default;
};

struct SourceFile {
  std::string name;
  std::string format;  // "wos" or "scopus"
  std::string text;

  friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct Dataset {
  DatasetOrigin origin = DatasetOrigin::kWos;
  std::vector<CitingPublication> publications;
  std::map<CrId, CitedReference> crs;
  std::vector<SourceFile> sources;

  const CitedReference* find(const CrId& id) const {
    auto it = crs.find(id);
    return it == crs.end() ? nullptr : &it->second;
  }

  std::int64_t total_n_cr() const {
    std::int64_t total = 0;
    for (const auto& [id, cr] : crs) total += cr.n_cr;
    return total;
  }

  std::int64_t total_slots() const {
    std::int64_t total = 0;
    for (const auto& p : publications) {
      total += static_cast<std::int64_t>(p.cr_ids.size());
    }
    return total;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Publications and CR table only; ignores provenance.
inline bool same_content(const Dataset& a, const Dataset& b) {
  return a.origin == b.origin && a.publications == b.publications &&
         a.crs == b.crs;
}

inline CrId make_cr_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%07zu", index);
  return CrId(buf);
}

inline PublicationId make_publication_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%07zu", index);
  return PublicationId(buf);
}

// Orderless pair of distinct CR ids; `first` < `second`.
struct CrPair {
  CrId first;
  CrId second;

  static CrPair of(CrId a, CrId b) {
    if (a == b) throw std::invalid_argument("pair of identical CR ids");
    if (b < a) std::swap(a, b);
    return CrPair{std::move(a), std::move(b)};
  }

  friend auto operator<=>(const CrPair&, const CrPair&) = default;
  friend bool operator==(const CrPair&, const CrPair&) = default;
};

enum class Verdict { kSame, kDifferent };
enum class Provenance { kAlgorithm, kManual };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::kSame ? "SAME" : "DIFFERENT";
}

inline std::string_view to_string(Provenance p) {
  return p == Provenance::kAlgorithm ? "ALGORITHM" : "MANUAL";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  if (text::iequals_ascii(s, "SAME")) return Verdict::kSame;
  if (text::iequals_ascii(s, "DIFFERENT")) return Verdict::kDifferent;
  return std::nullopt;
}

struct MatchDecision {
  CrPair pair;
  Verdict verdict = Verdict::kSame;
  Provenance provenance = Provenance::kManual;
  std::optional<double> score;

  friend bool operator==(const MatchDecision&, const MatchDecision&) = default;
};

// Manual decisions keyed by orderless pair; at most one per pair.
using DecisionSet = std::map<CrPair, MatchDecision>;

class UnknownCrId : public DataError {
 public:
  explicit UnknownCrId(const CrId& id)
      : DataError("unknown cited reference id: " + id.str()),
        id_(id) {}
  const CrId& id() const { return id_; }

 private:
  CrId id_;
};

struct NormalizedKey {
  std::string surname;
  std::optional<int> rpy;
  std::string source_norm;
  std::string volume_norm;
  std::string page_norm;
  std::optional<std::string> doi;

  friend bool operator==(const NormalizedKey&, const NormalizedKey&) = default;
};

namespace detail {

// "VAN RAAN AFJ" -> "VAN RAAN", "Garfield, E." -> "Garfield".
inline std::string family_name(std::string_view name) {
  name = text::trim(name);
  if (auto comma = name.find(','); comma != std::string_view::npos) {
    return std::string(text::trim(name.substr(0, comma)));
  }
  auto last_space = name.find_last_of(' ');
  if (last_space == std::string_view::npos) return std::string(name);
  std::string_view last = name.substr(last_space + 1);
  bool initials = !last.empty() && last.size() <= 8;
  int letters = 0;
  for (char c : last) {
    if (text::is_upper(c)) {
      ++letters;
    } else if (c != '.' && c != '-') {
      initials = false;
    }
  }
  if (initials && letters >= 1 && letters <= 4) {
    return std::string(text::trim(name.substr(0, last_space)));
  }
  return std::string(name);
}

inline std::string strip_marker(std::string s, char marker) {
  std::size_t i = 0;
  while (i < s.size() && s[i] == marker) ++i;
  if (i > 0 && i < s.size() && text::is_digit(s[i])) s.erase(0, i);
  return s;
}

}  // namespace detail

inline std::string normalize_doi(std::string_view doi) {
  return text::to_lower_ascii(text::trim(doi));
}

inline std::string author_surname(const CitedReference& cr) {
  if (cr.authors.empty()) return {};
  return text::fold_name(detail::family_name(cr.authors.front()));
}

inline NormalizedKey canonical_key(const CitedReference& cr) {
  NormalizedKey key;
  key.surname = author_surname(cr);
  key.rpy = cr.rpy;
  key.source_norm = text::normalize_field(cr.source.value_or(""));
  key.volume_norm =
      detail::strip_marker(text::normalize_field(cr.volume.value_or("")), 'v');
  key.page_norm =
      detail::strip_marker(text::normalize_field(cr.page.value_or("")), 'p');
  if (cr.doi) key.doi = normalize_doi(*cr.doi);
  return key;
}

struct DetailRow {
  std::string label;
  std::string value;

  friend bool operator==(const DetailRow&, const DetailRow&) = default;
};

using DetailRecord = std::vector<DetailRow>;

// Every present field, then occurrence count, origin and the raw string.
inline DetailRecord display_details(const CitedReference& cr) {
  DetailRecord rows;
  if (!cr.authors.empty()) rows.push_back({"Authors", text::join(cr.authors, "; ")});
  if (cr.title) rows.push_back({"Title", *cr.title});
  if (cr.source) rows.push_back({"Source", *cr.source});
  if (cr.rpy) rows.push_back({"RPY", std::to_string(*cr.rpy)});
  if (cr.volume) rows.push_back({"Volume", *cr.volume});
  if (cr.page) rows.push_back({"Page", *cr.page});
  if (cr.doi) rows.push_back({"DOI", *cr.doi});
  rows.push_back({"N_CR", std::to_string(cr.n_cr)});
  rows.push_back({"Origin", std::string(to_string(cr.origin))});
  rows.push_back({"Raw", cr.raw});
  return rows;
}

// Collects publications and collapses byte-identical (after trimming) CR
// strings into one entry with a summed occurrence count.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(DatasetOrigin origin) { dataset_.origin = origin; }

  void add_source(SourceFile source) {
    dataset_.sources.push_back(std::move(source));
  }

  // `refs` are parsed CRs without ids; returns the new publication's id.
  PublicationId add_publication(FieldList fields, std::optional<int> pub_year,
                                std::vector<CitedReference> refs) {
    CitingPublication pub;
    pub.id = make_publication_id(dataset_.publications.size() + 1);
    pub.fields = std::move(fields);
    pub.pub_year = pub_year;
    for (auto& ref : refs) pub.cr_ids.push_back(intern(std::move(ref)));
    dataset_.publications.push_back(std::move(pub));
    return dataset_.publications.back().id;
  }

  Dataset finish() && { return std::move(dataset_); }

 private:
  CrId intern(CitedReference ref) {
    auto it = by_raw_.find(ref.raw);
    if (it != by_raw_.end()) {
      ++dataset_.crs.at(it->second).n_cr;
      return it->second;
    }
    ref.id = make_cr_id(by_raw_.size() + 1);
    ref.n_cr = 1;
    CrId id = ref.id;
    by_raw_.emplace(ref.raw, id);
    dataset_.crs.emplace(id, std::move(ref));
    return id;
  }

  Dataset dataset_;
  std::unordered_map<std::string, CrId> by_raw_;
};

}  // namespace crx

template <typename Tag>
struct std::hash<crx::Identifier<Tag>> {
  std::size_t operator()(const crx::Identifier<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

#endif  // CRX_MODEL_HPP_

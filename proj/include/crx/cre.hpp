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

// `.cre` working files. Layout (see docs/cre-format.md):
//
//   bytes 0..3   "CRE1"
//   bytes 4..7   format version, uint32 little-endian
//   bytes 8..15  length of the JSON document, uint64 little-endian
//   bytes 16..   zlib stream of the JSON document
//
// The document holds the dataset (including the raw source texts), the
// cluster state, the manual decisions and the similarity configuration.
// Manual decisions also carry SHA-256 digests of both reference strings so
// they can be re-attached after the same sources are imported again.

#ifndef CRX_CRE_HPP_
#define CRX_CRE_HPP_

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>
#include <zlib.h>

#include "crx/errors.hpp"
#include "crx/matching.hpp"
#include "crx/model.hpp"

namespace crx::cre {

inline constexpr std::string_view kMagic = "CRE1";
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;

struct WorkingState {
  Dataset dataset;
  ClusterState cluster_state;
  SimilarityConfig config;
  std::uint32_t format_version = kFormatVersion;

  friend bool operator==(const WorkingState&, const WorkingState&) = default;
};

// Every CR as its own cluster, default configuration.
inline WorkingState fresh_state(Dataset ds) {
  WorkingState st;
  for (const auto& [id, cr] : ds.crs) st.cluster_state.parent.emplace(id, id);
  st.dataset = std::move(ds);
  return st;
}

class CreError : public DataError {
 public:
  using DataError::DataError;
};

class BadMagic : public CreError {
 public:
  BadMagic() : CreError("not a .cre file (bad magic)") {}
};

class UnsupportedVersion : public CreError {
 public:
  explicit UnsupportedVersion(std::uint32_t v)
      : CreError("unsupported .cre version " + std::to_string(v)), version_(v) {}
  std::uint32_t version() const { return version_; }

 private:
  std::uint32_t version_;
};

class CorruptPayload : public CreError {
 public:
  explicit CorruptPayload(const std::string& detail)
      : CreError("corrupt .cre payload: " + detail) {}
};

inline std::string raw_digest(std::string_view raw) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(raw.data(), raw.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

namespace detail {

using nlohmann::json;

// Strings are stored as JSON strings when they are valid UTF-8 and as
// {"hex": "..."} otherwise, so arbitrary vendor bytes survive exactly.
inline json str(const std::string& s) {
  if (text::is_valid_utf8(s)) return s;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * s.size());
  for (unsigned char c : s) {
    hex += kHex[c >> 4];
    hex += kHex[c & 0xF];
  }
  return {{"hex", hex}};
}

inline std::string str_from(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  const std::string& hex = j.at("hex").get_ref<const std::string&>();
  if (hex.size() % 2 != 0) throw CorruptPayload("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw CorruptPayload("bad hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out += static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1]));
  }
  return out;
}

inline json strs(const std::vector<std::string>& v) {
  json out = json::array();
  for (const auto& s : v) out.push_back(str(s));
  return out;
}

inline std::vector<std::string> strs_from(const json& j) {
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(str_from(e));
  return out;
}

inline json opt(const std::optional<std::string>& v) {
  return v ? str(*v) : json(nullptr);
}

inline json opt(const std::optional<int>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json opt(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if constexpr (std::is_same_v<T, std::string>) {
    return str_from(j.at(key));
  } else {
    return j.at(key).get<T>();
  }
}

inline std::string_view origin_name(Origin o) { return to_string(o); }

inline Origin parse_origin(const std::string& s) {
  if (s == "WOS") return Origin::kWos;
  if (s == "SCOPUS") return Origin::kScopus;
  throw CorruptPayload("unknown CR origin '" + s + "'");
}

inline DatasetOrigin parse_dataset_origin(const std::string& s) {
  if (s == "WOS") return DatasetOrigin::kWos;
  if (s == "SCOPUS") return DatasetOrigin::kScopus;
  if (s == "MIXED") return DatasetOrigin::kMixed;
  throw CorruptPayload("unknown dataset origin '" + s + "'");
}

inline json to_json(const SimilarityConfig& c) {
  return {{"threshold", c.threshold},
          {"weights",
           {{"author", c.weights.author},
            {"source_or_title", c.weights.source_or_title},
            {"volume", c.weights.volume},
            {"page", c.weights.page}}},
          {"same_rpy_only", c.same_rpy_only},
          {"rpy_slack", c.rpy_slack}};
}

inline SimilarityConfig config_from_json(const json& j) {
  SimilarityConfig c;
  c.threshold = j.at("threshold").get<double>();
  const json& w = j.at("weights");
  c.weights.author = w.at("author").get<double>();
  c.weights.source_or_title = w.at("source_or_title").get<double>();
  c.weights.volume = w.at("volume").get<double>();
  c.weights.page = w.at("page").get<double>();
  c.same_rpy_only = j.at("same_rpy_only").get<bool>();
  c.rpy_slack = j.at("rpy_slack").get<int>();
  return c;
}

inline json to_json(const CitedReference& cr) {
  return {{"id", cr.id.str()},       {"raw", str(cr.raw)},
          {"authors", strs(cr.authors)}, {"title", opt(cr.title)},
          {"source", opt(cr.source)}, {"rpy", opt(cr.rpy)},
          {"volume", opt(cr.volume)}, {"page", opt(cr.page)},
          {"doi", opt(cr.doi)},      {"origin", std::string(origin_name(cr.origin))},
          {"n_cr", cr.n_cr}};
}

inline CitedReference cr_from_json(const json& j) {
  CitedReference cr;
  cr.id = CrId(j.at("id").get<std::string>());
  cr.raw = str_from(j.at("raw"));
  cr.authors = strs_from(j.at("authors"));
  cr.title = get_opt<std::string>(j, "title");
  cr.source = get_opt<std::string>(j, "source");
  cr.rpy = get_opt<int>(j, "rpy");
  cr.volume = get_opt<std::string>(j, "volume");
  cr.page = get_opt<std::string>(j, "page");
  cr.doi = get_opt<std::string>(j, "doi");
  cr.origin = parse_origin(j.at("origin").get<std::string>());
  cr.n_cr = j.at("n_cr").get<std::int64_t>();
  return cr;
}

inline json to_json(const CitingPublication& p) {
  json fields = json::array();
  for (const auto& [k, v] : p.fields) fields.push_back(json::array({str(k), strs(v)}));
  std::vector<std::string> ids;
  ids.reserve(p.cr_ids.size());
  for (const auto& id : p.cr_ids) ids.push_back(id.str());
  return {{"id", p.id.str()},
          {"fields", std::move(fields)},
          {"pub_year", opt(p.pub_year)},
          {"cr_ids", std::move(ids)}};
}

inline CitingPublication publication_from_json(const json& j) {
  CitingPublication p;
  p.id = PublicationId(j.at("id").get<std::string>());
  for (const auto& f : j.at("fields")) {
    p.fields.emplace_back(str_from(f.at(0)), strs_from(f.at(1)));
  }
  p.pub_year = get_opt<int>(j, "pub_year");
  for (const auto& id : j.at("cr_ids")) p.cr_ids.emplace_back(id.get<std::string>());
  return p;
}

inline json to_json(const WorkingState& st) {
  const Dataset& ds = st.dataset;
  json pubs = json::array();
  for (const auto& p : ds.publications) pubs.push_back(to_json(p));
  json crs = json::array();
  for (const auto& [id, cr] : ds.crs) crs.push_back(to_json(cr));
  json sources = json::array();
  for (const auto& s : ds.sources) {
    sources.push_back(
        {{"name", str(s.name)}, {"format", s.format}, {"text", str(s.text)}});
  }

  json parent = json::object();
  for (const auto& [id, root] : st.cluster_state.parent) parent[id.str()] = root.str();
  json edges = json::array();
  for (const auto& [pair, score] : st.cluster_state.pair_scores) {
    edges.push_back(json::array({pair.first.str(), pair.second.str(), score}));
  }
  json decisions = json::array();
  for (const auto& [pair, d] : st.cluster_state.decisions) {
    const CitedReference* a = ds.find(pair.first);
    const CitedReference* b = ds.find(pair.second);
    decisions.push_back({{"a", pair.first.str()},
                         {"b", pair.second.str()},
                         {"a_digest", a ? raw_digest(a->raw) : ""},
                         {"b_digest", b ? raw_digest(b->raw) : ""},
                         {"verdict", std::string(to_string(d.verdict))},
                         {"provenance", std::string(to_string(d.provenance))},
                         {"score", opt(d.score)}});
  }

  return {{"format", "crx-working-state"},
          {"format_version", st.format_version},
          {"config", to_json(st.config)},
          {"dataset",
           {{"origin", std::string(to_string(ds.origin))},
            {"publications", std::move(pubs)},
            {"crs", std::move(crs)},
            {"sources", std::move(sources)}}},
          {"clusters",
           {{"parent", std::move(parent)},
            {"pair_scores", std::move(edges)},
            {"decisions", std::move(decisions)}}}};
}

inline void validate(const WorkingState& st) {
  const Dataset& ds = st.dataset;
  std::int64_t n_cr = 0;
  for (const auto& [id, cr] : ds.crs) {
    if (cr.id != id) throw CorruptPayload("CR key mismatch for " + id.str());
    if (cr.raw.empty()) throw CorruptPayload("empty raw string in " + id.str());
    if (cr.n_cr < 1) throw CorruptPayload("non-positive n_cr in " + id.str());
    if (cr.rpy && !valid_rpy(*cr.rpy)) {
      throw CorruptPayload("year out of range in " + id.str());
    }
    n_cr += cr.n_cr;
  }
  for (const auto& p : ds.publications) {
    for (const auto& id : p.cr_ids) {
      if (!ds.crs.count(id)) {
        throw CorruptPayload("publication " + p.id.str() +
                             " references missing CR " + id.str());
      }
    }
  }
  if (n_cr != ds.total_slots()) {
    throw CorruptPayload("occurrence counts do not match citing slots");
  }
  const ClusterState& cs = st.cluster_state;
  if (cs.parent.size() != ds.crs.size()) {
    throw CorruptPayload("cluster state does not cover the CR table");
  }
  for (const auto& [id, root] : cs.parent) {
    if (!ds.crs.count(id) || !ds.crs.count(root)) {
      throw CorruptPayload("cluster state references missing CR " + id.str());
    }
  }
  for (const auto& [pair, score] : cs.pair_scores) {
    if (!ds.crs.count(pair.first) || !ds.crs.count(pair.second)) {
      throw CorruptPayload("edge references missing CR");
    }
  }
  for (const auto& [pair, d] : cs.decisions) {
    if (!ds.crs.count(pair.first) || !ds.crs.count(pair.second)) {
      throw CorruptPayload("decision references missing CR");
    }
  }
  try {
    st.config.validate();
  } catch (const InvalidConfig& e) {
    throw CorruptPayload(e.what());
  }
}

inline WorkingState state_from_json(const json& j) {
  if (j.value("format", "") != "crx-working-state") {
    throw CorruptPayload("unexpected document format");
  }
  WorkingState st;
  st.format_version = j.at("format_version").get<std::uint32_t>();
  st.config = config_from_json(j.at("config"));

  const json& d = j.at("dataset");
  Dataset& ds = st.dataset;
  ds.origin = parse_dataset_origin(d.at("origin").get<std::string>());
  for (const auto& p : d.at("publications")) {
    ds.publications.push_back(publication_from_json(p));
  }
  for (const auto& c : d.at("crs")) {
    CitedReference cr = cr_from_json(c);
    CrId id = cr.id;
    if (!ds.crs.emplace(id, std::move(cr)).second) {
      throw CorruptPayload("duplicate CR id " + id.str());
    }
  }
  for (const auto& s : d.at("sources")) {
    ds.sources.push_back({str_from(s.at("name")),
                          s.at("format").get<std::string>(),
                          str_from(s.at("text"))});
  }

  const json& c = j.at("clusters");
  ClusterState& cs = st.cluster_state;
  for (const auto& [id, root] : c.at("parent").items()) {
    cs.parent.emplace(CrId(id), CrId(root.get<std::string>()));
  }
  for (const auto& e : c.at("pair_scores")) {
    CrPair pair = CrPair::of(CrId(e.at(0).get<std::string>()),
                             CrId(e.at(1).get<std::string>()));
    cs.pair_scores.emplace(pair, e.at(2).get<double>());
  }
  for (const auto& e : c.at("decisions")) {
    CrId a(e.at("a").get<std::string>());
    CrId b(e.at("b").get<std::string>());
    for (const auto& [id, key] : {std::pair{a, "a_digest"}, std::pair{b, "b_digest"}}) {
      const CitedReference* cr = ds.find(id);
      if (!cr) throw CorruptPayload("decision references missing CR " + id.str());
      if (raw_digest(cr->raw) != e.at(key).get<std::string>()) {
        throw CorruptPayload("decision digest mismatch for " + id.str());
      }
    }
    MatchDecision md;
    md.pair = CrPair::of(a, b);
    auto verdict = parse_verdict(e.at("verdict").get<std::string>());
    if (!verdict) throw CorruptPayload("bad verdict");
    md.verdict = *verdict;
    std::string prov = e.at("provenance").get<std::string>();
    if (prov == "MANUAL") {
      md.provenance = Provenance::kManual;
    } else if (prov == "ALGORITHM") {
      md.provenance = Provenance::kAlgorithm;
    } else {
      throw CorruptPayload("bad provenance '" + prov + "'");
    }
    md.score = get_opt<double>(e, "score");
    if (!cs.decisions.emplace(md.pair, md).second) {
      throw CorruptPayload("two decisions on one pair");
    }
  }
  validate(st);
  return st;
}

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline std::uint64_t get_le(std::string_view in, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(in[static_cast<std::size_t>(i)]);
  }
  return v;
}

}  // namespace detail

// Serialized bytes of `st`; identical states give identical bytes.
inline std::string encode_cre(const WorkingState& st) {
  std::string doc = detail::to_json(st).dump();
  uLongf bound = compressBound(static_cast<uLong>(doc.size()));
  std::string packed(bound, '\0');
  int rc = compress2(reinterpret_cast<Bytef*>(packed.data()), &bound,
                     reinterpret_cast<const Bytef*>(doc.data()),
                     static_cast<uLong>(doc.size()), Z_BEST_COMPRESSION);
  if (rc != Z_OK) throw std::runtime_error("zlib compression failed");
  packed.resize(bound);

  std::string out(kMagic);
  detail::put_le(out, st.format_version, 4);
  detail::put_le(out, doc.size(), 8);
  out += packed;
  return out;
}

inline WorkingState decode_cre(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagic();
  }
  if (bytes.size() < kHeaderSize) throw CorruptPayload("truncated header");
  auto version = static_cast<std::uint32_t>(detail::get_le(bytes.substr(4), 4));
  if (version == 0 || version > kFormatVersion) throw UnsupportedVersion(version);
  std::uint64_t length = detail::get_le(bytes.substr(8), 8);
  if (length > (std::uint64_t{1} << 34)) throw CorruptPayload("implausible length");

  std::string doc(static_cast<std::size_t>(length), '\0');
  uLongf out_len = static_cast<uLongf>(length);
  std::string_view packed = bytes.substr(kHeaderSize);
  int rc = uncompress(reinterpret_cast<Bytef*>(doc.data()), &out_len,
                      reinterpret_cast<const Bytef*>(packed.data()),
                      static_cast<uLong>(packed.size()));
  if (rc != Z_OK || out_len != length) {
    throw CorruptPayload("compressed stream is damaged or truncated");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptPayload(e.what());
  }
  try {
    WorkingState st = detail::state_from_json(j);
    if (st.format_version != version) {
      throw CorruptPayload("header and document versions disagree");
    }
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptPayload(e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptPayload(e.what());
  }
}

inline void save_cre(const WorkingState& st, std::ostream& sink) {
  std::string bytes = encode_cre(st);
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  sink.flush();
  if (!sink) throw std::ios_base::failure("failed writing .cre data");
}

inline WorkingState load_cre(std::istream& source) {
  std::string bytes((std::istreambuf_iterator<char>(source)),
                    std::istreambuf_iterator<char>());
  return decode_cre(bytes);
}

// Writes through a temporary file in the same directory, then renames.
inline void save_cre_file(const WorkingState& st,
                          const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + tmp.string());
    save_cre(st, out);
  }
  std::filesystem::rename(tmp, path);
}

inline WorkingState load_cre_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_cre(in);
}

// Re-attaches the manual decisions of `previous` to a freshly imported
// dataset by matching reference strings; decisions whose references are gone
// are dropped.
inline DecisionSet carry_decisions(const WorkingState& previous,
                                   const Dataset& fresh) {
  std::unordered_map<std::string, CrId> by_raw;
  for (const auto& [id, cr] : fresh.crs) by_raw.emplace(cr.raw, id);
  DecisionSet out;
  for (const auto& [pair, d] : previous.cluster_state.decisions) {
    const CitedReference* a = previous.dataset.find(pair.first);
    const CitedReference* b = previous.dataset.find(pair.second);
    if (!a || !b) continue;
    auto ia = by_raw.find(a->raw);
    auto ib = by_raw.find(b->raw);
    if (ia == by_raw.end() || ib == by_raw.end() || ia->second == ib->second) {
      continue;
    }
    MatchDecision moved = d;
    moved.pair = CrPair::of(ia->second, ib->second);
    out.insert_or_assign(moved.pair, moved);
  }
  return out;
}

}  // namespace crx::cre

#endif  // CRX_CRE_HPP_

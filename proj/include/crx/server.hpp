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

// Local JSON API over one working state, used by the browser workbench.
//
//   GET  /api/crs?sort=authors|rpy|n_cr&dir=asc|desc&offset=&limit=
//   GET  /api/crs/{id}
//   GET  /api/clusters?min_size=
//   POST /api/decisions   {"a": id, "b": id, "verdict": "SAME"|"DIFFERENT"}
//   POST /api/merge
//   GET  /api/rpys
//   GET  /api/top?rpy=&k=
//   POST /api/remove-rpy  {"from": y, "to": y, "keep_missing": bool}
//   POST /api/save
//   GET  /api/summary
//
// Handlers are plain member functions returning (status, JSON) so they can be
// exercised without a socket; mount() binds them to an httplib::Server.
// Mutations run under an exclusive lock and build the new state on a copy,
// so a failed request leaves the session untouched.

#ifndef CRX_SERVER_HPP_
#define CRX_SERVER_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "crx/analysis.hpp"
#include "crx/cre.hpp"
#include "crx/matching.hpp"
#include "crx/model.hpp"

namespace crx::server {

using nlohmann::json;

struct ApiResponse {
  int status = 200;
  json body;
};

enum class SortKey { kAuthors, kRpy, kNcr };

namespace detail {

inline ApiResponse error(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::string safe(const std::string& s) {
  if (text::is_valid_utf8(s)) return s;
  std::string out;
  for (char32_t c : text::decode_utf8(s)) {
    icu::UnicodeString u(static_cast<UChar32>(c));
    u.toUTF8String(out);
  }
  return out;
}

inline std::optional<std::string> safe(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return safe(*s);
}

inline std::optional<long long> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  bool neg = s[0] == '-';
  std::string_view digits = std::string_view(s).substr(neg ? 1 : 0);
  if (!text::all_digits(digits) || digits.size() > 12) return std::nullopt;
  long long v = std::stoll(std::string(digits));
  return neg ? -v : v;
}

}  // namespace detail

class CurationService {
 public:
  CurationService(cre::WorkingState state, std::filesystem::path state_path)
      : state_(std::move(state)), state_path_(std::move(state_path)) {}

  static CurationService open(const std::filesystem::path& state_path) {
    return CurationService(cre::load_cre_file(state_path), state_path);
  }

  CurationService(CurationService&& other) noexcept
      : state_(std::move(other.state_)),
        state_path_(std::move(other.state_path_)),
        dirty_(other.dirty_),
        merged_away_(std::move(other.merged_away_)) {}

  cre::WorkingState snapshot() const {
    std::shared_lock lock(mu_);
    return state_;
  }

  bool dirty() const {
    std::shared_lock lock(mu_);
    return dirty_;
  }

  ApiResponse list_crs(const std::string& sort, const std::string& dir,
                       const std::string& offset, const std::string& limit) const {
    SortKey key;
    if (sort.empty() || sort == "authors") {
      key = SortKey::kAuthors;
    } else if (sort == "rpy") {
      key = SortKey::kRpy;
    } else if (sort == "n_cr") {
      key = SortKey::kNcr;
    } else {
      return detail::error(400, "unknown sort column '" + sort + "'");
    }
    if (!dir.empty() && dir != "asc" && dir != "desc") {
      return detail::error(400, "dir must be asc or desc");
    }
    bool descending = dir == "desc";
    auto off = offset.empty() ? std::optional<long long>(0) : detail::parse_number(offset);
    auto lim = limit.empty() ? std::optional<long long>(100) : detail::parse_number(limit);
    if (!off || *off < 0 || !lim || *lim < 1) {
      return detail::error(400, "offset must be >= 0 and limit >= 1");
    }

    std::shared_lock lock(mu_);
    std::vector<const CitedReference*> rows = sorted_rows(key, descending);
    json out = json::array();
    for (auto i = static_cast<std::size_t>(*off);
         i < rows.size() && i < static_cast<std::size_t>(*off + *lim); ++i) {
      out.push_back(row_json(*rows[i]));
    }
    return {200,
            {{"total", rows.size()},
             {"offset", *off},
             {"limit", *lim},
             {"sort", sort.empty() ? "authors" : sort},
             {"dir", descending ? "desc" : "asc"},
             {"rows", std::move(out)}}};
  }

  ApiResponse cr_details(const std::string& id) const {
    std::shared_lock lock(mu_);
    const CitedReference* cr = state_.dataset.find(CrId(id));
    if (!cr) return detail::error(404, "unknown CR id " + id);
    json rows = json::array();
    for (const auto& r : display_details(*cr)) {
      rows.push_back({{"label", r.label}, {"value", detail::safe(r.value)}});
    }
    return {200, {{"id", id}, {"rows", std::move(rows)}}};
  }

  ApiResponse clusters(const std::string& min_size) const {
    auto min = min_size.empty() ? std::optional<long long>(2)
                                : detail::parse_number(min_size);
    if (!min || *min < 1) return detail::error(400, "min_size must be >= 1");
    std::shared_lock lock(mu_);
    std::vector<std::pair<CrId, std::vector<CrId>>> list;
    for (auto& [root, members] : state_.cluster_state.clusters()) {
      if (members.size() >= static_cast<std::size_t>(*min)) {
        list.emplace_back(root, std::move(members));
      }
    }
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.second.size() > b.second.size();
    });
    json out = json::array();
    for (const auto& [root, members] : list) out.push_back(cluster_json(root, members));
    return {200, {{"clusters", std::move(out)}}};
  }

  ApiResponse post_decision(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("a") ||
        !j.contains("b") || !j.contains("verdict") || !j["a"].is_string() ||
        !j["b"].is_string() || !j["verdict"].is_string()) {
      return detail::error(400, "expected {\"a\", \"b\", \"verdict\"}");
    }
    CrId a(j["a"].get<std::string>());
    CrId b(j["b"].get<std::string>());
    auto verdict = parse_verdict(j["verdict"].get<std::string>());
    if (!verdict) return detail::error(400, "verdict must be SAME or DIFFERENT");
    if (a == b) return detail::error(400, "a decision needs two different CRs");

    std::unique_lock lock(mu_);
    for (const auto& id : {a, b}) {
      if (merged_away_.count(id)) {
        return detail::error(409, "CR " + id.str() + " was merged into " +
                                      merged_away_.at(id).str());
      }
      if (!state_.dataset.find(id)) return detail::error(404, "unknown CR id " + id.str());
    }
    MatchDecision d;
    d.pair = CrPair::of(a, b);
    d.verdict = *verdict;
    d.provenance = Provenance::kManual;
    d.score = pair_similarity(state_.dataset.crs.at(a), state_.dataset.crs.at(b),
                              state_.config);
    ClusterState next = apply_manual_decision(state_.cluster_state, d);
    state_.cluster_state = std::move(next);
    dirty_ = true;

    json affected = json::array();
    CrId ra = state_.cluster_state.root(a);
    CrId rb = state_.cluster_state.root(b);
    auto all = state_.cluster_state.clusters();
    affected.push_back(cluster_json(ra, all.at(ra)));
    if (rb != ra) affected.push_back(cluster_json(rb, all.at(rb)));
    return {200, {{"clusters", std::move(affected)}}};
  }

  ApiResponse merge() {
    std::unique_lock lock(mu_);
    const Dataset& before = state_.dataset;
    std::map<CrId, CrId> rep = representatives(before, state_.cluster_state);
    Dataset merged = merge_clusters(before, state_.cluster_state);
    ClusterState cs = restrict_state(state_.cluster_state, merged);

    std::size_t groups = 0;
    for (const auto& [member, r] : rep) groups += member == r;
    json summary = {{"merged_clusters", groups},
                    {"crs_before", before.crs.size()},
                    {"crs_after", merged.crs.size()},
                    {"total_n_cr_before", before.total_n_cr()},
                    {"total_n_cr", merged.total_n_cr()}};

    for (auto& [gone, target] : merged_away_) {
      if (auto it = rep.find(target); it != rep.end()) target = it->second;
    }
    for (const auto& [member, r] : rep) {
      if (member != r) merged_away_.insert_or_assign(member, r);
    }
    state_.dataset = std::move(merged);
    state_.cluster_state = std::move(cs);
    dirty_ = dirty_ || groups > 0;
    return {200, std::move(summary)};
  }

  ApiResponse rpys() const {
    std::shared_lock lock(mu_);
    RpySpectrum spectrum = rpy_histogram(state_.dataset);
    json rows = json::array();
    for (const auto& r : spectrum.rows) {
      rows.push_back({{"rpy", r.rpy}, {"n_cr", r.n_cr}, {"median_dev", r.median_dev}});
    }
    return {200, {{"rows", std::move(rows)}, {"excluded_n_cr", spectrum.excluded_n_cr}}};
  }

  ApiResponse top(const std::string& rpy, const std::string& k) const {
    auto year = detail::parse_number(rpy);
    auto count = k.empty() ? std::optional<long long>(10) : detail::parse_number(k);
    if (!year || !count || *count < 1) {
      return detail::error(400, "rpy and k (>= 1) are required");
    }
    std::shared_lock lock(mu_);
    json rows = json::array();
    for (const auto& cr : top_crs_for_rpy(state_.dataset, static_cast<int>(*year),
                                          static_cast<std::size_t>(*count))) {
      rows.push_back(row_json(cr));
    }
    return {200, {{"rpy", *year}, {"rows", std::move(rows)}}};
  }

  ApiResponse remove_rpy(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("from") ||
        !j.contains("to") || !j["from"].is_number_integer() ||
        !j["to"].is_number_integer() ||
        (j.contains("keep_missing") && !j["keep_missing"].is_boolean())) {
      return detail::error(400, "expected {\"from\", \"to\", \"keep_missing\"}");
    }
    YearRange range{j["from"].get<int>(), j["to"].get<int>()};
    if (range.from > range.to) return detail::error(400, "from must be <= to");
    bool keep_missing = j.value("keep_missing", true);

    std::unique_lock lock(mu_);
    Dataset pruned = remove_by_rpy(state_.dataset, range, keep_missing);
    ClusterState cs = restrict_state(state_.cluster_state, pruned);
    std::size_t removed = state_.dataset.crs.size() - pruned.crs.size();
    json summary = {{"removed_crs", removed},
                    {"crs", pruned.crs.size()},
                    {"total_n_cr", pruned.total_n_cr()}};
    state_.dataset = std::move(pruned);
    state_.cluster_state = std::move(cs);
    dirty_ = dirty_ || removed > 0;
    return {200, std::move(summary)};
  }

  ApiResponse save() {
    std::unique_lock lock(mu_);
    try {
      cre::save_cre_file(state_, state_path_);
    } catch (const std::exception& e) {
      return detail::error(500, e.what());
    }
    dirty_ = false;
    return {200, {{"saved", state_path_.string()}}};
  }

  ApiResponse summary() const {
    std::shared_lock lock(mu_);
    const Dataset& ds = state_.dataset;
    return {200,
            {{"publications", ds.publications.size()},
             {"crs", ds.crs.size()},
             {"total_n_cr", ds.total_n_cr()},
             {"origin", std::string(to_string(ds.origin))},
             {"clusters", state_.cluster_state.multi_member_clusters()},
             {"decisions", state_.cluster_state.decisions.size()},
             {"threshold", state_.config.threshold},
             {"dirty", dirty_}}};
  }

  // Registers the API and, when `ui_dir` exists, the static workbench.
  void mount(httplib::Server& svr, const std::filesystem::path& ui_dir = {}) {
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    svr.Get("/api/crs", [this, reply](const httplib::Request& req,
                                      httplib::Response& res) {
      reply(res, list_crs(req.get_param_value("sort"), req.get_param_value("dir"),
                          req.get_param_value("offset"),
                          req.get_param_value("limit")));
    });
    svr.Get(R"(/api/crs/([^/]+))", [this, reply](const httplib::Request& req,
                                                 httplib::Response& res) {
      reply(res, cr_details(req.matches[1]));
    });
    svr.Get("/api/clusters", [this, reply](const httplib::Request& req,
                                           httplib::Response& res) {
      reply(res, clusters(req.get_param_value("min_size")));
    });
    svr.Post("/api/decisions", [this, reply](const httplib::Request& req,
                                             httplib::Response& res) {
      reply(res, post_decision(req.body));
    });
    svr.Post("/api/merge", [this, reply](const httplib::Request&,
                                         httplib::Response& res) {
      reply(res, merge());
    });
    svr.Get("/api/rpys", [this, reply](const httplib::Request&,
                                       httplib::Response& res) {
      reply(res, rpys());
    });
    svr.Get("/api/top", [this, reply](const httplib::Request& req,
                                      httplib::Response& res) {
      reply(res, top(req.get_param_value("rpy"), req.get_param_value("k")));
    });
    svr.Post("/api/remove-rpy", [this, reply](const httplib::Request& req,
                                              httplib::Response& res) {
      reply(res, remove_rpy(req.body));
    });
    svr.Post("/api/save", [this, reply](const httplib::Request&,
                                        httplib::Response& res) {
      reply(res, save());
    });
    svr.Get("/api/summary", [this, reply](const httplib::Request&,
                                          httplib::Response& res) {
      reply(res, summary());
    });
    if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) {
      svr.set_mount_point("/", ui_dir.string());
    } else {
      svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!doctype html><title>crx</title><p>crx curation API is running. "
            "Browse <a href=\"/api/summary\">/api/summary</a>.</p>",
            "text/html");
      });
    }
  }

 private:
  // Authors: empty-author rows always last, then folded surname, then the
  // full first author, then id.
  std::vector<const CitedReference*> sorted_rows(SortKey key,
                                                 bool descending) const {
    struct Keyed {
      const CitedReference* cr;
      std::string surname;
    };
    std::vector<Keyed> rows;
    rows.reserve(state_.dataset.crs.size());
    for (const auto& [id, cr] : state_.dataset.crs) {
      rows.push_back({&cr, key == SortKey::kAuthors ? author_surname(cr) : ""});
    }
    auto by_id = [](const Keyed& a, const Keyed& b) { return a.cr->id < b.cr->id; };
    std::sort(rows.begin(), rows.end(), [&](const Keyed& a, const Keyed& b) {
      switch (key) {
        case SortKey::kAuthors: {
          bool ea = a.cr->authors.empty();
          bool eb = b.cr->authors.empty();
          if (ea != eb) return eb;
          if (ea) return by_id(a, b);
          auto ka = std::tie(a.surname, a.cr->authors.front());
          auto kb = std::tie(b.surname, b.cr->authors.front());
          if (ka != kb) return descending ? kb < ka : ka < kb;
          return by_id(a, b);
        }
        case SortKey::kRpy: {
          bool ea = !a.cr->rpy;
          bool eb = !b.cr->rpy;
          if (ea != eb) return eb;
          if (!ea && *a.cr->rpy != *b.cr->rpy) {
            return descending ? *a.cr->rpy > *b.cr->rpy : *a.cr->rpy < *b.cr->rpy;
          }
          return by_id(a, b);
        }
        case SortKey::kNcr:
          if (a.cr->n_cr != b.cr->n_cr) {
            return descending ? a.cr->n_cr > b.cr->n_cr : a.cr->n_cr < b.cr->n_cr;
          }
          return by_id(a, b);
      }
      return by_id(a, b);
    });
    std::vector<const CitedReference*> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.cr);
    return out;
  }

  json row_json(const CitedReference& cr) const {
    std::vector<std::string> authors;
    for (const auto& a : cr.authors) authors.push_back(detail::safe(a));
    const auto& cs = state_.cluster_state;
    auto it = cs.parent.find(cr.id);
    return {{"id", cr.id.str()},
            {"authors", authors},
            {"title", detail::opt(detail::safe(cr.title))},
            {"source", detail::opt(detail::safe(cr.source))},
            {"rpy", detail::opt(cr.rpy)},
            {"volume", detail::opt(detail::safe(cr.volume))},
            {"page", detail::opt(detail::safe(cr.page))},
            {"doi", detail::opt(detail::safe(cr.doi))},
            {"n_cr", cr.n_cr},
            {"origin", std::string(to_string(cr.origin))},
            {"cluster", it == cs.parent.end() ? json(nullptr) : json(it->second.str())}};
  }

  json cluster_json(const CrId& root, const std::vector<CrId>& members) const {
    const auto& cs = state_.cluster_state;
    json rows = json::array();
    for (const auto& id : members) rows.push_back(row_json(state_.dataset.crs.at(id)));
    json pairs = json::array();
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        CrPair p = CrPair::of(members[i], members[j]);
        if (auto d = cs.decisions.find(p); d != cs.decisions.end()) {
          pairs.push_back({{"a", p.first.str()},
                           {"b", p.second.str()},
                           {"score", detail::opt(d->second.score)},
                           {"provenance", "MANUAL"},
                           {"verdict", std::string(to_string(d->second.verdict))}});
        } else if (auto e = cs.pair_scores.find(p); e != cs.pair_scores.end()) {
          pairs.push_back({{"a", p.first.str()},
                           {"b", p.second.str()},
                           {"score", e->second},
                           {"provenance", "ALGORITHM"},
                           {"verdict", "SAME"}});
        }
      }
    }
    return {{"id", root.str()},
            {"size", members.size()},
            {"members", std::move(rows)},
            {"pairs", std::move(pairs)}};
  }

  mutable std::shared_mutex mu_;
  cre::WorkingState state_;
  std::filesystem::path state_path_;
  bool dirty_ = false;
  std::map<CrId, CrId> merged_away_;
};

// Blocks serving `state_path` on host:port until the server stops.
inline bool serve(const std::filesystem::path& state_path, int port,
                  const std::string& host = "127.0.0.1",
                  const std::filesystem::path& ui_dir = {}) {
  CurationService service = CurationService::open(state_path);
  httplib::Server svr;
  service.mount(svr, ui_dir);
  return svr.listen(host, port);
}

}  // namespace crx::server

#endif  // CRX_SERVER_HPP_

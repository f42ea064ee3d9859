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

// Variant detection for cited references.
//
// Pairs inside a year block are scored with a weighted per-field Levenshtein
// similarity (DOI agreement short-circuits). Pairs at or above the threshold
// become SAME edges; clusters are their connected components, subject to the
// curator's must-link (MANUAL SAME) and cannot-link (MANUAL DIFFERENT)
// decisions. Edges are unioned strongest first and an edge that would join a
// cannot-link pair is dropped, which is the same as deleting the weakest
// edges until the pair separates.

#ifndef CRX_MATCHING_HPP_
#define CRX_MATCHING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "crx/model.hpp"
#include "crx/text.hpp"

namespace crx {

struct SimilarityWeights {
  double author = 0.40;
  double source_or_title = 0.30;
  double volume = 0.15;
  double page = 0.15;

  double sum() const { return author + source_or_title + volume + page; }

  friend bool operator==(const SimilarityWeights&,
                         const SimilarityWeights&) = default;
};

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimilarityConfig {
  double threshold = 0.75;
  SimilarityWeights weights;
  bool same_rpy_only = true;
  int rpy_slack = 0;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      throw InvalidConfig("threshold must lie in [0, 1]");
    }
    for (double w : {weights.author, weights.source_or_title, weights.volume,
                     weights.page}) {
      if (!(w >= 0.0)) throw InvalidConfig("weights must be non-negative");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-9) {
      throw InvalidConfig("weights must sum to 1");
    }
    if (rpy_slack < 0) throw InvalidConfig("rpy_slack must be >= 0");
  }

  friend bool operator==(const SimilarityConfig&,
                         const SimilarityConfig&) = default;
};

// Normalized comparison fields of one CR; empty string means absent.
struct MatchFeatures {
  std::string surname;
  std::string source;
  std::string title;
  std::string volume;
  std::string page;
  std::optional<std::string> doi;

  static MatchFeatures of(const CitedReference& cr) {
    NormalizedKey key = canonical_key(cr);
    MatchFeatures f;
    f.surname = std::move(key.surname);
    f.source = std::move(key.source_norm);
    f.title = text::normalize_field(cr.title.value_or(""));
    f.volume = std::move(key.volume_norm);
    f.page = std::move(key.page_norm);
    if (key.doi && !key.doi->empty()) f.doi = std::move(key.doi);
    return f;
  }
};

namespace detail {

inline double field_term(const std::string& a, const std::string& b,
                         double weight) {
  if (a.empty() || b.empty()) return weight * 0.5;
  return weight * text::levenshtein_similarity(a, b);
}

}  // namespace detail

inline double pair_similarity(const MatchFeatures& a, const MatchFeatures& b,
                              const SimilarityConfig& cfg) {
  if (a.doi && b.doi) return *a.doi == *b.doi ? 1.0 : 0.0;
  const auto& w = cfg.weights;
  double score = detail::field_term(a.surname, b.surname, w.author);
  bool use_title = !a.title.empty() && !b.title.empty() &&
                   (a.source.empty() || b.source.empty());
  score += use_title ? detail::field_term(a.title, b.title, w.source_or_title)
                     : detail::field_term(a.source, b.source, w.source_or_title);
  score += detail::field_term(a.volume, b.volume, w.volume);
  score += detail::field_term(a.page, b.page, w.page);
  return std::clamp(score, 0.0, 1.0);
}

inline double pair_similarity(const CitedReference& a, const CitedReference& b,
                              const SimilarityConfig& cfg) {
  return pair_similarity(MatchFeatures::of(a), MatchFeatures::of(b), cfg);
}

// Candidate pairs for scoring, sorted. With same_rpy_only, only CRs whose
// years differ by at most rpy_slack pair up, and CRs without a year pair only
// with each other.
inline std::vector<CrPair> block_candidates(const Dataset& ds,
                                            const SimilarityConfig& cfg) {
  std::vector<CrPair> out;
  if (!cfg.same_rpy_only) {
    for (auto i = ds.crs.begin(); i != ds.crs.end(); ++i) {
      for (auto j = std::next(i); j != ds.crs.end(); ++j) {
        out.push_back(CrPair::of(i->first, j->first));
      }
    }
    return out;
  }
  std::map<int, std::vector<CrId>> by_year;
  std::vector<CrId> no_year;
  for (const auto& [id, cr] : ds.crs) {
    if (cr.rpy) {
      by_year[*cr.rpy].push_back(id);
    } else {
      no_year.push_back(id);
    }
  }
  auto within = [&](const std::vector<CrId>& ids) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        out.push_back(CrPair::of(ids[i], ids[j]));
      }
    }
  };
  within(no_year);
  for (auto it = by_year.begin(); it != by_year.end(); ++it) {
    within(it->second);
    for (auto other = std::next(it);
         other != by_year.end() && other->first - it->first <= cfg.rpy_slack;
         ++other) {
      for (const auto& a : it->second) {
        for (const auto& b : other->second) out.push_back(CrPair::of(a, b));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ClusterState {
  // Flattened union-find forest: every CR id maps to its cluster root, the
  // smallest id in the cluster.
  std::map<CrId, CrId> parent;
  // Algorithmic SAME edges (score >= threshold).
  std::map<CrPair, double> pair_scores;
  // MANUAL decisions; they override algorithmic evidence on their pair.
  DecisionSet decisions;

  const CrId& root(const CrId& id) const {
    auto it = parent.find(id);
    if (it == parent.end()) throw UnknownCrId(id);
    return it->second;
  }

  bool same_cluster(const CrId& a, const CrId& b) const {
    return root(a) == root(b);
  }

  // Root -> sorted members.
  std::map<CrId, std::vector<CrId>> clusters() const {
    std::map<CrId, std::vector<CrId>> out;
    for (const auto& [id, r] : parent) out[r].push_back(id);
    return out;
  }

  std::size_t multi_member_clusters() const {
    std::size_t n = 0;
    for (const auto& [r, members] : clusters()) n += members.size() > 1;
    return n;
  }

  friend bool operator==(const ClusterState&, const ClusterState&) = default;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Keeps the smaller index as root so roots are deterministic.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Recomputes the partition from edges and decisions already in `st`.
inline void recluster(ClusterState& st) {
  std::vector<CrId> ids;
  ids.reserve(st.parent.size());
  for (const auto& [id, r] : st.parent) ids.push_back(id);
  auto index = [&](const CrId& id) -> std::size_t {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw UnknownCrId(id);
    return static_cast<std::size_t>(it - ids.begin());
  };

  struct Edge {
    std::size_t a;
    std::size_t b;
  };
  std::vector<Edge> edges;
  std::vector<Edge> forbidden;
  for (const auto& [pair, d] : st.decisions) {
    Edge e{index(pair.first), index(pair.second)};
    (d.verdict == Verdict::kSame ? edges : forbidden).push_back(e);
  }
  std::vector<std::pair<const CrPair*, double>> scored;
  scored.reserve(st.pair_scores.size());
  for (const auto& [pair, score] : st.pair_scores) scored.emplace_back(&pair, score);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  for (const auto& [pair, score] : scored) {
    edges.push_back({index(pair->first), index(pair->second)});
  }

  UnionFind uf(ids.size());
  for (const auto& e : edges) {
    std::size_t ra = uf.find(e.a);
    std::size_t rb = uf.find(e.b);
    if (ra == rb) continue;
    bool blocked = false;
    for (const auto& f : forbidden) {
      std::size_t fa = uf.find(f.a);
      std::size_t fb = uf.find(f.b);
      if ((fa == ra && fb == rb) || (fa == rb && fb == ra)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) uf.unite(ra, rb);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    st.parent[ids[i]] = ids[uf.find(i)];
  }
}

inline void check_decision(const ClusterState& st, const MatchDecision& d) {
  if (d.provenance != Provenance::kManual) {
    throw std::invalid_argument("only manual decisions can be applied");
  }
  if (!st.parent.count(d.pair.first)) throw UnknownCrId(d.pair.first);
  if (!st.parent.count(d.pair.second)) throw UnknownCrId(d.pair.second);
}

// Scores `pairs` on up to hardware_concurrency threads; order of results
// matches `pairs`.
inline std::vector<double> score_pairs(
    const std::vector<CrPair>& pairs,
    const std::map<CrId, MatchFeatures>& features,
    const SimilarityConfig& cfg) {
  std::vector<double> scores(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      scores[i] = pair_similarity(features.at(pairs[i].first),
                                  features.at(pairs[i].second), cfg);
    }
  };
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (pairs.size() < 4096 || threads == 1) {
    work(0, pairs.size());
    return scores;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (pairs.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t begin = t * chunk;
    std::size_t end = std::min(pairs.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
  return scores;
}

}  // namespace detail

inline ClusterState cluster_equivalent(const Dataset& ds,
                                       const SimilarityConfig& cfg,
                                       const DecisionSet& manual = {}) {
  cfg.validate();
  ClusterState st;
  for (const auto& [id, cr] : ds.crs) st.parent.emplace(id, id);
  for (const auto& [pair, d] : manual) {
    detail::check_decision(st, d);
    st.decisions.emplace(d.pair, d);
  }

  std::map<CrId, MatchFeatures> features;
  for (const auto& [id, cr] : ds.crs) features.emplace(id, MatchFeatures::of(cr));
  std::vector<CrPair> pairs = block_candidates(ds, cfg);
  std::vector<double> scores = detail::score_pairs(pairs, features, cfg);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (scores[i] >= cfg.threshold) st.pair_scores.emplace(pairs[i], scores[i]);
  }
  detail::recluster(st);
  return st;
}

// Records (or replaces) the manual decision on d.pair and reclusters.
inline ClusterState apply_manual_decision(ClusterState st,
                                          const MatchDecision& d) {
  detail::check_decision(st, d);
  st.decisions.insert_or_assign(d.pair, d);
  detail::recluster(st);
  return st;
}

// Drops ids no longer in `ds` (and every edge or decision touching them),
// adds new ids as singletons, then reclusters.
inline ClusterState restrict_state(ClusterState st, const Dataset& ds) {
  ClusterState out;
  for (const auto& [id, cr] : ds.crs) out.parent.emplace(id, id);
  auto known = [&](const CrPair& p) {
    return out.parent.count(p.first) && out.parent.count(p.second);
  };
  for (const auto& [p, s] : st.pair_scores) {
    if (known(p)) out.pair_scores.emplace(p, s);
  }
  for (const auto& [p, d] : st.decisions) {
    if (known(p)) out.decisions.emplace(p, d);
  }
  detail::recluster(out);
  return out;
}

// Member -> representative for every CR in a multi-member cluster. The
// representative is the most complete member, then the most cited, then the
// smallest id.
inline std::map<CrId, CrId> representatives(const Dataset& ds,
                                            const ClusterState& st) {
  std::map<CrId, CrId> out;
  for (const auto& [root, members] : st.clusters()) {
    if (members.size() < 2) continue;
    const CitedReference* best = nullptr;
    for (const auto& id : members) {
      const CitedReference* cr = ds.find(id);
      if (!cr) throw UnknownCrId(id);
      if (!best ||
          std::make_tuple(-cr->present_fields(), -cr->n_cr, std::cref(cr->id)) <
              std::make_tuple(-best->present_fields(), -best->n_cr,
                              std::cref(best->id))) {
        best = cr;
      }
    }
    for (const auto& id : members) out.emplace(id, best->id);
  }
  return out;
}

// Collapses each multi-member cluster into its representative: occurrence
// counts add up, missing fields are filled from the other members (best
// ranked first) and citing publications point at the representative.
inline Dataset merge_clusters(const Dataset& ds, const ClusterState& st) {
  std::map<CrId, CrId> rep = representatives(ds, st);
  if (rep.empty()) return ds;

  std::map<CrId, std::vector<const CitedReference*>> groups;
  for (const auto& [member, r] : rep) groups[r].push_back(&ds.crs.at(member));

  Dataset out = ds;
  for (auto& [r, members] : groups) {
    std::sort(members.begin(), members.end(),
              [](const CitedReference* a, const CitedReference* b) {
                return std::make_tuple(-a->present_fields(), -a->n_cr,
                                       std::cref(a->id)) <
                       std::make_tuple(-b->present_fields(), -b->n_cr,
                                       std::cref(b->id));
              });
    CitedReference merged = *members.front();
    merged.n_cr = 0;
    for (const CitedReference* m : members) {
      merged.n_cr += m->n_cr;
      if (merged.authors.empty()) merged.authors = m->authors;
      if (!merged.title) merged.title = m->title;
      if (!merged.source) merged.source = m->source;
      if (!merged.rpy) merged.rpy = m->rpy;
      if (!merged.volume) merged.volume = m->volume;
      if (!merged.page) merged.page = m->page;
      if (!merged.doi) merged.doi = m->doi;
      if (m->id != r) out.crs.erase(m->id);
    }
    out.crs.at(r) = std::move(merged);
  }
  for (auto& pub : out.publications) {
    for (auto& id : pub.cr_ids) {
      if (auto it = rep.find(id); it != rep.end()) id = it->second;
    }
  }
  return out;
}

}  // namespace crx

#endif  // CRX_MATCHING_HPP_

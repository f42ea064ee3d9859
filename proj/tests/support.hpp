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


// Shared test helpers: seeded generators for datasets and export files, and
// independent reference implementations ("oracles") that the library output
// is compared against.

#ifndef CRX_TESTS_SUPPORT_HPP_
#define CRX_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crx/analysis.hpp"
#include "crx/cre.hpp"
#include "crx/matching.hpp"
#include "crx/model.hpp"
#include "crx/text.hpp"

namespace crx::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  int uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(eng_); }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline const std::vector<std::string>& surnames() {
  static const std::vector<std::string> v = {
      "GARFIELD", "PRICE", "MERTON", "SMALL", "LEYDESDORFF", "BORNMANN",
      "MARX", "THOR", "MÜLLER", "GARCÍA", "O'NEIL", "VAN RAAN", "DE SOLLA PRICE"};
  return v;
}

inline const std::vector<std::string>& sources() {
  static const std::vector<std::string> v = {
      "SCIENCE", "NATURE", "J AM SOC INF SCI TEC", "SCIENTOMETRICS",
      "J INFORMETR", "PHYS REV LETT", "RES POLICY", "ANNU REV INFORM SCI"};
  return v;
}

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> v = {
      "citation", "analysis", "science", "of", "the", "network", "indexes",
      "historical", "roots", "über", "données", "growth", "journals", "mapping"};
  return v;
}

inline std::string random_words(Rng& rng, int lo, int hi) {
  std::string out;
  int n = rng.uniform(lo, hi);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += rng.pick(words());
  }
  return out;
}

inline std::string initials(Rng& rng, int max_len = 2) {
  std::string out;
  int n = rng.uniform(1, max_len);
  for (int i = 0; i < n; ++i) out += static_cast<char>('A' + rng.uniform(0, 25));
  return out;
}

// One WoS-style CR line: "AUTHOR I, 1990, SOURCE, V12, P34, DOI 10.x/y",
// sometimes with fields missing or in fragmentary shape.
inline std::string random_wos_cr_line(Rng& rng) {
  switch (rng.uniform(0, 9)) {
    case 0:
      return "ANON, [no year]";
    case 1:
      return std::to_string(rng.uniform(1900, 2020)) + ", " + rng.pick(sources());
    case 2:
      return "[Anonymous], " + std::to_string(rng.uniform(1900, 2020)) + ", " +
             random_words(rng, 1, 3);
    default:
      break;
  }
  std::string line = rng.pick(surnames()) + " " + initials(rng);
  line += ", " + std::to_string(rng.uniform(1940, 2020));
  line += ", " + rng.pick(sources());
  if (rng.chance(0.7)) line += ", V" + std::to_string(rng.uniform(1, 300));
  if (rng.chance(0.7)) line += ", P" + std::to_string(rng.uniform(1, 2000));
  if (rng.chance(0.3)) {
    line += ", DOI 10." + std::to_string(rng.uniform(1000, 9999)) + "/x" +
            std::to_string(rng.uniform(1, 99999));
  }
  return line;
}

struct WosFileOptions {
  int records = 10;
  std::string ut_prefix = "WOS:";
  int max_crs = 8;
};

// A well-formed WoS export with consistent NR counts.
inline std::string random_wos_file(Rng& rng, const WosFileOptions& opt) {
  std::string out = "FN Clarivate Analytics Web of Science\nVR 1.0\n";
  for (int r = 0; r < opt.records; ++r) {
    out += "PT J\n";
    int authors = rng.uniform(1, 3);
    for (int a = 0; a < authors; ++a) {
      out += a == 0 ? "AU " : "   ";
      std::string s = rng.pick(surnames());
      out += s.substr(0, 1) + text::to_lower_ascii(s.substr(1)) + ", " + initials(rng) + "\n";
    }
    out += "TI " + random_words(rng, 2, 6) + "\n";
    if (rng.chance(0.5)) out += "   " + random_words(rng, 1, 4) + "\n";
    out += "SO " + rng.pick(sources()) + "\n";
    if (rng.chance(0.3)) out += "Z9 " + std::to_string(rng.uniform(0, 50)) + "\n";
    int crs = rng.uniform(0, opt.max_crs);
    for (int c = 0; c < crs; ++c) {
      out += c == 0 ? "CR " : "   ";
      out += random_wos_cr_line(rng) + "\n";
    }
    out += "NR " + std::to_string(crs) + "\n";
    out += "PY " + std::to_string(rng.uniform(1990, 2024)) + "\n";
    out += "UT " + opt.ut_prefix + std::to_string(r) + "\n";
    out += "ER\n\n";
  }
  out += "EF\n";
  return out;
}

inline std::string scopus_author_name(Rng& rng) {
  std::string s = rng.pick(surnames());
  std::string name = s.substr(0, 1) + text::to_lower_ascii(s.substr(1)) + ", ";
  std::string ini = initials(rng);
  for (char c : ini) name += std::string(1, c) + ".";
  return name;
}

// A Scopus reference string in vendor style, or a fragmented one.
inline std::string random_scopus_ref(Rng& rng) {
  switch (rng.uniform(0, 7)) {
    case 0:
      return "(" + std::to_string(rng.uniform(1900, 2020)) + ") " +
             random_words(rng, 2, 5) + ", , " + rng.pick(sources());
    case 1:
      return random_words(rng, 1, 3) + ": " + random_words(rng, 2, 4) + "? (" +
             std::to_string(rng.uniform(1900, 2020)) + ") " + rng.pick(sources()) +
             ", , (10 December)";
    default:
      break;
  }
  std::string out;
  int authors = rng.uniform(1, 4);
  for (int a = 0; a < authors; ++a) {
    if (a) out += ", ";
    out += scopus_author_name(rng);
  }
  out += ", " + random_words(rng, 2, 6);
  out += " (" + std::to_string(rng.uniform(1940, 2020)) + ") " + rng.pick(sources());
  if (rng.chance(0.7)) out += ", " + std::to_string(rng.uniform(1, 300));
  if (rng.chance(0.3)) out += " (" + std::to_string(rng.uniform(1, 12)) + ")";
  if (rng.chance(0.7)) {
    int p = rng.uniform(1, 900);
    out += ", pp. " + std::to_string(p) + "-" + std::to_string(p + rng.uniform(1, 30));
  }
  return out;
}

inline std::string csv_cell(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// A Scopus CSV export: minimum columns plus a few extra ones, cells with
// commas, quotes and line breaks; quoting style varies per cell.
inline std::string random_scopus_csv(Rng& rng, int rows) {
  const std::vector<std::string> header = {
      "Authors", "Title", "Year", "Source title", "Volume", "Issue", "Page start",
      "Page end", "DOI", "Abstract", "References", "Document Type", "EID"};
  auto cell = [&](const std::string& s) {
    bool must_quote = s.find_first_of(",\"\r\n") != std::string::npos;
    return must_quote || rng.chance(0.5) ? csv_cell(s) : s;
  };
  std::string out;
  if (rng.chance(0.2)) out += "\xEF\xBB\xBF";
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += (i ? "," : "") + cell(header[i]);
  }
  out += rng.chance(0.5) ? "\r\n" : "\n";
  for (int r = 0; r < rows; ++r) {
    std::vector<std::string> cells;
    std::string authors;
    int n = rng.uniform(1, 3);
    for (int a = 0; a < n; ++a) {
      if (a) authors += ", ";
      std::string s = rng.pick(surnames());
      authors += s.substr(0, 1) + text::to_lower_ascii(s.substr(1)) + " " + initials(rng) + ".";
    }
    cells.push_back(authors);
    cells.push_back(random_words(rng, 2, 6) + (rng.chance(0.2) ? ": \"quoted\"" : ""));
    cells.push_back(std::to_string(rng.uniform(1990, 2024)));
    cells.push_back(rng.pick(sources()));
    cells.push_back(std::to_string(rng.uniform(1, 90)));
    cells.push_back(rng.chance(0.5) ? std::to_string(rng.uniform(1, 12)) : "");
    int p = rng.uniform(1, 500);
    cells.push_back(std::to_string(p));
    cells.push_back(std::to_string(p + rng.uniform(1, 20)));
    cells.push_back(rng.chance(0.6) ? "10.1000/j." + std::to_string(rng.uniform(1, 9999)) : "");
    cells.push_back(rng.chance(0.5) ? random_words(rng, 3, 8) + ",\nsecond line" : "");
    std::vector<std::string> refs;
    int k = rng.uniform(0, 6);
    for (int i = 0; i < k; ++i) refs.push_back(random_scopus_ref(rng));
    cells.push_back(text::join(refs, "; "));
    cells.push_back("Article");
    cells.push_back("2-s2.0-" + std::to_string(1000000 + r));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out += (i ? "," : "") + cell(cells[i]);
    }
    out += "\r\n";
  }
  return out;
}

// Variants of a few base works, so that clustering has something to find.
inline CitedReference random_variant_cr(Rng& rng, int work) {
  Rng base(static_cast<std::uint64_t>(work) * 7919 + 17);
  std::string surname = base.pick(surnames());
  std::string source = base.pick(sources());
  int year = base.uniform(1950, 1960);
  int volume = base.uniform(1, 200);
  int page = base.uniform(1, 900);

  CitedReference cr;
  cr.origin = rng.chance(0.5) ? Origin::kWos : Origin::kScopus;
  if (rng.chance(0.2)) {
    std::size_t at = static_cast<std::size_t>(rng.uniform(1, static_cast<int>(surname.size()) - 1));
    surname.erase(at, 1);  // typo
  }
  if (rng.chance(0.9)) cr.authors.push_back(surname + " " + initials(rng, 1));
  if (cr.origin == Origin::kScopus && rng.chance(0.3)) {
    cr.authors.push_back(rng.pick(surnames()) + " " + initials(rng, 1));
  }
  cr.rpy = rng.chance(0.1) ? std::nullopt : std::optional<int>(year + (rng.chance(0.15) ? 1 : 0));
  if (rng.chance(0.8)) cr.source = rng.chance(0.2) ? source.substr(0, source.size() / 2) : source;
  if (cr.origin == Origin::kScopus && rng.chance(0.4)) cr.title = random_words(rng, 2, 4);
  if (rng.chance(0.7)) cr.volume = (rng.chance(0.5) ? "V" : "") + std::to_string(volume);
  if (rng.chance(0.7)) cr.page = (rng.chance(0.5) ? "P" : "") + std::to_string(page + rng.uniform(0, 1));
  if (rng.chance(0.1)) cr.doi = "10.1000/w" + std::to_string(work + rng.uniform(0, 1));
  return cr;
}

// A dataset of up to `n_crs` distinct CRs cited by `n_pubs` publications.
inline Dataset random_dataset(Rng& rng, int n_crs, int n_pubs) {
  std::vector<CitedReference> pool;
  int works = std::max(1, n_crs / 4);
  for (int i = 0; i < n_crs; ++i) {
    CitedReference cr = random_variant_cr(rng, rng.uniform(0, works - 1));
    cr.raw = "ref-" + std::to_string(i) + " " + text::join(cr.authors, "/") + " " +
             (cr.rpy ? std::to_string(*cr.rpy) : "");
    pool.push_back(std::move(cr));
  }
  bool mixed = false;
  for (const auto& cr : pool) mixed = mixed || cr.origin != pool.front().origin;
  DatasetBuilder builder(mixed ? DatasetOrigin::kMixed : DatasetOrigin::kWos);
  std::vector<bool> used(pool.size(), false);
  for (int p = 0; p < n_pubs; ++p) {
    std::vector<CitedReference> refs;
    int k = pool.empty() ? 0 : rng.uniform(0, 6);
    for (int i = 0; i < k; ++i) {
      std::size_t at = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(pool.size()) - 1));
      refs.push_back(pool[at]);
      used[at] = true;
    }
    if (p == n_pubs - 1) {
      // Make sure every pooled CR is cited at least once.
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!used[i]) refs.push_back(pool[i]);
      }
    }
    builder.add_publication({{"TI", {"publication " + std::to_string(p)}}},
                            1990 + p % 30, std::move(refs));
  }
  return std::move(builder).finish();
}

inline DecisionSet random_manual(Rng& rng, const Dataset& ds, int max_decisions) {
  std::vector<CrId> ids;
  for (const auto& [id, cr] : ds.crs) ids.push_back(id);
  DecisionSet out;
  if (ids.size() < 2) return out;
  int n = rng.uniform(0, max_decisions);
  for (int i = 0; i < n; ++i) {
    const CrId& a = rng.pick(ids);
    const CrId& b = rng.pick(ids);
    if (a == b) continue;
    MatchDecision d{CrPair::of(a, b), rng.chance(0.5) ? Verdict::kSame : Verdict::kDifferent,
                    Provenance::kManual, std::nullopt};
    if (rng.chance(0.5)) d.score = rng.real(0, 1);
    out.insert_or_assign(d.pair, d);
  }
  return out;
}

inline SimilarityConfig random_config(Rng& rng) {
  SimilarityConfig cfg;
  cfg.threshold = rng.uniform(40, 95) / 100.0;
  cfg.same_rpy_only = rng.chance(0.8);
  cfg.rpy_slack = rng.uniform(0, 1);
  return cfg;
}

// ---------------------------------------------------------------- oracles

// Plain recursive edit distance with memoization.
inline std::size_t oracle_levenshtein(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = std::min(d(i - 1, j) + 1, d(i, j - 1) + 1);
    best = std::min(best, d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1));
    memo[key] = best;
    return best;
  };
  return d(a.size(), b.size());
}

inline double oracle_field(const std::string& a, const std::string& b, double w) {
  if (a.empty() || b.empty()) return w * 0.5;
  std::u32string ua = text::decode_utf8(a);
  std::u32string ub = text::decode_utf8(b);
  std::size_t longest = std::max(ua.size(), ub.size());
  double sim = longest == 0 ? 1.0
                            : 1.0 - static_cast<double>(oracle_levenshtein(ua, ub)) /
                                        static_cast<double>(longest);
  return w * sim;
}

// Similarity spelled out from the definition, on canonical keys.
inline double oracle_similarity(const CitedReference& a, const CitedReference& b,
                                const SimilarityConfig& cfg) {
  NormalizedKey ka = canonical_key(a);
  NormalizedKey kb = canonical_key(b);
  bool doi_a = ka.doi && !ka.doi->empty();
  bool doi_b = kb.doi && !kb.doi->empty();
  if (doi_a && doi_b) return *ka.doi == *kb.doi ? 1.0 : 0.0;
  std::string ta = text::normalize_field(a.title.value_or(""));
  std::string tb = text::normalize_field(b.title.value_or(""));
  double s = oracle_field(ka.surname, kb.surname, cfg.weights.author);
  if (!ta.empty() && !tb.empty() && (ka.source_norm.empty() || kb.source_norm.empty())) {
    s += oracle_field(ta, tb, cfg.weights.source_or_title);
  } else {
    s += oracle_field(ka.source_norm, kb.source_norm, cfg.weights.source_or_title);
  }
  s += oracle_field(ka.volume_norm, kb.volume_norm, cfg.weights.volume);
  s += oracle_field(ka.page_norm, kb.page_norm, cfg.weights.page);
  return std::clamp(s, 0.0, 1.0);
}

inline bool oracle_blocked_pair(const CitedReference& a, const CitedReference& b,
                                const SimilarityConfig& cfg) {
  if (!cfg.same_rpy_only) return true;
  if (!a.rpy || !b.rpy) return !a.rpy && !b.rpy;
  return std::abs(*a.rpy - *b.rpy) <= cfg.rpy_slack;
}

using Partition = std::set<std::set<std::string>>;

// Brute force: score every pair, then add SAME edges one at a time in
// priority order (manual SAME, then score descending, then pair order),
// refusing an edge whose two components would put a manual DIFFERENT pair
// together. Components are recomputed by depth-first search each time.
inline Partition oracle_partition(const Dataset& ds, const SimilarityConfig& cfg,
                                  const DecisionSet& manual) {
  std::vector<std::string> ids;
  for (const auto& [id, cr] : ds.crs) ids.push_back(id.str());
  std::size_t n = ids.size();
  auto idx = [&](const CrId& id) {
    return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id.str()) - ids.begin());
  };

  struct Edge {
    std::size_t a, b;
    int rank;  // 0 manual, 1 algorithmic
    double score;
  };
  std::vector<Edge> candidates;
  std::vector<std::pair<std::size_t, std::size_t>> forbidden;
  for (const auto& [pair, d] : manual) {
    if (d.verdict == Verdict::kSame) {
      candidates.push_back({idx(pair.first), idx(pair.second), 0, 0.0});
    } else {
      forbidden.emplace_back(idx(pair.first), idx(pair.second));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = ds.crs.at(CrId(ids[i]));
      const auto& b = ds.crs.at(CrId(ids[j]));
      if (!oracle_blocked_pair(a, b, cfg)) continue;
      double s = oracle_similarity(a, b, cfg);
      if (s >= cfg.threshold) candidates.push_back({i, j, 1, s});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Edge& x, const Edge& y) {
    if (x.rank != y.rank) return x.rank < y.rank;
    if (x.rank == 1 && x.score != y.score) return x.score > y.score;
    return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
  });

  std::vector<std::vector<std::size_t>> adj(n);
  auto component = [&](std::size_t start) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  for (const auto& e : candidates) {
    std::vector<bool> ca = component(e.a);
    if (ca[e.b]) continue;
    std::vector<bool> cb = component(e.b);
    bool blocked = false;
    for (const auto& [x, y] : forbidden) {
      if ((ca[x] && cb[y]) || (ca[y] && cb[x])) blocked = true;
    }
    if (blocked) continue;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }

  Partition out;
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<bool> c = component(i);
    std::set<std::string> members;
    for (std::size_t j = 0; j < n; ++j) {
      if (c[j]) {
        members.insert(ids[j]);
        done[j] = true;
      }
    }
    out.insert(members);
  }
  return out;
}

inline Partition partition_of(const ClusterState& st) {
  Partition out;
  for (const auto& [root, members] : st.clusters()) {
    std::set<std::string> s;
    for (const auto& m : members) s.insert(m.str());
    out.insert(s);
  }
  return out;
}

// Histogram by walking every citation slot of every publication.
inline std::map<int, std::int64_t> oracle_histogram(const Dataset& ds) {
  std::map<int, std::int64_t> counts;
  for (const auto& pub : ds.publications) {
    for (const auto& id : pub.cr_ids) {
      const auto& cr = ds.crs.at(id);
      if (cr.rpy) counts[*cr.rpy] += 1;
    }
  }
  return counts;
}

// Median of the up-to-five years around `y` inside [lo, hi]; even counts use
// the mean of the middle two, halves rounded away from zero.
inline std::int64_t oracle_median(const std::map<int, std::int64_t>& counts, int y,
                                  int lo, int hi) {
  std::vector<std::int64_t> w;
  for (int d = -2; d <= 2; ++d) {
    int z = y + d;
    if (z < lo || z > hi) continue;
    auto it = counts.find(z);
    w.push_back(it == counts.end() ? 0 : it->second);
  }
  std::sort(w.begin(), w.end());
  if (w.size() % 2 == 1) return w[w.size() / 2];
  std::int64_t sum = w[w.size() / 2 - 1] + w[w.size() / 2];
  return sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
}

inline cre::WorkingState random_state(Rng& rng, int n_crs, int n_pubs) {
  Dataset ds = random_dataset(rng, n_crs, n_pubs);
  SimilarityConfig cfg = random_config(rng);
  DecisionSet manual = random_manual(rng, ds, 4);
  cre::WorkingState st;
  st.cluster_state = cluster_equivalent(ds, cfg, manual);
  st.config = cfg;
  st.dataset = std::move(ds);
  st.dataset.sources.push_back({"input.txt", "wos", "FN x\nEF\n"});
  return st;
}

// Random bytes, biased toward the characters the parsers care about.
inline std::string random_fuzz_input(Rng& rng) {
  static const std::string alphabet = "(),.;: -pPvVDOI0123456789abcXYZ[]\"'\t\n";
  std::string s;
  int n = rng.uniform(0, 80);
  for (int i = 0; i < n; ++i) {
    switch (rng.uniform(0, 3)) {
      case 0:
        s += static_cast<char>(rng.uniform(0, 255));
        break;
      case 1: {
        static const std::vector<std::string> chunks = {
            "(1971)", "(20", "DOI ", "pp. ", "p. ", ", V12", ", P9", "é", "–", "\xF0\x9F\x98\x80",
            "\xC3", "Smith, J.", ", , ", "(dddd)"};
        s += rng.pick(chunks);
        break;
      }
      default:
        s += alphabet[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(alphabet.size()) - 1))];
    }
  }
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("crx-test-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace crx::testing

#endif  // CRX_TESTS_SUPPORT_HPP_

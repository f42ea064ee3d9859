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

// Reference publication year spectroscopy (RPYS): cited-reference counts per
// reference publication year and their deviation from the 5-year median.

#ifndef CRX_ANALYSIS_HPP_
#define CRX_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "crx/model.hpp"

namespace crx {

struct SpectrumRow {
  int rpy = 0;
  std::int64_t n_cr = 0;
  std::int64_t median_dev = 0;

  friend bool operator==(const SpectrumRow&, const SpectrumRow&) = default;
};

struct RpySpectrum {
  std::vector<SpectrumRow> rows;  // contiguous years, ascending
  std::int64_t excluded_n_cr = 0;  // occurrences of CRs without a year

  friend bool operator==(const RpySpectrum&, const RpySpectrum&) = default;
};

// Median of a window; even-length windows average the two middle values and
// round half away from zero.
inline std::int64_t window_median(std::vector<std::int64_t> window) {
  std::sort(window.begin(), window.end());
  std::size_t n = window.size();
  if (n == 0) return 0;
  if (n % 2 == 1) return window[n / 2];
  return std::llround(static_cast<double>(window[n / 2 - 1] + window[n / 2]) /
                      2.0);
}

// n_cr(y) - median(n_cr(y-2) .. n_cr(y+2)), window clipped at the ends.
inline std::vector<std::int64_t> compute_median_deviation(
    const std::vector<SpectrumRow>& rows) {
  std::vector<std::int64_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t lo = i >= 2 ? i - 2 : 0;
    std::size_t hi = std::min(rows.size() - 1, i + 2);
    std::vector<std::int64_t> window;
    for (std::size_t j = lo; j <= hi; ++j) window.push_back(rows[j].n_cr);
    out[i] = rows[i].n_cr - window_median(std::move(window));
  }
  return out;
}

inline RpySpectrum rpy_histogram(const Dataset& ds) {
  RpySpectrum spectrum;
  std::map<int, std::int64_t> counts;
  for (const auto& [id, cr] : ds.crs) {
    if (cr.rpy) {
      counts[*cr.rpy] += cr.n_cr;
    } else {
      spectrum.excluded_n_cr += cr.n_cr;
    }
  }
  if (counts.empty()) return spectrum;
  for (int y = counts.begin()->first; y <= counts.rbegin()->first; ++y) {
    auto it = counts.find(y);
    spectrum.rows.push_back({y, it == counts.end() ? 0 : it->second, 0});
  }
  auto dev = compute_median_deviation(spectrum.rows);
  for (std::size_t i = 0; i < dev.size(); ++i) spectrum.rows[i].median_dev = dev[i];
  return spectrum;
}

inline std::string spectrum_csv(const RpySpectrum& spectrum) {
  std::string out = "rpy,n_cr,median_dev\n";
  for (const auto& r : spectrum.rows) {
    out += std::to_string(r.rpy) + "," + std::to_string(r.n_cr) + "," +
           std::to_string(r.median_dev) + "\n";
  }
  return out;
}

// Most cited CRs of one year: n_cr descending, then surname, then id.
inline std::vector<CitedReference> top_crs_for_rpy(const Dataset& ds, int rpy,
                                                   std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  struct Entry {
    std::int64_t n_cr;
    std::string surname;
    const CitedReference* cr;
  };
  std::vector<Entry> entries;
  for (const auto& [id, cr] : ds.crs) {
    if (cr.rpy == rpy) entries.push_back({cr.n_cr, author_surname(cr), &cr});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(b.n_cr, a.surname, a.cr->id) <
           std::tie(a.n_cr, b.surname, b.cr->id);
  });
  std::vector<CitedReference> out;
  for (std::size_t i = 0; i < entries.size() && i < k; ++i) {
    out.push_back(*entries[i].cr);
  }
  return out;
}

struct YearRange {
  int from = 0;
  int to = 0;

  bool contains(int y) const { return y >= from && y <= to; }
};

// Drops every CR whose year lies in `range` (and, unless keep_missing, every
// CR without a year) from the table and from each publication's list.
inline Dataset remove_by_rpy(const Dataset& ds, YearRange range,
                             bool keep_missing) {
  if (range.from > range.to) throw std::invalid_argument("empty year range");
  Dataset out = ds;
  std::erase_if(out.crs, [&](const auto& entry) {
    const auto& cr = entry.second;
    return cr.rpy ? range.contains(*cr.rpy) : !keep_missing;
  });
  for (auto& pub : out.publications) {
    std::erase_if(pub.cr_ids, [&](const CrId& id) { return !out.crs.count(id); });
  }
  return out;
}

}  // namespace crx

#endif  // CRX_ANALYSIS_HPP_

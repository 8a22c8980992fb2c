// Copyright 2026 The ilba-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Seeded census-shaped microdata generator. Hierarchy unit codes are
// prefix-concatenated (each child code embeds its parent code), so nesting
// validation downstream is exercised realistically. A single skew knob
// drives Zipf-distributed draws of both the finest area unit and every key
// category; higher skew means more rare combinations and therefore more
// small cells.

#ifndef ILBA_SYNTH_HPP_
#define ILBA_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ilba/csv.hpp"
#include "ilba/error.hpp"
#include "ilba/rng.hpp"

namespace ilba {

struct SynthSpec {
  std::uint64_t records = 0;
  // Total unit counts per hierarchy level, coarse -> fine; children are
  // spread as evenly as possible across the parents.
  std::vector<std::uint64_t> level_sizes;
  std::vector<std::uint64_t> key_categories;  // category count per key
  double skew = 1.0;  // Zipf exponent; 0 = uniform
  std::uint64_t seed = 0;
  std::vector<std::string> hkey_names;  // defaults to H1..HL
  std::vector<std::string> key_names;   // defaults to K1..Kn
};

namespace detail {

// Cumulative Zipf(1/(r+1)^skew) weights for binary-search sampling.
inline std::vector<double> ZipfCdf(std::uint64_t n, double skew) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::uint64_t r = 0; r < n; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), skew);
    cdf[r] = total;
  }
  return cdf;
}

inline std::uint64_t SampleCdf(const std::vector<double>& cdf,
                               SplitRng& rng) {
  const double u = rng.UniformUnit() * cdf.back();
  std::uint64_t lo = 0;
  std::uint64_t hi = cdf.size() - 1;
  while (lo < hi) {
    const std::uint64_t mid = (lo + hi) / 2;
    if (cdf[mid] <= u) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

inline std::string PadCode(std::uint64_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) {
    digits.insert(digits.begin(), width - digits.size(), '0');
  }
  return digits;
}

}  // namespace detail

inline void GenerateSynthetic(const SynthSpec& spec, const std::string& path,
                              char delim = ',') {
  if (spec.records < 1) {
    throw ValidationError("synthetic record count must be at least 1");
  }
  if (spec.level_sizes.empty()) {
    throw ValidationError("at least one hierarchy level is required");
  }
  for (const std::uint64_t n : spec.level_sizes) {
    if (n < 1) throw ValidationError("hierarchy level sizes must be >= 1");
  }
  for (const std::uint64_t n : spec.key_categories) {
    if (n < 1) throw ValidationError("key category counts must be >= 1");
  }
  if (spec.skew < 0.0) {
    throw ValidationError("skew must be non-negative");
  }
  if (!spec.hkey_names.empty() &&
      spec.hkey_names.size() != spec.level_sizes.size()) {
    throw ValidationError("hkey names must match the number of levels");
  }
  if (!spec.key_names.empty() &&
      spec.key_names.size() != spec.key_categories.size()) {
    throw ValidationError("key names must match the number of keys");
  }

  const std::size_t levels = spec.level_sizes.size();
  // Unit codes and parent links per level.
  std::vector<std::vector<std::string>> codes(levels);
  std::vector<std::vector<std::uint64_t>> parent(levels);
  {
    const std::uint64_t n0 = spec.level_sizes[0];
    const std::size_t width0 =
        std::max<std::size_t>(2, std::to_string(n0).size());
    codes[0].reserve(n0);
    for (std::uint64_t u = 0; u < n0; ++u) {
      codes[0].push_back(detail::PadCode(u + 1, width0));
    }
  }
  for (std::size_t level = 1; level < levels; ++level) {
    const std::uint64_t n_child = spec.level_sizes[level];
    const std::uint64_t n_parent = spec.level_sizes[level - 1];
    const std::uint64_t base = n_child / n_parent;
    const std::uint64_t extra = n_child % n_parent;
    const std::uint64_t max_children = base + (extra > 0 ? 1 : 0);
    const std::size_t local_width =
        std::max<std::size_t>(2, std::to_string(max_children).size());
    codes[level].reserve(n_child);
    parent[level].reserve(n_child);
    std::uint64_t p = 0;
    std::uint64_t local = 0;
    std::uint64_t quota = base + (0 < extra ? 1 : 0);
    for (std::uint64_t u = 0; u < n_child; ++u) {
      while (local >= quota && p + 1 < n_parent) {
        ++p;
        local = 0;
        quota = base + (p < extra ? 1 : 0);
      }
      parent[level].push_back(p);
      codes[level].push_back(codes[level - 1][p] +
                             detail::PadCode(local + 1, local_width));
      ++local;
    }
  }

  SplitRng rng(spec.seed);
  const std::vector<double> unit_cdf =
      detail::ZipfCdf(spec.level_sizes[levels - 1], spec.skew);
  std::vector<std::vector<double>> key_cdfs;
  key_cdfs.reserve(spec.key_categories.size());
  for (const std::uint64_t cats : spec.key_categories) {
    key_cdfs.push_back(detail::ZipfCdf(cats, spec.skew));
  }

  std::string out;
  out.reserve(spec.records * (levels * 8 + spec.key_categories.size() * 3) +
              64);
  for (std::size_t level = 0; level < levels; ++level) {
    if (level > 0) out.push_back(delim);
    out += spec.hkey_names.empty() ? "H" + std::to_string(level + 1)
                                   : spec.hkey_names[level];
  }
  for (std::size_t i = 0; i < spec.key_categories.size(); ++i) {
    out.push_back(delim);
    out += spec.key_names.empty() ? "K" + std::to_string(i + 1)
                                  : spec.key_names[i];
  }
  out.push_back('\n');

  std::vector<std::uint64_t> ancestors(levels);
  for (std::uint64_t r = 0; r < spec.records; ++r) {
    std::uint64_t unit = detail::SampleCdf(unit_cdf, rng);
    ancestors[levels - 1] = unit;
    for (std::size_t level = levels - 1; level > 0; --level) {
      ancestors[level - 1] = parent[level][ancestors[level]];
    }
    for (std::size_t level = 0; level < levels; ++level) {
      if (level > 0) out.push_back(delim);
      out += codes[level][ancestors[level]];
    }
    for (auto& cdf : key_cdfs) {
      out.push_back(delim);
      out += std::to_string(detail::SampleCdf(cdf, rng) + 1);
    }
    out.push_back('\n');
  }
  WriteFileAtomic(path, out);
}

}  // namespace ilba

#endif  // ILBA_SYNTH_HPP_

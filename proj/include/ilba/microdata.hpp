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
// Microdata ingestion: one input row per individual, hierarchical variables
// with validated nesting, categorical key variables interned against sorted
// category dictionaries.

#ifndef ILBA_MICRODATA_HPP_
#define ILBA_MICRODATA_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ilba/csv.hpp"
#include "ilba/error.hpp"

namespace ilba {

inline constexpr int kDefaultKeyThreshold = 100;

// Hierarchical variables ordered coarse -> fine. Rank r is the r-th
// coarsest level; after ingest normalization ranks are always 1..L in
// order.
struct HierarchySpec {
  std::vector<std::string> names;
  std::vector<int> ranks;

  int levels() const { return static_cast<int>(names.size()); }
};

// Key (non-hierarchical) variables with their observed category sets,
// sorted lexicographically. Keys whose category count exceeds key_thr are
// excluded at ingest.
struct KeySpec {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> categories;
  int key_thr = kDefaultKeyThreshold;
};

// Validated, interned microdata. Cell values are indices into the sorted
// per-column dictionaries, so index order equals lexicographic value order.
// Columns are the hierarchy levels coarse -> fine followed by the included
// keys in spec order.
struct Microdata {
  HierarchySpec hierarchy;
  KeySpec keys;
  std::vector<std::string> excluded_keys;  // over key_thr, with notices
  std::vector<std::string> notices;
  std::vector<std::vector<std::string>> level_units;  // sorted, per level
  std::uint64_t record_count = 0;
  std::vector<std::uint32_t> cells;  // record-major, width() per record

  std::size_t width() const {
    return hierarchy.names.size() + keys.names.size();
  }
};

namespace detail {

inline void CheckValueCharset(const std::string& value,
                              const std::string& column) {
  for (const char c : value) {
    if (c == ',' || c == '\n' || c == '\r' || c == '\x1f') {
      throw ValidationError("value '" + value + "' in column '" + column +
                            "' contains an unsupported character (comma, "
                            "newline, or 0x1f)");
    }
  }
}

struct ColumnIntern {
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> values;  // first-seen order

  std::uint32_t Intern(const std::string& value) {
    auto [it, inserted] =
        index.try_emplace(value, static_cast<std::uint32_t>(values.size()));
    if (inserted) values.push_back(value);
    return it->second;
  }
};

}  // namespace detail

// Validates and interns a parsed microdata table.
//
// - `hkey` names the hierarchical variables; `hkey_rank`, when non-empty,
//   gives each one's rank (1 = coarsest) and the variables are reordered
//   coarse -> fine. Without ranks, `hkey` must already be coarse -> fine.
// - `key` selects the key variables; when absent every non-hierarchical
//   column is used. Keys with more than `key_thr` observed categories are
//   excluded with a notice.
// - Nesting is verified: every unit at level r+1 must appear under exactly
//   one unit at level r across all records.
inline Microdata IngestMicrodata(const DelimitedTable& data,
                                 const std::vector<std::string>& hkey,
                                 const std::vector<int>& hkey_rank,
                                 const std::optional<std::vector<std::string>>&
                                     key,
                                 int key_thr = kDefaultKeyThreshold) {
  if (hkey.empty()) {
    throw ValidationError("at least one hierarchical variable is required");
  }
  if (key_thr < 1) {
    throw ValidationError("key category threshold must be at least 1");
  }
  if (data.rows.empty()) {
    throw ValidationError("microdata is empty");
  }

  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < data.header.size(); ++i) {
    header_index.emplace(data.header[i], i);  // first occurrence wins
  }
  const auto require_column = [&](const std::string& name) -> std::size_t {
    const auto it = header_index.find(name);
    if (it == header_index.end()) {
      throw ValidationError("column '" + name + "' not found in microdata");
    }
    return it->second;
  };

  // Normalize the hierarchy to coarse -> fine.
  std::vector<std::string> hier_names = hkey;
  if (!hkey_rank.empty()) {
    if (hkey_rank.size() != hkey.size()) {
      throw ValidationError("hkey-rank must have one rank per hierarchical "
                            "variable");
    }
    std::vector<int> sorted_ranks = hkey_rank;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    for (std::size_t i = 0; i < sorted_ranks.size(); ++i) {
      if (sorted_ranks[i] != static_cast<int>(i) + 1) {
        throw ValidationError(
            "hkey-rank must be a permutation of 1..L");
      }
    }
    std::vector<std::size_t> order(hkey.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return hkey_rank[a] < hkey_rank[b];
    });
    hier_names.clear();
    for (const std::size_t i : order) hier_names.push_back(hkey[i]);
  }
  for (std::size_t i = 0; i < hier_names.size(); ++i) {
    for (std::size_t j = i + 1; j < hier_names.size(); ++j) {
      if (hier_names[i] == hier_names[j]) {
        throw ValidationError("duplicate hierarchical variable '" +
                              hier_names[i] + "'");
      }
    }
  }

  // Candidate keys: explicit list or every non-hierarchical column.
  std::vector<std::string> key_names;
  if (key.has_value()) {
    key_names = *key;
    for (std::size_t i = 0; i < key_names.size(); ++i) {
      for (std::size_t j = i + 1; j < key_names.size(); ++j) {
        if (key_names[i] == key_names[j]) {
          throw ValidationError("duplicate key variable '" + key_names[i] +
                                "'");
        }
      }
      if (std::find(hier_names.begin(), hier_names.end(), key_names[i]) !=
          hier_names.end()) {
        throw ValidationError("variable '" + key_names[i] +
                              "' cannot be both hierarchical and key");
      }
    }
  } else {
    for (const auto& name : data.header) {
      if (std::find(hier_names.begin(), hier_names.end(), name) ==
          hier_names.end()) {
        key_names.push_back(name);
      }
    }
  }

  const std::size_t levels = hier_names.size();
  std::vector<std::size_t> columns;
  columns.reserve(levels + key_names.size());
  for (const auto& name : hier_names) columns.push_back(require_column(name));
  for (const auto& name : key_names) columns.push_back(require_column(name));

  // Intern all candidate columns in one pass over the records.
  const std::size_t total_cols = columns.size();
  std::vector<detail::ColumnIntern> interns(total_cols);
  std::vector<std::uint32_t> raw_cells;
  raw_cells.reserve(data.rows.size() * total_cols);
  std::vector<std::string> all_names = hier_names;
  all_names.insert(all_names.end(), key_names.begin(), key_names.end());
  for (const auto& row : data.rows) {
    for (std::size_t c = 0; c < total_cols; ++c) {
      const std::string& value = row[columns[c]];
      auto& intern = interns[c];
      const auto it = intern.index.find(value);
      if (it != intern.index.end()) {
        raw_cells.push_back(it->second);
      } else {
        detail::CheckValueCharset(value, all_names[c]);
        raw_cells.push_back(intern.Intern(value));
      }
    }
  }

  // Nesting check: each unit at level r must sit under exactly one unit at
  // level r-1.
  for (std::size_t level = 1; level < levels; ++level) {
    std::vector<std::int64_t> parent_of(interns[level].values.size(), -1);
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      const std::uint32_t child = raw_cells[r * total_cols + level];
      const std::uint32_t parent = raw_cells[r * total_cols + level - 1];
      std::int64_t& seen = parent_of[child];
      if (seen < 0) {
        seen = parent;
      } else if (seen != parent) {
        throw ValidationError(
            "hierarchy nesting violated: unit '" +
            interns[level].values[child] + "' of '" + hier_names[level] +
            "' appears under both '" +
            interns[level - 1].values[static_cast<std::size_t>(seen)] +
            "' and '" + interns[level - 1].values[parent] + "' of '" +
            hier_names[level - 1] + "'");
      }
    }
  }

  // Apply the category cap to keys.
  Microdata out;
  out.hierarchy.names = hier_names;
  out.hierarchy.ranks.resize(levels);
  std::iota(out.hierarchy.ranks.begin(), out.hierarchy.ranks.end(), 1);
  out.keys.key_thr = key_thr;
  std::vector<std::size_t> kept;  // indices into candidate columns
  for (std::size_t c = 0; c < levels; ++c) kept.push_back(c);
  for (std::size_t i = 0; i < key_names.size(); ++i) {
    const std::size_t c = levels + i;
    const std::size_t cats = interns[c].values.size();
    if (cats > static_cast<std::size_t>(key_thr)) {
      out.excluded_keys.push_back(key_names[i]);
      out.notices.push_back("key '" + key_names[i] + "' excluded: " +
                            std::to_string(cats) +
                            " categories exceed key-thr " +
                            std::to_string(key_thr));
      continue;
    }
    out.keys.names.push_back(key_names[i]);
    kept.push_back(c);
  }

  // Sort each kept dictionary and remap indices so that index order equals
  // value order.
  const std::size_t width = kept.size();
  std::vector<std::vector<std::uint32_t>> remap(width);
  for (std::size_t k2 = 0; k2 < width; ++k2) {
    auto& intern = interns[kept[k2]];
    std::vector<std::uint32_t> order(intern.values.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                return intern.values[a] < intern.values[b];
              });
    std::vector<std::string> sorted_values(order.size());
    remap[k2].resize(order.size());
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
      sorted_values[pos] = std::move(intern.values[order[pos]]);
      remap[k2][order[pos]] = pos;
    }
    if (k2 < levels) {
      out.level_units.push_back(std::move(sorted_values));
    } else {
      out.keys.categories.push_back(std::move(sorted_values));
    }
  }

  out.record_count = data.rows.size();
  out.cells.reserve(out.record_count * width);
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    for (std::size_t k2 = 0; k2 < width; ++k2) {
      out.cells.push_back(remap[k2][raw_cells[r * total_cols + kept[k2]]]);
    }
  }
  return out;
}

inline Microdata IngestMicrodataFile(
    const std::string& path, const std::vector<std::string>& hkey,
    const std::vector<int>& hkey_rank,
    const std::optional<std::vector<std::string>>& key,
    int key_thr = kDefaultKeyThreshold, char delim = ',') {
  return IngestMicrodata(ReadDelimited(path, delim), hkey, hkey_rank, key,
                         key_thr);
}

}  // namespace ilba

#endif  // ILBA_MICRODATA_HPP_

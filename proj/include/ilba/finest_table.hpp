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
// The SCA-masked finest-level frequency table: one row per observed
// (finest unit x key combination), in canonical order, plus the schema
// metadata and a lossless single-file container format.
//
// Container layout (always comma-delimited):
//   line 1   JSON metadata (schema version, hierarchy, keys with category
//            sets, K, seed, row count, checksum over the remaining bytes)
//   line 2   column header: hierarchy names, key names, N, N_masked
//   line 3+  one row per cell, canonical order

#ifndef ILBA_FINEST_TABLE_HPP_
#define ILBA_FINEST_TABLE_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ilba/csv.hpp"
#include "ilba/error.hpp"
#include "ilba/masking.hpp"
#include "ilba/microdata.hpp"
#include "ilba/rng.hpp"

namespace ilba {

inline constexpr int kFinestTableSchemaVersion = 1;
inline constexpr std::string_view kFinestTableFormatTag = "ilba-finest-table";

// One table row spelled out as strings; used to assemble tables directly
// (tests, loaders) without going through microdata.
struct StringRow {
  std::vector<std::string> values;  // hierarchy levels coarse->fine, keys
  std::uint64_t true_count = 0;
  std::uint64_t masked_count = 0;
};

namespace detail {

inline void PackIndexBe(std::uint32_t v, std::string& out) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

inline std::uint32_t UnpackIndexBe(const char* p) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[3]));
}

}  // namespace detail

class FinestTable {
 public:
  // Builds the table from validated microdata: counts every observed
  // combination, sorts canonically, then masks each count with one SCA draw
  // per row in that order. Zero-count combinations never exist here.
  static FinestTable Build(const Microdata& md, Threshold k,
                           std::uint64_t seed) {
    const std::size_t width = md.width();
    std::unordered_map<std::string, std::uint64_t> counts;
    counts.reserve(md.record_count);
    std::string packed;
    packed.reserve(width * 4);
    for (std::uint64_t r = 0; r < md.record_count; ++r) {
      packed.clear();
      for (std::size_t c = 0; c < width; ++c) {
        detail::PackIndexBe(md.cells[r * width + c], packed);
      }
      ++counts[packed];
    }

    std::vector<std::pair<std::string, std::uint64_t>> sorted;
    sorted.reserve(counts.size());
    for (auto& entry : counts) sorted.emplace_back(std::move(entry));
    // Big-endian packing of sorted-dictionary indices makes byte order equal
    // canonical (value-lexicographic) order.
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    FinestTable table(md.hierarchy, md.keys, k, seed);
    table.dicts_ = md.level_units;
    table.dicts_.insert(table.dicts_.end(), md.keys.categories.begin(),
                        md.keys.categories.end());
    table.cells_.reserve(sorted.size() * width);
    table.true_counts_.reserve(sorted.size());
    table.masked_counts_.reserve(sorted.size());
    SplitRng rng(seed);
    for (const auto& [key, count] : sorted) {
      for (std::size_t c = 0; c < width; ++c) {
        table.cells_.push_back(detail::UnpackIndexBe(key.data() + c * 4));
      }
      table.true_counts_.push_back(count);
      table.masked_counts_.push_back(ApplySca(count, k, rng).masked);
    }
    return table;
  }

  // Assembles a table from explicit rows. Rows are sorted canonically;
  // duplicates and masked counts that contradict the SCA rule are rejected.
  // `allow_zero_rows` admits (true=0, masked=0) rows, which the aggregation
  // layer ignores; persisted tables never contain them.
  static FinestTable FromRows(const HierarchySpec& hierarchy,
                              const KeySpec& keys, Threshold k,
                              std::uint64_t seed, std::vector<StringRow> rows,
                              bool allow_zero_rows = false) {
    const std::size_t levels = hierarchy.names.size();
    const std::size_t width = levels + keys.names.size();
    if (keys.categories.size() != keys.names.size()) {
      throw ValidationError("key spec must carry one category set per key");
    }

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].values.size() != width) {
        throw ValidationError("row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].values.size()) +
                              " values, expected " + std::to_string(width));
      }
      for (const auto& v : rows[i].values) {
        detail::CheckValueCharset(v, "finest-table row");
      }
      order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].values < rows[b].values;
    });

    FinestTable table(hierarchy, keys, k, seed);
    // Hierarchy dictionaries come from the rows; key dictionaries from the
    // spec (sorted).
    table.dicts_.resize(width);
    for (std::size_t level = 0; level < levels; ++level) {
      std::vector<std::string> units;
      for (const auto& row : rows) units.push_back(row.values[level]);
      std::sort(units.begin(), units.end());
      units.erase(std::unique(units.begin(), units.end()), units.end());
      table.dicts_[level] = std::move(units);
    }
    for (std::size_t i = 0; i < keys.names.size(); ++i) {
      std::vector<std::string> cats = keys.categories[i];
      std::sort(cats.begin(), cats.end());
      table.dicts_[levels + i] = std::move(cats);
    }

    table.cells_.reserve(rows.size() * width);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const StringRow& row = rows[order[pos]];
      if (pos > 0 && rows[order[pos - 1]].values == row.values) {
        throw ValidationError("duplicate finest-table row for combination '" +
                              JoinValues(row.values) + "'");
      }
      for (std::size_t c = 0; c < width; ++c) {
        const auto idx = table.IndexInDict(c, row.values[c]);
        if (!idx.has_value()) {
          throw ValidationError("value '" + row.values[c] +
                                "' is not in the category set of '" +
                                table.column_name(c) + "'");
        }
        table.cells_.push_back(*idx);
      }
      if (!allow_zero_rows && row.true_count == 0) {
        throw ValidationError(
            "finest-table rows must have a positive count (combination '" +
            JoinValues(row.values) + "')");
      }
      if (!ObeysScaRule(row.true_count, row.masked_count, k)) {
        throw ValidationError(
            "masked count " + std::to_string(row.masked_count) +
            " violates the SCA rule for true count " +
            std::to_string(row.true_count) + " (combination '" +
            JoinValues(row.values) + "')");
      }
      table.true_counts_.push_back(row.true_count);
      table.masked_counts_.push_back(row.masked_count);
    }
    return table;
  }

  void Save(const std::string& path) const {
    std::string body = HeaderLine();
    body.push_back('\n');
    std::string line;
    for (std::size_t r = 0; r < num_rows(); ++r) {
      line.clear();
      for (std::size_t c = 0; c < width(); ++c) {
        if (c > 0) line.push_back(',');
        line += value(r, c);
      }
      line.push_back(',');
      line += std::to_string(true_counts_[r]);
      line.push_back(',');
      line += std::to_string(masked_counts_[r]);
      line.push_back('\n');
      body += line;
    }

    nlohmann::json meta;
    meta["format"] = kFinestTableFormatTag;
    meta["schema_version"] = kFinestTableSchemaVersion;
    meta["k"] = k_.value();
    meta["seed"] = seed_;
    meta["row_count"] = num_rows();
    meta["row_checksum"] = ToHex64(Fnv1a64(body));
    meta["hierarchy"] = {{"names", hierarchy_.names},
                         {"ranks", hierarchy_.ranks}};
    nlohmann::json keys = nlohmann::json::array();
    for (std::size_t i = 0; i < keys_.names.size(); ++i) {
      keys.push_back({{"name", keys_.names[i]},
                      {"categories", dicts_[hierarchy_.names.size() + i]}});
    }
    meta["keys"] = std::move(keys);
    meta["key_thr"] = keys_.key_thr;

    std::string out = meta.dump();
    out.push_back('\n');
    out += body;
    WriteFileAtomic(path, out);
  }

  static FinestTable Load(const std::string& path) {
    const std::string bytes = ReadFileBytes(path);
    const std::size_t meta_end = bytes.find('\n');
    if (meta_end == std::string::npos) {
      throw IoError("malformed container (no metadata line): " + path);
    }
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(bytes.substr(0, meta_end));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed container metadata in " + path + ": " +
                    e.what());
    }

    try {
      if (meta.value("format", "") != kFinestTableFormatTag) {
        throw IoError("not a finest-table container: " + path);
      }
      const int version = meta.at("schema_version").get<int>();
      if (version != kFinestTableSchemaVersion) {
        throw IoError("unsupported schema version " +
                      std::to_string(version) + " in " + path +
                      "; this build reads version " +
                      std::to_string(kFinestTableSchemaVersion));
      }

      const std::string_view body(bytes.data() + meta_end + 1,
                                  bytes.size() - meta_end - 1);
      if (meta.at("row_checksum").get<std::string>() !=
          ToHex64(Fnv1a64(body))) {
        throw IntegrityError("row checksum mismatch in " + path +
                             " (file was modified after writing)");
      }

      HierarchySpec hierarchy;
      hierarchy.names =
          meta.at("hierarchy").at("names").get<std::vector<std::string>>();
      hierarchy.ranks =
          meta.at("hierarchy").at("ranks").get<std::vector<int>>();
      KeySpec keys;
      keys.key_thr = meta.at("key_thr").get<int>();
      for (const auto& entry : meta.at("keys")) {
        keys.names.push_back(entry.at("name").get<std::string>());
        keys.categories.push_back(
            entry.at("categories").get<std::vector<std::string>>());
      }
      const Threshold k(meta.at("k").get<int>());
      const auto seed = meta.at("seed").get<std::uint64_t>();
      const auto row_count = meta.at("row_count").get<std::uint64_t>();
      return ParseBody(body, path, hierarchy, keys, k, seed, row_count);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed container metadata in " + path + ": " +
                    e.what());
    }
  }

  const HierarchySpec& hierarchy() const { return hierarchy_; }
  const KeySpec& keys() const { return keys_; }
  Threshold threshold() const { return k_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t levels() const { return hierarchy_.names.size(); }
  std::size_t num_keys() const { return keys_.names.size(); }
  std::size_t width() const { return levels() + num_keys(); }
  std::size_t num_rows() const { return true_counts_.size(); }

  std::uint32_t cell(std::size_t row, std::size_t col) const {
    return cells_[row * width() + col];
  }
  const std::string& value(std::size_t row, std::size_t col) const {
    return dicts_[col][cell(row, col)];
  }
  std::uint64_t true_count(std::size_t row) const { return true_counts_[row]; }
  std::uint64_t masked_count(std::size_t row) const {
    return masked_counts_[row];
  }

  const std::string& column_name(std::size_t col) const {
    return col < levels() ? hierarchy_.names[col]
                          : keys_.names[col - levels()];
  }
  const std::vector<std::string>& column_values(std::size_t col) const {
    return dicts_[col];
  }
  // Column index of a key variable, if it exists.
  std::optional<std::size_t> KeyColumn(const std::string& name) const {
    for (std::size_t i = 0; i < keys_.names.size(); ++i) {
      if (keys_.names[i] == name) return levels() + i;
    }
    return std::nullopt;
  }
  std::optional<std::uint32_t> IndexInDict(std::size_t col,
                                           const std::string& value) const {
    const auto& dict = dicts_[col];
    const auto it = std::lower_bound(dict.begin(), dict.end(), value);
    if (it == dict.end() || *it != value) return std::nullopt;
    return static_cast<std::uint32_t>(it - dict.begin());
  }

 private:
  FinestTable(HierarchySpec hierarchy, KeySpec keys, Threshold k,
              std::uint64_t seed)
      : hierarchy_(std::move(hierarchy)),
        keys_(std::move(keys)),
        k_(k),
        seed_(seed) {}

  static std::string JoinValues(const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out.push_back('|');
      out += values[i];
    }
    return out;
  }

  std::string HeaderLine() const {
    std::string out;
    for (std::size_t c = 0; c < width(); ++c) {
      if (c > 0) out.push_back(',');
      out += column_name(c);
    }
    out += ",N,N_masked";
    return out;
  }

  static FinestTable ParseBody(std::string_view body, const std::string& path,
                               const HierarchySpec& hierarchy,
                               const KeySpec& keys, Threshold k,
                               std::uint64_t seed, std::uint64_t row_count) {
    FinestTable table(hierarchy, keys, k, seed);
    const std::size_t levels = hierarchy.names.size();
    const std::size_t width = levels + keys.names.size();
    table.dicts_.resize(width);
    for (std::size_t i = 0; i < keys.names.size(); ++i) {
      auto cats = keys.categories[i];
      std::sort(cats.begin(), cats.end());
      table.dicts_[levels + i] = std::move(cats);
    }

    // Hierarchy dictionaries are interned on the fly and remapped to sorted
    // indices afterwards.
    std::vector<detail::ColumnIntern> hier_interns(levels);

    std::size_t pos = 0;
    std::size_t line_no = 1;  // metadata was line 1
    std::vector<std::string> fields;
    std::vector<std::string> prev_values;
    std::vector<std::string> cur_values;
    bool have_header = false;
    while (pos < body.size()) {
      std::size_t end = body.find('\n', pos);
      if (end == std::string_view::npos) end = body.size();
      const std::string_view line = body.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      SplitLine(line, ',', fields);
      if (!have_header) {
        if (line != table.HeaderLine()) {
          throw IntegrityError("row header does not match metadata in " +
                               path);
        }
        have_header = true;
        continue;
      }
      if (fields.size() != width + 2) {
        throw IntegrityError("line " + std::to_string(line_no) + " of " +
                             path + " has " + std::to_string(fields.size()) +
                             " fields, expected " +
                             std::to_string(width + 2));
      }
      cur_values.assign(fields.begin(), fields.begin() + width);
      if (!prev_values.empty()) {
        if (cur_values < prev_values) {
          throw IntegrityError("rows are not in canonical order at line " +
                               std::to_string(line_no) + " of " + path);
        }
        if (cur_values == prev_values) {
          throw IntegrityError("duplicate row at line " +
                               std::to_string(line_no) + " of " + path);
        }
      }
      std::swap(prev_values, cur_values);

      for (std::size_t c = 0; c < width; ++c) {
        const std::string& v = prev_values[c];
        if (c < levels) {
          table.cells_.push_back(hier_interns[c].Intern(v));
        } else {
          const auto idx = table.IndexInDict(c, v);
          if (!idx.has_value()) {
            throw IntegrityError("value '" + v +
                                 "' at line " + std::to_string(line_no) +
                                 " of " + path +
                                 " is not in the stored category set of '" +
                                 table.column_name(c) + "'");
          }
          table.cells_.push_back(*idx);
        }
      }
      std::uint64_t true_count = 0;
      std::uint64_t masked_count = 0;
      try {
        true_count = ParseCount(fields[width], "column N");
        masked_count = ParseCount(fields[width + 1], "column N_masked");
      } catch (const ValidationError& e) {
        throw IntegrityError("line " + std::to_string(line_no) + " of " +
                             path + ": " + e.what());
      }
      if (true_count == 0) {
        throw IntegrityError("line " + std::to_string(line_no) + " of " +
                             path + ": stored rows must have N >= 1");
      }
      if (!ObeysScaRule(true_count, masked_count, k)) {
        throw IntegrityError("line " + std::to_string(line_no) + " of " +
                             path + ": masked count " +
                             std::to_string(masked_count) +
                             " violates the SCA rule for true count " +
                             std::to_string(true_count));
      }
      table.true_counts_.push_back(true_count);
      table.masked_counts_.push_back(masked_count);
    }
    if (!have_header) {
      throw IoError("malformed container (no row header): " + path);
    }
    if (table.num_rows() != row_count) {
      throw IntegrityError("row count mismatch in " + path + ": metadata "
                           "says " + std::to_string(row_count) + ", file " +
                           "has " + std::to_string(table.num_rows()));
    }

    // Remap hierarchy indices to sorted dictionaries. Canonical row order is
    // preserved because it was validated on the string values.
    std::vector<std::vector<std::uint32_t>> remap(levels);
    for (std::size_t level = 0; level < levels; ++level) {
      auto& intern = hier_interns[level];
      std::vector<std::uint32_t> order(intern.values.size());
      std::iota(order.begin(), order.end(), std::uint32_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::uint32_t a, std::uint32_t b) {
                  return intern.values[a] < intern.values[b];
                });
      std::vector<std::string> sorted_values(order.size());
      remap[level].resize(order.size());
      for (std::uint32_t p = 0; p < order.size(); ++p) {
        sorted_values[p] = std::move(intern.values[order[p]]);
        remap[level][order[p]] = p;
      }
      table.dicts_[level] = std::move(sorted_values);
    }
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      for (std::size_t level = 0; level < levels; ++level) {
        auto& cell = table.cells_[r * width + level];
        cell = remap[level][cell];
      }
    }
    return table;
  }

  HierarchySpec hierarchy_;
  KeySpec keys_;
  Threshold k_;
  std::uint64_t seed_;
  std::vector<std::vector<std::string>> dicts_;  // per column, sorted
  std::vector<std::uint32_t> cells_;             // row-major indices
  std::vector<std::uint64_t> true_counts_;
  std::vector<std::uint64_t> masked_counts_;
};

}  // namespace ilba

#endif  // ILBA_FINEST_TABLE_HPP_

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
// Aggregation of the finest-level table to coarser hierarchy levels and
// key subsets, single-cell queries, and the information-loss summary. Every
// released aggregated count is produced by the same deterministic masking
// path, so a single-cell query always matches the full-table entry.

#ifndef ILBA_AGGREGATE_HPP_
#define ILBA_AGGREGATE_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ilba/csv.hpp"
#include "ilba/error.hpp"
#include "ilba/finest_table.hpp"
#include "ilba/masking.hpp"

namespace ilba {

// A coarser-level table request: hierarchy level 1..L plus a subset of the
// key variables. An empty key list yields per-area totals at the level.
struct AggregationRequest {
  int hkey_level = 1;
  std::vector<std::string> keys;
};

struct AggRow {
  // Group identity: hierarchy dictionary indices through the requested
  // level, then selected key dictionary indices.
  std::vector<std::uint32_t> group;
  std::uint64_t true_count = 0;  // internal; never serialized publicly
  std::uint64_t masked_count = 0;
  bool type1 = false;
  bool type2 = false;

  std::int64_t loss() const {
    return static_cast<std::int64_t>(masked_count) -
           static_cast<std::int64_t>(true_count);
  }
};

struct LossBin {
  std::int64_t loss = 0;
  std::uint64_t n = 0;
  std::uint64_t perc_hundredths = 0;  // round-half-up percentage * 100
};

struct InfoLossSummary {
  std::vector<LossBin> bins;  // ascending by loss
  std::uint64_t total = 0;
};

struct AggregatedTable {
  int hkey_level = 1;
  std::vector<std::string> key_names;
  std::vector<std::size_t> key_cols;  // column indices in the finest table
  std::vector<AggRow> rows;           // canonical order
  InfoLossSummary info_loss;
};

// A single released cell: one hierarchy unit at a level plus fixed values
// for a subset of keys.
struct CellQuery {
  int hkey_level = 1;
  std::string hkey_value;
  std::vector<std::pair<std::string, std::string>> key_assignments;
};

struct GroupPartition {
  std::vector<std::uint32_t> group;
  SmallCellPartition partition;
};

namespace detail {

inline std::vector<std::size_t> ResolveKeyColumns(
    const FinestTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& name : names) {
    const auto col = table.KeyColumn(name);
    if (!col.has_value()) {
      throw ValidationError("unknown key variable '" + name + "'");
    }
    if (std::find(cols.begin(), cols.end(), *col) != cols.end()) {
      throw ValidationError("key variable '" + name + "' selected twice");
    }
    cols.push_back(*col);
  }
  return cols;
}

inline void CheckLevel(const FinestTable& table, int level) {
  if (level < 1 || level > static_cast<int>(table.levels())) {
    throw ValidationError("hierarchy level " + std::to_string(level) +
                          " out of range 1.." +
                          std::to_string(table.levels()));
  }
}

}  // namespace detail

// Groups the finest rows by (hierarchy values through the level, selected
// keys) and folds each group into a SmallCellPartition. Rows with a zero
// true count are unobserved combinations and contribute nothing; groups
// consisting only of such rows do not appear. Result is in canonical group
// order.
inline std::vector<GroupPartition> GroupPartitions(
    const FinestTable& table, const AggregationRequest& request) {
  detail::CheckLevel(table, request.hkey_level);
  const std::vector<std::size_t> key_cols =
      detail::ResolveKeyColumns(table, request.keys);
  const auto level = static_cast<std::size_t>(request.hkey_level);

  std::unordered_map<std::string, PartitionAccumulator> groups;
  groups.reserve(table.num_rows() / 2 + 1);
  std::string packed;
  packed.reserve((level + key_cols.size()) * 4);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.true_count(r) == 0) continue;
    packed.clear();
    for (std::size_t c = 0; c < level; ++c) {
      detail::PackIndexBe(table.cell(r, c), packed);
    }
    for (const std::size_t c : key_cols) {
      detail::PackIndexBe(table.cell(r, c), packed);
    }
    auto [it, inserted] =
        groups.try_emplace(packed, PartitionAccumulator(table.threshold()));
    it->second.Add(table.true_count(r), table.masked_count(r));
  }

  std::vector<std::pair<std::string, SmallCellPartition>> sorted;
  sorted.reserve(groups.size());
  for (auto& [key, acc] : groups) sorted.emplace_back(key, acc.Finish());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<GroupPartition> out;
  out.reserve(sorted.size());
  const std::size_t group_width = level + key_cols.size();
  for (auto& [key, partition] : sorted) {
    GroupPartition gp;
    gp.group.reserve(group_width);
    for (std::size_t c = 0; c < group_width; ++c) {
      gp.group.push_back(detail::UnpackIndexBe(key.data() + c * 4));
    }
    gp.partition = partition;
    out.push_back(std::move(gp));
  }
  return out;
}

inline InfoLossSummary SummarizeInfoLoss(std::span<const AggRow> rows) {
  std::map<std::int64_t, std::uint64_t> counts;
  for (const AggRow& row : rows) ++counts[row.loss()];
  InfoLossSummary summary;
  summary.total = rows.size();
  for (const auto& [loss, n] : counts) {
    // Round-half-up to two decimals, in integer arithmetic.
    const std::uint64_t perc =
        (n * 10000 + summary.total / 2) / summary.total;
    summary.bins.push_back({loss, n, perc});
  }
  return summary;
}

// Masked coarser-level table: per group, partition -> masking -> release.
inline AggregatedTable AggregateTable(const FinestTable& table,
                                      const AggregationRequest& request) {
  AggregatedTable out;
  out.hkey_level = request.hkey_level;
  out.key_names = request.keys;
  out.key_cols = detail::ResolveKeyColumns(table, request.keys);
  std::vector<GroupPartition> groups = GroupPartitions(table, request);
  out.rows.reserve(groups.size());
  for (auto& gp : groups) {
    const IlbaTrace trace = ApplyIlba(gp.partition, table.threshold());
    AggRow row;
    row.group = std::move(gp.group);
    row.true_count = gp.partition.f_small + gp.partition.f_large;
    row.masked_count =
        MaskedAggregate(gp.partition.f_large, trace.masked_small);
    row.type1 = trace.shift == ShiftType::kType1Up;
    row.type2 = trace.shift == ShiftType::kType2Down;
    out.rows.push_back(std::move(row));
  }
  out.info_loss = SummarizeInfoLoss(out.rows);
  return out;
}

// Masked frequency for a single cell. Unknown units or category values are
// rejected; a cell with no observed rows releases 0. Deterministic, and by
// construction equal to the matching AggregateTable entry.
inline std::uint64_t QueryCell(const FinestTable& table, const CellQuery& q,
                               IlbaTrace* trace_out = nullptr,
                               SmallCellPartition* partition_out = nullptr) {
  detail::CheckLevel(table, q.hkey_level);
  const auto level_col = static_cast<std::size_t>(q.hkey_level) - 1;
  const auto unit = table.IndexInDict(level_col, q.hkey_value);
  if (!unit.has_value()) {
    throw ValidationError("unknown hierarchy unit '" + q.hkey_value +
                          "' at level " + std::to_string(q.hkey_level) +
                          " ('" + table.column_name(level_col) + "')");
  }
  std::vector<std::pair<std::size_t, std::uint32_t>> filters;
  filters.reserve(q.key_assignments.size());
  std::vector<std::string> names;
  for (const auto& [name, value] : q.key_assignments) names.push_back(name);
  const std::vector<std::size_t> cols =
      detail::ResolveKeyColumns(table, names);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto idx = table.IndexInDict(cols[i], q.key_assignments[i].second);
    if (!idx.has_value()) {
      throw ValidationError("unknown category '" +
                            q.key_assignments[i].second + "' for key '" +
                            q.key_assignments[i].first + "'");
    }
    filters.emplace_back(cols[i], *idx);
  }

  PartitionAccumulator acc(table.threshold());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.cell(r, level_col) != *unit) continue;
    bool match = true;
    for (const auto& [col, idx] : filters) {
      if (table.cell(r, col) != idx) {
        match = false;
        break;
      }
    }
    if (!match || table.true_count(r) == 0) continue;
    acc.Add(table.true_count(r), table.masked_count(r));
  }
  const SmallCellPartition partition = acc.Finish();
  const IlbaTrace trace = ApplyIlba(partition, table.threshold());
  if (trace_out != nullptr) *trace_out = trace;
  if (partition_out != nullptr) *partition_out = partition;
  return MaskedAggregate(partition.f_large, trace.masked_small);
}

inline std::string FormatPercent(std::uint64_t hundredths) {
  std::string out = std::to_string(hundredths / 100);
  const std::uint64_t frac = hundredths % 100;
  out.push_back('.');
  out.push_back(static_cast<char>('0' + frac / 10));
  out.push_back(static_cast<char>('0' + frac % 10));
  return out;
}

// Public CSV: group columns plus N_masked and the shift flags. True counts
// stay internal.
inline void WriteAggregatedTable(const AggregatedTable& agg,
                                 const FinestTable& table,
                                 const std::string& path, char delim = ',') {
  std::string out;
  const auto level = static_cast<std::size_t>(agg.hkey_level);
  for (std::size_t c = 0; c < level; ++c) {
    out += table.column_name(c);
    out.push_back(delim);
  }
  for (const auto& name : agg.key_names) {
    out += name;
    out.push_back(delim);
  }
  out += "N_masked";
  out.push_back(delim);
  out += "type1";
  out.push_back(delim);
  out += "type2";
  out.push_back('\n');

  std::vector<std::size_t> cols(level);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  cols.insert(cols.end(), agg.key_cols.begin(), agg.key_cols.end());
  for (const AggRow& row : agg.rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out += table.column_values(cols[i])[row.group[i]];
      out.push_back(delim);
    }
    out += std::to_string(row.masked_count);
    out.push_back(delim);
    out.push_back(row.type1 ? '1' : '0');
    out.push_back(delim);
    out.push_back(row.type2 ? '1' : '0');
    out.push_back('\n');
  }
  WriteFileAtomic(path, out);
}

// Access-controlled loss report: per-loss counts and percentages plus a
// Total row that always prints 100.00.
inline void WriteInfoLossReport(const InfoLossSummary& summary,
                                const std::string& path, char delim = ',') {
  std::string out = "Loss";
  out.push_back(delim);
  out += "n";
  out.push_back(delim);
  out += "perc\n";
  for (const LossBin& bin : summary.bins) {
    out += std::to_string(bin.loss);
    out.push_back(delim);
    out += std::to_string(bin.n);
    out.push_back(delim);
    out += FormatPercent(bin.perc_hundredths);
    out.push_back('\n');
  }
  out += "Total";
  out.push_back(delim);
  out += std::to_string(summary.total);
  out.push_back(delim);
  out += "100.00\n";
  WriteFileAtomic(path, out);
}

}  // namespace ilba

#endif  // ILBA_AGGREGATE_HPP_

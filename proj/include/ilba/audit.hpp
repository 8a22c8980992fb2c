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
// Differencing-attack simulation. The attacker sees the released finest
// table (hence |S_0| and |S_K| per group), the released aggregate, K, and
// the full mechanism specification. The audit inverts the mechanism to the
// set of compatible small-cell sums, enumerates the feasible per-cell true
// counts, and flags any cell pinned into the sensitive range 1..K-1.

#ifndef ILBA_AUDIT_HPP_
#define ILBA_AUDIT_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilba/aggregate.hpp"
#include "ilba/csv.hpp"
#include "ilba/error.hpp"
#include "ilba/finest_table.hpp"
#include "ilba/masking.hpp"
#include "ilba/rng.hpp"

namespace ilba {

// Aggregate release mechanisms the attacker may face. kExactSum and
// kNaiveScaOfSum exist to demonstrate the leaks the aggregation algorithm
// repairs; production releases use kIlba.
enum class Mechanism { kExactSum, kNaiveScaOfSum, kIlba };

inline const char* MechanismName(Mechanism m) {
  switch (m) {
    case Mechanism::kExactSum:
      return "exact-sum";
    case Mechanism::kNaiveScaOfSum:
      return "naive-sca-of-sum";
    case Mechanism::kIlba:
      return "ilba";
  }
  return "unknown";
}

// One released cell from the attacker's point of view.
struct AttackInstance {
  std::uint64_t s0_size = 0;
  std::uint64_t sk_size = 0;
  Threshold k;
  std::uint64_t released_small = 0;
  Mechanism mechanism = Mechanism::kIlba;
};

// The deterministic release for a given small-cell sum; used to invert the
// mechanism by brute force over the feasible interval.
inline std::uint64_t SimulateIlbaRelease(std::uint64_t s0_size,
                                         std::uint64_t sk_size,
                                         std::uint64_t f_small, Threshold k) {
  SmallCellPartition p;
  p.s0_size = s0_size;
  p.sk_size = sk_size;
  p.f_small = f_small;
  if (p.small_cells() == 1) {
    p.singleton_sca =
        s0_size == 1 ? 0 : static_cast<std::uint64_t>(k.value());
  }
  return ApplyIlba(p, k).masked_small;
}

// Candidate small-cell sums compatible with the released value, sorted
// ascending. Throws when the released value cannot be produced by the
// declared mechanism (a tampered release).
inline std::vector<std::int64_t> InvertMechanism(const AttackInstance& inst) {
  if (inst.s0_size + inst.sk_size == 0) {
    throw ValidationError("attack instance needs at least one small cell");
  }
  const FeasibleInterval d =
      FeasibleIntervalFor(inst.s0_size, inst.sk_size, inst.k);
  const auto released = static_cast<std::int64_t>(inst.released_small);
  const auto threshold = static_cast<std::int64_t>(inst.k.value());
  std::vector<std::int64_t> candidates;
  switch (inst.mechanism) {
    case Mechanism::kExactSum:
      if (d.Contains(released)) candidates.push_back(released);
      break;
    case Mechanism::kNaiveScaOfSum:
      // The SCA rule applied to the sum: a released 0 or K came from any
      // sum the randomized branch can map there; anything above K is the
      // identity branch and reveals the sum exactly.
      if (released == 0) {
        for (std::int64_t g = d.lower;
             g <= std::min(d.upper, threshold - 1); ++g) {
          candidates.push_back(g);
        }
      } else if (released == threshold) {
        for (std::int64_t g = std::max(d.lower, std::int64_t{1});
             g <= std::min(d.upper, threshold); ++g) {
          candidates.push_back(g);
        }
      } else if (released > threshold && d.Contains(released)) {
        candidates.push_back(released);
      }
      break;
    case Mechanism::kIlba:
      for (std::int64_t g = d.lower; g <= d.upper; ++g) {
        if (SimulateIlbaRelease(inst.s0_size, inst.sk_size,
                                static_cast<std::uint64_t>(g),
                                inst.k) == inst.released_small) {
          candidates.push_back(g);
        }
      }
      break;
  }
  if (candidates.empty()) {
    throw ValidationError(
        "released value " + std::to_string(inst.released_small) +
        " is unreachable by the " + MechanismName(inst.mechanism) +
        " mechanism for |S0|=" + std::to_string(inst.s0_size) +
        ", |SK|=" + std::to_string(inst.sk_size) +
        ", K=" + std::to_string(inst.k.value()));
  }
  return candidates;
}

// Feasible per-cell true counts given the candidate sums. Cells within S_0
// (and within S_K) are interchangeable, so one feasible set is reported per
// class and configurations are counted up to permutation inside each class.
struct CellFeasibility {
  std::vector<std::uint64_t> sk_feasible;  // sorted; subset of 1..K
  std::vector<std::uint64_t> s0_feasible;  // sorted; subset of 0..K-1
  std::uint64_t config_count = 0;  // distinct (multiset, multiset) pairs
  // A mask-K cell is compromised when no feasible configuration lets it
  // reach K; a mask-0 cell when none lets it be 0.
  bool sk_violation = false;
  bool s0_violation = false;
};

inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;

inline CellFeasibility EnumerateFeasibleCells(
    std::uint64_t s0_size, std::uint64_t sk_size, Threshold k,
    const std::vector<std::int64_t>& candidate_sums) {
  if (s0_size + sk_size == 0) {
    throw ValidationError("enumeration needs at least one small cell");
  }
  if (candidate_sums.empty()) {
    throw ValidationError("enumeration needs at least one candidate sum");
  }
  const auto threshold = static_cast<std::int64_t>(k.value());
  // Budget guard on the naive K^|S| search space; larger instances must use
  // the analytic residual path.
  std::uint64_t space = 1;
  for (std::uint64_t i = 0; i < s0_size + sk_size; ++i) {
    space *= static_cast<std::uint64_t>(threshold);
    if (space > kEnumerationBudget) {
      throw ValidationError(
          "enumeration budget exceeded for |S|=" +
          std::to_string(s0_size + sk_size) + ", K=" +
          std::to_string(k.value()) + "; use the analytic residual path");
    }
  }

  const std::int64_t min_sum =
      *std::min_element(candidate_sums.begin(), candidate_sums.end());
  const std::int64_t max_sum =
      *std::max_element(candidate_sums.begin(), candidate_sums.end());
  std::vector<bool> wanted(static_cast<std::size_t>(max_sum - min_sum + 1),
                           false);
  for (const std::int64_t t : candidate_sums) {
    wanted[static_cast<std::size_t>(t - min_sum)] = true;
  }

  CellFeasibility out;
  std::vector<bool> sk_seen(static_cast<std::size_t>(threshold) + 1, false);
  std::vector<bool> s0_seen(static_cast<std::size_t>(threshold), false);
  std::vector<std::int64_t> sk_values;
  std::vector<std::int64_t> s0_values;

  // Non-increasing value sequences enumerate each multiset exactly once.
  auto enumerate_s0 = [&](auto&& self, std::uint64_t slots,
                          std::int64_t max_value,
                          std::int64_t partial) -> void {
    if (slots == 0) {
      if (partial >= min_sum && partial <= max_sum &&
          wanted[static_cast<std::size_t>(partial - min_sum)]) {
        ++out.config_count;
        for (const std::int64_t v : sk_values) {
          sk_seen[static_cast<std::size_t>(v)] = true;
        }
        for (const std::int64_t v : s0_values) {
          s0_seen[static_cast<std::size_t>(v)] = true;
        }
      }
      return;
    }
    for (std::int64_t v = std::min<std::int64_t>(max_value, threshold - 1);
         v >= 0; --v) {
      const std::int64_t rest_max =
          v * static_cast<std::int64_t>(slots - 1);
      if (partial + v > max_sum) continue;
      if (partial + v + rest_max < min_sum) break;
      s0_values.push_back(v);
      self(self, slots - 1, v, partial + v);
      s0_values.pop_back();
    }
  };
  auto enumerate_sk = [&](auto&& self, std::uint64_t slots,
                          std::int64_t max_value,
                          std::int64_t partial) -> void {
    if (slots == 0) {
      enumerate_s0(enumerate_s0, s0_size, threshold - 1, partial);
      return;
    }
    for (std::int64_t v = std::min<std::int64_t>(max_value, threshold);
         v >= 1; --v) {
      const std::int64_t rest_min = static_cast<std::int64_t>(slots - 1);
      const std::int64_t rest_max =
          v * static_cast<std::int64_t>(slots - 1) +
          (threshold - 1) * static_cast<std::int64_t>(s0_size);
      if (partial + v + rest_min > max_sum) continue;
      if (partial + v + rest_max < min_sum) break;
      sk_values.push_back(v);
      self(self, slots - 1, v, partial + v);
      sk_values.pop_back();
    }
  };
  enumerate_sk(enumerate_sk, sk_size, threshold, 0);

  if (out.config_count == 0) {
    throw ValidationError(
        "no feasible small-cell configuration reaches the candidate sums");
  }
  for (std::int64_t v = 1; v <= threshold; ++v) {
    if (sk_seen[static_cast<std::size_t>(v)]) {
      out.sk_feasible.push_back(static_cast<std::uint64_t>(v));
    }
  }
  for (std::int64_t v = 0; v < threshold; ++v) {
    if (s0_seen[static_cast<std::size_t>(v)]) {
      out.s0_feasible.push_back(static_cast<std::uint64_t>(v));
    }
  }
  out.sk_violation =
      sk_size >= 1 && !std::binary_search(out.sk_feasible.begin(),
                                          out.sk_feasible.end(),
                                          static_cast<std::uint64_t>(
                                              threshold));
  out.s0_violation =
      s0_size >= 1 && !std::binary_search(out.s0_feasible.begin(),
                                          out.s0_feasible.end(),
                                          std::uint64_t{0});
  return out;
}

// Boundary residuals for the exact-sum attacker. R is the slack above the
// interval floor (every mask-K cell at 1, every mask-0 cell at 0); R_up is
// the slack below the ceiling. A mask-K cell reaches K only when R >= K-1;
// a mask-0 cell reaches 0 only when R_up >= K-1.
struct ResidualCheck {
  bool violates_sk = false;
  bool violates_s0 = false;
  std::int64_t residual_low = 0;
  std::int64_t residual_up = 0;
};

inline ResidualCheck CheckResiduals(std::uint64_t s0_size,
                                    std::uint64_t sk_size, Threshold k,
                                    std::int64_t f_small) {
  const FeasibleInterval d = FeasibleIntervalFor(s0_size, sk_size, k);
  if (!d.Contains(f_small)) {
    throw ValidationError("small-cell sum " + std::to_string(f_small) +
                          " lies outside the feasible interval [" +
                          std::to_string(d.lower) + ", " +
                          std::to_string(d.upper) + "]");
  }
  ResidualCheck out;
  out.residual_low = f_small - d.lower;
  out.residual_up = d.upper - f_small;
  const std::int64_t need = k.value() - 1;
  out.violates_sk = sk_size >= 1 && out.residual_low < need;
  out.violates_s0 = s0_size >= 1 && out.residual_up < need;
  return out;
}

struct CellAudit {
  std::string group_id;  // group values joined with '|'
  std::uint64_t s0_size = 0;
  std::uint64_t sk_size = 0;
  std::uint64_t released_small = 0;
  std::uint64_t released_total = 0;
  std::uint64_t ambiguity = 0;  // compatible small-cell sums
  bool sk_violation = false;
  bool s0_violation = false;

  bool violated() const { return sk_violation || s0_violation; }
};

struct AuditReport {
  Mechanism mechanism = Mechanism::kIlba;
  int hkey_level = 1;
  std::vector<std::string> key_names;
  int k = kDefaultMaskThreshold;
  std::vector<CellAudit> cells;  // groups with at least two small cells
  std::uint64_t groups_total = 0;
  std::uint64_t groups_audited = 0;
  std::uint64_t violation_count = 0;
  std::uint64_t ambiguity_failures = 0;  // audited cells with ambiguity < K
  std::uint64_t min_ambiguity = 0;       // over audited cells; 0 when none

  bool passed() const {
    return violation_count == 0 && ambiguity_failures == 0;
  }
};

// Audits one release derived from the trusted side of the table. Every
// group with |S| >= 2 is attacked: the mechanism is inverted, per-cell
// feasible sets are computed (enumeration within budget, analytic residual
// logic beyond it), and violations plus the ambiguity floor are recorded.
// The naive mechanism consumes one seeded SCA draw per group in canonical
// order.
inline AuditReport AuditRelease(const FinestTable& table,
                                const AggregationRequest& request,
                                Mechanism mechanism = Mechanism::kIlba,
                                std::uint64_t naive_seed = 0) {
  const Threshold k = table.threshold();
  const auto threshold = static_cast<std::int64_t>(k.value());
  AuditReport report;
  report.mechanism = mechanism;
  report.hkey_level = request.hkey_level;
  report.key_names = request.keys;
  report.k = k.value();

  std::vector<GroupPartition> groups = GroupPartitions(table, request);
  const std::vector<std::size_t> key_cols =
      detail::ResolveKeyColumns(table, request.keys);
  std::vector<std::size_t> cols(static_cast<std::size_t>(request.hkey_level));
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  cols.insert(cols.end(), key_cols.begin(), key_cols.end());

  SplitRng naive_rng(naive_seed);
  report.groups_total = groups.size();
  for (const GroupPartition& gp : groups) {
    const SmallCellPartition& p = gp.partition;
    std::uint64_t released_small = 0;
    switch (mechanism) {
      case Mechanism::kExactSum:
        released_small = p.f_small;
        break;
      case Mechanism::kNaiveScaOfSum:
        released_small = ApplySca(p.f_small, k, naive_rng).masked;
        break;
      case Mechanism::kIlba:
        released_small = ApplyIlba(p, k).masked_small;
        break;
    }
    if (p.small_cells() < 2) continue;

    ++report.groups_audited;
    CellAudit cell;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i > 0) cell.group_id.push_back('|');
      cell.group_id += table.column_values(cols[i])[gp.group[i]];
    }
    cell.s0_size = p.s0_size;
    cell.sk_size = p.sk_size;
    cell.released_small = released_small;
    cell.released_total = MaskedAggregate(p.f_large, released_small);

    const std::vector<std::int64_t> candidates = InvertMechanism(
        {p.s0_size, p.sk_size, k, released_small, mechanism});
    cell.ambiguity = candidates.size();

    std::uint64_t space = 1;
    bool within_budget = true;
    for (std::uint64_t i = 0; i < p.small_cells() && within_budget; ++i) {
      space *= static_cast<std::uint64_t>(threshold);
      if (space > kEnumerationBudget) within_budget = false;
    }
    if (within_budget) {
      const CellFeasibility feas =
          EnumerateFeasibleCells(p.s0_size, p.sk_size, k, candidates);
      cell.sk_violation = feas.sk_violation;
      cell.s0_violation = feas.s0_violation;
    } else {
      // Residual conditions per candidate sum; a class is safe when any
      // candidate leaves enough slack on its side.
      const FeasibleInterval d =
          FeasibleIntervalFor(p.s0_size, p.sk_size, k);
      const std::int64_t best_low = candidates.back() - d.lower;
      const std::int64_t best_up = d.upper - candidates.front();
      cell.sk_violation = p.sk_size >= 1 && best_low < threshold - 1;
      cell.s0_violation = p.s0_size >= 1 && best_up < threshold - 1;
    }

    if (cell.violated()) ++report.violation_count;
    if (cell.ambiguity < static_cast<std::uint64_t>(threshold)) {
      ++report.ambiguity_failures;
    }
    if (report.min_ambiguity == 0 || cell.ambiguity < report.min_ambiguity) {
      report.min_ambiguity = cell.ambiguity;
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

inline std::string AuditReportJson(const AuditReport& report) {
  nlohmann::json doc;
  doc["format"] = "ilba-audit-report";
  doc["schema_version"] = 1;
  doc["mechanism"] = MechanismName(report.mechanism);
  doc["hkey_level"] = report.hkey_level;
  doc["keys"] = report.key_names;
  doc["k"] = report.k;
  nlohmann::json cells = nlohmann::json::array();
  for (const CellAudit& cell : report.cells) {
    cells.push_back({{"group", cell.group_id},
                     {"s0", cell.s0_size},
                     {"sk", cell.sk_size},
                     {"released_small", cell.released_small},
                     {"released", cell.released_total},
                     {"ambiguity", cell.ambiguity},
                     {"sk_violation", cell.sk_violation},
                     {"s0_violation", cell.s0_violation}});
  }
  doc["cells"] = std::move(cells);
  doc["summary"] = {{"groups_total", report.groups_total},
                    {"groups_audited", report.groups_audited},
                    {"violations", report.violation_count},
                    {"ambiguity_failures", report.ambiguity_failures},
                    {"min_ambiguity", report.min_ambiguity},
                    {"passed", report.passed()}};
  return doc.dump(2) + "\n";
}

inline void WriteAuditReport(const AuditReport& report,
                             const std::string& path) {
  WriteFileAtomic(path, AuditReportJson(report));
}

}  // namespace ilba

#endif  // ILBA_AUDIT_HPP_

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
// Core masking primitives: Small Cell Adjustment (SCA) of individual cell
// counts and information-loss-bounded aggregation (iLBA) of small-cell sums.
// Everything here operates on plain integers; table, schema and file
// concerns live in the table engine headers.

#ifndef ILBA_MASKING_HPP_
#define ILBA_MASKING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "ilba/error.hpp"
#include "ilba/rng.hpp"

namespace ilba {

inline constexpr int kDefaultMaskThreshold = 5;

// Anonymity threshold K. Counts in 1..K-1 are the sensitive range; a
// released count is safe when it is 0 or at least K.
class Threshold {
 public:
  explicit Threshold(int k) : k_(k) {
    if (k < 2) {
      throw ValidationError("mask threshold must be at least 2, got " +
                            std::to_string(k));
    }
  }

  int value() const { return k_; }
  int half() const { return k_ / 2; }  // floor(K/2)

  // The aggregation guarantees (loss bound, K-ambiguity, two-level
  // K-anonymity) are proven for K >= 3. K == 2 is accepted but callers
  // should surface a warning.
  bool guarantees_proven() const { return k_ >= 3; }

 private:
  int k_;
};

struct ScaResult {
  std::uint64_t masked = 0;
  // True iff the count was at most K and the randomized branch fired.
  // Distinguishes "unchanged because large" from the coincidental f == K
  // fixed point of the randomized branch.
  bool randomized = false;
};

// Small Cell Adjustment. Counts above K pass through unchanged; a count
// f <= K is replaced by K with probability f/K and by 0 otherwise, which
// keeps the expectation at f and the per-cell loss within K-1.
inline ScaResult ApplySca(std::uint64_t count, Threshold k, SplitRng& rng) {
  const auto threshold = static_cast<std::uint64_t>(k.value());
  if (count > threshold) return {count, false};
  const std::uint64_t draw = rng.UniformBelow(threshold);
  return {draw < count ? threshold : 0, true};
}

// True iff a stored (true_count, masked_count) pair is reachable under the
// SCA rule: large cells keep their count, small cells carry 0 (true in
// 0..K-1) or K (true in 1..K).
inline bool ObeysScaRule(std::uint64_t true_count, std::uint64_t masked_count,
                         Threshold k) {
  const auto threshold = static_cast<std::uint64_t>(k.value());
  if (true_count > threshold) return masked_count == true_count;
  if (masked_count == 0) return true_count + 1 <= threshold;
  if (masked_count == threshold) return true_count >= 1;
  return false;
}

// Split of one cell group into small cells (stored mask 0 or K) and large
// cells, with the true sums over each part. |S| = s0_size + sk_size.
struct SmallCellPartition {
  std::uint64_t s0_size = 0;  // small cells masked to 0
  std::uint64_t sk_size = 0;  // small cells masked to K
  std::uint64_t f_small = 0;  // true sum over the small cells
  std::uint64_t f_large = 0;  // true sum over the large cells
  // Stored SCA mask of the lone small cell; set iff |S| == 1.
  std::optional<std::uint64_t> singleton_sca;

  std::uint64_t small_cells() const { return s0_size + sk_size; }
};

// Folds (true_count, masked_count) cells into a SmallCellPartition while
// checking every pair against the SCA rule. Cell indices are reported in
// the order Add() was called.
class PartitionAccumulator {
 public:
  explicit PartitionAccumulator(Threshold k) : k_(k) {}

  void Add(std::uint64_t true_count, std::uint64_t masked_count) {
    const auto threshold = static_cast<std::uint64_t>(k_.value());
    if (true_count > threshold) {
      if (masked_count != true_count) {
        throw ValidationError(Inconsistent(true_count, masked_count,
                                           "large cells must keep their "
                                           "exact count"));
      }
      part_.f_large += true_count;
    } else if (masked_count == 0) {
      if (true_count > threshold - 1) {
        throw ValidationError(Inconsistent(true_count, masked_count,
                                           "a count of K is never masked "
                                           "to 0"));
      }
      ++part_.s0_size;
      part_.f_small += true_count;
    } else if (masked_count == threshold) {
      if (true_count == 0) {
        throw ValidationError(Inconsistent(true_count, masked_count,
                                           "a zero count is never masked "
                                           "to K"));
      }
      ++part_.sk_size;
      part_.f_small += true_count;
    } else {
      throw ValidationError(Inconsistent(true_count, masked_count,
                                         "small cells are masked to 0 or K"));
    }
    ++index_;
  }

  SmallCellPartition Finish() const {
    SmallCellPartition result = part_;
    if (result.small_cells() == 1) {
      result.singleton_sca =
          result.s0_size == 1 ? 0 : static_cast<std::uint64_t>(k_.value());
    }
    return result;
  }

 private:
  std::string Inconsistent(std::uint64_t true_count, std::uint64_t masked,
                           const char* rule) const {
    return "cell " + std::to_string(index_) + ": masked count " +
           std::to_string(masked) + " is inconsistent with true count " +
           std::to_string(true_count) + " under the SCA rule for K=" +
           std::to_string(k_.value()) + " (" + rule + ")";
  }

  Threshold k_;
  SmallCellPartition part_;
  std::size_t index_ = 0;
};

inline SmallCellPartition PartitionSmallCells(
    std::span<const std::pair<std::uint64_t, std::uint64_t>> cells,
    Threshold k) {
  PartitionAccumulator acc(k);
  for (const auto& [true_count, masked_count] : cells) {
    acc.Add(true_count, masked_count);
  }
  return acc.Finish();
}

// Interval D of small-cell sums consistent with the released masks: each
// mask-0 cell ranges over 0..K-1 and each mask-K cell over 1..K.
struct FeasibleInterval {
  std::int64_t lower = 0;
  std::int64_t upper = 0;

  bool Contains(std::int64_t v) const { return lower <= v && v <= upper; }
  std::int64_t size() const { return upper - lower + 1; }
};

inline FeasibleInterval FeasibleIntervalFor(std::uint64_t s0_size,
                                            std::uint64_t sk_size,
                                            Threshold k) {
  if (s0_size + sk_size == 0) {
    throw ValidationError(
        "feasible interval is undefined for an empty small-cell set");
  }
  const auto threshold = static_cast<std::int64_t>(k.value());
  return {static_cast<std::int64_t>(sk_size),
          threshold * static_cast<std::int64_t>(sk_size) +
              (threshold - 1) * static_cast<std::int64_t>(s0_size)};
}

enum class IlbaCase { kEmpty, kSingleton, kGeneral };
enum class ShiftType { kNone, kType1Up, kType2Down };

// Full record of one aggregation masking step.
struct IlbaTrace {
  IlbaCase dispatch = IlbaCase::kEmpty;
  std::int64_t center1 = 0;        // initial candidate center
  std::int64_t candidate_low = 0;  // min of the initial candidate set C
  ShiftType shift = ShiftType::kNone;
  std::int64_t center2 = 0;  // center after the feasibility shift
  bool post_processed = false;
  std::uint64_t masked_small = 0;  // released small-cell sum
};

// General case of the aggregation algorithm (at least two small cells and a
// positive small sum). Four steps:
//   1. center the K-candidate block containing f_S:
//      center1 = f_S - mod(f_S - 1, K) + floor(K/2)
//   2. C = {center1 - floor(K/2), ..., center1 - floor(K/2) + K - 1}
//   3. if C protrudes below D shift it up by K (type1); if above, down by K
//      (type2); the shifted block always fits inside D
//   4. the only possible released value strictly between 0 and K is
//      1 + floor(K/2); replace it by K
// The result is K-ambiguous (at least K sums in D release the same value)
// and within floor(K/2) + K of f_S.
inline IlbaTrace IlbaGeneral(const SmallCellPartition& p, Threshold k) {
  if (p.small_cells() < 2 || p.f_small == 0) {
    throw ValidationError(
        "general-case masking requires at least two small cells and a "
        "positive small-cell sum (caller dispatch bug)");
  }
  const auto threshold = static_cast<std::int64_t>(k.value());
  const auto f_small = static_cast<std::int64_t>(p.f_small);
  const FeasibleInterval feasible =
      FeasibleIntervalFor(p.s0_size, p.sk_size, k);
  if (!feasible.Contains(f_small)) {
    throw ValidationError(
        "small-cell sum " + std::to_string(p.f_small) +
        " lies outside the feasible interval [" +
        std::to_string(feasible.lower) + ", " + std::to_string(feasible.upper) +
        "] (caller dispatch bug)");
  }

  IlbaTrace trace;
  trace.dispatch = IlbaCase::kGeneral;
  trace.center1 = f_small - (f_small - 1) % threshold + threshold / 2;
  trace.candidate_low = trace.center1 - threshold / 2;
  const std::int64_t candidate_high = trace.candidate_low + threshold - 1;

  if (trace.candidate_low < feasible.lower) {
    trace.shift = ShiftType::kType1Up;
    trace.center2 = trace.center1 + threshold;
  } else if (feasible.upper < candidate_high) {
    trace.shift = ShiftType::kType2Down;
    trace.center2 = trace.center1 - threshold;
  } else {
    trace.center2 = trace.center1;
  }

  if (trace.center2 == 1 + threshold / 2) {
    trace.post_processed = true;
    trace.masked_small = static_cast<std::uint64_t>(threshold);
  } else {
    trace.masked_small = static_cast<std::uint64_t>(trace.center2);
  }
  return trace;
}

// Masks a small-cell sum for release. Dispatch: no small cells or a zero
// sum release 0; a single small cell re-releases its stored SCA mask (no
// fresh randomness); otherwise the general four-step procedure runs. Pure
// function of the partition, so repeated calls always agree.
inline IlbaTrace ApplyIlba(const SmallCellPartition& p, Threshold k) {
  IlbaTrace trace;
  if (p.small_cells() == 0 || p.f_small == 0) {
    trace.dispatch = IlbaCase::kEmpty;
    trace.masked_small = 0;
    return trace;
  }
  if (p.small_cells() == 1) {
    if (!p.singleton_sca.has_value()) {
      throw ValidationError(
          "singleton partition is missing its stored SCA mask");
    }
    trace.dispatch = IlbaCase::kSingleton;
    trace.masked_small = *p.singleton_sca;
    return trace;
  }
  return IlbaGeneral(p, k);
}

// Final released count for a group: exact large-cell sum plus the masked
// small-cell sum.
inline std::uint64_t MaskedAggregate(std::uint64_t f_large,
                                     std::uint64_t masked_small) {
  return f_large + masked_small;
}

}  // namespace ilba

#endif  // ILBA_MASKING_HPP_

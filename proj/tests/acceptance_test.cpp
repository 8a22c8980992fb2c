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
// Release acceptance suite. Each test prints one [ACCEPT] line; the whole
// binary must be green before a release ships.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ilba/ilba.hpp"
#include "test_util.hpp"

namespace ilba {
namespace {

using ilba::testing::TempDir;
using ilba::testing::WorkedExampleTable;

class Timer {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void Report(const std::string& criterion, bool pass) {
  std::cout << "[ACCEPT] " << criterion << ": " << (pass ? "PASS" : "FAIL")
            << std::endl;
}

// The 10^6-record census-shaped pipeline shared by the consistency and
// performance criteria.
class PipelineEnv : public ::testing::Environment {
 public:
  void SetUp() override {
    SynthSpec spec;
    spec.records = 1000000;
    spec.level_sizes = {1, 5, 78, 2506};
    spec.key_categories = {2, 18, 9, 5, 21};
    spec.skew = 1.0;
    spec.seed = 20260811;
    spec.hkey_names = {"LA1", "LA2", "LA3", "OA"};
    spec.key_names = {"gender", "age", "edu", "mar", "htype"};
    micro_path = dir.File("census.csv");
    GenerateSynthetic(spec, micro_path);
    // Second generation with the same seed must be byte-identical.
    GenerateSynthetic(spec, dir.File("census2.csv"));
    synth_deterministic = ReadFileBytes(micro_path) ==
                          ReadFileBytes(dir.File("census2.csv"));

    {
      const DelimitedTable parsed = ReadDelimited(micro_path);
      const Timer timer;
      md = IngestMicrodata(parsed, {"LA1", "LA2", "LA3", "OA"}, {},
                           std::nullopt);
      table.emplace(FinestTable::Build(*md, Threshold(5), 1));
      build_seconds = timer.Seconds();
    }
    table_path = dir.File("census.ilba");
    table->Save(table_path);
  }

  TempDir dir;
  std::string micro_path;
  std::string table_path;
  std::optional<Microdata> md;
  std::optional<FinestTable> table;
  double build_seconds = 0.0;
  bool synth_deterministic = false;
};

PipelineEnv* const pipeline_env = static_cast<PipelineEnv*>(
    ::testing::AddGlobalTestEnvironment(new PipelineEnv));

// K=5 group with true small counts {1,1,2,1,1}, masks {5,5,5,5,0} and a
// large part of 1320: partition (1, 4, 6, 1320), masked small sum 8,
// released 1328, loss 2. Exact.
TEST(Acceptance, WorkedExampleRegression) {
  const Threshold k(5);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cells = {
      {1, 5}, {1, 5}, {2, 5}, {1, 5}, {1, 0}};
  for (const std::uint64_t large :
       {36u, 284u, 262u, 10u, 9u, 79u, 124u, 130u, 106u, 125u, 77u, 60u,
        18u}) {
    cells.emplace_back(large, large);
  }
  const SmallCellPartition p = PartitionSmallCells(cells, k);
  EXPECT_EQ(p.s0_size, 1u);
  EXPECT_EQ(p.sk_size, 4u);
  EXPECT_EQ(p.f_small, 6u);
  EXPECT_EQ(p.f_large, 1320u);
  const IlbaTrace trace = ApplyIlba(p, k);
  EXPECT_EQ(trace.masked_small, 8u);
  const std::uint64_t released = MaskedAggregate(p.f_large,
                                                 trace.masked_small);
  EXPECT_EQ(released, 1328u);
  EXPECT_EQ(static_cast<std::int64_t>(released) - 1326, 2);

  // Same numbers through the table engine.
  const FinestTable table = WorkedExampleTable();
  const AggregatedTable agg = AggregateTable(table, {3, {"gender", "edu"}});
  ASSERT_EQ(agg.rows.size(), 1u);
  EXPECT_EQ(agg.rows[0].masked_count, 1328u);
  EXPECT_EQ(agg.rows[0].loss(), 2);
  EXPECT_EQ(QueryCell(table, {3, "010101", {{"gender", "2"}, {"edu", "2"}}}),
            1328u);
  Report("worked-example regression", !HasFailure());
}

// Exact-sum attacker on (|S0|=1, |SK|=4, K=5, f_S=6): the four mask-K cells
// are pinned into {1,2,3}, the mask-0 cell ranges over {0,1,2}, and exactly
// four configurations exist up to permutation.
TEST(Acceptance, PitfallReproduction) {
  const Timer timer;
  const std::vector<std::int64_t> sums =
      InvertMechanism({1, 4, Threshold(5), 6, Mechanism::kExactSum});
  EXPECT_EQ(sums, (std::vector<std::int64_t>{6}));
  const CellFeasibility feas = EnumerateFeasibleCells(1, 4, Threshold(5),
                                                      sums);
  EXPECT_EQ(feas.sk_feasible, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(feas.s0_feasible, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(feas.config_count, 4u);
  EXPECT_TRUE(feas.sk_violation);
  EXPECT_FALSE(feas.s0_violation);
  EXPECT_LT(timer.Seconds(), 1.0);
  Report("pitfall reproduction", !HasFailure());
}

// K in {3,4,5}, |S0|,|SK| in 0..4 with |S| >= 2, every f_S in D:
//  (a) released value is 0 or >= K
//  (b) |masked - f_S| <= floor(K/2) + K, and <= floor(K/2) with no shift
//      and no post-processing
//  (c) mechanism-inversion ambiguity >= K
//  (d) the brute-force attacker finds zero violations
//  (e) analytic residual conditions match brute force for the exact-sum
//      attacker
TEST(Acceptance, ExhaustiveGuaranteeSuite) {
  const Timer timer;
  for (const int kv : {3, 4, 5}) {
    const Threshold k(kv);
    const auto threshold = static_cast<std::int64_t>(kv);
    for (std::uint64_t s0 = 0; s0 <= 4; ++s0) {
      for (std::uint64_t sk = 0; sk <= 4; ++sk) {
        if (s0 + sk < 2) continue;
        const FeasibleInterval d = FeasibleIntervalFor(s0, sk, k);
        for (std::int64_t fs = d.lower; fs <= d.upper; ++fs) {
          SmallCellPartition p;
          p.s0_size = s0;
          p.sk_size = sk;
          p.f_small = static_cast<std::uint64_t>(fs);
          const IlbaTrace trace = ApplyIlba(p, k);
          const auto masked = static_cast<std::int64_t>(trace.masked_small);
          ASSERT_TRUE(masked == 0 || masked >= threshold)
              << "K=" << kv << " s0=" << s0 << " sk=" << sk << " fs=" << fs;
          // (e) holds for every sum, including fs = 0 when it is feasible.
          const ResidualCheck analytic = CheckResiduals(s0, sk, k, fs);
          const CellFeasibility exact_sum =
              EnumerateFeasibleCells(s0, sk, k, {fs});
          ASSERT_EQ(analytic.violates_sk, exact_sum.sk_violation);
          ASSERT_EQ(analytic.violates_s0, exact_sum.s0_violation);
          if (fs == 0) continue;
          ASSERT_LE(std::llabs(masked - fs), threshold / 2 + threshold);
          if (trace.shift == ShiftType::kNone && !trace.post_processed) {
            ASSERT_LE(std::llabs(masked - fs), threshold / 2);
          }
          const std::vector<std::int64_t> candidates = InvertMechanism(
              {s0, sk, k, trace.masked_small, Mechanism::kIlba});
          ASSERT_GE(candidates.size(), static_cast<std::size_t>(kv));
          const CellFeasibility attacked =
              EnumerateFeasibleCells(s0, sk, k, candidates);
          ASSERT_FALSE(attacked.sk_violation)
              << "K=" << kv << " s0=" << s0 << " sk=" << sk << " fs=" << fs;
          ASSERT_FALSE(attacked.s0_violation)
              << "K=" << kv << " s0=" << s0 << " sk=" << sk << " fs=" << fs;
        }
      }
    }
  }
  EXPECT_LT(timer.Seconds(), 60.0);
  Report("exhaustive guarantee suite", !HasFailure());
}

// K=5, f in 1..4: 10^5 seeded draws per count, empirical mean within three
// standard errors and support exactly {0, 5}.
TEST(Acceptance, ScaStatisticalSuite) {
  const Timer timer;
  const Threshold k(5);
  const int n = 100000;
  for (std::uint64_t f = 1; f <= 4; ++f) {
    SplitRng rng(555 + f);
    std::uint64_t sum = 0;
    std::set<std::uint64_t> support;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t masked = ApplySca(f, k, rng).masked;
      support.insert(masked);
      sum += masked;
    }
    EXPECT_EQ(support, (std::set<std::uint64_t>{0, 5})) << "f=" << f;
    const double mean = static_cast<double>(sum) / n;
    const double se = std::sqrt(static_cast<double>(f * (5 - f)) / n);
    EXPECT_NEAR(mean, static_cast<double>(f), 3 * se) << "f=" << f;
  }
  EXPECT_LT(timer.Seconds(), 5.0);
  Report("SCA statistical suite", !HasFailure());
}

// Seeded 10^6-record census-shaped table: 100 random single-cell queries
// equal their aggregated-table entries exactly, persistence round-trips
// byte-identically, and a rerun with the same seed is byte-identical.
TEST(Acceptance, PipelineConsistency) {
  ASSERT_TRUE(pipeline_env->table.has_value());
  const FinestTable& table = *pipeline_env->table;
  const TempDir& dir = pipeline_env->dir;

  EXPECT_TRUE(pipeline_env->synth_deterministic);

  // The census-shaped schema came through intact.
  const Microdata& md = *pipeline_env->md;
  EXPECT_EQ(md.level_units[0].size(), 1u);
  EXPECT_EQ(md.level_units[1].size(), 5u);
  EXPECT_EQ(md.level_units[2].size(), 78u);
  EXPECT_EQ(md.level_units[3].size(), 2506u);
  const std::vector<std::size_t> expected_cats = {2, 18, 9, 5, 21};
  ASSERT_EQ(md.keys.categories.size(), expected_cats.size());
  for (std::size_t i = 0; i < expected_cats.size(); ++i) {
    EXPECT_EQ(md.keys.categories[i].size(), expected_cats[i]);
  }

  // Round trip.
  const FinestTable loaded = FinestTable::Load(pipeline_env->table_path);
  loaded.Save(dir.File("roundtrip.ilba"));
  EXPECT_EQ(ReadFileBytes(pipeline_env->table_path),
            ReadFileBytes(dir.File("roundtrip.ilba")));

  // Rerun with the same seed.
  const FinestTable rebuilt =
      FinestTable::Build(*pipeline_env->md, Threshold(5), 1);
  rebuilt.Save(dir.File("rebuilt.ilba"));
  EXPECT_EQ(ReadFileBytes(pipeline_env->table_path),
            ReadFileBytes(dir.File("rebuilt.ilba")));

  // Query/table agreement on 100 sampled cells.
  const AggregationRequest request{3, {"gender", "age", "htype"}};
  const AggregatedTable agg = AggregateTable(table, request);
  ASSERT_GE(agg.rows.size(), 100u);
  std::mt19937 sample_rng(2026);
  for (int i = 0; i < 100; ++i) {
    const AggRow& row = agg.rows[sample_rng() % agg.rows.size()];
    CellQuery q;
    q.hkey_level = 3;
    q.hkey_value = table.column_values(2)[row.group[2]];
    for (std::size_t j = 0; j < request.keys.size(); ++j) {
      q.key_assignments.emplace_back(
          request.keys[j],
          table.column_values(agg.key_cols[j])[row.group[3 + j]]);
    }
    EXPECT_EQ(QueryCell(table, q), row.masked_count) << "sample " << i;
  }
  Report("pipeline consistency", !HasFailure());
}

// Build of the 10^6-record table within 10 s; deepest-level five-key
// aggregation of the >= 5*10^5-row table within 30 s; every K=5 loss inside
// [-7, 7].
TEST(Acceptance, Performance) {
  ASSERT_TRUE(pipeline_env->table.has_value());
  const FinestTable& table = *pipeline_env->table;
  EXPECT_LE(pipeline_env->build_seconds, 10.0);
  ASSERT_GE(table.num_rows(), 500000u);

  const Timer timer;
  const AggregatedTable deepest = AggregateTable(
      table, {4, {"gender", "age", "edu", "mar", "htype"}});
  const double agg_seconds = timer.Seconds();
  EXPECT_LE(agg_seconds, 30.0);
  EXPECT_EQ(deepest.rows.size(), table.num_rows());

  const AggregatedTable coarser =
      AggregateTable(table, {3, {"gender", "age", "htype"}});
  for (const AggregatedTable* agg : {&deepest, &coarser}) {
    for (const LossBin& bin : agg->info_loss.bins) {
      EXPECT_GE(bin.loss, -7);
      EXPECT_LE(bin.loss, 7);
    }
  }
  std::cout << "  (build " << pipeline_env->build_seconds
            << " s for 10^6 records -> " << table.num_rows()
            << " rows; deepest aggregation " << agg_seconds << " s)\n";
  Report("performance", !HasFailure());
}

// Explicit zero-count rows change no aggregated output.
TEST(Acceptance, ZeroOmissionNeutrality) {
  TempDir dir;
  SynthSpec spec;
  spec.records = 30000;
  spec.level_sizes = {1, 5, 40};
  spec.key_categories = {3, 6};
  spec.skew = 1.2;
  spec.seed = 11;
  GenerateSynthetic(spec, dir.File("m.csv"));
  const Microdata md = IngestMicrodataFile(dir.File("m.csv"),
                                           {"H1", "H2", "H3"}, {},
                                           std::nullopt);
  const FinestTable base = FinestTable::Build(md, Threshold(5), 3);

  std::vector<StringRow> rows;
  for (std::size_t r = 0; r < base.num_rows(); ++r) {
    StringRow row;
    for (std::size_t c = 0; c < base.width(); ++c) {
      row.values.push_back(base.value(r, c));
    }
    row.true_count = base.true_count(r);
    row.masked_count = base.masked_count(r);
    rows.push_back(std::move(row));
  }
  std::vector<StringRow> with_zeros = rows;
  std::size_t injected = 0;
  for (std::size_t r = 0; r < base.num_rows() && injected < 50; r += 3) {
    StringRow zero;
    for (std::size_t c = 0; c < base.width(); ++c) {
      zero.values.push_back(base.value(r, c));
    }
    for (const auto& cat : base.column_values(base.width() - 1)) {
      zero.values.back() = cat;
      const bool exists = std::any_of(
          with_zeros.begin(), with_zeros.end(),
          [&](const StringRow& row) { return row.values == zero.values; });
      if (!exists) {
        zero.true_count = 0;
        zero.masked_count = 0;
        with_zeros.push_back(zero);
        ++injected;
        break;
      }
    }
  }
  ASSERT_GE(injected, 10u);

  const FinestTable clean = FinestTable::FromRows(
      base.hierarchy(), base.keys(), base.threshold(), base.seed(), rows);
  const FinestTable zeroed = FinestTable::FromRows(
      base.hierarchy(), base.keys(), base.threshold(), base.seed(),
      with_zeros, /*allow_zero_rows=*/true);

  const auto render = [](const FinestTable& t, const AggregatedTable& agg) {
    std::vector<std::size_t> cols(static_cast<std::size_t>(agg.hkey_level));
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    cols.insert(cols.end(), agg.key_cols.begin(), agg.key_cols.end());
    std::vector<std::string> out;
    for (const AggRow& row : agg.rows) {
      std::string line;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        line += t.column_values(cols[i])[row.group[i]];
        line.push_back('|');
      }
      line += std::to_string(row.masked_count);
      out.push_back(std::move(line));
    }
    return out;
  };
  for (const AggregationRequest& request :
       {AggregationRequest{1, {"K1"}}, AggregationRequest{2, {"K1", "K2"}},
        AggregationRequest{3, {}}}) {
    EXPECT_EQ(render(clean, AggregateTable(clean, request)),
              render(zeroed, AggregateTable(zeroed, request)))
        << "level " << request.hkey_level;
  }
  Report("zero-omission neutrality", !HasFailure());
}

}  // namespace
}  // namespace ilba

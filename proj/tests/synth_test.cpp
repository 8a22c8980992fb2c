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

#include "ilba/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ilba/csv.hpp"
#include "ilba/finest_table.hpp"
#include "ilba/microdata.hpp"
#include "test_util.hpp"

namespace ilba {
namespace {

using ilba::testing::TempDir;

SynthSpec BaseSpec() {
  SynthSpec spec;
  spec.records = 5000;
  spec.level_sizes = {1, 4, 20};
  spec.key_categories = {3, 5};
  spec.skew = 1.0;
  spec.seed = 42;
  return spec;
}

TEST(SynthTest, WritesRequestedShape) {
  TempDir dir;
  GenerateSynthetic(BaseSpec(), dir.File("m.csv"));
  const DelimitedTable data = ReadDelimited(dir.File("m.csv"));
  EXPECT_EQ(data.header,
            (std::vector<std::string>{"H1", "H2", "H3", "K1", "K2"}));
  EXPECT_EQ(data.rows.size(), 5000u);
}

TEST(SynthTest, CustomColumnNames) {
  TempDir dir;
  SynthSpec spec = BaseSpec();
  spec.hkey_names = {"LA1", "LA2", "LA3"};
  spec.key_names = {"gender", "edu"};
  GenerateSynthetic(spec, dir.File("m.csv"));
  const DelimitedTable data = ReadDelimited(dir.File("m.csv"));
  EXPECT_EQ(data.header,
            (std::vector<std::string>{"LA1", "LA2", "LA3", "gender", "edu"}));
}

TEST(SynthTest, SameSeedSameBytes) {
  TempDir dir;
  GenerateSynthetic(BaseSpec(), dir.File("a.csv"));
  GenerateSynthetic(BaseSpec(), dir.File("b.csv"));
  SynthSpec other = BaseSpec();
  other.seed = 43;
  GenerateSynthetic(other, dir.File("c.csv"));
  EXPECT_EQ(ReadFileBytes(dir.File("a.csv")),
            ReadFileBytes(dir.File("b.csv")));
  EXPECT_NE(ReadFileBytes(dir.File("a.csv")),
            ReadFileBytes(dir.File("c.csv")));
}

TEST(SynthTest, CodesNestByPrefixAndPassValidation) {
  TempDir dir;
  GenerateSynthetic(BaseSpec(), dir.File("m.csv"));
  const Microdata md = IngestMicrodataFile(dir.File("m.csv"),
                                           {"H1", "H2", "H3"}, {},
                                           std::nullopt);
  EXPECT_LE(md.level_units[0].size(), 1u);
  EXPECT_LE(md.level_units[1].size(), 4u);
  EXPECT_LE(md.level_units[2].size(), 20u);
  for (const auto& unit : md.level_units[2]) {
    EXPECT_EQ(unit.size(), 6u);  // two digits per level
  }
}

TEST(SynthTest, SingleRecordPipeline) {
  TempDir dir;
  SynthSpec spec = BaseSpec();
  spec.records = 1;
  GenerateSynthetic(spec, dir.File("m.csv"));
  const Microdata md = IngestMicrodataFile(dir.File("m.csv"),
                                           {"H1", "H2", "H3"}, {},
                                           std::nullopt);
  const FinestTable t = FinestTable::Build(md, Threshold(5), 1);
  ASSERT_EQ(t.num_rows(), 1u);
  EXPECT_EQ(t.true_count(0), 1u);
  EXPECT_TRUE(t.masked_count(0) == 0 || t.masked_count(0) == 5);
}

TEST(SynthTest, SkewRaisesTheSmallCellShare) {
  TempDir dir;
  const auto small_share = [&](double skew) {
    SynthSpec spec = BaseSpec();
    spec.records = 20000;
    spec.level_sizes = {1, 5, 50};
    spec.key_categories = {6, 10};
    spec.skew = skew;
    spec.seed = 7;
    GenerateSynthetic(spec, dir.File("m.csv"));
    const Microdata md = IngestMicrodataFile(dir.File("m.csv"),
                                             {"H1", "H2", "H3"}, {},
                                             std::nullopt);
    const FinestTable t = FinestTable::Build(md, Threshold(5), 1);
    std::size_t small = 0;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      if (t.true_count(r) <= 5) ++small;
    }
    return static_cast<double>(small) / static_cast<double>(t.num_rows());
  };
  EXPECT_GT(small_share(1.5), small_share(0.0) + 0.05);
}

TEST(SynthTest, InvalidSpecsAreRejected) {
  TempDir dir;
  SynthSpec spec = BaseSpec();
  spec.records = 0;
  EXPECT_THROW(GenerateSynthetic(spec, dir.File("x.csv")), ValidationError);
  spec = BaseSpec();
  spec.level_sizes = {};
  EXPECT_THROW(GenerateSynthetic(spec, dir.File("x.csv")), ValidationError);
  spec = BaseSpec();
  spec.level_sizes = {1, 0, 5};
  EXPECT_THROW(GenerateSynthetic(spec, dir.File("x.csv")), ValidationError);
  spec = BaseSpec();
  spec.skew = -0.5;
  EXPECT_THROW(GenerateSynthetic(spec, dir.File("x.csv")), ValidationError);
  spec = BaseSpec();
  spec.hkey_names = {"only-two", "names"};
  EXPECT_THROW(GenerateSynthetic(spec, dir.File("x.csv")), ValidationError);
}

}  // namespace
}  // namespace ilba

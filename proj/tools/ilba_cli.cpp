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
// Command-line front end. Subcommands: synth, build, aggregate, query,
// audit. Exit codes: 0 success, 1 validation error, 2 audit violation,
// 3 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ilba/ilba.hpp"

namespace {

char ParseDelim(const std::string& text) {
  if (text.size() != 1) {
    throw ilba::ValidationError("delimiter must be a single character");
  }
  return text[0];
}

void WarnSmallK(ilba::Threshold k) {
  if (!k.guarantees_proven()) {
    std::cerr << "warning: masking guarantees are proven for K >= 3; "
              << "K = " << k.value() << " is accepted but unproven\n";
  }
}

std::string JoinNames(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out.empty() ? std::string("(none)") : out;
}

void PrintAligned(std::ostream& os,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  for (const auto& row : rows) {
    os << "  ";
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c];
      if (c + 1 < row.size()) {
        os << std::string(widths[c] - row[c].size() + 2, ' ');
      }
    }
    os << "\n";
  }
}

void PrintAggregatePreview(const ilba::FinestTable& table,
                           const ilba::AggregatedTable& agg,
                           std::size_t max_rows) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header;
  std::vector<std::size_t> cols(static_cast<std::size_t>(agg.hkey_level));
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  cols.insert(cols.end(), agg.key_cols.begin(), agg.key_cols.end());
  for (const std::size_t c : cols) header.push_back(table.column_name(c));
  header.insert(header.end(), {"N_masked", "type1", "type2"});
  grid.push_back(header);
  for (std::size_t r = 0; r < std::min(max_rows, agg.rows.size()); ++r) {
    const ilba::AggRow& row = agg.rows[r];
    std::vector<std::string> line;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      line.push_back(table.column_values(cols[i])[row.group[i]]);
    }
    line.push_back(std::to_string(row.masked_count));
    line.push_back(row.type1 ? "1" : "0");
    line.push_back(row.type2 ? "1" : "0");
    grid.push_back(std::move(line));
  }
  std::cout << "Header of aggregated masked table via iLBA\n";
  PrintAligned(std::cout, grid);
}

void PrintLossDistribution(const ilba::InfoLossSummary& summary) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Loss", "n", "perc"});
  for (const ilba::LossBin& bin : summary.bins) {
    grid.push_back({std::to_string(bin.loss), std::to_string(bin.n),
                    ilba::FormatPercent(bin.perc_hundredths)});
  }
  grid.push_back({"Total", std::to_string(summary.total), "100.00"});
  std::cout << "\nDistribution of Information Loss\n";
  PrintAligned(std::cout, grid);
}

struct BuildOpts {
  std::string input;
  std::string output_tb = "full_tb.ilba";
  std::vector<std::string> hkey;
  std::vector<int> hkey_rank;
  std::vector<std::string> key;
  bool key_given = false;
  int mask_thr = ilba::kDefaultMaskThreshold;
  int key_thr = ilba::kDefaultKeyThreshold;
  std::uint64_t seed = 0;
  std::string delim = ",";
};

int RunBuild(const BuildOpts& opts) {
  const ilba::Threshold k(opts.mask_thr);
  WarnSmallK(k);
  const std::optional<std::vector<std::string>> keys =
      opts.key_given ? std::optional(opts.key) : std::nullopt;
  const ilba::Microdata md = ilba::IngestMicrodataFile(
      opts.input, opts.hkey, opts.hkey_rank, keys, opts.key_thr,
      ParseDelim(opts.delim));
  for (const auto& notice : md.notices) {
    std::cerr << "notice: " << notice << "\n";
  }
  const ilba::FinestTable table = ilba::FinestTable::Build(md, k, opts.seed);
  table.Save(opts.output_tb);

  std::cout << "Hierarchical variables:";
  for (std::size_t i = 0; i < md.hierarchy.names.size(); ++i) {
    std::cout << (i == 0 ? " " : ", ") << md.hierarchy.names[i] << " (rank "
              << md.hierarchy.ranks[i] << ")";
  }
  std::cout << "\nKey variables: " << JoinNames(md.keys.names) << "\n";
  if (!md.excluded_keys.empty()) {
    std::cout << "Excluded keys: " << JoinNames(md.excluded_keys) << "\n";
  }
  std::cout << "Masking threshold: K = " << k.value() << "\n"
            << "Finest table: " << table.num_rows() << " rows from "
            << md.record_count << " records (seed " << opts.seed << ")\n"
            << "Saved: " << opts.output_tb << "\n";
  return 0;
}

struct AggregateOpts {
  std::string input = "full_tb.ilba";
  std::string output_tb = "agg_tb.csv";
  std::string output_il = "info_loss.csv";
  int hkey_level = 1;
  std::vector<std::string> key;
  std::string delim = ",";
};

int RunAggregate(const AggregateOpts& opts) {
  const ilba::FinestTable table = ilba::FinestTable::Load(opts.input);
  WarnSmallK(table.threshold());
  const ilba::AggregationRequest request{opts.hkey_level, opts.key};
  const ilba::AggregatedTable agg = ilba::AggregateTable(table, request);
  ilba::WriteAggregatedTable(agg, table, opts.output_tb,
                             ParseDelim(opts.delim));
  ilba::WriteInfoLossReport(agg.info_loss, opts.output_il,
                            ParseDelim(opts.delim));
  PrintAggregatePreview(table, agg, 6);
  PrintLossDistribution(agg.info_loss);
  std::cout << "\nAggregated table: " << opts.output_tb << " ("
            << agg.rows.size() << " rows)\n"
            << "Information loss report: " << opts.output_il << "\n";
  return 0;
}

struct QueryOpts {
  std::string input = "full_tb.ilba";
  int hkey_level = 1;
  std::string hkey_value;
  std::vector<std::string> key;
  std::vector<std::string> key_value;
  bool verbose = false;
};

int RunQuery(const QueryOpts& opts) {
  if (opts.key.size() != opts.key_value.size()) {
    throw ilba::ValidationError(
        "--key and --key-value must have the same number of entries");
  }
  const ilba::FinestTable table = ilba::FinestTable::Load(opts.input);
  ilba::CellQuery query;
  query.hkey_level = opts.hkey_level;
  query.hkey_value = opts.hkey_value;
  for (std::size_t i = 0; i < opts.key.size(); ++i) {
    query.key_assignments.emplace_back(opts.key[i], opts.key_value[i]);
  }
  ilba::IlbaTrace trace;
  ilba::SmallCellPartition partition;
  const std::uint64_t masked =
      ilba::QueryCell(table, query, &trace, &partition);
  std::cout << masked << "\n";
  if (opts.verbose) {
    std::cout << "small cells: " << partition.small_cells() << " (|S0|="
              << partition.s0_size << ", |SK|=" << partition.sk_size
              << "), f_large=" << partition.f_large << "\n";
    switch (trace.dispatch) {
      case ilba::IlbaCase::kEmpty:
        std::cout << "case: empty (released small sum 0)\n";
        break;
      case ilba::IlbaCase::kSingleton:
        std::cout << "case: singleton (stored mask " << trace.masked_small
                  << " re-released)\n";
        break;
      case ilba::IlbaCase::kGeneral:
        std::cout << "case: general, center " << trace.center1 << " -> "
                  << trace.center2 << ", shift "
                  << (trace.shift == ilba::ShiftType::kNone
                          ? "none"
                          : trace.shift == ilba::ShiftType::kType1Up
                                ? "type1"
                                : "type2")
                  << (trace.post_processed ? ", post-processed" : "")
                  << ", masked small sum " << trace.masked_small << "\n";
        break;
    }
  }
  return 0;
}

struct AuditOpts {
  std::string input = "full_tb.ilba";
  std::string output_tb = "audit_report.json";
  int hkey_level = 1;
  std::vector<std::string> key;
  std::uint64_t seed = 0;
  bool unsafe_naive = false;
};

int RunAudit(const AuditOpts& opts) {
  const ilba::FinestTable table = ilba::FinestTable::Load(opts.input);
  WarnSmallK(table.threshold());
  const ilba::AggregationRequest request{opts.hkey_level, opts.key};
  const ilba::Mechanism mechanism = opts.unsafe_naive
                                        ? ilba::Mechanism::kNaiveScaOfSum
                                        : ilba::Mechanism::kIlba;
  const ilba::AuditReport report =
      ilba::AuditRelease(table, request, mechanism, opts.seed);
  ilba::WriteAuditReport(report, opts.output_tb);
  std::cout << "Audited " << report.groups_audited << " of "
            << report.groups_total << " released cells (mechanism: "
            << ilba::MechanismName(report.mechanism) << ", K = " << report.k
            << ")\n";
  if (report.groups_audited > 0) {
    std::cout << "Minimum ambiguity: " << report.min_ambiguity << "\n";
  }
  std::cout << "Violations: " << report.violation_count << "\n"
            << "Report: " << opts.output_tb << "\n";
  if (!report.passed()) {
    std::cerr << "audit FAILED: " << report.violation_count
              << " violation(s), " << report.ambiguity_failures
              << " cell(s) below the ambiguity floor\n";
    return 2;
  }
  std::cout << "Audit passed.\n";
  return 0;
}

struct SynthOpts {
  std::string output_tb;
  std::uint64_t records = 1000;
  std::vector<std::uint64_t> levels = {1, 5, 78, 2506};
  std::vector<std::uint64_t> key_cats = {2, 18, 9, 5, 21};
  double skew = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> hkey;
  std::vector<std::string> key;
  std::string delim = ",";
};

int RunSynth(const SynthOpts& opts) {
  ilba::SynthSpec spec;
  spec.records = opts.records;
  spec.level_sizes = opts.levels;
  spec.key_categories = opts.key_cats;
  spec.skew = opts.skew;
  spec.seed = opts.seed;
  spec.hkey_names = opts.hkey;
  spec.key_names = opts.key;
  ilba::GenerateSynthetic(spec, opts.output_tb, ParseDelim(opts.delim));
  std::cout << "Wrote " << opts.records << " records to " << opts.output_tb
            << " (seed " << opts.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ilba: confidential dissemination of hierarchical frequency tables\n"
      "(SCA-masked finest table, loss-bounded aggregation, differencing "
      "audit)"};
  app.require_subcommand(1);

  BuildOpts build;
  CLI::App* build_cmd = app.add_subcommand(
      "build", "Build and save the SCA-masked finest-level table");
  build_cmd->add_option("--input", build.input, "Microdata file (delimited)")
      ->required();
  build_cmd->add_option("--hkey", build.hkey,
                        "Hierarchical variables (comma separated)")
      ->required()
      ->delimiter(',');
  build_cmd
      ->add_option("--hkey-rank", build.hkey_rank,
                   "Rank per hierarchical variable, 1 = coarsest")
      ->delimiter(',');
  CLI::Option* key_opt =
      build_cmd
          ->add_option("--key", build.key,
                       "Key variables (default: all non-hierarchical)")
          ->delimiter(',');
  build_cmd->add_option("--mask-thr", build.mask_thr,
                        "Anonymity threshold K (default 5)");
  build_cmd->add_option("--key-thr", build.key_thr,
                        "Max categories per key (default 100)");
  build_cmd->add_option("--seed", build.seed, "RNG seed for the SCA draws");
  build_cmd->add_option("--output-tb", build.output_tb,
                        "Output table container path");
  build_cmd->add_option("--delim", build.delim, "Input field delimiter");

  AggregateOpts agg;
  CLI::App* agg_cmd = app.add_subcommand(
      "aggregate", "Produce a masked coarser-level table and loss report");
  agg_cmd->add_option("--input", agg.input, "Finest-table container");
  agg_cmd->add_option("--hkey-level", agg.hkey_level,
                      "Hierarchy level (1 = coarsest)")
      ->required();
  agg_cmd->add_option("--key", agg.key, "Key variables to keep")
      ->delimiter(',');
  agg_cmd->add_option("--output-tb", agg.output_tb, "Masked table CSV path");
  agg_cmd->add_option("--output-il", agg.output_il, "Loss report CSV path");
  agg_cmd->add_option("--delim", agg.delim, "Output field delimiter");

  QueryOpts query;
  CLI::App* query_cmd = app.add_subcommand(
      "query", "Masked frequency for a single aggregated cell");
  query_cmd->add_option("--input", query.input, "Finest-table container");
  query_cmd->add_option("--hkey-level", query.hkey_level,
                        "Hierarchy level (1 = coarsest)")
      ->required();
  query_cmd->add_option("--hkey-value", query.hkey_value,
                        "Hierarchy unit code at that level")
      ->required();
  query_cmd->add_option("--key", query.key, "Key variables to fix")
      ->delimiter(',');
  query_cmd
      ->add_option("--key-value", query.key_value,
                   "Values for --key, in the same order")
      ->delimiter(',');
  query_cmd->add_flag("--verbose,-v", query.verbose,
                      "Print the masking trace");

  AuditOpts audit;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "Attack a release and verify K-anonymity and K-ambiguity");
  audit_cmd->add_option("--input", audit.input, "Finest-table container");
  audit_cmd->add_option("--hkey-level", audit.hkey_level,
                        "Hierarchy level of the audited release")
      ->required();
  audit_cmd->add_option("--key", audit.key, "Key variables of the release")
      ->delimiter(',');
  audit_cmd->add_option("--output-tb", audit.output_tb,
                        "Audit report path (JSON)");
  audit_cmd->add_option("--seed", audit.seed,
                        "Seed for the naive mechanism's draws");
  audit_cmd->add_flag("--unsafe-naive", audit.unsafe_naive, "")->group("");

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate seeded census-shaped synthetic microdata");
  synth_cmd->add_option("--output-tb", synth.output_tb, "Output microdata")
      ->required();
  synth_cmd->add_option("--records", synth.records, "Record count");
  synth_cmd
      ->add_option("--levels", synth.levels,
                   "Hierarchy unit counts, coarse to fine")
      ->delimiter(',');
  synth_cmd
      ->add_option("--key-cats", synth.key_cats, "Category count per key")
      ->delimiter(',');
  synth_cmd->add_option("--skew", synth.skew,
                        "Zipf skew of units and categories (0 = uniform)");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--hkey", synth.hkey, "Hierarchy column names")
      ->delimiter(',');
  synth_cmd->add_option("--key", synth.key, "Key column names")
      ->delimiter(',');
  synth_cmd->add_option("--delim", synth.delim, "Output field delimiter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    build.key_given = key_opt->count() > 0;
    if (app.got_subcommand(build_cmd)) return RunBuild(build);
    if (app.got_subcommand(agg_cmd)) return RunAggregate(agg);
    if (app.got_subcommand(query_cmd)) return RunQuery(query);
    if (app.got_subcommand(audit_cmd)) return RunAudit(audit);
    if (app.got_subcommand(synth_cmd)) return RunSynth(synth);
  } catch (const ilba::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ilba::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

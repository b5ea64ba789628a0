// Copyright 2026 The credxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// bench: download-throughput harness.
//
//   bench gen --dir files [--max-size 25MB]
//   bench run --profile colorado --sizes 22801000,170131000 --out results.csv
//   bench compare --results results.csv --baselines baselines.csv --out t.txt

#include <unistd.h>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "credxfer/bench.h"
#include "credxfer/error.h"
#include "credxfer/mock_provider.h"
#include "credxfer/provider_config.h"

namespace {

namespace bench = credxfer::bench;
namespace fs = std::filesystem;

/// "25MB", "2.335GB", "5797" (decimal SI units).
std::uint64_t ParseSize(std::string const& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (std::exception const&) {
    throw credxfer::Error(credxfer::ErrorCode::kInvalidArgument,
                          "bad size '" + text + "'");
  }
  std::string unit;
  for (auto c : text.substr(used)) unit += static_cast<char>(std::toupper(c));
  double scale = 1;
  if (unit == "" || unit == "B") {
    scale = 1;
  } else if (unit == "KB" || unit == "K") {
    scale = 1e3;
  } else if (unit == "MB" || unit == "M") {
    scale = 1e6;
  } else if (unit == "GB" || unit == "G") {
    scale = 1e9;
  } else {
    throw credxfer::Error(credxfer::ErrorCode::kInvalidArgument,
                          "bad size unit in '" + text + "'");
  }
  if (value < 0) {
    throw credxfer::Error(credxfer::ErrorCode::kInvalidArgument,
                          "negative size '" + text + "'");
  }
  return static_cast<std::uint64_t>(value * scale + 0.5);
}

fs::path DefaultClient() {
  std::error_code ec;
  auto self = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return "transfer";
  return self.parent_path() / "transfer";
}

int Gen(std::string const& dir, std::string const& max_size) {
  std::optional<std::uint64_t> cap;
  if (!max_size.empty()) cap = ParseSize(max_size);
  auto files = bench::GenerateTestFiles(dir, cap);
  for (auto const& f : files) {
    std::cout << f.path.filename().string() << "\t" << f.size << "\t";
    for (std::size_t i = 0; i < f.percentiles.size(); ++i) {
      std::cout << (i ? "," : "") << "p" << f.percentiles[i];
    }
    std::cout << "\t" << f.sha256 << "\n";
  }
  return 0;
}

int Run(std::string const& profile, std::string const& site,
        std::optional<double> bandwidth, std::vector<std::string> const& sizes,
        std::string const& out, std::string const& dir, std::string work,
        std::string client) {
  bench::BenchRunOptions options;
  auto p = credxfer::mock::FindProfile(profile);
  if (!p) {
    std::cerr << "bench: unknown profile '" << profile << "'\n";
    return 2;
  }
  options.site = site.empty() ? p->name : site;
  options.bandwidth = bandwidth.value_or(p->bandwidth);
  for (auto const& s : sizes) options.sizes.push_back(ParseSize(s));
  options.files_dir = dir;
  if (work.empty()) {
    work = (fs::temp_directory_path() /
            ("bench-" + std::to_string(::getpid())))
               .string();
  }
  options.work_dir = work;
  options.client = client.empty() ? DefaultClient() : fs::path(client);

  auto results = bench::RunBenchmark(options);
  std::ofstream os(out);
  bench::WriteResultsCsv(os, results);
  if (!os) {
    std::cerr << "bench: cannot write " << out << "\n";
    return 1;
  }
  for (auto const& r : results) {
    std::cerr << r.site << " " << r.size_bytes << " pass " << r.pass << ": "
              << r.speed_mbps << " mbps in " << r.elapsed_s << " s"
              << (r.reliable() ? "" : " (unreliable: under 2 s)") << "\n";
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  return 0;
}

int Compare(std::string const& results_path, std::string const& baselines_path,
            std::string const& out, std::string const& csv_out) {
  std::ifstream rs(results_path);
  if (!rs) {
    std::cerr << "bench: cannot read " << results_path << "\n";
    return 1;
  }
  std::ifstream bs(baselines_path);
  if (!bs) {
    std::cerr << "bench: cannot read " << baselines_path << "\n";
    return 1;
  }
  auto results = bench::ReadResultsCsv(rs);
  auto baselines = bench::ReadBaselinesCsv(bs);
  auto table = bench::Compare(results, baselines);
  auto text = table.ToText();
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out);
    os << text;
  }
  if (!csv_out.empty()) {
    std::ofstream os(csv_out);
    os << table.ToCsv();
  }
  if (table.rows.empty()) {
    std::cerr << "bench: no OneDrive results to compare\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Download-throughput benchmark harness"};
  app.require_subcommand(1);

  std::string dir = "bench-files";
  std::string max_size;
  auto* gen = app.add_subcommand("gen", "write the percentile test files");
  gen->add_option("--dir", dir, "output directory");
  gen->add_option("--max-size", max_size, "skip files larger than this");

  std::string profile = "unthrottled";
  std::string site;
  std::optional<double> bandwidth;
  std::vector<std::string> sizes;
  std::string out;
  std::string work;
  std::string client;
  auto* run = app.add_subcommand("run", "time two downloads per size");
  run->add_option("--profile", profile, "emulated site profile");
  run->add_option("--site", site, "site name recorded in results");
  run->add_option("--bandwidth", bandwidth, "override cap, bytes per second")
      ->check(CLI::PositiveNumber);
  run->add_option("--sizes", sizes, "sizes, e.g. 22801000,170MB")
      ->delimiter(',')
      ->required();
  run->add_option("--out", out, "results CSV")->required();
  run->add_option("--dir", dir, "test file directory");
  run->add_option("--work", work, "scratch directory");
  run->add_option("--client", client, "transfer executable");

  std::string results_path;
  std::string baselines_path;
  std::string table_out;
  std::string csv_out;
  auto* cmp = app.add_subcommand("compare", "percent-difference table");
  cmp->add_option("--results", results_path, "results CSV")->required();
  cmp->add_option("--baselines", baselines_path, "baseline CSV")->required();
  cmp->add_option("--out", table_out, "text table (default stdout)");
  cmp->add_option("--csv", csv_out, "also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }
  try {
    if (gen->parsed()) return Gen(dir, max_size);
    if (run->parsed()) {
      return Run(profile, site, bandwidth, sizes, out, dir, work, client);
    }
    return Compare(results_path, baselines_path, table_out, csv_out);
  } catch (std::exception const& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 1;
  }
}

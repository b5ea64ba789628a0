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
#ifndef CREDXFER_BENCH_H
#define CREDXFER_BENCH_H

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace credxfer::bench {

/// One row of the file-size percentile table.
struct FileSizeSpec {
  int percentile = 0;
  std::uint64_t size = 0;  // bytes, decimal SI
};

/// Percentiles 1, 5, 25, 50, 75, 95 and 99. The last two share a size.
std::vector<FileSizeSpec> const& CanonicalSuite();

/// "f5k.bin", "f22.bin", "f170.bin", ... named after the size in MB.
std::string TestFileName(std::uint64_t size);

struct GeneratedFile {
  std::filesystem::path path;
  std::uint64_t size = 0;
  std::vector<int> percentiles;
  std::string sha256;
};

/// Writes `size` bytes from a fixed-seed generator (seeded per size).
void WriteDeterministicFile(std::filesystem::path const& path,
                            std::uint64_t size);

/// One file per distinct size in the canonical suite, skipping sizes above
/// `max_size`. Existing files of the right size and content are kept.
/// Throws kIoFailure.
std::vector<GeneratedFile> GenerateTestFiles(
    std::filesystem::path const& dir,
    std::optional<std::uint64_t> max_size = std::nullopt);

/// size * 8 / elapsed / 1e6. Throws kInvalidArgument unless elapsed > 0.
double SpeedMbps(std::uint64_t size_bytes, double elapsed_s);

/// (onedrive - other) / other * 100; positive means OneDrive was faster.
/// Throws kInvalidArgument unless other > 0.
double PercentDifference(double onedrive_speed, double other_speed);

/// Arithmetic mean. Throws kEmptyInput.
double ColumnAverage(std::vector<double> const& values);

/// Passes shorter than this are dominated by setup latency.
inline constexpr double kReliableElapsedSeconds = 2.0;

struct BenchResult {
  std::string site;
  std::string method;
  std::uint64_t size_bytes = 0;
  int pass = 1;  // 1 = first (cold), 2 = second
  double elapsed_s = 0;
  double speed_mbps = 0;

  bool reliable() const { return elapsed_s >= kReliableElapsedSeconds; }
};

struct Baseline {
  std::string site;
  std::string method;
  std::uint64_t size_bytes = 0;
  double speed_mbps = 0;
};

/// Columns: site,method,size_bytes,pass,elapsed_s,speed_mbps. `pass` is
/// written as "first" or "second".
void WriteResultsCsv(std::ostream& os, std::vector<BenchResult> const& results);
/// Throws kParseError.
std::vector<BenchResult> ReadResultsCsv(std::istream& is);
/// Columns: site,method,size_bytes,speed_mbps. Throws kParseError.
std::vector<Baseline> ReadBaselinesCsv(std::istream& is);

/// Percent differences laid out as sites by (method, size) columns, plus the
/// column averages.
struct ComparisonTable {
  std::vector<std::string> columns;
  struct Row {
    std::string site;
    std::vector<double> values;
  };
  std::vector<Row> rows;

  /// Column means over the rows. Throws kEmptyInput when there are no rows.
  std::vector<double> Averages() const;
  /// Fixed-width text, one decimal, with an "Average" row when non-empty.
  std::string ToText() const;
  std::string ToCsv() const;
};

/// "HTTP 22.8MB", "StashCache 2.3GB".
std::string ColumnLabel(std::string const& method, std::uint64_t size);

/// Compares the mean OneDrive speed per (site, size) against each baseline
/// method. Columns are ordered http, stashcache, then other methods, each by
/// ascending size. Throws MissingBaseline naming the first absent cell.
ComparisonTable Compare(std::vector<BenchResult> const& results,
                        std::vector<Baseline> const& baselines);

/// One timed invocation of the transfer client.
struct TrialSetup {
  std::filesystem::path client;     // transfer executable
  std::filesystem::path creds_dir;  // exported as _CONDOR_CREDS
  std::string api_base;             // exported as GRAPH_API_BASE
  std::filesystem::path download_dir;
  std::filesystem::path reference;  // local copy used for the checksum
  std::string provider = "onedrive";
  std::string site;
  std::string method = "onedrive";
};

/// Downloads the reference file's name twice, strictly one after the other,
/// timing the whole client process each time and checking both copies
/// against the reference checksum. Throws kStagingFailed when the client
/// exits nonzero and kIoFailure on a checksum mismatch.
std::pair<BenchResult, BenchResult> RunTrial(TrialSetup const& setup);

struct BenchRunOptions {
  std::string site;
  /// Bytes per second; 0 is unthrottled.
  double bandwidth = 0;
  std::vector<std::uint64_t> sizes;
  std::filesystem::path files_dir;  // generated on demand
  std::filesystem::path work_dir;   // scratch, created if missing
  std::filesystem::path client;
};

/// Starts a throttled mock, obtains a token through the authorization code
/// flow, stages it and runs one trial per size.
std::vector<BenchResult> RunBenchmark(BenchRunOptions const& options);

}  // namespace credxfer::bench

#endif  // CREDXFER_BENCH_H

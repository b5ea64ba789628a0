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
#include "credxfer/bench.h"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "credxfer/checksum.h"
#include "credxfer/error.h"
#include "credxfer/log.h"
#include "credxfer/mock_provider.h"
#include "credxfer/oauth_flow.h"
#include "credxfer/provider_config.h"
#include "credxfer/random.h"
#include "credxfer/token.h"
#include "credxfer/transfer.h"
#include "credxfer/url.h"

extern char** environ;

namespace credxfer::bench {
namespace {

constexpr std::uint64_t kSeed = 0x63726564786665ULL;
constexpr std::size_t kWriteBlock = 1 << 20;

std::vector<std::string> SplitCsvLine(std::string const& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Maps header names to column positions, requiring `wanted`.
std::map<std::string, std::size_t> HeaderIndex(
    std::string const& header, std::vector<std::string> const& wanted) {
  std::map<std::string, std::size_t> index;
  auto cols = SplitCsvLine(header);
  for (std::size_t i = 0; i < cols.size(); ++i) index[cols[i]] = i;
  for (auto const& w : wanted) {
    if (index.count(w) == 0) {
      throw Error(ErrorCode::kParseError, "CSV header lacks column '" + w + "'");
    }
  }
  return index;
}

template <typename Row, typename Fill>
std::vector<Row> ReadCsv(std::istream& is, std::vector<std::string> const& wanted,
                         Fill fill) {
  std::vector<Row> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  auto index = HeaderIndex(line, wanted);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto cells = SplitCsvLine(line);
    auto cell = [&](std::string const& name) -> std::string const& {
      auto i = index.at(name);
      if (i >= cells.size()) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": missing " + name);
      }
      return cells[i];
    };
    try {
      rows.push_back(fill(cell));
    } catch (std::invalid_argument const&) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": bad number");
    } catch (std::out_of_range const&) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": number out of range");
    }
  }
  return rows;
}

std::string Fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  // Avoid printing "-0.0".
  if (std::strcmp(buf, "-0.0") == 0) return "0.0";
  return buf;
}

std::string MethodLabel(std::string const& method) {
  if (method == "http") return "HTTP";
  if (method == "stashcache") return "StashCache";
  if (method == "onedrive") return "OneDrive";
  return method;
}

int MethodRank(std::string const& method) {
  if (method == "http") return 0;
  if (method == "stashcache") return 1;
  return 2;
}

int Spawn(std::vector<std::string> const& argv,
          std::vector<std::pair<std::string, std::string>> const& overrides) {
  std::vector<std::string> env_store;
  for (char** e = environ; *e != nullptr; ++e) {
    std::string entry(*e);
    auto name = entry.substr(0, entry.find('='));
    bool replaced = std::any_of(overrides.begin(), overrides.end(),
                                [&](auto const& kv) { return kv.first == name; });
    if (!replaced) env_store.push_back(std::move(entry));
  }
  for (auto const& [k, v] : overrides) env_store.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = argv;
  std::vector<char*> argp;
  for (auto& a : args) argp.push_back(a.data());
  argp.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null",
                                   O_WRONLY, 0);
  pid_t pid = 0;
  int rc = posix_spawn(&pid, argp[0], &actions, nullptr, argp.data(),
                       envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(ErrorCode::kStagingFailed,
                "cannot start " + argv[0] + ": " + std::strerror(rc));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw Error(ErrorCode::kStagingFailed, "waitpid failed");
    }
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

std::vector<FileSizeSpec> const& CanonicalSuite() {
  static auto const* const kSuite = new std::vector<FileSizeSpec>{
      {1, 5'797},          {5, 22'801'000},     {25, 170'131'000},
      {50, 467'852'000},   {75, 493'337'000},   {95, 2'335'000'000},
      {99, 2'335'000'000},
  };
  return *kSuite;
}

std::string TestFileName(std::uint64_t size) {
  if (size < 1'000'000) return "f" + std::to_string(size / 1000) + "k.bin";
  return "f" + std::to_string(size / 1'000'000) + ".bin";
}

void WriteDeterministicFile(std::filesystem::path const& path,
                            std::uint64_t size) {
  std::mt19937_64 gen(kSeed ^ size);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  std::vector<std::uint64_t> block(kWriteBlock / sizeof(std::uint64_t));
  std::uint64_t left = size;
  while (left > 0) {
    for (auto& w : block) w = gen();
    auto n = static_cast<std::size_t>(std::min<std::uint64_t>(left, kWriteBlock));
    out.write(reinterpret_cast<char const*>(block.data()),
              static_cast<std::streamsize>(n));
    left -= n;
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::vector<GeneratedFile> GenerateTestFiles(
    std::filesystem::path const& dir, std::optional<std::uint64_t> max_size) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string());
  std::vector<GeneratedFile> files;
  for (auto const& spec : CanonicalSuite()) {
    if (max_size && spec.size > *max_size) continue;
    if (!files.empty() && files.back().size == spec.size) {
      files.back().percentiles.push_back(spec.percentile);
      continue;
    }
    GeneratedFile f;
    f.path = dir / TestFileName(spec.size);
    f.size = spec.size;
    f.percentiles = {spec.percentile};
    WriteDeterministicFile(f.path, f.size);
    f.sha256 = Sha256File(f.path);
    files.push_back(std::move(f));
  }
  return files;
}

double SpeedMbps(std::uint64_t size_bytes, double elapsed_s) {
  if (!(elapsed_s > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "elapsed time must be positive");
  }
  return static_cast<double>(size_bytes) * 8.0 / elapsed_s / 1e6;
}

double PercentDifference(double onedrive_speed, double other_speed) {
  if (!(other_speed > 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "baseline speed must be positive");
  }
  return (onedrive_speed - other_speed) / other_speed * 100.0;
}

double ColumnAverage(std::vector<double> const& values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "no values to average");
  double sum = 0;
  for (auto v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

void WriteResultsCsv(std::ostream& os, std::vector<BenchResult> const& results) {
  os << "site,method,size_bytes,pass,elapsed_s,speed_mbps\n";
  char buf[128];
  for (auto const& r : results) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.elapsed_s, r.speed_mbps);
    os << r.site << ',' << r.method << ',' << r.size_bytes << ','
       << (r.pass == 1 ? "first" : "second") << ',' << buf << '\n';
  }
}

std::vector<BenchResult> ReadResultsCsv(std::istream& is) {
  return ReadCsv<BenchResult>(
      is, {"site", "method", "size_bytes", "pass", "elapsed_s", "speed_mbps"},
      [](auto const& cell) {
        BenchResult r;
        r.site = cell("site");
        r.method = cell("method");
        r.size_bytes = std::stoull(cell("size_bytes"));
        auto const& pass = cell("pass");
        if (pass == "first" || pass == "1") {
          r.pass = 1;
        } else if (pass == "second" || pass == "2") {
          r.pass = 2;
        } else {
          throw Error(ErrorCode::kParseError, "bad pass '" + pass + "'");
        }
        r.elapsed_s = std::stod(cell("elapsed_s"));
        r.speed_mbps = std::stod(cell("speed_mbps"));
        return r;
      });
}

std::vector<Baseline> ReadBaselinesCsv(std::istream& is) {
  return ReadCsv<Baseline>(
      is, {"site", "method", "size_bytes", "speed_mbps"}, [](auto const& cell) {
        Baseline b;
        b.site = cell("site");
        b.method = cell("method");
        b.size_bytes = std::stoull(cell("size_bytes"));
        b.speed_mbps = std::stod(cell("speed_mbps"));
        return b;
      });
}

std::vector<double> ComparisonTable::Averages() const {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "table has no rows");
  std::vector<double> out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> column;
    for (auto const& row : rows) column.push_back(row.values.at(c));
    out.push_back(ColumnAverage(column));
  }
  return out;
}

std::string ComparisonTable::ToText() const {
  std::size_t site_width = 7;
  for (auto const& r : rows) site_width = std::max(site_width, r.site.size());
  std::vector<std::size_t> widths;
  for (auto const& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 8));

  std::ostringstream os;
  auto cell = [&](std::string const& text, std::size_t width, bool left) {
    os << (left ? text + std::string(width - std::min(width, text.size()), ' ')
                : std::string(width - std::min(width, text.size()), ' ') + text);
  };
  cell("Site", site_width, true);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    os << "  ";
    cell(columns[c], widths[c], false);
  }
  os << '\n';
  auto emit = [&](std::string const& site, std::vector<double> const& values) {
    cell(site, site_width, true);
    for (std::size_t c = 0; c < values.size(); ++c) {
      os << "  ";
      cell(Fixed1(values[c]) + "%", widths[c], false);
    }
    os << '\n';
  };
  for (auto const& r : rows) emit(r.site, r.values);
  if (!rows.empty()) emit("Average", Averages());
  return os.str();
}

std::string ComparisonTable::ToCsv() const {
  std::ostringstream os;
  os << "site";
  for (auto const& c : columns) os << ',' << c;
  os << '\n';
  auto emit = [&](std::string const& site, std::vector<double> const& values) {
    os << site;
    for (auto v : values) os << ',' << Fixed1(v);
    os << '\n';
  };
  for (auto const& r : rows) emit(r.site, r.values);
  if (!rows.empty()) emit("Average", Averages());
  return os.str();
}

std::string ColumnLabel(std::string const& method, std::uint64_t size) {
  char buf[32];
  if (size >= 1'000'000'000) {
    std::snprintf(buf, sizeof(buf), "%.1fGB", static_cast<double>(size) / 1e9);
  } else if (size >= 1'000'000) {
    std::snprintf(buf, sizeof(buf), "%.1fMB", static_cast<double>(size) / 1e6);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1fKB", static_cast<double>(size) / 1e3);
  }
  return MethodLabel(method) + " " + buf;
}

ComparisonTable Compare(std::vector<BenchResult> const& results,
                        std::vector<Baseline> const& baselines) {
  std::vector<std::string> sites;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> speeds;
  std::set<std::uint64_t> sizes;
  for (auto const& r : results) {
    if (r.method != "onedrive") continue;
    if (std::find(sites.begin(), sites.end(), r.site) == sites.end()) {
      sites.push_back(r.site);
    }
    speeds[{r.site, r.size_bytes}].push_back(r.speed_mbps);
    sizes.insert(r.size_bytes);
  }
  std::vector<std::string> methods;
  std::map<std::tuple<std::string, std::string, std::uint64_t>, double> lookup;
  for (auto const& b : baselines) {
    if (b.method == "onedrive") continue;
    if (std::find(methods.begin(), methods.end(), b.method) == methods.end()) {
      methods.push_back(b.method);
    }
    lookup[{b.site, b.method, b.size_bytes}] = b.speed_mbps;
  }
  std::stable_sort(methods.begin(), methods.end(),
                   [](auto const& a, auto const& b) {
                     auto ra = MethodRank(a), rb = MethodRank(b);
                     return ra != rb ? ra < rb : (ra == 2 && a < b);
                   });

  ComparisonTable table;
  for (auto const& m : methods) {
    for (auto size : sizes) table.columns.push_back(ColumnLabel(m, size));
  }
  for (auto const& site : sites) {
    ComparisonTable::Row row{site, {}};
    for (auto const& m : methods) {
      for (auto size : sizes) {
        auto it = lookup.find({site, m, size});
        if (it == lookup.end()) {
          throw Error(ErrorCode::kMissingBaseline,
                      "no " + m + " baseline for site " + site + " at " +
                          std::to_string(size) + " bytes");
        }
        auto s = speeds.find({site, size});
        if (s == speeds.end()) {
          throw Error(ErrorCode::kMissingBaseline,
                      "no onedrive result for site " + site + " at " +
                          std::to_string(size) + " bytes");
        }
        row.values.push_back(PercentDifference(ColumnAverage(s->second),
                                               it->second));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::pair<BenchResult, BenchResult> RunTrial(TrialSetup const& setup) {
  std::error_code ec;
  auto const size = std::filesystem::file_size(setup.reference, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, "cannot stat " + setup.reference.string());
  }
  auto const expected = Sha256File(setup.reference);
  auto const name = setup.reference.filename().string();
  auto const dest = setup.download_dir / name;
  std::filesystem::create_directories(setup.download_dir, ec);

  auto run_pass = [&](int pass) {
    std::filesystem::remove(dest, ec);
    auto const start = std::chrono::steady_clock::now();
    int rc = Spawn({setup.client.string(), setup.provider + ":///" + name,
                    setup.download_dir.string()},
                   {{kCredsEnvVar, setup.creds_dir.string()},
                    {kApiBaseEnvVar, setup.api_base}});
    double elapsed = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    if (rc != 0) {
      throw Error(ErrorCode::kStagingFailed,
                  "transfer of " + name + " exited with status " +
                      std::to_string(rc));
    }
    if (Sha256File(dest) != expected) {
      throw Error(ErrorCode::kIoFailure, name + " checksum mismatch");
    }
    BenchResult r;
    r.site = setup.site;
    r.method = setup.method;
    r.size_bytes = size;
    r.pass = pass;
    r.elapsed_s = elapsed;
    r.speed_mbps = SpeedMbps(size, elapsed);
    std::filesystem::remove(dest, ec);
    return r;
  };
  auto first = run_pass(1);
  auto second = run_pass(2);
  return {first, second};
}

std::vector<BenchResult> RunBenchmark(BenchRunOptions const& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.work_dir);
  fs::create_directories(options.files_dir);
  for (auto size : options.sizes) {
    auto path = options.files_dir / TestFileName(size);
    std::error_code ec;
    if (!fs::exists(path, ec) || fs::file_size(path, ec) != size) {
      LogInfo("generating " + path.string());
      WriteDeterministicFile(path, size);
    }
  }

  mock::MockConfig config;
  config.backing_dir = options.files_dir;
  config.client_id = "bench-client";
  config.client_secret = RandomHex(24);
  if (options.bandwidth > 0) config.bandwidth_limit = options.bandwidth;
  mock::MockProvider provider(config);
  provider.Start();

  auto const secret_path = options.work_dir / "client_secret";
  WriteTokenFile(secret_path, config.client_secret);
  ProviderConfig cfg;
  cfg.name = "onedrive";
  cfg.client_id = config.client_id;
  cfg.client_secret_path = secret_path;
  cfg.authorize_url = provider.AuthorizeUrl();
  cfg.token_url = provider.TokenUrl();

  auto const redirect = "http://127.0.0.1/return/onedrive";
  auto request = MakeAuthorizeRequest(cfg, redirect, {"Files.Read"});
  auto back = ParseUrl(mock::ApproveConsent(BuildAuthorizeUrl(cfg, request)));
  auto code = FindParam(ParseQuery(back.Query()), "code");
  if (!code) throw Error(ErrorCode::kProviderRejected, "consent was refused");
  auto tokens = ExchangeCode(cfg, *code, redirect);

  AccessToken access;
  access.token = tokens.access_token;
  access.expires_at = Now() + tokens.expires_in;
  access.scopes = SplitScopes(tokens.scope);
  auto const creds = options.work_dir / "creds";
  fs::create_directories(creds);
  WriteTokenFile(creds / "onedrive.use", SerializeUseToken(access));

  std::vector<BenchResult> results;
  for (auto size : options.sizes) {
    TrialSetup setup;
    setup.client = options.client;
    setup.creds_dir = creds;
    setup.api_base = provider.BaseUrl();
    setup.download_dir = options.work_dir / "downloads";
    setup.reference = options.files_dir / TestFileName(size);
    setup.site = options.site;
    auto [first, second] = RunTrial(setup);
    results.push_back(first);
    results.push_back(second);
  }
  provider.Stop();
  fs::remove(secret_path);
  return results;
}

}  // namespace credxfer::bench

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
// Acceptance suite. Each test drives the built tools the way an operator
// would and prints one "ACCEPTANCE C<n> PASS|FAIL" line.
//
// Knobs:
//   CREDXFER_RENEWAL_SECONDS  length of the renewal run (default 300)
//   CREDXFER_FULL_SIZE=1      use the 2,335,000,000-byte file for the
//                             bandwidth-ratio check instead of 170,131,000

#include <strings.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "credxfer/bench.h"
#include "credxfer/checksum.h"
#include "credxfer/error.h"
#include "credxfer/random.h"
#include "credxfer/token.h"
#include "testing/test_util.h"

namespace credxfer {
namespace {

using ::testing::HasSubstr;
using testing::CommandResult;
using testing::Daemon;
using testing::EnvOverrides;
using testing::RunCommand;
using testing::TempDir;
using testing::ToolPath;
using Clock = std::chrono::steady_clock;

constexpr char kUser[] = "dweitzel";
constexpr std::uint64_t kF22 = 22'801'000;

// The example job from the user documentation.
constexpr char kSubmitFile[] = R"(executable = test.sh
output = out
error = err
log = log
should_transfer_files = YES
when_to_transfer_output = ON_EXIT
transfer_input_files = main
use_oauth_services = onedrive
onedrive_oauth_permissions = Files.ReadWrite.All
queue
)";

std::string Tool(char const* name) { return ToolPath(name).string(); }

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

long EnvLong(char const* name, long fallback) {
  auto const* v = std::getenv(name);
  return v == nullptr || *v == '\0' ? fallback : std::strtol(v, nullptr, 10);
}

struct SiteOptions {
  int token_lifetime = 3600;
  bool redirect = true;
  bool tls = false;
  int refresh_margin = 300;
  int refresh_period = 60;
};

/// A submit host: the mock provider and credmon running as separate
/// processes, plus a submit file and a vault.
class Site {
 public:
  explicit Site(SiteOptions const& o)
      : secret_("acceptance-secret-" + RandomHex(12)) {
    drive_ = dir_ / "drive";
    store_ = dir_ / "store";
    std::filesystem::create_directories(drive_);
    std::vector<std::string> mock_args = {
        Tool("mock-provider"),     "--root",          drive_.string(),
        "--token-lifetime",        std::to_string(o.token_lifetime),
        "--client-id",             "credxfer-acceptance",
        "--client-secret",         secret_,
        "--log",                   (dir_ / "mock.log").string()};
    if (!o.redirect) mock_args.push_back("--no-redirect");
    mock_ = std::make_unique<Daemon>(mock_args);
    auto config = testing::WriteMockProviderConfig(
        dir_.path(), mock_->url(), "credxfer-acceptance", secret_);
    std::vector<std::string> credmon_args = {
        Tool("credmon"), "serve", "--config", config.string(), "--store",
        store_.string(), "--port", "0", "--insecure-http",
        "--refresh-margin", std::to_string(o.refresh_margin),
        "--refresh-period", std::to_string(o.refresh_period)};
    if (o.tls) {
      tls_ = testing::MakeSelfSignedCert(dir_.path());
      credmon_args.insert(credmon_args.end(),
                          {"--tls-cert", tls_.cert.string(), "--tls-key",
                           tls_.key.string()});
    }
    credmon_ = std::make_unique<Daemon>(credmon_args);
    std::ofstream(dir_ / "job.sub") << kSubmitFile;
  }

  std::string ca_file() const { return tls_.cert.string(); }
  std::string const& client_secret() const { return secret_; }
  std::filesystem::path const& drive() const { return drive_; }
  std::filesystem::path const& store() const { return store_; }
  std::filesystem::path mock_log() const { return dir_ / "mock.log"; }
  std::filesystem::path vault_use() const {
    return store_ / kUser / "onedrive.use";
  }
  Daemon& mock() { return *mock_; }
  Daemon& credmon() { return *credmon_; }

  CommandResult Check() {
    std::vector<std::string> args = {Tool("stager"), "check",
                                     (dir_ / "job.sub").string(), "--user",
                                     kUser, "--credmon", credmon_->url()};
    if (!tls_.cert.empty()) args.insert(args.end(), {"--ca-file", ca_file()});
    return Log(RunCommand(args));
  }

  /// Plays the user's browser for a key URL. Returns every response.
  std::vector<testing::HttpResult> Visit(std::string const& key_url) {
    auto seen = testing::ScriptedConsent(key_url, ca_file());
    for (auto const& r : seen) bodies_.push_back(r.body);
    return seen;
  }

  /// Runs check, visits the printed URL when needed, and checks again.
  void Acquire() {
    auto first = Check();
    std::smatch m;
    static std::regex const url("Please visit: (\\S+)");
    if (first.exit_code == 0) return;
    if (!std::regex_search(first.out, m, url)) {
      throw std::runtime_error("stager check failed: " + first.err);
    }
    Visit(m[1].str());
    if (Check().exit_code != 0) throw std::runtime_error("still not Ready");
  }

  /// `stager stage` into `sandbox`; returns the _CONDOR_CREDS directory.
  std::filesystem::path Stage(std::filesystem::path const& sandbox) {
    auto r = Log(RunCommand({Tool("stager"), "stage",
                             (dir_ / "job.sub").string(), "--user", kUser,
                             "--store", store_.string(), "--sandbox",
                             sandbox.string()}));
    if (r.exit_code != 0) throw std::runtime_error("stage failed: " + r.err);
    return sandbox / ".condor_creds";
  }

  CommandResult Transfer(std::vector<std::string> args,
                         std::filesystem::path const& creds,
                         std::filesystem::path const& cwd = {}) {
    args.insert(args.begin(), Tool("transfer"));
    return Log(RunCommand(args,
                          {{"_CONDOR_CREDS", creds.string()},
                           {"GRAPH_API_BASE", mock_->url()}},
                          cwd));
  }

  /// Everything credmon served and every client or daemon log so far.
  std::vector<std::string> Transcript() const {
    auto all = bodies_;
    all.insert(all.end(), logs_.begin(), logs_.end());
    all.push_back(credmon_->Stderr());
    all.push_back(mock_->Stderr());
    return all;
  }
  void RecordBody(std::string body) { bodies_.push_back(std::move(body)); }

 private:
  CommandResult Log(CommandResult r) {
    logs_.push_back(r.out);
    logs_.push_back(r.err);
    return r;
  }

  TempDir dir_;
  std::string secret_;
  std::filesystem::path drive_;
  std::filesystem::path store_;
  testing::TlsFiles tls_;
  std::unique_ptr<Daemon> mock_;
  std::unique_ptr<Daemon> credmon_;
  std::vector<std::string> bodies_;
  std::vector<std::string> logs_;
};

std::vector<nlohmann::json> ReadRequestLog(std::filesystem::path const& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

std::optional<std::string> LoggedHeader(nlohmann::json const& entry,
                                        std::string const& name) {
  for (auto const& [k, v] : entry["headers"].items()) {
    if (strcasecmp(k.c_str(), name.c_str()) == 0) return v.get<std::string>();
  }
  return std::nullopt;
}

// C1 -------------------------------------------------------------------------

TEST(Acceptance, C1_EndToEndTokenFlow) {
  auto const start = Clock::now();
  Site site({.token_lifetime = 3600, .tls = true});
  EXPECT_THAT(site.credmon().url(), ::testing::StartsWith("https://"));

  auto first = site.Check();
  EXPECT_NE(first.exit_code, 0);
  EXPECT_THAT(first.out, HasSubstr("Hello, dweitzel."));
  std::regex const visit_line("^Please visit: https://\\S+/key/[0-9a-f]{32}$");
  std::vector<std::string> visits;
  int prompt_lines = 0;
  std::istringstream lines(first.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.find("Please visit") != std::string::npos) ++prompt_lines;
    if (std::regex_match(line, visit_line)) visits.push_back(line.substr(14));
  }
  ASSERT_EQ(prompt_lines, 1) << first.out;
  ASSERT_EQ(visits.size(), 1u) << first.out;

  auto steps = site.Visit(visits[0]);
  ASSERT_EQ(steps.size(), 4u);
  EXPECT_EQ(steps[0].status, 200);  // key page
  EXPECT_EQ(steps[1].status, 302);  // login redirect to the provider
  EXPECT_EQ(steps[2].status, 302);  // provider consent back to credmon
  EXPECT_EQ(steps[3].status, 200);  // callback
  EXPECT_THAT(steps[3].body, HasSubstr("Token retrieved"));

  auto second = site.Check();
  EXPECT_EQ(second.exit_code, 0) << second.err;
  EXPECT_THAT(second.out, HasSubstr("Ready"));
  auto const elapsed = Seconds(start);
  EXPECT_LT(elapsed, 5.0);
  RecordProperty("elapsed_s", std::to_string(elapsed));
}

// C2 and C3 ------------------------------------------------------------------

struct TransferScenario {
  bool identical = false;
  double transfer_s = 0;
  std::string token;
  std::vector<nlohmann::json> log;
  std::string err;
};

TransferScenario RunTransferScenario(bool redirect) {
  Site site({.redirect = redirect});
  bench::WriteDeterministicFile(site.drive() / "f22.bin", kF22);
  auto const expected = Sha256File(site.drive() / "f22.bin");
  site.Acquire();
  TempDir job;
  auto creds = site.Stage(job.path());
  TransferScenario s;
  s.token = ParseUseToken(ReadFile(creds / "onedrive.use")).token;
  auto const start = Clock::now();
  auto r = site.Transfer({"onedrive:///f22.bin", "./"}, creds, job.path());
  s.transfer_s = Seconds(start);
  s.err = r.err;
  auto const got = job / "f22.bin";
  s.identical = r.exit_code == 0 && std::filesystem::exists(got) &&
                std::filesystem::file_size(got) == kF22 &&
                Sha256File(got) == expected;
  s.log = ReadRequestLog(site.mock_log());
  return s;
}

TEST(Acceptance, C2_TransferCorrectness) {
  for (bool redirect : {true, false}) {
    SCOPED_TRACE(redirect ? "redirect_downloads=true" : "redirect_downloads=false");
    auto s = RunTransferScenario(redirect);
    EXPECT_TRUE(s.identical) << s.err;
    EXPECT_LT(s.transfer_s, 10.0);
  }
}

TEST(Acceptance, C3_WireFormat) {
  for (bool redirect : {true, false}) {
    SCOPED_TRACE(redirect ? "redirect_downloads=true" : "redirect_downloads=false");
    auto s = RunTransferScenario(redirect);
    ASSERT_TRUE(s.identical) << s.err;
    int content = 0;
    int dl = 0;
    for (auto const& e : s.log) {
      auto const path = e["path"].get<std::string>();
      if (path == "/v1.0/me/drive/root:/f22.bin:/content" && e["method"] == "GET") {
        ++content;
        EXPECT_EQ(LoggedHeader(e, "Authorization"), "Bearer " + s.token);
      }
      if (path.rfind("/dl/", 0) == 0) {
        ++dl;
        EXPECT_EQ(LoggedHeader(e, "Authorization"), std::nullopt)
            << "pre-authenticated download carried a bearer token";
      }
    }
    EXPECT_EQ(content, 1);
    EXPECT_EQ(dl, redirect ? 1 : 0);
  }
}

// C4 -------------------------------------------------------------------------

TEST(Acceptance, C4_Renewal) {
  auto const run_for = std::chrono::seconds(EnvLong("CREDXFER_RENEWAL_SECONDS", 300));
  Site site({.token_lifetime = 60, .refresh_margin = 30, .refresh_period = 10});
  std::string payload(1'000'000, 'r');
  std::ofstream(site.drive() / "probe.bin", std::ios::binary) << payload;
  site.Acquire();

  std::string last = ReadFile(site.vault_use());
  int rewrites = 0;
  int polls = 0;
  int bad_parses = 0;
  int transfers = 0;
  int failed_transfers = 0;
  auto const start = Clock::now();
  auto next_transfer = start;
  // Transfers start every 7 s so they land at every phase of the 10 s tick
  // and of the token lifetime.
  while (Clock::now() - start < run_for) {
    auto const now = Now();
    std::string bytes;
    try {
      bytes = ReadFile(site.vault_use());
      auto access = ParseUseToken(bytes);
      if (access.expires_at <= now) ++bad_parses;
    } catch (Error const& e) {
      ++bad_parses;
      ADD_FAILURE() << "poll " << polls << ": " << e.what();
    }
    ++polls;
    if (!bytes.empty() && bytes != last) {
      ++rewrites;
      last = bytes;
    }
    if (Clock::now() >= next_transfer) {
      next_transfer += std::chrono::seconds(7);
      TempDir job;
      ++transfers;
      try {
        auto creds = site.Stage(job.path());
        auto r = site.Transfer({"onedrive:///probe.bin", (job / "probe.bin").string()},
                               creds);
        if (r.exit_code != 0 || ReadFile(job / "probe.bin") != payload) {
          ++failed_transfers;
          ADD_FAILURE() << "transfer at " << Seconds(start) << " s: " << r.err;
        }
      } catch (std::exception const& e) {
        ++failed_transfers;
        ADD_FAILURE() << "staging at " << Seconds(start) << " s: " << e.what();
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  std::cout << "renewal: " << rewrites << " rewrites, " << polls << " polls, "
            << transfers << " transfers over " << run_for.count() << " s\n";
  EXPECT_GE(rewrites, 4);
  EXPECT_EQ(bad_parses, 0);
  EXPECT_GT(transfers, 0);
  EXPECT_EQ(failed_transfers, 0);
}

// C5 -------------------------------------------------------------------------

TEST(Acceptance, C5_SecretHygiene) {
  // Short-lived tokens so the refresher also runs during the scan window.
  Site site({.token_lifetime = 40, .refresh_margin = 30, .refresh_period = 2});
  std::ofstream(site.drive() / "data.txt") << "payload\n";
  site.Acquire();
  auto const first_use = ReadFile(site.vault_use());
  auto const deadline = Clock::now() + std::chrono::seconds(40);
  while (ReadFile(site.vault_use()) == first_use && Clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(250));
  }
  EXPECT_NE(ReadFile(site.vault_use()), first_use) << "refresher never ran";

  auto const refresh_token =
      ParseVaultToken(ReadFile(site.store() / kUser / "onedrive.top")).token;
  ASSERT_FALSE(refresh_token.empty());

  TempDir sandbox;
  auto creds = site.Stage(sandbox.path());
  site.Transfer({"onedrive:///data.txt", (sandbox / "data.txt").string()}, creds);
  site.Transfer({"onedrive:///missing.txt", (sandbox / "missing.txt").string()},
                creds);
  site.Transfer({(sandbox / "data.txt").string(), "onedrive:///out/"}, creds);
  site.Check();

  auto const base = site.credmon().url();
  site.RecordBody(testing::HttpGet(base + "/healthz").body);
  site.RecordBody(testing::HttpGet(base + "/key/" + std::string(32, '0')).body);
  site.RecordBody(testing::HttpGet(base + "/return/onedrive?code=x&state=y").body);
  site.RecordBody(testing::HttpPostJson(
                      base + "/api/requests",
                      R"({"user":"dweitzel","services":[{"provider":"onedrive"}]})")
                      .body);
  auto pending = testing::HttpPostJson(
      base + "/api/requests",
      R"({"user":"other","services":[{"provider":"onedrive","scopes":["Files.Read"]}]})");
  site.RecordBody(pending.body);
  site.Visit(nlohmann::json::parse(pending.body)["url"].get<std::string>());

  std::vector<std::pair<std::string, std::string>> haystacks = {
      {"sandbox", testing::SlurpTree(sandbox.path())}};
  int n = 0;
  for (auto const& text : site.Transcript()) {
    haystacks.emplace_back("response/log #" + std::to_string(n++), text);
  }
  int hits = 0;
  for (auto const& [where, text] : haystacks) {
    for (auto const& needle : {refresh_token, site.client_secret()}) {
      if (text.find(needle) != std::string::npos) {
        ++hits;
        ADD_FAILURE() << where << " contains a secret";
      }
    }
  }
  EXPECT_EQ(hits, 0);
  std::cout << "hygiene: scanned " << haystacks.size() << " sources\n";
  // The scanner does see secrets where they belong.
  EXPECT_THAT(ReadFile(site.store() / kUser / "onedrive.top"),
              HasSubstr(refresh_token));
}

// C6 -------------------------------------------------------------------------

std::vector<bench::BenchResult> Bench(std::string const& site, double bandwidth,
                                      std::uint64_t size,
                                      std::filesystem::path const& files,
                                      std::filesystem::path const& work) {
  bench::BenchRunOptions o;
  o.site = site;
  o.bandwidth = bandwidth;
  o.sizes = {size};
  o.files_dir = files;
  o.work_dir = work / site;
  o.client = ToolPath("transfer");
  return bench::RunBenchmark(o);
}

TEST(Acceptance, C6_ThroughputPipeline) {
  TempDir files, work;
  auto const start = Clock::now();
  auto r = Bench("ten", 1e7, kF22, files.path(), work.path());
  ASSERT_EQ(r.size(), 2u);
  for (auto const& pass : r) {
    EXPECT_TRUE(pass.reliable());
    EXPECT_NEAR(pass.speed_mbps, 80.0, 8.0) << "pass " << pass.pass;
  }
  std::cout << "22.8 MB at 1e7 B/s: " << r[0].speed_mbps << ", "
            << r[1].speed_mbps << " mbps\n";

  std::uint64_t const big = EnvLong("CREDXFER_FULL_SIZE", 0) == 1
                                ? 2'335'000'000
                                : 170'131'000;
  auto slow = Bench("slow", 1e7, big, files.path(), work.path());
  auto fast = Bench("fast", 2e7, big, files.path(), work.path());
  ASSERT_EQ(slow.size(), 2u);
  ASSERT_EQ(fast.size(), 2u);
  // The slow profile acts as the baseline method; the comparison then runs
  // through the same path as real site data.
  std::vector<bench::Baseline> baselines = {
      {"emulated", "http", big,
       bench::ColumnAverage({slow[0].speed_mbps, slow[1].speed_mbps})}};
  for (auto& f : fast) f.site = "emulated";
  auto table = bench::Compare(fast, baselines);
  ASSERT_EQ(table.rows.size(), 1u);
  auto const diff = table.rows[0].values.at(0);
  std::cout << table.ToText();
  EXPECT_NEAR(diff, 100.0, 15.0);
  std::cout << "throughput pipeline took " << Seconds(start) << " s\n";
}

// C7 -------------------------------------------------------------------------

TEST(Acceptance, C7_ComparisonTableReplay) {
  auto const start = Clock::now();
  bench::ComparisonTable t;
  t.columns = {"HTTP 22.8MB", "HTTP 2.3GB", "StashCache 22.8MB",
               "StashCache 2.3GB"};
  t.rows = {{"Syracuse", {-80.0, -77.8, 7.3, -77.6}},
            {"Colorado", {-89.9, -75.9, 89.4, 46.1}},
            {"Bellarmine", {-76.4, 29.7, 248.1, 33.8}},
            {"Chicago", {-85.5, 4.1, -41.6, 36.0}}};
  std::vector<double> const printed = {-82.9, -29.9, 75.8, 9.5};
  auto avg = t.Averages();
  ASSERT_EQ(avg.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(avg[i], printed[i], 0.2) << t.columns[i];
  }
  EXPECT_NEAR(avg[0], -82.95, 1e-9);
  EXPECT_NEAR(avg[2], 75.8, 1e-9);
  EXPECT_THAT(t.ToText(), HasSubstr("Average"));
  std::cout << t.ToText();
  EXPECT_LT(Seconds(start), 1.0);
}

// C8 -------------------------------------------------------------------------

TEST(Acceptance, C8_FixtureFiles) {
  auto gen = [](std::filesystem::path const& dir) {
    auto r = RunCommand({Tool("bench"), "gen", "--dir", dir.string()});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    std::map<std::string, std::pair<std::uint64_t, std::string>> files;
    std::istringstream in(r.out);
    for (std::string name, size, pct, sha; in >> name >> size >> pct >> sha;) {
      auto const actual = std::filesystem::file_size(dir / name);
      EXPECT_EQ(actual, std::stoull(size)) << name;
      files[name] = {actual, sha};
    }
    return files;
  };
  TempDir a;
  auto first = gen(a.path());
  std::filesystem::remove_all(a.path());
  std::filesystem::create_directories(a.path());
  auto second = gen(a.path());

  std::set<std::uint64_t> sizes;
  for (auto const& [name, v] : first) sizes.insert(v.first);
  EXPECT_EQ(sizes, (std::set<std::uint64_t>{5'797, 22'801'000, 170'131'000,
                                            467'852'000, 493'337'000,
                                            2'335'000'000}));
  EXPECT_EQ(first, second);
  for (auto const& [name, v] : second) {
    EXPECT_EQ(Sha256File(a / name), v.second) << name;
  }
}

// C9 -------------------------------------------------------------------------

TEST(Acceptance, C9_PropertySuites) {
  struct Suite {
    char const* binary;
    char const* filter;
    int min_tests;
  };
  std::vector<Suite> const suites = {
      // Round trip, needs-refresh monotonicity, atomic write under SIGKILL.
      {"token_test", "TokenProperty.*", 3},
      // Authorization codes are accepted once.
      {"mock_provider_test", "*CodesAreSingleUse*:*Property*", 2},
      {"oauth_flow_test", "*ReusedCodeIsRejected*", 1},
      // Forward-only request states and unguessable keys.
      {"credmon_test", "RequestStateProperty.*:KeyIdProperty.*", 3},
  };
  for (auto const& s : suites) {
    auto path = std::filesystem::path(CREDXFER_UNIT_TEST_DIR) / s.binary;
    auto r = RunCommand({path.string(), std::string("--gtest_filter=") + s.filter});
    EXPECT_EQ(r.exit_code, 0) << s.binary << "\n" << r.out;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, std::regex("\\[  PASSED  \\] (\\d+) test")))
        << r.out;
    EXPECT_GE(std::stoi(m[1].str()), s.min_tests) << s.binary;
    EXPECT_THAT(r.out, ::testing::Not(HasSubstr("[  FAILED  ]")));
  }
}

/// Prints the one-line verdict per criterion.
class VerdictPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestStart(::testing::TestInfo const&) override {
    start_ = Clock::now();
  }
  void OnTestEnd(::testing::TestInfo const& info) override {
    std::string name = info.name();
    auto const id = name.substr(0, name.find('_'));
    auto const title = name.substr(name.find('_') + 1);
    std::printf("ACCEPTANCE %s %s %s (%.1f s)\n", id.c_str(),
                info.result()->Passed() ? "PASS" : "FAIL", title.c_str(),
                Seconds(start_));
    std::fflush(stdout);
  }

 private:
  Clock::time_point start_;
};

}  // namespace
}  // namespace credxfer

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(
      new credxfer::VerdictPrinter);
  return RUN_ALL_TESTS();
}

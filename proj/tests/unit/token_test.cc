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
#include "credxfer/token.h"

#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <random>
#include <thread>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "testing/test_util.h"

namespace credxfer {
namespace {

using ::credxfer::testing::TempDir;
using ::testing::ElementsAre;
using ::testing::UnorderedElementsAre;

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (Error const& e) {
    return e.code();
  }
  ADD_FAILURE() << "no credxfer::Error thrown";
  return ErrorCode::kInvalidArgument;
}

AccessToken Sample() {
  return AccessToken{"T1", FromUnixSeconds(1700000000), {"Files.ReadWrite.All"},
                     "Bearer"};
}

TEST(UseToken, SerializesExactlyFourKeys) {
  auto doc = nlohmann::json::parse(SerializeUseToken(Sample()));
  EXPECT_EQ(doc, nlohmann::json::parse(
                     R"({"access_token":"T1","token_type":"Bearer",)"
                     R"("expires_at":1700000000,"scope":"Files.ReadWrite.All"})"));
  EXPECT_TRUE(doc["expires_at"].is_number_integer());
}

TEST(UseToken, EmptyScopeListIsEmptyString) {
  auto t = Sample();
  t.scopes.clear();
  auto doc = nlohmann::json::parse(SerializeUseToken(t));
  EXPECT_EQ(doc["scope"], "");
  EXPECT_EQ(ParseUseToken(SerializeUseToken(t)), t);
}

TEST(UseToken, MultipleScopesAreSpaceJoined) {
  auto t = Sample();
  t.scopes = {"Files.Read", "offline_access"};
  auto doc = nlohmann::json::parse(SerializeUseToken(t));
  EXPECT_EQ(doc["scope"], "Files.Read offline_access");
}

TEST(UseToken, EmptyObjectIsMalformed) {
  EXPECT_EQ(CodeOf([] { ParseUseToken("{}"); }), ErrorCode::kMalformedToken);
}

TEST(UseToken, RejectsBadInputs) {
  for (auto const* bad : {
           "",
           "not json",
           "[]",
           R"({"access_token":"T","token_type":"Bearer","scope":""})",
           R"({"access_token":"T","token_type":"Bearer","expires_at":"17","scope":""})",
           R"({"access_token":"T","token_type":"Bearer","expires_at":1.5,"scope":""})",
           R"({"access_token":"","token_type":"Bearer","expires_at":1,"scope":""})",
           R"({"access_token":"T","token_type":"MAC","expires_at":1,"scope":""})",
           R"({"access_token":7,"token_type":"Bearer","expires_at":1,"scope":""})",
       }) {
    EXPECT_EQ(CodeOf([&] { ParseUseToken(bad); }), ErrorCode::kMalformedToken)
        << bad;
  }
}

TEST(UseToken, IgnoresExtraKeys) {
  auto t = ParseUseToken(
      R"({"access_token":"T1","token_type":"Bearer","expires_at":1700000000,)"
      R"("scope":"Files.ReadWrite.All","id_token":"eyJ..."})");
  EXPECT_EQ(t, Sample());
}

TEST(UseToken, TokenTypeIsCaseInsensitiveOnParse) {
  auto t = ParseUseToken(
      R"({"access_token":"T1","token_type":"bearer","expires_at":1700000000,)"
      R"("scope":"Files.ReadWrite.All"})");
  EXPECT_EQ(t.token_type, "Bearer");
}

TEST(UseToken, NeverContainsRefreshKey) {
  auto bytes = SerializeUseToken(Sample());
  EXPECT_EQ(bytes.find("refresh"), std::string::npos);
}

TEST(VaultToken, RoundTrip) {
  RefreshToken r{"R-secret", FromUnixSeconds(1700000000),
                 {"Files.ReadWrite.All", "offline_access"}};
  auto bytes = SerializeVaultToken(r);
  auto doc = nlohmann::json::parse(bytes);
  EXPECT_EQ(doc.size(), 3U);
  EXPECT_EQ(doc["refresh_token"], "R-secret");
  EXPECT_EQ(ParseVaultToken(bytes), r);
  EXPECT_EQ(CodeOf([] { ParseVaultToken("{}"); }), ErrorCode::kMalformedToken);
}

TEST(TokenPairTest, Validation) {
  TokenPair p{"onedrive",
              {"R", FromUnixSeconds(1), {"Files.Read", "offline_access"}},
              {"A", FromUnixSeconds(100), {"Files.Read"}, "Bearer"}};
  EXPECT_NO_THROW(ValidateTokenPair(p));
  p.access.scopes.push_back("Files.ReadWrite.All");
  EXPECT_EQ(CodeOf([&] { ValidateTokenPair(p); }), ErrorCode::kInvalidArgument);
  p.access.scopes = {};
  p.provider = "One-Drive";
  EXPECT_EQ(CodeOf([&] { ValidateTokenPair(p); }), ErrorCode::kInvalidArgument);
}

TEST(ProviderName, Pattern) {
  EXPECT_TRUE(IsValidProviderName("onedrive"));
  EXPECT_TRUE(IsValidProviderName("box_2"));
  EXPECT_FALSE(IsValidProviderName(""));
  EXPECT_FALSE(IsValidProviderName("OneDrive"));
  EXPECT_FALSE(IsValidProviderName("a-b"));
  EXPECT_FALSE(IsValidProviderName("../x"));
}

TEST(NeedsRefreshTest, Examples) {
  AccessToken t = Sample();
  t.expires_at = FromUnixSeconds(1000);
  using std::chrono::seconds;
  EXPECT_FALSE(NeedsRefresh(t, FromUnixSeconds(100), seconds(300)));
  EXPECT_TRUE(NeedsRefresh(t, FromUnixSeconds(701), seconds(300)));
  EXPECT_TRUE(NeedsRefresh(t, FromUnixSeconds(700), seconds(300)));
  EXPECT_FALSE(NeedsRefresh(t, FromUnixSeconds(699), seconds(300)));
  EXPECT_TRUE(NeedsRefresh(t, FromUnixSeconds(1500), seconds(0)));
  EXPECT_EQ(CodeOf([&] { NeedsRefresh(t, FromUnixSeconds(0), seconds(-1)); }),
            ErrorCode::kInvalidArgument);
}

TEST(Scopes, SplitJoinCover) {
  EXPECT_THAT(SplitScopes("  a  b c "), ElementsAre("a", "b", "c"));
  EXPECT_TRUE(SplitScopes("").empty());
  EXPECT_EQ(JoinScopes({"a", "b"}), "a b");
  EXPECT_TRUE(ScopesCover({"a", "b"}, {"b"}));
  EXPECT_TRUE(ScopesCover({"a"}, {}));
  EXPECT_FALSE(ScopesCover({"a"}, {"a", "b"}));
}

TEST(WriteTokenFileTest, WriteThenReadIsIdentity) {
  TempDir dir;
  auto path = dir / "onedrive.use";
  std::string bytes("a\0b\nc", 5);
  WriteTokenFile(path, bytes);
  EXPECT_EQ(ReadFile(path), bytes);
  WriteTokenFile(path, "second");
  EXPECT_EQ(ReadFile(path), "second");
}

TEST(WriteTokenFileTest, OwnerReadWriteOnly) {
  TempDir dir;
  auto path = dir / "onedrive.use";
  auto old_mask = ::umask(0);
  WriteTokenFile(path, "x");
  ::umask(old_mask);
  struct stat st {};
  ASSERT_EQ(::stat(path.c_str(), &st), 0);
  EXPECT_EQ(st.st_mode & 07777, 0600);
}

TEST(WriteTokenFileTest, LeavesNoTemporaryFiles) {
  TempDir dir;
  for (int i = 0; i < 20; ++i) WriteTokenFile(dir / "t.use", std::to_string(i));
  int count = 0;
  for (auto const& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++count;
  }
  EXPECT_EQ(count, 1);
}

TEST(WriteTokenFileTest, MissingParentIsIoFailure) {
  TempDir dir;
  EXPECT_EQ(CodeOf([&] { WriteTokenFile(dir / "no/such/file", "x"); }),
            ErrorCode::kIoFailure);
}

TEST(WriteTokenFileTest, ConcurrentWritersLeaveOnePayload) {
  TempDir dir;
  auto path = dir / "onedrive.use";
  std::string const a(200'000, 'A');
  std::string const b(300'000, 'B');
  std::atomic<bool> stop{false};
  std::atomic<int> torn{0};
  std::thread reader([&] {
    while (!stop) {
      std::error_code ec;
      if (!std::filesystem::exists(path, ec)) continue;
      auto got = ReadFile(path);
      if (got != a && got != b) ++torn;
    }
  });
  std::thread wa([&] {
    for (int i = 0; i < 200; ++i) WriteTokenFile(path, a);
  });
  std::thread wb([&] {
    for (int i = 0; i < 200; ++i) WriteTokenFile(path, b);
  });
  wa.join();
  wb.join();
  stop = true;
  reader.join();
  auto final_content = ReadFile(path);
  EXPECT_TRUE(final_content == a || final_content == b);
  EXPECT_EQ(torn.load(), 0);
}

// Randomized round trip over the AccessToken domain.
TEST(TokenProperty, UseTokenRoundTripRandomized) {
  std::mt19937_64 gen(20260101);
  std::string const alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
      "-._~+/=\"\\{}[]:, \t";
  std::vector<std::string> const wide = {"\xc3\xa9", "\xe2\x82\xac",
                                         "\xf0\x9f\x94\x91"};
  auto random_string = [&](std::size_t min_len, std::size_t max_len,
                           bool allow_space) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::string s;
    auto n = len(gen);
    while (s.size() < n) {
      if (gen() % 10 == 0) {
        s += wide[gen() % wide.size()];
        continue;
      }
      char c = alphabet[gen() % alphabet.size()];
      if (!allow_space && (c == ' ' || c == '\t')) continue;
      s += c;
    }
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    AccessToken t;
    t.token = random_string(1, 64, true);
    t.expires_at = FromUnixSeconds(static_cast<std::int64_t>(gen() % 4'000'000'000ULL));
    auto n = gen() % 5;
    for (std::size_t k = 0; k < n; ++k) t.scopes.push_back(random_string(1, 24, false));
    auto bytes = SerializeUseToken(t);
    ASSERT_EQ(ParseUseToken(bytes), t) << bytes;
  }
}

// If a refresh is due at t it stays due at every later instant.
TEST(TokenProperty, NeedsRefreshMonotoneInNow) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 500; ++i) {
    AccessToken t = Sample();
    t.expires_at = FromUnixSeconds(static_cast<std::int64_t>(gen() % 100'000));
    std::chrono::seconds margin(static_cast<std::int64_t>(gen() % 1000));
    bool seen_true = false;
    for (std::int64_t now = 0; now < 101'000; now += 1 + gen() % 97) {
      bool due = NeedsRefresh(t, FromUnixSeconds(now), margin);
      if (seen_true) {
        ASSERT_TRUE(due) << "now=" << now;
      }
      seen_true = seen_true || due;
    }
    EXPECT_TRUE(seen_true);
  }
}

// SIGKILL a writer at random points: the target is always absent or one
// complete payload.
TEST(TokenProperty, AtomicWriteSurvivesKillInjection) {
  TempDir dir;
  auto path = dir / "onedrive.use";
  std::string const a(4'000'000, 'A');
  std::string const b(3'000'000, 'B');
  std::mt19937 gen(99);
  for (int round = 0; round < 25; ++round) {
    pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      for (int i = 0;; ++i) WriteTokenFile(path, i % 2 ? a : b);
    }
    std::this_thread::sleep_for(std::chrono::microseconds(gen() % 40'000));
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
      auto got = ReadFile(path);
      ASSERT_TRUE(got == a || got == b)
          << "round " << round << ": partial file of " << got.size() << " bytes";
    }
  }
}

}  // namespace
}  // namespace credxfer

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
#include "credxfer/url.h"

#include <random>

#include <gtest/gtest.h>

#include "credxfer/error.h"

namespace credxfer {
namespace {

TEST(ParseUrlTest, SplitsParts) {
  auto u = ParseUrl("https://graph.microsoft.com/v1.0/me?x=1");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host, "graph.microsoft.com");
  EXPECT_EQ(u.port, 443);
  EXPECT_EQ(u.target, "/v1.0/me?x=1");
  EXPECT_EQ(u.Path(), "/v1.0/me");
  EXPECT_EQ(u.Query(), "x=1");
  EXPECT_EQ(u.Origin(), "https://graph.microsoft.com");
}

TEST(ParseUrlTest, ExplicitPortAndEmptyPath) {
  auto u = ParseUrl("http://127.0.0.1:8080");
  EXPECT_EQ(u.port, 8080);
  EXPECT_EQ(u.target, "/");
  EXPECT_EQ(u.Origin(), "http://127.0.0.1:8080");
  EXPECT_EQ(u.ToString(), "http://127.0.0.1:8080/");
}

TEST(ParseUrlTest, RejectsOtherSchemesAndGarbage) {
  for (auto const* bad : {"ftp://x/", "onedrive:///file.txt", "file.txt",
                          "http://", "http://host:notaport/", ""}) {
    EXPECT_THROW(ParseUrl(bad), Error) << bad;
  }
}

TEST(PercentEncodingTest, Examples) {
  EXPECT_EQ(PercentEncode("a b/c"), "a%20b%2Fc");
  EXPECT_EQ(PercentEncode("Files.ReadWrite.All offline_access"),
            "Files.ReadWrite.All%20offline_access");
  EXPECT_EQ(PercentEncodePath("/a b.txt"), "/a%20b.txt");
  EXPECT_EQ(PercentEncodePath("/file.txt"), "/file.txt");
  EXPECT_EQ(PercentEncodePath("/dir/x#y?.dat"), "/dir/x%23y%3F.dat");
  EXPECT_EQ(PercentDecode("a%20b+c"), "a b+c");
  EXPECT_EQ(PercentDecode("a%20b+c", true), "a b c");
  EXPECT_EQ(PercentDecode("%zz%4"), "%zz%4");
}

TEST(PercentEncodingTest, RoundTripRandomBytes) {
  std::mt19937 gen(3);
  for (int i = 0; i < 500; ++i) {
    std::string s(gen() % 40, '\0');
    for (auto& c : s) c = static_cast<char>(gen() % 256);
    EXPECT_EQ(PercentDecode(PercentEncode(s)), s);
    EXPECT_EQ(PercentDecode(PercentEncodePath(s)), s);
  }
}

TEST(QueryTest, FormRoundTrip) {
  QueryParams params = {{"grant_type", "authorization_code"},
                        {"redirect_uri", "https://h/return/onedrive"},
                        {"scope", "a b&c=d"}};
  EXPECT_EQ(ParseQuery(FormEncode(params)), params);
  EXPECT_EQ(FindParam(params, "scope"), "a b&c=d");
  EXPECT_FALSE(FindParam(params, "code").has_value());
}

TEST(QueryTest, ParsesLooseQueries) {
  auto q = ParseQuery("a=1&&b&c=x+y");
  ASSERT_EQ(q.size(), 3U);
  EXPECT_EQ(q[1], (std::pair<std::string, std::string>{"b", ""}));
  EXPECT_EQ(q[2].second, "x y");
}

}  // namespace
}  // namespace credxfer

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

#ifndef CREDXFER_URL_H
#define CREDXFER_URL_H

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace credxfer {

/// An absolute http(s) URL split into the parts an HTTP client needs.
struct Url {
  std::string scheme;  // "http" or "https", lowercase
  std::string host;
  int port = 0;         // explicit or scheme default
  std::string target;   // path plus optional "?query", never empty

  /// "scheme://host[:port]", omitting the port when it is the default.
  std::string Origin() const;
  std::string Path() const;
  std::string Query() const;
  std::string ToString() const { return Origin() + target; }
};

/// Parses an absolute http or https URL. Throws kInvalidArgument.
Url ParseUrl(std::string_view text);

using QueryParams = std::vector<std::pair<std::string, std::string>>;

/// RFC 3986 percent-encoding; only unreserved characters pass through.
std::string PercentEncode(std::string_view s);
/// Like PercentEncode but keeps '/' so a rooted path stays a path.
std::string PercentEncodePath(std::string_view path);
std::string PercentDecode(std::string_view s, bool plus_as_space = false);

/// application/x-www-form-urlencoded body or query string.
std::string FormEncode(QueryParams const& params);
QueryParams ParseQuery(std::string_view query);
std::optional<std::string> FindParam(QueryParams const& params,
                                     std::string_view key);

}  // namespace credxfer

#endif  // CREDXFER_URL_H

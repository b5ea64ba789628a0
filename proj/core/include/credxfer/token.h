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

#ifndef CREDXFER_TOKEN_H
#define CREDXFER_TOKEN_H

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace credxfer {

/// Absolute wall-clock time with one-second resolution (Unix seconds).
using Timestamp = std::chrono::sys_seconds;

Timestamp Now();
Timestamp FromUnixSeconds(std::int64_t seconds);
std::int64_t ToUnixSeconds(Timestamp t);

/// Renew access tokens that expire within this window.
inline constexpr std::chrono::seconds kDefaultRefreshMargin{300};

/// A short-lived bearer credential. This is the only credential that is ever
/// staged next to a job.
struct AccessToken {
  std::string token;
  Timestamp expires_at;
  std::vector<std::string> scopes;
  std::string token_type = "Bearer";

  friend bool operator==(AccessToken const&, AccessToken const&) = default;
};

/// The long-lived credential kept in the service-side vault.
struct RefreshToken {
  std::string token;
  Timestamp obtained_at;
  std::vector<std::string> scopes;

  friend bool operator==(RefreshToken const&, RefreshToken const&) = default;
};

struct TokenPair {
  std::string provider;
  RefreshToken refresh;
  AccessToken access;
};

/// Throws kInvalidArgument unless `token` is a valid AccessToken (non-empty,
/// token type Bearer).
void ValidateAccessToken(AccessToken const& token);

/// Throws kInvalidArgument unless `pair` satisfies the provider-name rule and
/// its access scopes are a subset of its refresh scopes.
void ValidateTokenPair(TokenPair const& pair);

/// Provider names are `[a-z0-9_]+`.
bool IsValidProviderName(std::string_view name);

/// Emits the `<provider>.use` JSON document. Keys are exactly access_token,
/// token_type, expires_at and scope.
std::string SerializeUseToken(AccessToken const& access);

/// Inverse of SerializeUseToken. Unknown keys are ignored. Throws
/// kMalformedToken on anything that cannot be a staged token.
AccessToken ParseUseToken(std::string_view bytes);

/// Emits the `<provider>.top` vault document (refresh_token, obtained_at,
/// scope).
std::string SerializeVaultToken(RefreshToken const& refresh);
RefreshToken ParseVaultToken(std::string_view bytes);

/// True iff the token expires within `margin` of `now`. Throws
/// kInvalidArgument for a negative margin.
bool NeedsRefresh(AccessToken const& access, Timestamp now,
                  std::chrono::seconds margin);

/// Atomically replaces `path` with `bytes`, mode 0600. The content goes to a
/// uniquely named sibling that is fsync'ed and then renamed over `path`, so a
/// concurrent reader sees either the previous or the new file, never a mix.
void WriteTokenFile(std::filesystem::path const& path, std::string_view bytes);

/// Reads a whole file. Throws kIoFailure.
std::string ReadFile(std::filesystem::path const& path);

// Scope lists are space-joined on the wire.
std::string JoinScopes(std::vector<std::string> const& scopes);
std::vector<std::string> SplitScopes(std::string_view joined);
/// True iff every element of `subset` occurs in `superset`.
bool ScopesCover(std::vector<std::string> const& superset,
                 std::vector<std::string> const& subset);

}  // namespace credxfer

#endif  // CREDXFER_TOKEN_H

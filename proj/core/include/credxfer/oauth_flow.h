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

#ifndef CREDXFER_OAUTH_FLOW_H
#define CREDXFER_OAUTH_FLOW_H

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credxfer/provider_config.h"
#include "credxfer/token.h"

namespace credxfer {

/// Always requested so that the provider issues a refresh token.
inline constexpr std::string_view kOfflineAccessScope = "offline_access";

inline constexpr std::chrono::seconds kTokenEndpointTimeout{30};

struct AuthorizeRequest {
  std::string client_id;
  std::string redirect_uri;
  std::vector<std::string> scopes;
  std::string state;
};

/// The token endpoint's JSON payload.
struct TokenResponse {
  std::string access_token;
  std::optional<std::string> refresh_token;
  std::chrono::seconds expires_in{0};
  std::string scope;
  std::string token_type;
};

/// A request for `cfg` with a fresh 16-byte base64url state.
AuthorizeRequest MakeAuthorizeRequest(ProviderConfig const& cfg,
                                      std::string redirect_uri,
                                      std::vector<std::string> scopes);

/// Builds the authorization redirect. The query carries response_type=code,
/// client_id, redirect_uri, state and the requested scopes plus
/// offline_access. Throws kScopeNotAllowed when a scope is outside
/// cfg.allowed_scopes, kInvalidArgument when the redirect path is not
/// `/return/<provider>` or the state is shorter than 16 URL-safe characters.
std::string BuildAuthorizeUrl(ProviderConfig const& cfg,
                              AuthorizeRequest const& req);

/// Throws kScopeNotAllowed unless `scopes` are within cfg.allowed_scopes.
void CheckScopesAllowed(ProviderConfig const& cfg,
                        std::vector<std::string> const& scopes);

/// Parses a 2xx token endpoint body. Throws kMalformedResponse.
TokenResponse ParseTokenResponse(std::string_view body);

/// Trades an authorization code for tokens (one POST, secret in the body).
/// Throws kProviderRejected, kMalformedResponse, kMissingRefreshToken,
/// kNetworkError, or kIoFailure if the secret file is unreadable.
TokenResponse ExchangeCode(ProviderConfig const& cfg, std::string const& code,
                           std::string const& redirect_uri,
                           std::chrono::seconds timeout = kTokenEndpointTimeout);

/// Mints a new access token. A rotated refresh token, if the provider sent
/// one, is surfaced in the result. Throws kProviderRejected (revoked grant),
/// kMalformedResponse, kNetworkError.
TokenResponse RefreshAccessToken(
    ProviderConfig const& cfg, RefreshToken const& refresh,
    std::chrono::seconds timeout = kTokenEndpointTimeout);

/// Replaces every occurrence of each secret with "[REDACTED]".
std::string Redact(std::string text, std::vector<std::string> const& secrets);

}  // namespace credxfer

#endif  // CREDXFER_OAUTH_FLOW_H

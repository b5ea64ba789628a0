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

#include "credxfer/oauth_flow.h"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "credxfer/random.h"
#include "credxfer/url.h"
#include "http_client.h"

namespace credxfer {
namespace {

using nlohmann::json;

bool IsUrlSafe(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
  });
}

TokenResponse PostTokenRequest(ProviderConfig const& cfg, QueryParams form,
                               std::string const& secret,
                               std::chrono::seconds timeout) {
  auto response = internal::PostForm(cfg.token_url, form, timeout);
  if (response.status < 200 || response.status >= 300) {
    std::vector<std::string> secrets = {secret};
    for (auto const& [key, value] : form) {
      if (key == "code" || key == "refresh_token") secrets.push_back(value);
    }
    throw Error(ErrorCode::kProviderRejected,
                "token endpoint returned HTTP " +
                    std::to_string(response.status) + ": " +
                    Redact(response.body, secrets));
  }
  return ParseTokenResponse(response.body);
}

}  // namespace

std::string Redact(std::string text, std::vector<std::string> const& secrets) {
  for (auto const& secret : secrets) {
    if (secret.empty()) continue;
    for (auto pos = text.find(secret); pos != std::string::npos;
         pos = text.find(secret, pos)) {
      text.replace(pos, secret.size(), "[REDACTED]");
    }
  }
  return text;
}

AuthorizeRequest MakeAuthorizeRequest(ProviderConfig const& cfg,
                                      std::string redirect_uri,
                                      std::vector<std::string> scopes) {
  return AuthorizeRequest{cfg.client_id, std::move(redirect_uri),
                          std::move(scopes), RandomUrlSafe(16)};
}

void CheckScopesAllowed(ProviderConfig const& cfg,
                        std::vector<std::string> const& scopes) {
  if (cfg.allowed_scopes.empty()) return;
  for (auto const& s : scopes) {
    if (s == kOfflineAccessScope) continue;
    if (std::find(cfg.allowed_scopes.begin(), cfg.allowed_scopes.end(), s) ==
        cfg.allowed_scopes.end()) {
      throw Error(ErrorCode::kScopeNotAllowed,
                  "scope '" + s + "' is not allowed for provider " + cfg.name);
    }
  }
}

std::string BuildAuthorizeUrl(ProviderConfig const& cfg,
                              AuthorizeRequest const& req) {
  CheckScopesAllowed(cfg, req.scopes);
  auto const redirect = ParseUrl(req.redirect_uri);
  if (redirect.Path() != "/return/" + cfg.name) {
    throw Error(ErrorCode::kInvalidArgument,
                "redirect_uri path must be /return/" + cfg.name);
  }
  if (req.state.size() < 16 || !IsUrlSafe(req.state)) {
    throw Error(ErrorCode::kInvalidArgument,
                "state must be at least 16 URL-safe characters");
  }
  std::vector<std::string> scopes;
  for (auto const& s : req.scopes) {
    if (s != kOfflineAccessScope) scopes.push_back(s);
  }
  scopes.emplace_back(kOfflineAccessScope);

  auto const base = cfg.authorize_url;
  char const sep = base.find('?') == std::string::npos ? '?' : '&';
  return base + sep +
         FormEncode({{"response_type", "code"},
                     {"client_id", req.client_id},
                     {"redirect_uri", req.redirect_uri},
                     {"state", req.state},
                     {"scope", JoinScopes(scopes)}});
}

TokenResponse ParseTokenResponse(std::string_view body) {
  constexpr auto kCode = ErrorCode::kMalformedResponse;
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(kCode, "token response is not a JSON object");
  }
  TokenResponse out;
  auto access = doc.find("access_token");
  if (access == doc.end() || !access->is_string() ||
      access->get<std::string>().empty()) {
    throw Error(kCode, "token response lacks access_token");
  }
  out.access_token = access->get<std::string>();

  auto expires = doc.find("expires_in");
  std::int64_t seconds = 0;
  if (expires != doc.end() && expires->is_number_integer()) {
    seconds = expires->get<std::int64_t>();
  } else if (expires != doc.end() && expires->is_string()) {
    // Some providers quote the number.
    try {
      seconds = std::stoll(expires->get<std::string>());
    } catch (std::exception const&) {
      throw Error(kCode, "expires_in is not a number");
    }
  } else {
    throw Error(kCode, "token response lacks expires_in");
  }
  if (seconds <= 0) throw Error(kCode, "expires_in must be positive");
  out.expires_in = std::chrono::seconds(seconds);

  if (auto it = doc.find("refresh_token");
      it != doc.end() && it->is_string() && !it->get<std::string>().empty()) {
    out.refresh_token = it->get<std::string>();
  }
  if (auto it = doc.find("scope"); it != doc.end() && it->is_string()) {
    out.scope = it->get<std::string>();
  }
  out.token_type = "Bearer";
  if (auto it = doc.find("token_type"); it != doc.end() && it->is_string()) {
    out.token_type = it->get<std::string>();
  }
  return out;
}

TokenResponse ExchangeCode(ProviderConfig const& cfg, std::string const& code,
                           std::string const& redirect_uri,
                           std::chrono::seconds timeout) {
  if (code.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "authorization code is empty");
  }
  auto const secret = ReadClientSecret(cfg);
  auto response = PostTokenRequest(cfg,
                                   {{"grant_type", "authorization_code"},
                                    {"code", code},
                                    {"client_id", cfg.client_id},
                                    {"client_secret", secret},
                                    {"redirect_uri", redirect_uri}},
                                   secret, timeout);
  if (!response.refresh_token) {
    throw Error(ErrorCode::kMissingRefreshToken,
                "provider " + cfg.name + " did not return a refresh token");
  }
  return response;
}

TokenResponse RefreshAccessToken(ProviderConfig const& cfg,
                                 RefreshToken const& refresh,
                                 std::chrono::seconds timeout) {
  if (refresh.token.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "refresh token is empty");
  }
  auto const secret = ReadClientSecret(cfg);
  QueryParams form = {{"grant_type", "refresh_token"},
                      {"refresh_token", refresh.token},
                      {"client_id", cfg.client_id},
                      {"client_secret", secret}};
  if (!refresh.scopes.empty()) {
    form.emplace_back("scope", JoinScopes(refresh.scopes));
  }
  return PostTokenRequest(cfg, std::move(form), secret, timeout);
}

}  // namespace credxfer

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

#ifndef CREDXFER_MOCK_PROVIDER_H
#define CREDXFER_MOCK_PROVIDER_H

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace credxfer::mock {

enum class FaultMode {
  kNone,
  kDenyConsent,       // authorize redirects back with error=access_denied
  kRevokeRefresh,     // refresh grants fail with invalid_grant
  kDropOnce,          // first body per file is cut off halfway
  kOmitRefreshToken,  // code exchange returns no refresh_token
};

std::string_view FaultModeName(FaultMode mode);
/// Accepts none, deny_consent, revoke_refresh, drop_once, omit_refresh_token.
FaultMode ParseFaultMode(std::string_view name);

struct MockConfig {
  /// Served as the drive root; PUT uploads land here too.
  std::filesystem::path backing_dir;
  std::chrono::seconds token_lifetime{3600};
  /// Bytes per second per connection; unset means unthrottled.
  std::optional<double> bandwidth_limit;
  FaultMode fault_mode = FaultMode::kNone;
  /// Content GETs answer 302 to a short-lived unauthenticated /dl/ URL.
  bool redirect_downloads = true;
  std::chrono::seconds download_url_lifetime{60};
  /// Issue a new refresh token on every refresh grant.
  bool rotate_refresh_tokens = false;
  /// When non-empty, the token endpoint checks these client credentials.
  std::string client_id;
  std::string client_secret;
  /// When non-empty, every request is appended here as one JSON line.
  std::filesystem::path request_log_path;
};

struct LoggedRequest {
  std::string method;
  std::string target;  // as sent on the request line
  std::string path;    // decoded
  std::vector<std::pair<std::string, std::string>> headers;

  std::optional<std::string> Header(std::string_view name) const;
};

/// An emulated site: a bandwidth cap applied to the mock's downloads.
struct SiteProfile {
  std::string name;
  double bandwidth = 0;  // bytes per second
  std::string description;
};

/// Four emulated sites plus "unthrottled" (bandwidth 0). The caps are
/// illustrative, not measured.
std::vector<SiteProfile> const& BuiltinProfiles();
std::optional<SiteProfile> FindProfile(std::string_view name);

/// Offline stand-in for the identity provider and the drive content API.
///
/// Endpoints:
///   GET  /common/oauth2/v2.0/authorize
///   POST /common/oauth2/v2.0/token
///   GET  /v1.0/me/drive/root:<path>:/content
///   PUT  /v1.0/me/drive/root:<path>:/content
///   GET  /dl/<nonce>
class MockProvider {
 public:
  explicit MockProvider(MockConfig config);
  ~MockProvider();
  MockProvider(MockProvider const&) = delete;
  MockProvider& operator=(MockProvider const&) = delete;

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Returns the bound port.
  int Start(std::string const& host = "127.0.0.1", int port = 0);
  void Stop();
  /// Blocks the caller until Stop() is called from elsewhere.
  void Wait();

  std::string BaseUrl() const;
  std::string AuthorizeUrl() const;
  std::string TokenUrl() const;

  std::vector<LoggedRequest> RequestLog() const;
  void ClearRequestLog();
  /// Every access token issued so far, oldest first.
  std::vector<std::string> IssuedAccessTokens() const;
  std::vector<std::string> IssuedRefreshTokens() const;

  void set_fault_mode(FaultMode mode);
  void set_token_lifetime(std::chrono::seconds lifetime);
  void set_bandwidth_limit(std::optional<double> bytes_per_second);
  void set_redirect_downloads(bool on);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Plays the browser at the mock's authorize endpoint: fetches
/// `authorize_url` and returns the redirect back to the client (carrying
/// either `code` or `error`). Throws kNetworkError, kProviderRejected.
std::string ApproveConsent(std::string const& authorize_url);

}  // namespace credxfer::mock

#endif  // CREDXFER_MOCK_PROVIDER_H

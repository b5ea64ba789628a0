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

#ifndef CREDXFER_CREDMON_H
#define CREDXFER_CREDMON_H

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credxfer/provider_config.h"
#include "credxfer/token.h"
#include "credxfer/url.h"
#include "credxfer/vault.h"

namespace credxfer {

enum class RequestStatus { kPending, kAwaitingCallback, kComplete, kFailed };

std::string_view RequestStatusName(RequestStatus status);
RequestStatus ParseRequestStatus(std::string_view name);

/// Requests only move forward: pending -> awaiting_callback -> complete or
/// failed. Staying in awaiting_callback is allowed (one login per service).
bool IsForwardTransition(RequestStatus from, RequestStatus to);

struct ServiceRequest {
  std::string provider;
  std::vector<std::string> scopes;
  bool acquired = false;

  friend bool operator==(ServiceRequest const&, ServiceRequest const&) = default;
};

/// A pending authorization, addressed by the unguessable key in
/// `https://<host>/key/<key_id>`.
struct CredentialRequest {
  std::string key_id;  // 32 lowercase hex characters
  std::string user;
  std::vector<ServiceRequest> services;
  Timestamp created_at;
  RequestStatus status = RequestStatus::kPending;
  std::string failure_reason;
};

/// 16 random bytes, hex encoded.
std::string NewKeyId();
bool IsValidKeyId(std::string_view key_id);

/// Credential requests persisted as one JSON document, rewritten atomically
/// on every change. Thread-safe.
class RequestStore {
 public:
  /// Loads `file` when it exists.
  explicit RequestStore(std::filesystem::path file);

  CredentialRequest Create(std::string const& user,
                           std::vector<ServiceRequest> services, Timestamp now);
  std::optional<CredentialRequest> Find(std::string const& key_id) const;

  /// Throws kInvalidArgument for a backward transition or unknown key.
  void Advance(std::string const& key_id, RequestStatus to);
  void Fail(std::string const& key_id, std::string const& reason);
  /// Marks one service acquired; completes the request once all are.
  /// Returns the updated request.
  CredentialRequest MarkAcquired(std::string const& key_id,
                                 std::string const& provider);
  /// Drops requests created before `now - ttl`. Returns how many.
  std::size_t Expire(Timestamp now, std::chrono::seconds ttl);

 private:
  void PersistLocked() const;

  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::string, CredentialRequest> requests_;
};

struct CredmonOptions {
  std::vector<ProviderConfig> providers;
  std::filesystem::path store_root;
  /// Externally visible base URL of this service; key and redirect URLs are
  /// built from it. Empty means the bound http://host:port.
  std::string public_url;
  bool insecure_http = false;
  /// PEM certificate chain and key. When both are set the service speaks
  /// HTTPS and the default public URL uses the bound https://host:port.
  std::filesystem::path tls_cert_file;
  std::filesystem::path tls_key_file;
  std::chrono::seconds refresh_margin = kDefaultRefreshMargin;
  std::chrono::seconds refresh_period{60};
  std::chrono::seconds request_ttl = std::chrono::hours(24);
  std::function<Timestamp()> clock = Now;
};

/// One outcome of a refresher pass.
struct RefreshAction {
  std::string provider;
  std::string user;
  std::string action;  // "refreshed", "failed" or "error"
  std::string detail;
};

/// A rendered response, independent of the HTTP front end.
struct Page {
  int status = 200;
  std::string body;
  std::string content_type = "text/html; charset=utf-8";
  std::string location;  // set for redirects
};

/// The credential monitor: consent pages, the OAuth callback, the token vault
/// and the background refresher.
///
/// HTTP endpoints:
///   GET  /key/<key_id>
///   GET  /login/<provider>?key=<key_id>     302 to the provider
///   GET  /return/<provider>?code=...&state=...
///   POST /api/requests                      used by the job stager
class CredmonService {
 public:
  explicit CredmonService(CredmonOptions options);
  ~CredmonService();
  CredmonService(CredmonService const&) = delete;
  CredmonService& operator=(CredmonService const&) = delete;

  /// Throws kUnknownProvider or kScopeNotAllowed.
  CredentialRequest CreateCredentialRequest(
      std::string const& user, std::vector<ServiceRequest> services);
  std::string KeyUrl(std::string const& key_id) const;
  std::string RedirectUri(std::string const& provider) const;

  Page HandleKeyPage(std::string const& key_id);
  Page HandleLogin(std::string const& provider, std::string const& key_id);
  Page HandleCallback(std::string const& provider, QueryParams const& query);
  /// Body is the JSON `{"user": ..., "services": [{"provider", "scopes"}]}`.
  Page HandleApiCreate(std::string_view body);

  /// Refreshes every vaulted access token that is within the refresh margin
  /// of expiring at `now`.
  std::vector<RefreshAction> RefresherTick(Timestamp now);

  /// Serves HTTP on a background thread; port 0 picks one. Returns the port.
  int Start(std::string const& host = "127.0.0.1", int port = 0);
  /// Runs RefresherTick every refresh_period until Stop().
  void StartRefresher();
  void Stop();
  void Wait();
  std::string BaseUrl() const;

  RequestStore& requests();
  CredentialVault& vault();
  std::optional<ProviderConfig> FindProvider(std::string_view name) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace credxfer

#endif  // CREDXFER_CREDMON_H

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

#include "credxfer/mock_provider.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "credxfer/random.h"
#include "credxfer/throttle.h"
#include "credxfer/token.h"
#include "credxfer/url.h"
#include "http_client.h"

namespace credxfer::mock {
namespace {

using nlohmann::json;
using Clock = std::chrono::system_clock;

constexpr std::size_t kChunk = 64 * 1024;
constexpr auto kCodeLifetime = std::chrono::minutes(10);
constexpr char kAuthorizePath[] = "/common/oauth2/v2.0/authorize";
constexpr char kTokenPath[] = "/common/oauth2/v2.0/token";

struct IssuedCode {
  std::string scope;
  std::string redirect_uri;
  Clock::time_point expires_at;
  bool used = false;
};

struct IssuedAccess {
  std::string scope;
  Clock::time_point expires_at;
};

struct IssuedRefresh {
  std::string scope;
  bool live = true;
};

struct DownloadGrant {
  std::filesystem::path file;
  Clock::time_point expires_at;
};

void JsonReply(httplib::Response& res, int status, json const& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void OAuthError(httplib::Response& res, int status, char const* error,
                std::string const& description) {
  JsonReply(res, status, {{"error", error}, {"error_description", description}});
}

void GraphError(httplib::Response& res, int status, char const* code,
                std::string const& message) {
  JsonReply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

std::optional<std::string> BearerToken(httplib::Request const& req) {
  if (!req.has_header("Authorization")) return std::nullopt;
  auto value = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "bearer ";
  if (value.size() < kPrefix.size()) return std::string();
  for (std::size_t i = 0; i < kPrefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(value[i])) != kPrefix[i]) {
      return std::string();
    }
  }
  return value.substr(kPrefix.size());
}

/// Maps a rooted drive path onto the backing directory, refusing traversal.
std::optional<std::filesystem::path> ResolveDrivePath(
    std::filesystem::path const& root, std::string const& drive_path) {
  if (drive_path.empty() || drive_path.front() != '/') return std::nullopt;
  std::filesystem::path relative;
  std::size_t pos = 1;
  while (pos <= drive_path.size()) {
    auto end = drive_path.find('/', pos);
    if (end == std::string::npos) end = drive_path.size();
    auto segment = drive_path.substr(pos, end - pos);
    if (segment == "..") return std::nullopt;
    if (!segment.empty() && segment != ".") relative /= segment;
    pos = end + 1;
  }
  if (relative.empty()) return std::nullopt;
  return root / relative;
}

}  // namespace

std::string_view FaultModeName(FaultMode mode) {
  switch (mode) {
    case FaultMode::kNone: return "none";
    case FaultMode::kDenyConsent: return "deny_consent";
    case FaultMode::kRevokeRefresh: return "revoke_refresh";
    case FaultMode::kDropOnce: return "drop_once";
    case FaultMode::kOmitRefreshToken: return "omit_refresh_token";
  }
  return "none";
}

FaultMode ParseFaultMode(std::string_view name) {
  for (auto mode : {FaultMode::kNone, FaultMode::kDenyConsent,
                    FaultMode::kRevokeRefresh, FaultMode::kDropOnce,
                    FaultMode::kOmitRefreshToken}) {
    if (FaultModeName(mode) == name) return mode;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown fault mode '" + std::string(name) + "'");
}

std::optional<std::string> LoggedRequest::Header(std::string_view name) const {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  auto const wanted = lower(name);
  for (auto const& [key, value] : headers) {
    if (lower(key) == wanted) return value;
  }
  return std::nullopt;
}

std::vector<SiteProfile> const& BuiltinProfiles() {
  static auto const* profiles = new std::vector<SiteProfile>{
      {"syracuse", 5e6, "emulated site, 40 mbps cap"},
      {"colorado", 1e7, "emulated site, 80 mbps cap"},
      {"bellarmine", 4e7, "emulated site, 320 mbps cap"},
      {"chicago", 2.5e7, "emulated site, 200 mbps cap"},
      {"unthrottled", 0, "no bandwidth cap"},
  };
  return *profiles;
}

std::optional<SiteProfile> FindProfile(std::string_view name) {
  for (auto const& p : BuiltinProfiles()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

struct MockProvider::Impl {
  explicit Impl(MockConfig c) : config(std::move(c)) {}

  MockConfig config;
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;

  mutable std::mutex mu;
  std::map<std::string, IssuedCode> codes;
  std::map<std::string, IssuedAccess> access_tokens;
  std::vector<std::string> access_order;
  std::map<std::string, IssuedRefresh> refresh_tokens;
  std::vector<std::string> refresh_order;
  std::map<std::string, DownloadGrant> downloads;
  std::set<std::string> dropped_files;
  std::vector<LoggedRequest> log;

  std::string BaseUrl() const {
    return "http://" + host + ":" + std::to_string(port);
  }

  void Record(httplib::Request const& req) {
    LoggedRequest entry{req.method, req.target, req.path, {}};
    for (auto const& [k, v] : req.headers) entry.headers.emplace_back(k, v);
    std::lock_guard<std::mutex> lk(mu);
    if (!config.request_log_path.empty()) {
      json line = {{"method", entry.method},
                   {"target", entry.target},
                   {"path", entry.path},
                   {"headers", json::object()}};
      for (auto const& [k, v] : entry.headers) line["headers"][k] = v;
      std::ofstream out(config.request_log_path, std::ios::app);
      out << line.dump() << "\n";
    }
    log.push_back(std::move(entry));
  }

  std::pair<std::string, IssuedAccess> MintAccess(std::string const& scope) {
    auto token = RandomUrlSafe(32);
    IssuedAccess issued{scope, Clock::now() + config.token_lifetime};
    access_tokens[token] = issued;
    access_order.push_back(token);
    return {token, issued};
  }

  std::string MintRefresh(std::string const& scope) {
    auto token = RandomUrlSafe(48);
    refresh_tokens[token] = IssuedRefresh{scope, true};
    refresh_order.push_back(token);
    return token;
  }

  void HandleAuthorize(httplib::Request const& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    auto client_id = FindParam(params, "client_id");
    auto redirect_uri = FindParam(params, "redirect_uri");
    auto state = FindParam(params, "state");
    auto response_type = FindParam(params, "response_type");
    auto scope = FindParam(params, "scope");
    if (!client_id || !redirect_uri || !state || !scope ||
        response_type != std::optional<std::string>("code")) {
      OAuthError(res, 400, "invalid_request",
                 "client_id, redirect_uri, state, scope and "
                 "response_type=code are required");
      return;
    }
    if (!config.client_id.empty() && *client_id != config.client_id) {
      OAuthError(res, 400, "unauthorized_client", "unknown client_id");
      return;
    }
    char const sep = redirect_uri->find('?') == std::string::npos ? '?' : '&';
    std::lock_guard<std::mutex> lk(mu);
    if (config.fault_mode == FaultMode::kDenyConsent) {
      res.set_redirect(*redirect_uri + sep +
                       FormEncode({{"error", "access_denied"},
                                   {"error_description", "user declined"},
                                   {"state", *state}}));
      return;
    }
    auto code = RandomUrlSafe(24);
    codes[code] = IssuedCode{*scope, *redirect_uri,
                             Clock::now() + kCodeLifetime, false};
    res.set_redirect(*redirect_uri + sep +
                     FormEncode({{"code", code}, {"state", *state}}));
  }

  void HandleToken(httplib::Request const& req, httplib::Response& res) {
    auto const form = ParseQuery(req.body);
    auto grant_type = FindParam(form, "grant_type").value_or("");
    if (!config.client_secret.empty() || !config.client_id.empty()) {
      auto id = FindParam(form, "client_id").value_or("");
      auto secret = FindParam(form, "client_secret").value_or("");
      if ((!config.client_id.empty() && id != config.client_id) ||
          (!config.client_secret.empty() && secret != config.client_secret)) {
        OAuthError(res, 401, "invalid_client", "client authentication failed");
        return;
      }
    }
    std::lock_guard<std::mutex> lk(mu);
    if (grant_type == "authorization_code") {
      auto code = FindParam(form, "code").value_or("");
      auto it = codes.find(code);
      if (it == codes.end() || it->second.used ||
          Clock::now() > it->second.expires_at) {
        OAuthError(res, 400, "invalid_grant",
                   "authorization code is invalid, expired or already used");
        return;
      }
      auto redirect = FindParam(form, "redirect_uri");
      if (redirect && *redirect != it->second.redirect_uri) {
        OAuthError(res, 400, "invalid_grant", "redirect_uri mismatch");
        return;
      }
      it->second.used = true;
      auto const scope = it->second.scope;
      auto [access, issued] = MintAccess(scope);
      json body = {{"access_token", access},
                   {"token_type", "Bearer"},
                   {"expires_in", config.token_lifetime.count()},
                   {"scope", scope}};
      if (config.fault_mode != FaultMode::kOmitRefreshToken) {
        body["refresh_token"] = MintRefresh(scope);
      }
      JsonReply(res, 200, body);
      return;
    }
    if (grant_type == "refresh_token") {
      auto token = FindParam(form, "refresh_token").value_or("");
      auto it = refresh_tokens.find(token);
      if (config.fault_mode == FaultMode::kRevokeRefresh ||
          it == refresh_tokens.end() || !it->second.live) {
        OAuthError(res, 400, "invalid_grant",
                   "refresh token is invalid or revoked");
        return;
      }
      auto scope = it->second.scope;
      // A narrower scope may be requested; anything else keeps the grant.
      if (auto requested = FindParam(form, "scope")) {
        if (ScopesCover(SplitScopes(scope), SplitScopes(*requested))) {
          scope = *requested;
        }
      }
      auto [access, issued] = MintAccess(scope);
      json body = {{"access_token", access},
                   {"token_type", "Bearer"},
                   {"expires_in", config.token_lifetime.count()},
                   {"scope", scope}};
      if (config.rotate_refresh_tokens) {
        auto const granted = it->second.scope;
        it->second.live = false;
        body["refresh_token"] = MintRefresh(granted);
      }
      JsonReply(res, 200, body);
      return;
    }
    OAuthError(res, 400, "unsupported_grant_type",
               "grant_type must be authorization_code or refresh_token");
  }

  /// Returns false (and fills `res`) unless the request carries a live token.
  bool Authorize(httplib::Request const& req, httplib::Response& res) {
    auto token = BearerToken(req);
    if (!token) {
      GraphError(res, 401, "InvalidAuthenticationToken",
                 "Access token is empty.");
      return false;
    }
    std::lock_guard<std::mutex> lk(mu);
    auto it = access_tokens.find(*token);
    if (it == access_tokens.end()) {
      GraphError(res, 401, "InvalidAuthenticationToken",
                 "Access token is not valid.");
      return false;
    }
    if (Clock::now() >= it->second.expires_at) {
      GraphError(res, 401, "InvalidAuthenticationToken",
                 "Access token has expired.");
      return false;
    }
    return true;
  }

  void ServeFile(std::filesystem::path const& file, httplib::Response& res) {
    std::error_code ec;
    auto const size = std::filesystem::file_size(file, ec);
    if (ec) {
      GraphError(res, 404, "itemNotFound", "The resource could not be found.");
      return;
    }
    int fd = ::open(file.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
      GraphError(res, 404, "itemNotFound", "The resource could not be found.");
      return;
    }
    auto handle = std::shared_ptr<int>(new int(fd), [](int* p) {
      ::close(*p);
      delete p;
    });
    std::optional<std::size_t> cut;
    std::shared_ptr<Throttle> throttle;
    {
      std::lock_guard<std::mutex> lk(mu);
      if (config.fault_mode == FaultMode::kDropOnce &&
          dropped_files.insert(file.string()).second) {
        cut = size / 2;
      }
      if (config.bandwidth_limit) {
        throttle = std::make_shared<Throttle>(*config.bandwidth_limit);
      }
    }
    res.status = 200;
    if (size == 0) {
      res.set_content("", "application/octet-stream");
      return;
    }
    res.set_content_provider(
        size, "application/octet-stream",
        [handle, throttle, cut](std::size_t offset, std::size_t length,
                                httplib::DataSink& sink) {
          if (cut && offset >= *cut) return false;
          auto want = std::min(length, kChunk);
          if (cut) want = std::min(want, *cut - offset);
          if (throttle) want = throttle->Grant(want);
          std::string buffer(want, '\0');
          auto n = ::pread(*handle, buffer.data(), want,
                           static_cast<off_t>(offset));
          if (n <= 0) return false;
          return sink.write(buffer.data(), static_cast<std::size_t>(n));
        });
  }

  void HandleContentGet(httplib::Request const& req, httplib::Response& res) {
    if (!Authorize(req, res)) return;
    auto file = ResolveDrivePath(config.backing_dir, req.matches[1].str());
    if (!file) {
      GraphError(res, 400, "invalidRequest", "Invalid drive path.");
      return;
    }
    if (!std::filesystem::is_regular_file(*file)) {
      GraphError(res, 404, "itemNotFound", "The resource could not be found.");
      return;
    }
    bool redirect = false;
    std::string nonce;
    {
      std::lock_guard<std::mutex> lk(mu);
      redirect = config.redirect_downloads;
      if (redirect) {
        nonce = RandomHex(16);
        downloads[nonce] =
            DownloadGrant{*file, Clock::now() + config.download_url_lifetime};
      }
    }
    if (redirect) {
      res.set_redirect(BaseUrl() + "/dl/" + nonce, 302);
      return;
    }
    ServeFile(*file, res);
  }

  void HandleDownload(httplib::Request const& req, httplib::Response& res) {
    if (req.has_header("Authorization")) {
      GraphError(res, 400, "invalidRequest",
                 "Pre-authenticated download URLs must not carry an "
                 "Authorization header.");
      return;
    }
    std::filesystem::path file;
    {
      std::lock_guard<std::mutex> lk(mu);
      auto it = downloads.find(req.matches[1].str());
      if (it == downloads.end()) {
        GraphError(res, 404, "itemNotFound", "Unknown download URL.");
        return;
      }
      if (Clock::now() > it->second.expires_at) {
        downloads.erase(it);
        GraphError(res, 403, "accessDenied", "Download URL has expired.");
        return;
      }
      file = it->second.file;
    }
    ServeFile(file, res);
  }

  void HandleContentPut(httplib::Request const& req, httplib::Response& res,
                        httplib::ContentReader const& reader) {
    if (!Authorize(req, res)) return;
    auto file = ResolveDrivePath(config.backing_dir, req.matches[1].str());
    if (!file) {
      GraphError(res, 400, "invalidRequest", "Invalid drive path.");
      return;
    }
    std::error_code ec;
    std::filesystem::create_directories(file->parent_path(), ec);
    auto tmp = file->parent_path() /
               ("." + file->filename().string() + ".upload." + RandomHex(6));
    std::uint64_t written = 0;
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        GraphError(res, 500, "generalException", "Cannot store upload.");
        return;
      }
      reader([&](char const* data, std::size_t len) {
        out.write(data, static_cast<std::streamsize>(len));
        written += len;
        return static_cast<bool>(out);
      });
      if (!out) {
        std::filesystem::remove(tmp, ec);
        GraphError(res, 500, "generalException", "Cannot store upload.");
        return;
      }
    }
    std::filesystem::rename(tmp, *file, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      GraphError(res, 500, "generalException", "Cannot store upload.");
      return;
    }
    JsonReply(res, 201,
              {{"name", file->filename().string()}, {"size", written}});
  }

  void Install() {
    server.set_pre_routing_handler(
        [this](httplib::Request const& req, httplib::Response&) {
          Record(req);
          return httplib::Server::HandlerResponse::Unhandled;
        });
    server.Get(kAuthorizePath,
               [this](auto const& req, auto& res) { HandleAuthorize(req, res); });
    server.Post(kTokenPath,
                [this](auto const& req, auto& res) { HandleToken(req, res); });
    server.Get(R"(/v1\.0/me/drive/root:(/.*):/content)",
               [this](auto const& req, auto& res) { HandleContentGet(req, res); });
    server.Put(R"(/v1\.0/me/drive/root:(/.*):/content)",
               [this](httplib::Request const& req, httplib::Response& res,
                      httplib::ContentReader const& reader) {
                 HandleContentPut(req, res, reader);
               });
    server.Get(R"(/dl/([0-9a-f]+))",
               [this](auto const& req, auto& res) { HandleDownload(req, res); });
  }
};

MockProvider::MockProvider(MockConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
  if (impl_->config.bandwidth_limit && !(*impl_->config.bandwidth_limit > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth limit must be > 0");
  }
  if (impl_->config.token_lifetime.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "token lifetime must be > 0");
  }
  impl_->Install();
}

MockProvider::~MockProvider() { Stop(); }

int MockProvider::Start(std::string const& host, int port) {
  impl_->host = host;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kIoFailure,
                "cannot bind mock provider to " + host + ":" +
                    std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void MockProvider::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockProvider::Wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockProvider::BaseUrl() const { return impl_->BaseUrl(); }
std::string MockProvider::AuthorizeUrl() const {
  return impl_->BaseUrl() + kAuthorizePath;
}
std::string MockProvider::TokenUrl() const {
  return impl_->BaseUrl() + kTokenPath;
}

std::vector<LoggedRequest> MockProvider::RequestLog() const {
  std::lock_guard<std::mutex> lk(impl_->mu);
  return impl_->log;
}

void MockProvider::ClearRequestLog() {
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->log.clear();
}

std::vector<std::string> MockProvider::IssuedAccessTokens() const {
  std::lock_guard<std::mutex> lk(impl_->mu);
  return impl_->access_order;
}

std::vector<std::string> MockProvider::IssuedRefreshTokens() const {
  std::lock_guard<std::mutex> lk(impl_->mu);
  return impl_->refresh_order;
}

void MockProvider::set_fault_mode(FaultMode mode) {
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->config.fault_mode = mode;
}

void MockProvider::set_token_lifetime(std::chrono::seconds lifetime) {
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->config.token_lifetime = lifetime;
}

void MockProvider::set_bandwidth_limit(std::optional<double> bytes_per_second) {
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->config.bandwidth_limit = bytes_per_second;
}

void MockProvider::set_redirect_downloads(bool on) {
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->config.redirect_downloads = on;
}

std::string ApproveConsent(std::string const& authorize_url) {
  auto const url = ParseUrl(authorize_url);
  auto client = internal::MakeClient(url, std::chrono::seconds(10));
  auto result = client->Get(url.target);
  if (!result) {
    throw Error(ErrorCode::kNetworkError,
                "GET " + url.Origin() + url.Path() + ": " +
                    httplib::to_string(result.error()));
  }
  if (result->status != 302 || !result->has_header("Location")) {
    throw Error(ErrorCode::kProviderRejected,
                "authorize answered HTTP " + std::to_string(result->status));
  }
  return result->get_header_value("Location");
}

}  // namespace credxfer::mock

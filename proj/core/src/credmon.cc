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

#include "credxfer/credmon.h"

#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "credxfer/log.h"
#include "credxfer/oauth_flow.h"
#include "credxfer/random.h"

namespace credxfer {
namespace {

using nlohmann::json;

std::string HtmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

Page HtmlPage(int status, std::string_view title, std::string const& body) {
  Page page;
  page.status = status;
  page.body = "<!DOCTYPE html>\n<html>\n<head><title>" + HtmlEscape(title) +
              "</title></head>\n<body>\n" + body + "</body>\n</html>\n";
  return page;
}

Page NotFoundPage() {
  return HtmlPage(404, "Not found",
                  "<h1>Not found</h1>\n<p>This credential request does not "
                  "exist or has expired.</p>\n");
}

Page JsonPage(int status, json const& body) {
  Page page;
  page.status = status;
  page.body = body.dump();
  page.content_type = "application/json";
  return page;
}

json RequestToJson(CredentialRequest const& r) {
  json services = json::array();
  for (auto const& s : r.services) {
    services.push_back(
        {{"provider", s.provider}, {"scopes", s.scopes}, {"acquired", s.acquired}});
  }
  return {{"key_id", r.key_id},
          {"user", r.user},
          {"services", services},
          {"created_at", ToUnixSeconds(r.created_at)},
          {"status", RequestStatusName(r.status)},
          {"failure_reason", r.failure_reason}};
}

CredentialRequest RequestFromJson(json const& j) {
  CredentialRequest r;
  r.key_id = j.at("key_id").get<std::string>();
  r.user = j.at("user").get<std::string>();
  for (auto const& s : j.at("services")) {
    r.services.push_back(ServiceRequest{
        s.at("provider").get<std::string>(),
        s.at("scopes").get<std::vector<std::string>>(),
        s.value("acquired", false)});
  }
  r.created_at = FromUnixSeconds(j.at("created_at").get<std::int64_t>());
  r.status = ParseRequestStatus(j.at("status").get<std::string>());
  r.failure_reason = j.value("failure_reason", "");
  return r;
}

int Rank(RequestStatus s) {
  switch (s) {
    case RequestStatus::kPending: return 0;
    case RequestStatus::kAwaitingCallback: return 1;
    case RequestStatus::kComplete:
    case RequestStatus::kFailed: return 2;
  }
  return 0;
}

void Reply(Page const& page, httplib::Response& res) {
  res.status = page.status;
  if (!page.location.empty()) res.set_header("Location", page.location);
  res.set_content(page.body, page.content_type);
}

std::string DefaultPublicUrl(bool insecure, bool tls,
                             std::string const& bound) {
  if (insecure || tls) return bound;
  char host[256] = {};
  if (::gethostname(host, sizeof(host) - 1) != 0) return bound;
  return std::string("https://") + host;
}

}  // namespace

std::string_view RequestStatusName(RequestStatus status) {
  switch (status) {
    case RequestStatus::kPending: return "pending";
    case RequestStatus::kAwaitingCallback: return "awaiting_callback";
    case RequestStatus::kComplete: return "complete";
    case RequestStatus::kFailed: return "failed";
  }
  return "pending";
}

RequestStatus ParseRequestStatus(std::string_view name) {
  for (auto s : {RequestStatus::kPending, RequestStatus::kAwaitingCallback,
                 RequestStatus::kComplete, RequestStatus::kFailed}) {
    if (RequestStatusName(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown request status '" + std::string(name) + "'");
}

bool IsForwardTransition(RequestStatus from, RequestStatus to) {
  if (from == RequestStatus::kAwaitingCallback &&
      to == RequestStatus::kAwaitingCallback) {
    return true;
  }
  if (from == RequestStatus::kPending) {
    return to == RequestStatus::kAwaitingCallback;
  }
  return from == RequestStatus::kAwaitingCallback && Rank(to) == 2;
}

std::string NewKeyId() { return RandomHex(16); }

bool IsValidKeyId(std::string_view key_id) {
  return key_id.size() == 32 &&
         std::all_of(key_id.begin(), key_id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

// RequestStore --------------------------------------------------------------

RequestStore::RequestStore(std::filesystem::path file) : file_(std::move(file)) {
  std::error_code ec;
  if (!std::filesystem::exists(file_, ec)) return;
  json doc = json::parse(ReadFile(file_), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("requests")) {
    throw Error(ErrorCode::kIoFailure,
                "request store " + file_.string() + " is corrupt");
  }
  for (auto const& j : doc["requests"]) {
    auto r = RequestFromJson(j);
    requests_[r.key_id] = std::move(r);
  }
}

void RequestStore::PersistLocked() const {
  json list = json::array();
  for (auto const& [key, r] : requests_) list.push_back(RequestToJson(r));
  WriteTokenFile(file_, json{{"requests", list}}.dump(1));
}

CredentialRequest RequestStore::Create(std::string const& user,
                                       std::vector<ServiceRequest> services,
                                       Timestamp now) {
  CredentialRequest r;
  r.user = user;
  r.services = std::move(services);
  r.created_at = now;
  bool done = std::all_of(r.services.begin(), r.services.end(),
                          [](ServiceRequest const& s) { return s.acquired; });
  r.status = done ? RequestStatus::kComplete : RequestStatus::kPending;
  std::lock_guard<std::mutex> lk(mu_);
  do {
    r.key_id = NewKeyId();
  } while (requests_.count(r.key_id) != 0);
  requests_[r.key_id] = r;
  PersistLocked();
  return r;
}

std::optional<CredentialRequest> RequestStore::Find(
    std::string const& key_id) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = requests_.find(key_id);
  if (it == requests_.end()) return std::nullopt;
  return it->second;
}

void RequestStore::Advance(std::string const& key_id, RequestStatus to) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = requests_.find(key_id);
  if (it == requests_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown key " + key_id);
  }
  if (!IsForwardTransition(it->second.status, to)) {
    throw Error(ErrorCode::kInvalidArgument,
                "illegal transition " +
                    std::string(RequestStatusName(it->second.status)) + " -> " +
                    std::string(RequestStatusName(to)));
  }
  if (it->second.status == to) return;
  it->second.status = to;
  PersistLocked();
}

void RequestStore::Fail(std::string const& key_id, std::string const& reason) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = requests_.find(key_id);
  if (it == requests_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown key " + key_id);
  }
  if (!IsForwardTransition(it->second.status, RequestStatus::kFailed)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot fail a request in state " +
                    std::string(RequestStatusName(it->second.status)));
  }
  it->second.status = RequestStatus::kFailed;
  it->second.failure_reason = reason;
  PersistLocked();
}

CredentialRequest RequestStore::MarkAcquired(std::string const& key_id,
                                             std::string const& provider) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = requests_.find(key_id);
  if (it == requests_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown key " + key_id);
  }
  auto& r = it->second;
  if (r.status != RequestStatus::kAwaitingCallback) {
    throw Error(ErrorCode::kInvalidArgument,
                "request is not awaiting a callback");
  }
  for (auto& s : r.services) {
    if (s.provider == provider) s.acquired = true;
  }
  if (std::all_of(r.services.begin(), r.services.end(),
                  [](ServiceRequest const& s) { return s.acquired; })) {
    r.status = RequestStatus::kComplete;
  }
  PersistLocked();
  return r;
}

std::size_t RequestStore::Expire(Timestamp now, std::chrono::seconds ttl) {
  std::lock_guard<std::mutex> lk(mu_);
  std::size_t removed = 0;
  for (auto it = requests_.begin(); it != requests_.end();) {
    if (it->second.created_at + ttl < now) {
      it = requests_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  if (removed > 0) PersistLocked();
  return removed;
}

// CredmonService ------------------------------------------------------------

struct PendingLogin {
  std::string key_id;
  std::string provider;
  std::string redirect_uri;
  Timestamp created_at;
};

struct CredmonService::Impl {
  explicit Impl(CredmonOptions o)
      : options(std::move(o)),
        vault(options.store_root),
        requests(options.store_root / "requests.json") {}

  CredmonOptions options;
  CredentialVault vault;
  RequestStore requests;
  std::unique_ptr<httplib::Server> server;
  std::thread server_thread;
  std::string bound_url;

  std::mutex states_mu;
  std::map<std::string, PendingLogin> states;

  std::mutex refresher_mu;
  std::condition_variable refresher_cv;
  bool stopping = false;
  std::thread refresher_thread;

  Timestamp now() const { return options.clock(); }
  bool tls() const {
    return !options.tls_cert_file.empty() && !options.tls_key_file.empty();
  }

  std::string PublicUrl() const {
    auto url = options.public_url.empty()
                   ? DefaultPublicUrl(options.insecure_http, tls(), bound_url)
                   : options.public_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    return url;
  }

  /// The request, if it exists and has not outlived the TTL.
  std::optional<CredentialRequest> LiveRequest(std::string const& key_id) {
    if (!IsValidKeyId(key_id)) return std::nullopt;
    auto r = requests.Find(key_id);
    if (!r || r->created_at + options.request_ttl < now()) return std::nullopt;
    return r;
  }
};

CredmonService::CredmonService(CredmonOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {
  for (auto const& p : impl_->options.providers) {
    ValidateProviderConfig(p, impl_->options.insecure_http);
  }
  if (!impl_->options.public_url.empty()) {
    auto url = ParseUrl(impl_->options.public_url);
    if (url.scheme != "https" && !impl_->options.insecure_http) {
      throw Error(ErrorCode::kConfigError,
                  "public URL must be https unless insecure http is enabled");
    }
  }
  if (impl_->options.refresh_period.count() <= 0) {
    throw Error(ErrorCode::kConfigError, "refresh period must be positive");
  }
  if (impl_->options.refresh_margin.count() < 0) {
    throw Error(ErrorCode::kConfigError, "refresh margin must be >= 0");
  }
}

CredmonService::~CredmonService() { Stop(); }

RequestStore& CredmonService::requests() { return impl_->requests; }
CredentialVault& CredmonService::vault() { return impl_->vault; }

std::optional<ProviderConfig> CredmonService::FindProvider(
    std::string_view name) const {
  for (auto const& p : impl_->options.providers) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

std::string CredmonService::KeyUrl(std::string const& key_id) const {
  return impl_->PublicUrl() + "/key/" + key_id;
}

std::string CredmonService::RedirectUri(std::string const& provider) const {
  return impl_->PublicUrl() + "/return/" + provider;
}

std::string CredmonService::BaseUrl() const { return impl_->bound_url; }

CredentialRequest CredmonService::CreateCredentialRequest(
    std::string const& user, std::vector<ServiceRequest> services) {
  if (!IsValidUserName(user)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid user name '" + user + "'");
  }
  for (auto& s : services) {
    auto cfg = FindProvider(s.provider);
    if (!cfg) {
      throw Error(ErrorCode::kUnknownProvider,
                  "provider '" + s.provider + "' is not configured");
    }
    CheckScopesAllowed(*cfg, s.scopes);
    s.acquired =
        impl_->vault.HasLiveCredential(user, s.provider, s.scopes, impl_->now());
  }
  impl_->requests.Expire(impl_->now(), impl_->options.request_ttl);
  auto r = impl_->requests.Create(user, std::move(services), impl_->now());
  LogInfo("created credential request for user " + user + " with " +
          std::to_string(r.services.size()) + " service(s)");
  return r;
}

Page CredmonService::HandleKeyPage(std::string const& key_id) {
  auto r = impl_->LiveRequest(key_id);
  if (!r) return NotFoundPage();
  std::string body = "<h1>Hello, " + HtmlEscape(r->user) + ".</h1>\n";
  if (r->status == RequestStatus::kComplete) {
    body += "<p>Credentials for this request have already been acquired. "
            "You may resubmit your job.</p>\n";
    return HtmlPage(200, "Credentials acquired", body);
  }
  if (r->status == RequestStatus::kFailed) {
    body += "<p>This credential request failed: " +
            HtmlEscape(r->failure_reason) +
            "</p>\n<p>Submit the job again to start over.</p>\n";
    return HtmlPage(200, "Credential request failed", body);
  }
  body += "<p>Your job needs access to the services below. Log in to each "
          "one to grant it.</p>\n<ul>\n";
  for (auto const& s : r->services) {
    body += "<li>" + HtmlEscape(s.provider) + " (" +
            HtmlEscape(JoinScopes(s.scopes)) + "): ";
    if (s.acquired) {
      body += "acquired";
    } else {
      body += "<a class=\"login\" href=\"/login/" + HtmlEscape(s.provider) +
              "?key=" + HtmlEscape(r->key_id) + "\">login</a>";
    }
    body += "</li>\n";
  }
  body += "</ul>\n";
  return HtmlPage(200, "Credential request", body);
}

Page CredmonService::HandleLogin(std::string const& provider,
                                 std::string const& key_id) {
  auto r = impl_->LiveRequest(key_id);
  if (!r || r->status == RequestStatus::kComplete ||
      r->status == RequestStatus::kFailed) {
    return NotFoundPage();
  }
  auto service = std::find_if(
      r->services.begin(), r->services.end(),
      [&](ServiceRequest const& s) { return s.provider == provider; });
  auto cfg = FindProvider(provider);
  if (service == r->services.end() || service->acquired || !cfg) {
    return NotFoundPage();
  }
  auto req = MakeAuthorizeRequest(*cfg, RedirectUri(provider), service->scopes);
  auto url = BuildAuthorizeUrl(*cfg, req);
  {
    std::lock_guard<std::mutex> lk(impl_->states_mu);
    auto const cutoff = impl_->now() - impl_->options.request_ttl;
    std::erase_if(impl_->states,
                  [&](auto const& kv) { return kv.second.created_at < cutoff; });
    impl_->states[req.state] =
        PendingLogin{key_id, provider, req.redirect_uri, impl_->now()};
  }
  impl_->requests.Advance(key_id, RequestStatus::kAwaitingCallback);
  Page page;
  page.status = 302;
  page.location = url;
  page.body = "Redirecting to " + HtmlEscape(provider) + "\n";
  page.content_type = "text/plain";
  return page;
}

Page CredmonService::HandleCallback(std::string const& provider,
                                    QueryParams const& query) {
  auto const state = FindParam(query, "state").value_or("");
  PendingLogin login;
  {
    std::lock_guard<std::mutex> lk(impl_->states_mu);
    auto it = impl_->states.find(state);
    if (state.empty() || it == impl_->states.end() ||
        it->second.provider != provider) {
      LogWarning("rejected callback for " + provider +
                 ": state does not match a pending login");
      return HtmlPage(403, "Forbidden",
                      "<h1>Forbidden</h1>\n<p>The authorization response does "
                      "not match a pending login.</p>\n");
    }
    login = it->second;
    impl_->states.erase(it);
  }
  auto r = impl_->LiveRequest(login.key_id);
  if (!r || r->status != RequestStatus::kAwaitingCallback) {
    return HtmlPage(403, "Forbidden",
                    "<h1>Forbidden</h1>\n<p>The credential request is no "
                    "longer waiting for this login.</p>\n");
  }
  auto const cfg = FindProvider(provider);

  if (auto error = FindParam(query, "error")) {
    auto reason = provider + " authorization was denied (" + *error + ")";
    impl_->requests.Fail(login.key_id, reason);
    LogWarning("credential request for user " + r->user + ": " + reason);
    return HtmlPage(400, "Authorization denied",
                    "<h1>Authorization denied</h1>\n<p>" + HtmlEscape(reason) +
                        ".</p>\n");
  }
  auto const code = FindParam(query, "code").value_or("");
  auto const scopes_requested = [&] {
    for (auto const& s : r->services) {
      if (s.provider == provider) return s.scopes;
    }
    return std::vector<std::string>{};
  }();

  try {
    if (code.empty()) {
      throw Error(ErrorCode::kProviderRejected, "callback carried no code");
    }
    auto const response = ExchangeCode(*cfg, code, login.redirect_uri);
    auto const now = impl_->now();
    auto granted = SplitScopes(response.scope);
    if (granted.empty()) {
      granted = scopes_requested;
      granted.emplace_back(kOfflineAccessScope);
    }
    RefreshToken refresh{*response.refresh_token, now, granted};
    AccessToken access{response.access_token, now + response.expires_in,
                       granted, "Bearer"};
    {
      std::lock_guard<std::mutex> lk(impl_->vault.UserMutex(r->user));
      impl_->vault.Store(r->user, provider, refresh, access);
    }
    auto updated = impl_->requests.MarkAcquired(login.key_id, provider);
    LogInfo("stored " + provider + " credential for user " + r->user);
    std::string body = "<h1>Token retrieved</h1>\n<p>The " +
                       HtmlEscape(provider) +
                       " token has been retrieved for " + HtmlEscape(r->user) +
                       ".</p>\n";
    if (updated.status == RequestStatus::kComplete) {
      body += "<p>All requested credentials are in place. You may resubmit "
              "your job.</p>\n";
    } else {
      body += "<p>Return to <a href=\"/key/" + HtmlEscape(login.key_id) +
              "\">the request page</a> to log in to the remaining "
              "services.</p>\n";
    }
    return HtmlPage(200, "Token retrieved", body);
  } catch (Error const& e) {
    impl_->requests.Fail(login.key_id, std::string(ErrorCodeName(e.code())));
    LogError("credential exchange for user " + r->user + " failed: " +
             Redact(e.what(), {code}));
    return HtmlPage(502, "Credential acquisition failed",
                    "<h1>Credential acquisition failed</h1>\n<p>The " +
                        HtmlEscape(provider) + " token could not be retrieved (" +
                        HtmlEscape(std::string(ErrorCodeName(e.code()))) +
                        ").</p>\n");
  }
}

Page CredmonService::HandleApiCreate(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("user") ||
      !doc["user"].is_string()) {
    return JsonPage(400, {{"error", "InvalidArgument"},
                          {"message", "expected {\"user\", \"services\"}"}});
  }
  std::vector<ServiceRequest> services;
  try {
    for (auto const& s : doc.value("services", json::array())) {
      services.push_back(ServiceRequest{
          s.at("provider").get<std::string>(),
          s.value("scopes", std::vector<std::string>{}), false});
    }
    auto r = CreateCredentialRequest(doc["user"].get<std::string>(),
                                     std::move(services));
    return JsonPage(201, {{"key_id", r.key_id},
                          {"url", KeyUrl(r.key_id)},
                          {"status", RequestStatusName(r.status)}});
  } catch (Error const& e) {
    return JsonPage(400, {{"error", ErrorCodeName(e.code())},
                          {"message", e.what()}});
  } catch (json::exception const& e) {
    return JsonPage(400, {{"error", "InvalidArgument"}, {"message", e.what()}});
  }
}

std::vector<RefreshAction> CredmonService::RefresherTick(Timestamp now) {
  std::vector<RefreshAction> actions;
  auto& vault = impl_->vault;
  for (auto const& [user, provider] : vault.List()) {
    if (vault.IsFailed(user, provider)) continue;
    auto cfg = FindProvider(provider);
    if (!cfg) continue;
    std::lock_guard<std::mutex> lk(vault.UserMutex(user));
    std::optional<AccessToken> access;
    try {
      access = vault.LoadAccess(user, provider);
    } catch (Error const&) {
      // A corrupt .use is replaced below.
    }
    if (access && !NeedsRefresh(*access, now, impl_->options.refresh_margin)) {
      continue;
    }
    try {
      auto refresh = vault.LoadRefresh(user, provider);
      if (!refresh) continue;
      auto response = RefreshAccessToken(*cfg, *refresh);
      std::vector<std::string> scopes;
      for (auto const& s : SplitScopes(response.scope)) {
        if (ScopesCover(refresh->scopes, {s})) scopes.push_back(s);
      }
      if (response.scope.empty()) scopes = refresh->scopes;
      AccessToken fresh{response.access_token, now + response.expires_in,
                        scopes, "Bearer"};
      if (response.refresh_token && *response.refresh_token != refresh->token) {
        RefreshToken rotated{*response.refresh_token, now, refresh->scopes};
        vault.Store(user, provider, rotated, fresh);
      } else {
        vault.StoreAccess(user, provider, fresh);
      }
      actions.push_back({provider, user, "refreshed", ""});
    } catch (Error const& e) {
      if (e.code() == ErrorCode::kProviderRejected) {
        vault.MarkFailed(user, provider, "refresh rejected by provider");
        actions.push_back({provider, user, "failed", "refresh rejected"});
        LogWarning("refresh of " + provider + " for " + user +
                   " was rejected; re-authorization required");
      } else {
        actions.push_back(
            {provider, user, "error", std::string(ErrorCodeName(e.code()))});
        LogWarning("refresh of " + provider + " for " + user + " failed: " +
                   std::string(ErrorCodeName(e.code())));
      }
    }
  }
  return actions;
}

int CredmonService::Start(std::string const& host, int port) {
  if (impl_->tls()) {
    impl_->server = std::make_unique<httplib::SSLServer>(
        impl_->options.tls_cert_file.c_str(),
        impl_->options.tls_key_file.c_str());
  } else {
    impl_->server = std::make_unique<httplib::Server>();
  }
  auto& server = *impl_->server;
  if (!server.is_valid()) {
    throw Error(ErrorCode::kConfigError, "cannot load TLS certificate or key");
  }
  server.Get(R"(/key/([^/]+))", [this](auto const& req, auto& res) {
    Reply(HandleKeyPage(req.matches[1].str()), res);
  });
  server.Get(R"(/login/([^/]+))", [this](auto const& req, auto& res) {
    Reply(HandleLogin(req.matches[1].str(), req.get_param_value("key")), res);
  });
  server.Get(R"(/return/([^/]+))", [this](auto const& req, auto& res) {
    QueryParams query(req.params.begin(), req.params.end());
    Reply(HandleCallback(req.matches[1].str(), query), res);
  });
  server.Post("/api/requests", [this](auto const& req, auto& res) {
    Reply(HandleApiCreate(req.body), res);
  });
  server.Get("/healthz", [](auto const&, auto& res) {
    res.set_content("ok\n", "text/plain");
  });
  int bound = port == 0 ? server.bind_to_any_port(host)
                        : (server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(ErrorCode::kIoFailure,
                "cannot bind credmon to " + host + ":" + std::to_string(port));
  }
  impl_->bound_url = std::string(impl_->tls() ? "https://" : "http://") + host + ":" + std::to_string(bound);
  impl_->server_thread =
      std::thread([this] { impl_->server->listen_after_bind(); });
  server.wait_until_ready();
  LogInfo("credmon listening on " + impl_->bound_url);
  return bound;
}

void CredmonService::StartRefresher() {
  if (impl_->refresher_thread.joinable()) return;
  impl_->refresher_thread = std::thread([this] {
    std::unique_lock<std::mutex> lk(impl_->refresher_mu);
    while (!impl_->stopping) {
      lk.unlock();
      try {
        RefresherTick(impl_->now());
      } catch (std::exception const& e) {
        LogError(std::string("refresher tick failed: ") + e.what());
      }
      lk.lock();
      impl_->refresher_cv.wait_for(lk, impl_->options.refresh_period,
                                   [this] { return impl_->stopping; });
    }
  });
}

void CredmonService::Stop() {
  {
    std::lock_guard<std::mutex> lk(impl_->refresher_mu);
    impl_->stopping = true;
  }
  impl_->refresher_cv.notify_all();
  if (impl_->refresher_thread.joinable()) impl_->refresher_thread.join();
  if (impl_->server) impl_->server->stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void CredmonService::Wait() {
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace credxfer

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
#include "credxfer/stager.h"

#include <sys/stat.h>

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "credxfer/provider_config.h"
#include "http_client.h"

namespace credxfer {
namespace {

constexpr char kServicesKey[] = "use_oauth_services";
constexpr char kPermissionsSuffix[] = "_oauth_permissions";
constexpr char kStagedDirName[] = ".condor_creds";

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsQueueStatement(std::string_view line) {
  auto word = Lower(line.substr(0, line.find_first_of(" \t")));
  return word == "queue";
}

bool IsValidKey(std::string_view key) {
  return !key.empty() &&
         std::all_of(key.begin(), key.end(), [](unsigned char c) {
           return std::isalnum(c) || c == '_' || c == '.' || c == '+';
         });
}

}  // namespace

std::vector<ServiceRequest> SubmitDescription::Services() const {
  std::vector<ServiceRequest> out;
  for (auto const& name : oauth_services) {
    auto it = permissions.find(name);
    out.push_back({name, it == permissions.end() ? std::vector<std::string>{}
                                                 : it->second});
  }
  return out;
}

SubmitDescription ParseSubmitDescription(std::string_view text) {
  SubmitDescription desc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || IsQueueStatement(line)) continue;
    auto eq = line.find('=');
    auto key = Lower(Trim(std::string_view(line).substr(0, eq)));
    if (eq == std::string::npos || !IsValidKey(key)) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) +
                      ": expected 'key = value': " + line);
    }
    desc.entries[key] = Trim(std::string_view(line).substr(eq + 1));
  }

  if (auto it = desc.entries.find(kServicesKey); it != desc.entries.end()) {
    for (auto const& item : SplitList(it->second)) {
      auto name = Lower(item);
      if (!IsValidProviderName(name)) {
        throw Error(ErrorCode::kParseError,
                    std::string(kServicesKey) + ": bad service name '" + item +
                        "'");
      }
      if (std::find(desc.oauth_services.begin(), desc.oauth_services.end(),
                    name) == desc.oauth_services.end()) {
        desc.oauth_services.push_back(name);
      }
    }
  }
  for (auto const& name : desc.oauth_services) {
    auto it = desc.entries.find(name + kPermissionsSuffix);
    desc.permissions[name] = it == desc.entries.end()
                                 ? std::vector<std::string>{}
                                 : SplitList(it->second);
  }
  return desc;
}

SubmitDescription LoadSubmitDescription(std::filesystem::path const& path) {
  return ParseSubmitDescription(ReadFile(path));
}

EnsureResult EnsureCredentials(SubmitDescription const& desc,
                               std::string const& user,
                               StagerOptions const& options, Timestamp now) {
  if (!IsValidUserName(user)) {
    throw Error(ErrorCode::kInvalidArgument, "bad user name '" + user + "'");
  }
  auto const services = desc.Services();
  if (!options.store_root.empty()) {
    CredentialVault vault(options.store_root);
    bool all_live = std::all_of(
        services.begin(), services.end(), [&](ServiceRequest const& s) {
          return vault.HasLiveCredential(user, s.provider, s.scopes, now);
        });
    if (all_live) return EnsureResult{true, {}};
  } else if (services.empty()) {
    return EnsureResult{true, {}};
  }

  nlohmann::json body = {{"user", user}, {"services", nlohmann::json::array()}};
  for (auto const& s : services) {
    body["services"].push_back({{"provider", s.provider}, {"scopes", s.scopes}});
  }
  auto base = options.credmon_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  internal::HttpResponse response;
  try {
    response = internal::PostJson(base + "/api/requests", body.dump(),
                                  options.timeout, options.ca_file);
  } catch (Error const& e) {
    throw Error(ErrorCode::kCredmonUnreachable, e.what());
  }
  nlohmann::json reply = nlohmann::json::parse(response.body, nullptr, false);
  if (response.status != 201 || !reply.is_object()) {
    auto detail = reply.is_object() && reply.contains("error")
                      ? reply["error"].dump()
                      : "HTTP " + std::to_string(response.status);
    if (response.status == 400 || response.status == 403) {
      throw Error(ErrorCode::kInvalidArgument,
                  "credmon refused the request: " + detail);
    }
    throw Error(ErrorCode::kCredmonUnreachable,
                "credmon did not create a request: " + detail);
  }
  auto const status = reply.value("status", "");
  if (status == "complete") return EnsureResult{true, {}};
  return EnsureResult{false, reply.value("url", "")};
}

std::filesystem::path StageSandbox(SubmitDescription const& desc,
                                   std::string const& user,
                                   CredentialVault const& vault,
                                   std::filesystem::path const& sandbox) {
  namespace fs = std::filesystem;
  std::error_code ec;
  auto const dir = sandbox / kStagedDirName;
  fs::create_directories(dir, ec);
  if (ec || ::chmod(dir.c_str(), 0700) != 0) {
    throw Error(ErrorCode::kStagingFailed, "cannot create " + dir.string());
  }
  std::vector<std::string> wanted;
  for (auto const& name : desc.oauth_services) wanted.push_back(name + ".use");

  for (auto const& entry : fs::directory_iterator(dir, ec)) {
    auto name = entry.path().filename().string();
    if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) {
      fs::remove_all(entry.path(), ec);
    }
  }
  for (auto const& provider : desc.oauth_services) {
    auto const source = vault.UsePath(user, provider);
    std::string bytes;
    try {
      bytes = ReadFile(source);
      ParseUseToken(bytes);
      WriteTokenFile(dir / (provider + ".use"), bytes);
    } catch (Error const& e) {
      throw Error(ErrorCode::kStagingFailed,
                  "cannot stage " + provider + " for " + user + ": " + e.what());
    }
  }
  return dir;
}

}  // namespace credxfer

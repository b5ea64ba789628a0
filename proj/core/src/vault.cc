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

#include "credxfer/vault.h"

#include <sys/stat.h>

#include <algorithm>

#include "credxfer/error.h"

namespace credxfer {
namespace {

void CheckNames(std::string const& user, std::string const& provider) {
  if (!IsValidUserName(user)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid user name '" + user + "'");
  }
  if (!IsValidProviderName(provider)) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid provider name '" + provider + "'");
  }
}

std::optional<std::string> ReadIfExists(std::filesystem::path const& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return ReadFile(path);
}

}  // namespace

bool IsValidUserName(std::string_view user) {
  if (user.empty() || user == "." || user == "..") return false;
  return std::all_of(user.begin(), user.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

CredentialVault::CredentialVault(std::filesystem::path root)
    : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create store " + root_.string() + ": " + ec.message());
  }
  ::chmod(root_.c_str(), S_IRWXU);
}

std::filesystem::path CredentialVault::UserDir(std::string const& user) const {
  if (!IsValidUserName(user)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid user name '" + user + "'");
  }
  return root_ / user;
}

std::filesystem::path CredentialVault::EnsureUserDir(
    std::string const& user) const {
  auto dir = UserDir(user);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  ::chmod(dir.c_str(), S_IRWXU);
  return dir;
}

std::filesystem::path CredentialVault::UsePath(
    std::string const& user, std::string const& provider) const {
  CheckNames(user, provider);
  return root_ / user / (provider + ".use");
}

std::filesystem::path CredentialVault::TopPath(
    std::string const& user, std::string const& provider) const {
  CheckNames(user, provider);
  return root_ / user / (provider + ".top");
}

void CredentialVault::Store(std::string const& user,
                            std::string const& provider,
                            RefreshToken const& refresh,
                            AccessToken const& access) {
  ValidateTokenPair(TokenPair{provider, refresh, access});
  EnsureUserDir(user);
  WriteTokenFile(TopPath(user, provider), SerializeVaultToken(refresh));
  WriteTokenFile(UsePath(user, provider), SerializeUseToken(access));
  std::error_code ec;
  std::filesystem::remove(root_ / user / (provider + ".failed"), ec);
}

void CredentialVault::StoreAccess(std::string const& user,
                                  std::string const& provider,
                                  AccessToken const& access) {
  ValidateAccessToken(access);
  EnsureUserDir(user);
  WriteTokenFile(UsePath(user, provider), SerializeUseToken(access));
}

std::optional<RefreshToken> CredentialVault::LoadRefresh(
    std::string const& user, std::string const& provider) const {
  auto bytes = ReadIfExists(TopPath(user, provider));
  if (!bytes) return std::nullopt;
  return ParseVaultToken(*bytes);
}

std::optional<AccessToken> CredentialVault::LoadAccess(
    std::string const& user, std::string const& provider) const {
  auto bytes = ReadIfExists(UsePath(user, provider));
  if (!bytes) return std::nullopt;
  return ParseUseToken(*bytes);
}

void CredentialVault::MarkFailed(std::string const& user,
                                 std::string const& provider,
                                 std::string const& reason) {
  CheckNames(user, provider);
  EnsureUserDir(user);
  WriteTokenFile(root_ / user / (provider + ".failed"), reason + "\n");
}

bool CredentialVault::IsFailed(std::string const& user,
                               std::string const& provider) const {
  CheckNames(user, provider);
  std::error_code ec;
  return std::filesystem::exists(root_ / user / (provider + ".failed"), ec);
}

bool CredentialVault::HasLiveCredential(std::string const& user,
                                        std::string const& provider,
                                        std::vector<std::string> const& scopes,
                                        Timestamp now) const {
  try {
    if (IsFailed(user, provider)) return false;
    auto refresh = LoadRefresh(user, provider);
    if (!refresh || !ScopesCover(refresh->scopes, scopes)) return false;
    auto access = LoadAccess(user, provider);
    return access && access->expires_at > now;
  } catch (Error const&) {
    return false;
  }
}

std::vector<std::pair<std::string, std::string>> CredentialVault::List() const {
  std::vector<std::pair<std::string, std::string>> out;
  std::error_code ec;
  for (auto const& user_dir : std::filesystem::directory_iterator(root_, ec)) {
    if (!user_dir.is_directory()) continue;
    auto user = user_dir.path().filename().string();
    if (!IsValidUserName(user)) continue;
    std::error_code inner;
    for (auto const& entry :
         std::filesystem::directory_iterator(user_dir.path(), inner)) {
      auto const& p = entry.path();
      if (p.extension() != ".top") continue;
      auto provider = p.stem().string();
      if (IsValidProviderName(provider)) out.emplace_back(user, provider);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::mutex& CredentialVault::UserMutex(std::string const& user) {
  std::lock_guard<std::mutex> lk(user_mutexes_mu_);
  auto& slot = user_mutexes_[user];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace credxfer

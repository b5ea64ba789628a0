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

#ifndef CREDXFER_VAULT_H
#define CREDXFER_VAULT_H

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "credxfer/token.h"

namespace credxfer {

/// Usernames are restricted to `[A-Za-z0-9_.-]+` (and not "." or "..") so
/// they are always safe as a single path component.
bool IsValidUserName(std::string_view user);

/// The on-disk credential store:
///
///   <root>/<user>/<provider>.top      refresh token, never staged
///   <root>/<user>/<provider>.use      current access token
///   <root>/<user>/<provider>.failed   present while re-authorization is needed
///
/// Every file is written through WriteTokenFile (0600, atomic rename) and the
/// user directories are 0700.
class CredentialVault {
 public:
  explicit CredentialVault(std::filesystem::path root);

  std::filesystem::path const& root() const { return root_; }
  std::filesystem::path UserDir(std::string const& user) const;
  std::filesystem::path UsePath(std::string const& user,
                                std::string const& provider) const;
  std::filesystem::path TopPath(std::string const& user,
                                std::string const& provider) const;

  /// Writes `.top` then `.use` and clears any failure marker.
  void Store(std::string const& user, std::string const& provider,
             RefreshToken const& refresh, AccessToken const& access);
  void StoreAccess(std::string const& user, std::string const& provider,
                   AccessToken const& access);

  /// Missing files yield nullopt; corrupt ones throw kMalformedToken.
  std::optional<RefreshToken> LoadRefresh(std::string const& user,
                                          std::string const& provider) const;
  std::optional<AccessToken> LoadAccess(std::string const& user,
                                        std::string const& provider) const;

  void MarkFailed(std::string const& user, std::string const& provider,
                  std::string const& reason);
  bool IsFailed(std::string const& user, std::string const& provider) const;

  /// A credential is live when it is vaulted, not failed, its refresh scopes
  /// cover `scopes`, and its access token has not expired at `now`.
  bool HasLiveCredential(std::string const& user, std::string const& provider,
                         std::vector<std::string> const& scopes,
                         Timestamp now) const;

  /// Every (user, provider) pair with a `.top` file.
  std::vector<std::pair<std::string, std::string>> List() const;

  /// Serializes writers of one user's files.
  std::mutex& UserMutex(std::string const& user);

 private:
  std::filesystem::path EnsureUserDir(std::string const& user) const;

  std::filesystem::path root_;
  std::mutex user_mutexes_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> user_mutexes_;
};

}  // namespace credxfer

#endif  // CREDXFER_VAULT_H

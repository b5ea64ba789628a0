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

#ifndef CREDXFER_PROVIDER_CONFIG_H
#define CREDXFER_PROVIDER_CONFIG_H

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace credxfer {

/// One OAuth provider as configured on the submit host.
///
/// The client secret is deliberately not a member: it is read from
/// `client_secret_path` each time it is needed (see ReadClientSecret).
struct ProviderConfig {
  std::string name;
  std::string client_id;
  std::filesystem::path client_secret_path;
  std::string authorize_url;
  std::string token_url;
  /// Scopes jobs may request. Empty means the provider does not restrict
  /// requests.
  std::vector<std::string> allowed_scopes;
};

/// Parsed `KEY = VALUE` configuration text. Keys are case-sensitive, blank
/// lines and `#` comments are skipped, later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text);
  static KeyValueConfig Load(std::filesystem::path const& path);

  std::optional<std::string> Get(std::string const& key) const;
  std::map<std::string, std::string> const& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Extracts every provider that has a `<PROVIDER>_CLIENT_ID` key. Each needs
/// `_CLIENT_SECRET_FILE`, `_AUTHORIZATION_URL` and `_TOKEN_URL`;
/// `_ALLOWED_SCOPES` (comma or space separated) is optional.
/// Throws kConfigError for a missing key or invalid URL. Plain http endpoints
/// are accepted only when `allow_insecure_http` is set.
std::vector<ProviderConfig> ProvidersFromConfig(KeyValueConfig const& config,
                                                bool allow_insecure_http);

/// Checks the URL invariants of one provider. Throws kConfigError.
void ValidateProviderConfig(ProviderConfig const& cfg,
                            bool allow_insecure_http);

/// Reads the client secret, trimming trailing whitespace. Throws kIoFailure.
std::string ReadClientSecret(ProviderConfig const& cfg);

/// Splits on commas and/or whitespace, dropping empty items.
std::vector<std::string> SplitList(std::string_view text);

std::string Trim(std::string_view s);

}  // namespace credxfer

#endif  // CREDXFER_PROVIDER_CONFIG_H

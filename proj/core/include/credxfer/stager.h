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
#ifndef CREDXFER_STAGER_H
#define CREDXFER_STAGER_H

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "credxfer/credmon.h"
#include "credxfer/token.h"
#include "credxfer/vault.h"

namespace credxfer {

/// The parts of a job submit description that concern credentials. Keys are
/// lowercased; everything else is kept in `entries` and otherwise ignored.
struct SubmitDescription {
  std::map<std::string, std::string> entries;
  std::vector<std::string> oauth_services;
  /// One entry per service in oauth_services (empty means provider default).
  std::map<std::string, std::vector<std::string>> permissions;

  std::vector<ServiceRequest> Services() const;
};

/// Parses `key = value` lines. Blank lines, `#` comments and `queue`
/// statements are skipped. Throws kParseError naming the offending line.
SubmitDescription ParseSubmitDescription(std::string_view text);
SubmitDescription LoadSubmitDescription(std::filesystem::path const& path);

struct StagerOptions {
  std::string credmon_url = "http://127.0.0.1:8080";
  /// Root of the credmon vault, read directly for the readiness check.
  std::filesystem::path store_root;
  /// Trust anchor for an https credmon; empty uses the system store.
  std::string ca_file;
  std::chrono::seconds timeout{10};
};

struct EnsureResult {
  bool ready = false;
  std::string url;  // set when !ready
};

/// Ready when every requested service has a live vaulted credential covering
/// its scopes; otherwise asks credmon for a new credential request and
/// returns its key URL. Throws kCredmonUnreachable.
EnsureResult EnsureCredentials(SubmitDescription const& desc,
                               std::string const& user,
                               StagerOptions const& options,
                               Timestamp now = Now());

/// Copies the requested `.use` files, and nothing else, into
/// `<sandbox>/.condor_creds` (0700, files 0600). Returns that directory.
/// Throws kStagingFailed.
std::filesystem::path StageSandbox(SubmitDescription const& desc,
                                   std::string const& user,
                                   CredentialVault const& vault,
                                   std::filesystem::path const& sandbox);

}  // namespace credxfer

#endif  // CREDXFER_STAGER_H

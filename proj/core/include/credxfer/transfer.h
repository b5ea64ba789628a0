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

#ifndef CREDXFER_TRANSFER_H
#define CREDXFER_TRANSFER_H

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "credxfer/error.h"
#include "credxfer/token.h"
#include "credxfer/url.h"

namespace credxfer {

inline constexpr char kDefaultApiBase[] = "https://graph.microsoft.com";
inline constexpr char kCredsEnvVar[] = "_CONDOR_CREDS";
inline constexpr char kApiBaseEnvVar[] = "GRAPH_API_BASE";

/// Largest file accepted by the single-request upload.
inline constexpr std::uint64_t kSimpleUploadLimit = 250'000'000;
/// Disk write and upload read unit.
inline constexpr std::size_t kTransferChunkSize = 1'000'000;

enum class Direction { kDownload, kUpload };

struct SourceUrl {
  std::string provider;
  std::string remote_path;  // rooted, not percent-encoded
};

struct TransferSpec {
  std::string provider;
  std::string remote_path;
  std::filesystem::path local_dest;
  Direction direction = Direction::kDownload;
};

/// Splits `<provider>:///<path>`. Throws kBadUrl for a missing scheme, an
/// empty path or a ".." segment.
SourceUrl ParseSourceUrl(std::string_view arg);

/// The directory named by _CONDOR_CREDS. Throws kCredsDirMissing.
std::filesystem::path CredentialsDir();

/// Reads `<creds_dir>/<provider>.use`. Throws kTokenFileMissing,
/// kMalformedToken, or kTokenExpired when expires_at <= now.
AccessToken LocateCredentialsIn(std::filesystem::path const& creds_dir,
                                std::string const& provider, Timestamp now);
/// Same, with the directory taken from _CONDOR_CREDS.
AccessToken LocateCredentials(std::string const& provider,
                              Timestamp now = Now());

/// GRAPH_API_BASE when set, else the public endpoint.
std::string ApiBaseFromEnv();

/// A fully described HTTP request against the drive content endpoint.
struct ContentRequest {
  std::string method;
  Url url;  // origin plus encoded target
  std::vector<std::pair<std::string, std::string>> headers;

  /// "GET /v1.0/me/drive/root:/file.txt:/content HTTP/1.1"
  std::string RequestLine() const;
};

/// `/v1.0/me/drive/root:<percent-encoded path>:/content`
std::string ContentTarget(std::string_view remote_path);

ContentRequest BuildContentRequest(AccessToken const& token,
                                   std::string_view remote_path,
                                   std::string const& api_base = kDefaultApiBase,
                                   std::string method = "GET");

struct TransferOptions {
  std::string api_base = kDefaultApiBase;
  std::chrono::seconds timeout{300};
  int max_attempts = 3;
  /// Delay before the second attempt; doubles for each later one.
  std::chrono::milliseconds backoff{1000};
};

struct TransferReport {
  Direction direction = Direction::kDownload;
  std::uint64_t bytes = 0;
  double elapsed_seconds = 0;
  std::string final_url;
  int retries = 0;
  std::filesystem::path local_path;

  std::string ToJson() const;
};

/// Streams the remote file to a temporary sibling of the destination, checks
/// the byte count against Content-Length and renames into place. A 302 is
/// followed once without the Authorization header. Transport failures and
/// truncated bodies are retried with backoff (whole-file restart).
///
/// Throws kAuthRejected, kNotFound, kTransferTruncated, kNetworkError,
/// kBadUrl, kIoFailure.
TransferReport Download(TransferSpec const& spec, AccessToken const& token,
                        TransferOptions const& options);

/// Single PUT of the local file. Throws kTooLarge above kSimpleUploadLimit,
/// kAuthRejected, kNetworkError, kIoFailure.
TransferReport Upload(TransferSpec const& spec, AccessToken const& token,
                      TransferOptions const& options);

/// Process exit status for each failure class; 0 is success.
int ExitCodeFor(ErrorCode code);

}  // namespace credxfer

#endif  // CREDXFER_TRANSFER_H

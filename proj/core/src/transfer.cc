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

#include "credxfer/transfer.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "credxfer/log.h"
#include "credxfer/random.h"
#include "http_client.h"

namespace credxfer {
namespace {

constexpr char kContentPrefix[] = "/v1.0/me/drive/root:";
constexpr char kContentSuffix[] = ":/content";

bool IsRetryable(ErrorCode code) {
  return code == ErrorCode::kNetworkError ||
         code == ErrorCode::kTransferTruncated;
}

[[noreturn]] void ThrowForStatus(int status, std::string const& what) {
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::kAuthRejected,
                what + " was rejected (HTTP " + std::to_string(status) + ")");
  }
  if (status == 404) {
    throw Error(ErrorCode::kNotFound, what + " does not exist");
  }
  throw Error(ErrorCode::kNetworkError,
              what + " failed with HTTP " + std::to_string(status));
}

std::string Basename(std::string_view remote_path) {
  auto slash = remote_path.rfind('/');
  return std::string(remote_path.substr(slash + 1));
}

httplib::Headers ToHttplib(
    std::vector<std::pair<std::string, std::string>> const& headers) {
  return httplib::Headers(headers.begin(), headers.end());
}

/// Buffered writer for the temporary download file.
class PartFile {
 public:
  explicit PartFile(std::filesystem::path const& dest)
      : path_(dest.parent_path() /
              ("." + dest.filename().string() + ".part." + RandomHex(6))) {
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw Error(ErrorCode::kIoFailure, "cannot create " + path_.string() +
                                             ": " + std::strerror(errno));
    }
    buffer_.reserve(kTransferChunkSize);
  }
  ~PartFile() {
    if (fd_ >= 0) ::close(fd_);
    if (!committed_) ::unlink(path_.c_str());
  }
  PartFile(PartFile const&) = delete;
  PartFile& operator=(PartFile const&) = delete;

  bool Append(char const* data, std::size_t len) {
    bytes_ += len;
    while (len > 0) {
      auto n = std::min(len, kTransferChunkSize - buffer_.size());
      buffer_.append(data, n);
      data += n;
      len -= n;
      if (buffer_.size() == kTransferChunkSize && !Flush()) return false;
    }
    return true;
  }

  void Commit(std::filesystem::path const& dest) {
    if (!Flush() || ::fsync(fd_) != 0 || ::close(fd_) != 0) {
      fd_ = -1;
      throw Error(ErrorCode::kIoFailure,
                  "cannot write " + path_.string() + ": " + std::strerror(errno));
    }
    fd_ = -1;
    if (::rename(path_.c_str(), dest.c_str()) != 0) {
      throw Error(ErrorCode::kIoFailure, "cannot rename onto " + dest.string() +
                                             ": " + std::strerror(errno));
    }
    committed_ = true;
  }

  std::uint64_t bytes() const { return bytes_; }

 private:
  bool Flush() {
    char const* p = buffer_.data();
    std::size_t left = buffer_.size();
    while (left > 0) {
      auto n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    buffer_.clear();
    return true;
  }

  std::filesystem::path path_;
  int fd_ = -1;
  bool committed_ = false;
  std::string buffer_;
  std::uint64_t bytes_ = 0;
};

struct FetchOutcome {
  int status = 0;
  std::string location;
  std::optional<std::uint64_t> content_length;
};

/// One GET. Streams the body into `part` only for a 200.
FetchOutcome Fetch(Url const& url,
                   std::vector<std::pair<std::string, std::string>> const& headers,
                   std::chrono::seconds timeout, PartFile& part) {
  FetchOutcome outcome;
  auto client = internal::MakeClient(url, timeout);
  auto result = client->Get(
      url.target, ToHttplib(headers),
      [&](httplib::Response const& response) {
        outcome.status = response.status;
        outcome.location = response.get_header_value("Location");
        if (response.has_header("Content-Length")) {
          outcome.content_length =
              std::stoull(response.get_header_value("Content-Length"));
        }
        return response.status == 200;
      },
      [&](char const* data, std::size_t len) { return part.Append(data, len); });
  if (outcome.status == 200) {
    if (outcome.content_length && part.bytes() != *outcome.content_length) {
      throw Error(ErrorCode::kTransferTruncated,
                  "received " + std::to_string(part.bytes()) + " of " +
                      std::to_string(*outcome.content_length) + " bytes");
    }
    if (!result) {
      throw Error(ErrorCode::kNetworkError,
                  "download interrupted: " + httplib::to_string(result.error()));
    }
    return outcome;
  }
  if (outcome.status == 0) {
    throw Error(ErrorCode::kNetworkError,
                "GET " + url.Origin() + " failed: " +
                    httplib::to_string(result.error()));
  }
  return outcome;
}

Url ResolveLocation(Url const& base, std::string const& location) {
  if (location.find("://") != std::string::npos) {
    try {
      return ParseUrl(location);
    } catch (Error const& e) {
      throw Error(ErrorCode::kNetworkError,
                  std::string("bad redirect location: ") + e.what());
    }
  }
  if (location.empty() || location.front() != '/') {
    throw Error(ErrorCode::kNetworkError, "unsupported redirect location");
  }
  Url next = base;
  next.target = location;
  return next;
}

TransferReport DownloadOnce(TransferSpec const& spec, AccessToken const& token,
                            TransferOptions const& options,
                            std::filesystem::path const& dest) {
  auto const request = BuildContentRequest(token, spec.remote_path,
                                           options.api_base, "GET");
  PartFile part(dest);
  auto outcome = Fetch(request.url, request.headers, options.timeout, part);
  Url final_url = request.url;
  if (outcome.status == 301 || outcome.status == 302 || outcome.status == 303 ||
      outcome.status == 307) {
    // Pre-authenticated download URL: the bearer token must not follow.
    final_url = ResolveLocation(request.url, outcome.location);
    outcome = Fetch(final_url, {}, options.timeout, part);
  }
  if (outcome.status != 200) {
    ThrowForStatus(outcome.status, "GET " + spec.remote_path);
  }
  part.Commit(dest);
  TransferReport report;
  report.direction = Direction::kDownload;
  report.bytes = part.bytes();
  report.final_url = final_url.ToString();
  report.local_path = dest;
  return report;
}

template <typename Attempt>
TransferReport WithRetries(TransferOptions const& options, Attempt attempt) {
  auto const start = std::chrono::steady_clock::now();
  auto delay = options.backoff;
  for (int n = 1;; ++n) {
    try {
      TransferReport report = attempt();
      report.retries = n - 1;
      report.elapsed_seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
      return report;
    } catch (Error const& e) {
      if (!IsRetryable(e.code()) || n >= options.max_attempts) throw;
      LogWarning(std::string("attempt ") + std::to_string(n) +
                 " failed, retrying: " + e.what());
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

}  // namespace

SourceUrl ParseSourceUrl(std::string_view arg) {
  auto bad = [&](char const* why) -> SourceUrl {
    throw Error(ErrorCode::kBadUrl,
                "'" + std::string(arg) + "': " + why);
  };
  auto sep = arg.find("://");
  if (sep == std::string_view::npos || sep == 0) {
    return bad("expected <provider>:///<path>");
  }
  SourceUrl out;
  out.provider = std::string(arg.substr(0, sep));
  if (!IsValidProviderName(out.provider)) {
    return bad("provider must match [a-z0-9_]+");
  }
  auto path = arg.substr(sep + 3);
  if (path.empty() || path.front() != '/') {
    return bad("path must be rooted (use three slashes)");
  }
  if (path.find_first_not_of('/') == std::string_view::npos) {
    return bad("empty path");
  }
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto end = path.find('/', pos);
    if (end == std::string_view::npos) end = path.size();
    if (path.substr(pos, end - pos) == "..") return bad("'..' is not allowed");
    pos = end + 1;
  }
  out.remote_path = std::string(path);
  return out;
}

std::filesystem::path CredentialsDir() {
  char const* dir = std::getenv(kCredsEnvVar);
  if (dir == nullptr || *dir == '\0') {
    throw Error(ErrorCode::kCredsDirMissing,
                std::string(kCredsEnvVar) + " is not set");
  }
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kCredsDirMissing,
                std::string(kCredsEnvVar) + "=" + dir + " is not a directory");
  }
  return dir;
}

AccessToken LocateCredentialsIn(std::filesystem::path const& creds_dir,
                                std::string const& provider, Timestamp now) {
  auto const path = creds_dir / (provider + ".use");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kTokenFileMissing, path.string() + " not found");
  }
  std::string bytes;
  try {
    bytes = ReadFile(path);
  } catch (Error const&) {
    throw Error(ErrorCode::kTokenFileMissing, path.string() + " is unreadable");
  }
  auto token = ParseUseToken(bytes);
  if (token.expires_at <= now) {
    throw Error(ErrorCode::kTokenExpired,
                "token in " + path.string() + " expired at " +
                    std::to_string(ToUnixSeconds(token.expires_at)));
  }
  return token;
}

AccessToken LocateCredentials(std::string const& provider, Timestamp now) {
  return LocateCredentialsIn(CredentialsDir(), provider, now);
}

std::string ApiBaseFromEnv() {
  char const* base = std::getenv(kApiBaseEnvVar);
  return base != nullptr && *base != '\0' ? std::string(base) : kDefaultApiBase;
}

std::string ContentRequest::RequestLine() const {
  return method + " " + url.target + " HTTP/1.1";
}

std::string ContentTarget(std::string_view remote_path) {
  return std::string(kContentPrefix) + PercentEncodePath(remote_path) +
         kContentSuffix;
}

ContentRequest BuildContentRequest(AccessToken const& token,
                                   std::string_view remote_path,
                                   std::string const& api_base,
                                   std::string method) {
  if (token.token.empty()) {
    throw Error(ErrorCode::kMalformedToken, "access token is empty");
  }
  ContentRequest request;
  request.method = std::move(method);
  request.url = ParseUrl(api_base);
  // An API base may carry a path prefix (e.g. behind a gateway).
  auto prefix = request.url.Path();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  request.url.target = prefix + ContentTarget(remote_path);
  request.headers = {{"Authorization", "Bearer " + token.token}};
  return request;
}

std::string TransferReport::ToJson() const {
  nlohmann::json doc = {
      {"direction", direction == Direction::kDownload ? "download" : "upload"},
      {"bytes", bytes},
      {"elapsed_seconds", elapsed_seconds},
      {"final_url", final_url},
      {"retries", retries},
      {"local_path", local_path.string()},
  };
  return doc.dump();
}

TransferReport Download(TransferSpec const& spec, AccessToken const& token,
                        TransferOptions const& options) {
  if (spec.direction != Direction::kDownload) {
    throw Error(ErrorCode::kInvalidArgument, "spec is not a download");
  }
  std::filesystem::path dest = spec.local_dest;
  std::error_code ec;
  if (std::filesystem::is_directory(dest, ec)) {
    auto name = Basename(spec.remote_path);
    if (name.empty()) {
      throw Error(ErrorCode::kBadUrl,
                  spec.remote_path + " has no file name to download into " +
                      dest.string());
    }
    dest /= name;
  }
  auto parent = dest.has_parent_path() ? dest.parent_path()
                                       : std::filesystem::path(".");
  if (!std::filesystem::is_directory(parent, ec)) {
    throw Error(ErrorCode::kIoFailure,
                "destination directory " + parent.string() + " does not exist");
  }
  if (!dest.has_parent_path()) dest = parent / dest;
  return WithRetries(options,
                     [&] { return DownloadOnce(spec, token, options, dest); });
}

TransferReport Upload(TransferSpec const& spec, AccessToken const& token,
                      TransferOptions const& options) {
  if (spec.direction != Direction::kUpload) {
    throw Error(ErrorCode::kInvalidArgument, "spec is not an upload");
  }
  std::error_code ec;
  if (!std::filesystem::is_regular_file(spec.local_dest, ec)) {
    throw Error(ErrorCode::kIoFailure,
                spec.local_dest.string() + " is not a regular file");
  }
  auto const size = std::filesystem::file_size(spec.local_dest, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, "cannot stat " + spec.local_dest.string());
  }
  if (size > kSimpleUploadLimit) {
    throw Error(ErrorCode::kTooLarge,
                spec.local_dest.string() + " is " + std::to_string(size) +
                    " bytes; single-request uploads are limited to " +
                    std::to_string(kSimpleUploadLimit));
  }
  auto remote = spec.remote_path;
  if (remote.back() == '/') remote += spec.local_dest.filename().string();
  auto const request = BuildContentRequest(token, remote, options.api_base, "PUT");

  auto attempt = [&] {
    std::ifstream in(spec.local_dest, std::ios::binary);
    if (!in) {
      throw Error(ErrorCode::kIoFailure, "cannot open " + spec.local_dest.string());
    }
    auto client = internal::MakeClient(request.url, options.timeout);
    std::vector<char> chunk(kTransferChunkSize);
    auto result =
        size == 0
            ? client->Put(request.url.target, ToHttplib(request.headers),
                          std::string(), "application/octet-stream")
            : client->Put(
                  request.url.target, ToHttplib(request.headers), size,
                  [&](std::size_t offset, std::size_t length,
                      httplib::DataSink& sink) {
                    in.seekg(static_cast<std::streamoff>(offset));
                    in.read(chunk.data(), static_cast<std::streamsize>(
                                              std::min(length, chunk.size())));
                    if (in.gcount() <= 0) return false;
                    return sink.write(chunk.data(),
                                      static_cast<std::size_t>(in.gcount()));
                  },
                  "application/octet-stream");
    if (!result) {
      throw Error(ErrorCode::kNetworkError,
                  "PUT " + remote + " failed: " +
                      httplib::to_string(result.error()));
    }
    if (result->status != 200 && result->status != 201) {
      ThrowForStatus(result->status, "PUT " + remote);
    }
    TransferReport report;
    report.direction = Direction::kUpload;
    report.bytes = size;
    report.final_url = request.url.ToString();
    report.local_path = spec.local_dest;
    return report;
  };
  return WithRetries(options, attempt);
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadUrl:
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kCredsDirMissing: return 3;
    case ErrorCode::kTokenFileMissing: return 4;
    case ErrorCode::kMalformedToken: return 5;
    case ErrorCode::kTokenExpired: return 6;
    case ErrorCode::kAuthRejected: return 7;
    case ErrorCode::kNotFound: return 8;
    case ErrorCode::kTransferTruncated: return 9;
    case ErrorCode::kNetworkError: return 10;
    case ErrorCode::kTooLarge: return 11;
    case ErrorCode::kIoFailure: return 12;
    default: return 1;
  }
}

}  // namespace credxfer

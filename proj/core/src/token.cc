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

#include "credxfer/token.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "credxfer/error.h"
#include "credxfer/random.h"

namespace credxfer {
namespace {

using nlohmann::json;

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

json ParseObject(std::string_view bytes, ErrorCode code) {
  json doc = json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(code, "token document is not a JSON object");
  }
  return doc;
}

std::string RequireString(json const& doc, char const* key, ErrorCode code) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    throw Error(code, std::string("missing string key '") + key + "'");
  }
  return it->get<std::string>();
}

std::int64_t RequireInteger(json const& doc, char const* key, ErrorCode code) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number_integer()) {
    throw Error(code, std::string("missing integer key '") + key + "'");
  }
  return it->get<std::int64_t>();
}

[[noreturn]] void ThrowErrno(std::string const& what,
                             std::filesystem::path const& path) {
  throw Error(ErrorCode::kIoFailure,
              what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

Timestamp Now() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

Timestamp FromUnixSeconds(std::int64_t seconds) {
  return Timestamp(std::chrono::seconds(seconds));
}

std::int64_t ToUnixSeconds(Timestamp t) {
  return t.time_since_epoch().count();
}

bool IsValidProviderName(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

void ValidateAccessToken(AccessToken const& token) {
  if (token.token.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "access token is empty");
  }
  if (!EqualsIgnoreCase(token.token_type, "Bearer")) {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported token type '" + token.token_type + "'");
  }
}

void ValidateTokenPair(TokenPair const& pair) {
  if (!IsValidProviderName(pair.provider)) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid provider name '" + pair.provider + "'");
  }
  if (pair.refresh.token.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "refresh token is empty");
  }
  ValidateAccessToken(pair.access);
  if (!ScopesCover(pair.refresh.scopes, pair.access.scopes)) {
    throw Error(ErrorCode::kInvalidArgument,
                "access scopes exceed refresh scopes");
  }
}

std::string SerializeUseToken(AccessToken const& access) {
  json doc = {
      {"access_token", access.token},
      {"token_type", "Bearer"},
      {"expires_at", ToUnixSeconds(access.expires_at)},
      {"scope", JoinScopes(access.scopes)},
  };
  return doc.dump();
}

AccessToken ParseUseToken(std::string_view bytes) {
  constexpr auto kCode = ErrorCode::kMalformedToken;
  json doc = ParseObject(bytes, kCode);
  AccessToken token;
  token.token = RequireString(doc, "access_token", kCode);
  token.token_type = RequireString(doc, "token_type", kCode);
  token.expires_at = FromUnixSeconds(RequireInteger(doc, "expires_at", kCode));
  token.scopes = SplitScopes(RequireString(doc, "scope", kCode));
  if (token.token.empty()) throw Error(kCode, "access_token is empty");
  if (!EqualsIgnoreCase(token.token_type, "Bearer")) {
    throw Error(kCode, "token_type is not Bearer");
  }
  token.token_type = "Bearer";
  return token;
}

std::string SerializeVaultToken(RefreshToken const& refresh) {
  json doc = {
      {"refresh_token", refresh.token},
      {"obtained_at", ToUnixSeconds(refresh.obtained_at)},
      {"scope", JoinScopes(refresh.scopes)},
  };
  return doc.dump();
}

RefreshToken ParseVaultToken(std::string_view bytes) {
  constexpr auto kCode = ErrorCode::kMalformedToken;
  json doc = ParseObject(bytes, kCode);
  RefreshToken token;
  token.token = RequireString(doc, "refresh_token", kCode);
  token.obtained_at = FromUnixSeconds(RequireInteger(doc, "obtained_at", kCode));
  token.scopes = SplitScopes(RequireString(doc, "scope", kCode));
  if (token.token.empty()) throw Error(kCode, "refresh_token is empty");
  return token;
}

bool NeedsRefresh(AccessToken const& access, Timestamp now,
                  std::chrono::seconds margin) {
  if (margin.count() < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative refresh margin");
  }
  return access.expires_at - now <= margin;
}

void WriteTokenFile(std::filesystem::path const& path, std::string_view bytes) {
  auto const dir = path.has_parent_path() ? path.parent_path()
                                          : std::filesystem::path(".");
  auto const tmp =
      dir / ("." + path.filename().string() + ".tmp." + RandomHex(8));

  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0600);
  if (fd < 0) ThrowErrno("cannot create", tmp);
  auto fail = [&](char const* what) {
    int saved = errno;
    ::close(fd);
    ::unlink(tmp.c_str());
    errno = saved;
    ThrowErrno(what, tmp);
  };
  // The umask may have removed bits; never added any.
  if (::fchmod(fd, S_IRUSR | S_IWUSR) != 0) fail("cannot chmod");
  char const* data = bytes.data();
  std::size_t remaining = bytes.size();
  while (remaining > 0) {
    ssize_t n = ::write(fd, data, remaining);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("cannot write");
    }
    data += n;
    remaining -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) fail("cannot fsync");
  if (::close(fd) != 0) {
    ::unlink(tmp.c_str());
    ThrowErrno("cannot close", tmp);
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    int saved = errno;
    ::unlink(tmp.c_str());
    errno = saved;
    ThrowErrno("cannot rename onto", path);
  }
}

std::string ReadFile(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  }
  return std::move(buffer).str();
}

std::string JoinScopes(std::vector<std::string> const& scopes) {
  std::string out;
  for (auto const& s : scopes) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

std::vector<std::string> SplitScopes(std::string_view joined) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < joined.size()) {
    auto end = joined.find(' ', pos);
    if (end == std::string_view::npos) end = joined.size();
    if (end > pos) out.emplace_back(joined.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

bool ScopesCover(std::vector<std::string> const& superset,
                 std::vector<std::string> const& subset) {
  return std::all_of(subset.begin(), subset.end(), [&](std::string const& s) {
    return std::find(superset.begin(), superset.end(), s) != superset.end();
  });
}

}  // namespace credxfer

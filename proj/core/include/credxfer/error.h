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

#ifndef CREDXFER_ERROR_H
#define CREDXFER_ERROR_H

#include <stdexcept>
#include <string>
#include <string_view>

namespace credxfer {

/// Every failure the library reports carries one of these codes. Callers
/// branch on the code, never on the message text.
enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  kConfigError,
  // Tokens.
  kMalformedToken,
  // OAuth.
  kScopeNotAllowed,
  kProviderRejected,
  kMalformedResponse,
  kMissingRefreshToken,
  // CredMon.
  kUnknownProvider,
  kStateMismatch,
  kNotFoundKey,
  // Transfer client.
  kBadUrl,
  kCredsDirMissing,
  kTokenFileMissing,
  kTokenExpired,
  kAuthRejected,
  kNotFound,
  kTransferTruncated,
  kNetworkError,
  kTooLarge,
  // Job stager.
  kParseError,
  kCredmonUnreachable,
  kStagingFailed,
  // Benchmark analytics.
  kEmptyInput,
  kMissingBaseline,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace credxfer

#endif  // CREDXFER_ERROR_H

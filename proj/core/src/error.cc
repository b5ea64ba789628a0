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

#include "credxfer/error.h"

namespace credxfer {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kMalformedToken: return "MalformedToken";
    case ErrorCode::kScopeNotAllowed: return "ScopeNotAllowed";
    case ErrorCode::kProviderRejected: return "ProviderRejected";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kMissingRefreshToken: return "MissingRefreshToken";
    case ErrorCode::kUnknownProvider: return "UnknownProvider";
    case ErrorCode::kStateMismatch: return "StateMismatch";
    case ErrorCode::kNotFoundKey: return "NotFoundKey";
    case ErrorCode::kBadUrl: return "BadUrl";
    case ErrorCode::kCredsDirMissing: return "CredsDirMissing";
    case ErrorCode::kTokenFileMissing: return "TokenFileMissing";
    case ErrorCode::kTokenExpired: return "TokenExpired";
    case ErrorCode::kAuthRejected: return "AuthRejected";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kTransferTruncated: return "TransferTruncated";
    case ErrorCode::kNetworkError: return "NetworkError";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kCredmonUnreachable: return "CredmonUnreachable";
    case ErrorCode::kStagingFailed: return "StagingFailed";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingBaseline: return "MissingBaseline";
  }
  return "Unknown";
}

}  // namespace credxfer

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

#ifndef CREDXFER_CHECKSUM_H
#define CREDXFER_CHECKSUM_H

#include <filesystem>
#include <string>
#include <string_view>

namespace credxfer {

/// Lowercase hex SHA-256 of a byte string.
std::string Sha256Hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents, streamed. Throws kIoFailure.
std::string Sha256File(std::filesystem::path const& path);

}  // namespace credxfer

#endif  // CREDXFER_CHECKSUM_H

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

#ifndef CREDXFER_RANDOM_H
#define CREDXFER_RANDOM_H

#include <cstddef>
#include <string>
#include <vector>

namespace credxfer {

// All helpers draw from the OpenSSL CSPRNG.
std::vector<unsigned char> RandomBytes(std::size_t count);

/// `count` random bytes, lowercase hex (2 * count characters).
std::string RandomHex(std::size_t count);

/// `count` random bytes, unpadded base64url.
std::string RandomUrlSafe(std::size_t count);

}  // namespace credxfer

#endif  // CREDXFER_RANDOM_H

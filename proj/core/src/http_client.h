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

// Thin synchronous HTTP helpers over cpp-httplib. Private to the library.

#ifndef CREDXFER_SRC_HTTP_CLIENT_H
#define CREDXFER_SRC_HTTP_CLIENT_H

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>

#include "credxfer/url.h"

namespace credxfer::internal {

struct HttpResponse {
  int status = 0;
  std::string body;
  httplib::Headers headers;
};

/// A client for `url`'s origin. Automatic redirect following and httplib's
/// own path encoding are both off; callers send pre-encoded targets.
/// `ca_file` replaces the system trust store for https origins.
std::unique_ptr<httplib::Client> MakeClient(Url const& url,
                                            std::chrono::seconds timeout,
                                            std::string const& ca_file = {});

/// POSTs an application/x-www-form-urlencoded body. Throws kNetworkError when
/// no HTTP response was received.
HttpResponse PostForm(std::string const& url, QueryParams const& form,
                      std::chrono::seconds timeout);

HttpResponse PostJson(std::string const& url, std::string const& body,
                      std::chrono::seconds timeout,
                      std::string const& ca_file = {});

}  // namespace credxfer::internal

#endif  // CREDXFER_SRC_HTTP_CLIENT_H

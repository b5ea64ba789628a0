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

#include "http_client.h"

#include "credxfer/error.h"

namespace credxfer::internal {
namespace {

HttpResponse Post(std::string const& url_text, std::string const& body,
                  char const* content_type, std::chrono::seconds timeout,
                  std::string const& ca_file) {
  auto const url = ParseUrl(url_text);
  auto client = MakeClient(url, timeout, ca_file);
  auto result = client->Post(url.target, body, content_type);
  if (!result) {
    throw Error(ErrorCode::kNetworkError,
                "POST " + url.Origin() + url.Path() + ": " +
                    httplib::to_string(result.error()));
  }
  return HttpResponse{result->status, result->body, result->headers};
}

}  // namespace

std::unique_ptr<httplib::Client> MakeClient(Url const& url,
                                            std::chrono::seconds timeout,
                                            std::string const& ca_file) {
  auto client = std::make_unique<httplib::Client>(url.Origin());
  if (!ca_file.empty()) client->set_ca_cert_path(ca_file);
  client->set_follow_location(false);
  client->set_url_encode(false);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  return client;
}

HttpResponse PostForm(std::string const& url, QueryParams const& form,
                      std::chrono::seconds timeout) {
  return Post(url, FormEncode(form), "application/x-www-form-urlencoded",
              timeout, {});
}

HttpResponse PostJson(std::string const& url, std::string const& body,
                      std::chrono::seconds timeout,
                      std::string const& ca_file) {
  return Post(url, body, "application/json", timeout, ca_file);
}

}  // namespace credxfer::internal

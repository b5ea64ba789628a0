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
// transfer: moves one file between the local disk and a cloud drive using
// the access token staged in $_CONDOR_CREDS.
//
//   transfer onedrive:///path/file.bin ./            download
//   transfer ./file.bin onedrive:///path/            upload

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "credxfer/error.h"
#include "credxfer/transfer.h"

namespace {

bool LooksLikeSourceUrl(std::string const& arg) {
  auto sep = arg.find("://");
  return sep != std::string::npos && sep > 0 &&
         credxfer::IsValidProviderName(arg.substr(0, sep));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Download or upload one file with a staged OAuth token"};
  std::string first;
  std::string second;
  std::string direction;
  int timeout = 300;
  bool json_report = false;
  app.add_option("source", first, "provider:///path, or a local file to upload")
      ->required();
  app.add_option("dest", second, "local path or directory, or provider:///path")
      ->required();
  app.add_option("--direction", direction, "download or upload")
      ->check(CLI::IsMember({"download", "upload"}));
  app.add_option("--timeout", timeout, "per-request timeout in seconds")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json-report", json_report,
               "print a JSON transfer report on stdout");
  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (direction.empty()) {
      direction = !LooksLikeSourceUrl(first) && LooksLikeSourceUrl(second)
                      ? "upload"
                      : "download";
    }
    bool const upload = direction == "upload";
    auto const url = credxfer::ParseSourceUrl(upload ? second : first);
    credxfer::TransferSpec spec;
    spec.provider = url.provider;
    spec.remote_path = url.remote_path;
    spec.local_dest = upload ? first : second;
    spec.direction = upload ? credxfer::Direction::kUpload
                            : credxfer::Direction::kDownload;

    auto const token = credxfer::LocateCredentials(spec.provider);
    credxfer::TransferOptions options;
    options.api_base = credxfer::ApiBaseFromEnv();
    options.timeout = std::chrono::seconds(timeout);
    auto const report = upload ? credxfer::Upload(spec, token, options)
                               : credxfer::Download(spec, token, options);
    if (json_report) std::cout << report.ToJson() << "\n";
    return 0;
  } catch (credxfer::Error const& e) {
    std::cerr << "transfer: " << e.what() << "\n";
    return credxfer::ExitCodeFor(e.code());
  } catch (std::exception const& e) {
    std::cerr << "transfer: " << e.what() << "\n";
    return 1;
  }
}

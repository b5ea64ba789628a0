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
// credmon: acquires OAuth tokens on users' behalf and keeps the vaulted
// access tokens fresh.
//
//   credmon serve --config credmon.conf --store /var/lib/credmon

#include <signal.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "credxfer/credmon.h"
#include "credxfer/error.h"
#include "credxfer/provider_config.h"

namespace {

int Serve(std::string const& config_path, std::string store, std::string bind,
          int port, bool insecure_http, std::string public_url,
          int refresh_margin, int refresh_period, std::string const& tls_cert,
          std::string const& tls_key) {
  auto const config = credxfer::KeyValueConfig::Load(config_path);
  if (store.empty()) {
    store = config.Get("CREDMON_STORE").value_or("");
    if (char const* env = std::getenv("CREDMON_STORE")) store = env;
  }
  if (store.empty()) {
    throw credxfer::Error(credxfer::ErrorCode::kConfigError,
                          "no credential store; pass --store or set "
                          "CREDMON_STORE");
  }
  if (public_url.empty()) {
    public_url = config.Get("CREDMON_PUBLIC_URL").value_or("");
  }

  credxfer::CredmonOptions options;
  options.providers = credxfer::ProvidersFromConfig(config, insecure_http);
  options.store_root = store;
  options.public_url = public_url;
  options.insecure_http = insecure_http;
  options.tls_cert_file = tls_cert;
  options.tls_key_file = tls_key;
  options.refresh_margin = std::chrono::seconds(refresh_margin);
  options.refresh_period = std::chrono::seconds(refresh_period);

  // Handle termination signals synchronously on this thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  credxfer::CredmonService service(std::move(options));
  service.Start(bind, port);
  service.StartRefresher();
  std::cout << "credmon listening on " << service.BaseUrl() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  service.Stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OAuth credential monitor"};
  app.require_subcommand(1);
  auto* serve = app.add_subcommand("serve", "run the web service and refresher");
  std::string config;
  std::string store;
  std::string bind = "127.0.0.1";
  int port = 8080;
  bool insecure_http = false;
  std::string public_url;
  int refresh_margin = 300;
  int refresh_period = 60;
  std::string tls_cert;
  std::string tls_key;
  serve->add_option("--config", config, "KEY = VALUE provider configuration")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--store", store,
                    "credential store directory (default $CREDMON_STORE)");
  serve->add_option("--bind", bind, "listen address");
  serve->add_option("--port", port, "listen port, 0 picks a free one");
  serve->add_flag("--insecure-http", insecure_http,
                  "allow http:// provider and public URLs (testing only)");
  serve->add_option("--public-url", public_url,
                    "externally visible base URL for key and redirect URLs");
  serve->add_option("--refresh-margin", refresh_margin,
                    "seconds before expiry at which tokens are refreshed")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--refresh-period", refresh_period,
                    "seconds between refresher passes")
      ->check(CLI::PositiveNumber);
  serve->add_option("--tls-cert", tls_cert, "PEM certificate chain")
      ->check(CLI::ExistingFile);
  serve->add_option("--tls-key", tls_key, "PEM private key")
      ->check(CLI::ExistingFile);
  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }
  try {
    return Serve(config, store, bind, port, insecure_http, public_url,
                 refresh_margin, refresh_period, tls_cert, tls_key);
  } catch (std::exception const& e) {
    std::cerr << "credmon: " << e.what() << "\n";
    return 1;
  }
}

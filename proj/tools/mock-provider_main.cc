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
// mock-provider: an offline identity provider and drive content API for
// tests and benchmarks.
//
//   mock-provider --root ./files --port 9000 --profile colorado

#include <signal.h>

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "credxfer/error.h"
#include "credxfer/mock_provider.h"

int main(int argc, char** argv) {
  namespace mock = credxfer::mock;
  CLI::App app{"Mock OAuth2 provider and drive content server"};
  std::string root;
  std::string bind = "127.0.0.1";
  int port = 0;
  std::optional<double> bandwidth;
  int token_lifetime = 3600;
  std::string fault = "none";
  bool no_redirect = false;
  std::string profile;
  std::string log_path;
  std::string client_id;
  std::string client_secret;
  bool list_profiles = false;
  app.add_option("--root", root, "directory served as the drive root");
  app.add_option("--bind", bind, "listen address");
  app.add_option("--port", port, "listen port, 0 picks a free one");
  app.add_option("--bandwidth", bandwidth,
                 "download cap in bytes per second (overrides --profile)")
      ->check(CLI::PositiveNumber);
  app.add_option("--token-lifetime", token_lifetime,
                 "access token lifetime in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--fault", fault,
                 "none, deny_consent, revoke_refresh, drop_once or "
                 "omit_refresh_token");
  app.add_flag("--no-redirect", no_redirect,
               "serve content directly instead of redirecting to /dl/");
  app.add_option("--profile", profile, "emulated site bandwidth profile");
  app.add_option("--log", log_path, "append requests as JSON lines");
  app.add_option("--client-id", client_id, "require this client_id");
  app.add_option("--client-secret", client_secret,
                 "require this client_secret");
  app.add_flag("--list-profiles", list_profiles, "print profiles and exit");
  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }

  if (list_profiles) {
    for (auto const& p : mock::BuiltinProfiles()) {
      std::cout << p.name << "\t" << p.bandwidth << "\t" << p.description
                << "\n";
    }
    return 0;
  }
  if (root.empty()) {
    std::cerr << "mock-provider: --root is required\n";
    return 2;
  }

  try {
    mock::MockConfig config;
    config.backing_dir = root;
    config.token_lifetime = std::chrono::seconds(token_lifetime);
    config.fault_mode = mock::ParseFaultMode(fault);
    config.redirect_downloads = !no_redirect;
    config.request_log_path = log_path;
    config.client_id = client_id;
    config.client_secret = client_secret;
    if (!profile.empty()) {
      auto p = mock::FindProfile(profile);
      if (!p) {
        std::cerr << "mock-provider: unknown profile '" << profile << "'\n";
        return 2;
      }
      if (p->bandwidth > 0) config.bandwidth_limit = p->bandwidth;
    }
    if (bandwidth) config.bandwidth_limit = bandwidth;

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    mock::MockProvider provider(config);
    provider.Start(bind, port);
    std::cout << "mock-provider listening on " << provider.BaseUrl()
              << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    provider.Stop();
    return 0;
  } catch (std::exception const& e) {
    std::cerr << "mock-provider: " << e.what() << "\n";
    return 1;
  }
}

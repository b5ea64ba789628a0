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
// stager: the submit-side half of a credentialed job. Checks that the
// credentials a submit description asks for exist and stages them into a
// job sandbox.
//
//   stager check job.sub --user alice
//   stager stage job.sub --user alice --sandbox /scratch/job1

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "credxfer/error.h"
#include "credxfer/stager.h"
#include "credxfer/vault.h"

namespace {

std::string EnvOr(char const* name, std::string fallback) {
  char const* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Job credential stager"};
  app.require_subcommand(1);
  std::string submit_file;
  std::string user = EnvOr("USER", "");
  std::string sandbox;
  credxfer::StagerOptions options;
  options.credmon_url = EnvOr("CREDMON_URL", options.credmon_url);
  std::string store = EnvOr("CREDMON_STORE", "");
  std::string ca_file;

  auto common = [&](CLI::App* sub) {
    sub->add_option("submit-file", submit_file, "submit description")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--user", user, "submitting user (default $USER)");
    sub->add_option("--credmon", options.credmon_url,
                    "credmon base URL (default $CREDMON_URL)");
    sub->add_option("--store", store,
                    "credmon store directory (default $CREDMON_STORE)");
    sub->add_option("--ca-file", ca_file, "trust anchor for an https credmon");
  };
  auto* check = app.add_subcommand("check", "report Ready or where to log in");
  common(check);
  auto* stage = app.add_subcommand("stage", "stage tokens into a sandbox");
  common(stage);
  stage->add_option("--sandbox", sandbox, "job sandbox directory")->required();
  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }

  try {
    if (user.empty()) {
      std::cerr << "stager: no user; pass --user\n";
      return 2;
    }
    options.store_root = store;
    options.ca_file = ca_file;
    auto const desc = credxfer::LoadSubmitDescription(submit_file);
    auto const result = credxfer::EnsureCredentials(desc, user, options);
    if (!result.ready) {
      std::cout << "Hello, " << user << ".\n";
      std::cout << "Please visit: " << result.url << "\n";
      return 1;
    }
    if (check->parsed()) {
      std::cout << "Ready\n";
      return 0;
    }
    if (store.empty()) {
      std::cerr << "stager: staging needs --store or CREDMON_STORE\n";
      return 2;
    }
    credxfer::CredentialVault vault(store);
    auto dir = credxfer::StageSandbox(desc, user, vault, sandbox);
    std::cout << "_CONDOR_CREDS=" << dir.string() << "\n";
    return 0;
  } catch (credxfer::Error const& e) {
    std::cerr << "stager: " << e.what() << "\n";
    return e.code() == credxfer::ErrorCode::kCredmonUnreachable ? 3 : 2;
  } catch (std::exception const& e) {
    std::cerr << "stager: " << e.what() << "\n";
    return 2;
  }
}

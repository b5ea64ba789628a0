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
#include "testing/test_util.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include "credxfer/random.h"
#include "credxfer/url.h"

extern char** environ;

namespace credxfer::testing {
namespace {

std::vector<std::string> MergedEnv(EnvOverrides const& env) {
  std::vector<std::string> out;
  for (char** e = environ; *e != nullptr; ++e) {
    std::string entry(*e);
    auto name = entry.substr(0, entry.find('='));
    bool replaced = false;
    for (auto const& [k, v] : env) replaced = replaced || k == name;
    if (!replaced) out.push_back(std::move(entry));
  }
  for (auto const& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

pid_t Spawn(std::vector<std::string> argv, EnvOverrides const& env,
            std::string const& out_path, std::string const& err_path,
            std::filesystem::path const& cwd = {}) {
  auto env_store = MergedEnv(env);
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::vector<char*> argp;
  for (auto& a : argv) argp.push_back(a.data());
  argp.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null",
                                   O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0600);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (!cwd.empty()) {
    posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());
  }
  // Daemons block SIGINT/SIGTERM and sigwait(); start them with a clean mask.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigmask(&attr, &empty);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK);
  pid_t pid = -1;
  int rc = posix_spawn(&pid, argp[0], &actions, &attr, argp.data(),
                       envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw std::runtime_error("cannot spawn " + argv[0] + ": " +
                             std::strerror(rc));
  }
  return pid;
}

std::string ReadAll(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int Wait(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + WTERMSIG(status);
}

}  // namespace

TempDir::TempDir() {
  auto pattern =
      (std::filesystem::temp_directory_path() / "credxfer-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed");
  }
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CommandResult RunCommand(std::vector<std::string> const& argv,
                         EnvOverrides const& env,
                         std::filesystem::path const& cwd) {
  TempDir scratch;
  auto out = scratch / "out";
  auto err = scratch / "err";
  auto pid = Spawn(argv, env, out.string(), err.string(), cwd);
  CommandResult result;
  result.exit_code = Wait(pid);
  result.out = ReadAll(out);
  result.err = ReadAll(err);
  return result;
}

Daemon::Daemon(std::vector<std::string> const& argv, EnvOverrides const& env,
               std::chrono::seconds startup) {
  auto base = std::filesystem::temp_directory_path() /
              ("credxfer-daemon-" + RandomHex(6));
  auto out = base.string() + ".out";
  stderr_path_ = base.string() + ".err";
  pid_ = Spawn(argv, env, out, stderr_path_.string());
  auto deadline = std::chrono::steady_clock::now() + startup;
  std::regex listening("listening on (\\S+)");
  while (std::chrono::steady_clock::now() < deadline) {
    std::smatch m;
    auto text = ReadAll(out);
    if (std::regex_search(text, m, listening)) {
      url_ = m[1].str();
      break;
    }
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  std::filesystem::remove(out);
  if (url_.empty()) {
    auto err = Stderr();
    Stop();
    throw std::runtime_error("daemon " + argv[0] + " did not start: " + err);
  }
}

Daemon::~Daemon() {
  Stop();
  std::error_code ec;
  std::filesystem::remove(stderr_path_, ec);
}

int Daemon::port() const { return ParseUrl(url_).port; }

std::string Daemon::Stderr() const { return ReadAll(stderr_path_); }

void Daemon::Stop() {
  if (pid_ <= 0) return;
  ::kill(pid_, SIGTERM);
  for (int i = 0; i < 250; ++i) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::kill(pid_, SIGKILL);
  Wait(pid_);
  pid_ = -1;
}

TlsFiles MakeSelfSignedCert(std::filesystem::path const& dir) {
  EVP_PKEY* key = EVP_EC_gen("P-256");
  X509* cert = X509_new();
  X509_set_version(cert, 2);
  ASN1_INTEGER_set(X509_get_serialNumber(cert), 1);
  X509_gmtime_adj(X509_getm_notBefore(cert), -60);
  X509_gmtime_adj(X509_getm_notAfter(cert), 60L * 60 * 24);
  X509_set_pubkey(cert, key);
  X509_NAME* name = X509_get_subject_name(cert);
  X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                             reinterpret_cast<unsigned char const*>("localhost"),
                             -1, -1, 0);
  X509_set_issuer_name(cert, name);
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, cert, cert, nullptr, nullptr, 0);
  for (auto const& [nid, value] :
       std::vector<std::pair<int, char const*>>{
           {NID_subject_alt_name, "IP:127.0.0.1,DNS:localhost"},
           {NID_basic_constraints, "critical,CA:TRUE"}}) {
    X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
  }
  X509_sign(cert, key, EVP_sha256());

  TlsFiles files{dir / "cert.pem", dir / "key.pem"};
  FILE* f = std::fopen(files.cert.c_str(), "w");
  PEM_write_X509(f, cert);
  std::fclose(f);
  f = std::fopen(files.key.c_str(), "w");
  PEM_write_PrivateKey(f, key, nullptr, nullptr, 0, nullptr, nullptr);
  std::fclose(f);
  X509_free(cert);
  EVP_PKEY_free(key);
  return files;
}

HttpResult HttpGet(std::string const& url_text, std::string const& ca_file) {
  auto const url = ParseUrl(url_text);
  httplib::Client client(url.Origin());
  client.set_follow_location(false);
  client.set_url_encode(false);
  client.set_read_timeout(std::chrono::seconds(30));
  if (!ca_file.empty()) client.set_ca_cert_path(ca_file);
  auto result = client.Get(url.target);
  if (!result) {
    throw std::runtime_error("GET " + url_text + ": " +
                             httplib::to_string(result.error()));
  }
  return HttpResult{result->status, result->body,
                    result->get_header_value("Location")};
}

HttpResult HttpPostJson(std::string const& url_text, std::string const& body,
                        std::string const& ca_file) {
  auto const url = ParseUrl(url_text);
  httplib::Client client(url.Origin());
  client.set_read_timeout(std::chrono::seconds(30));
  if (!ca_file.empty()) client.set_ca_cert_path(ca_file);
  auto result = client.Post(url.target, body, "application/json");
  if (!result) {
    throw std::runtime_error("POST " + url_text + ": " +
                             httplib::to_string(result.error()));
  }
  return HttpResult{result->status, result->body,
                    result->get_header_value("Location")};
}

std::vector<std::string> LoginLinks(std::string const& html) {
  std::vector<std::string> links;
  std::regex link(R"re(<a class="login" href="([^"]+)")re");
  for (auto it = std::sregex_iterator(html.begin(), html.end(), link);
       it != std::sregex_iterator(); ++it) {
    // The page HTML-escapes attribute values.
    links.push_back(std::regex_replace((*it)[1].str(), std::regex("&amp;"), "&"));
  }
  return links;
}

std::vector<HttpResult> ScriptedConsent(std::string const& key_url,
                                        std::string const& ca_file) {
  std::vector<HttpResult> seen;
  auto const origin = ParseUrl(key_url).Origin();
  auto page = HttpGet(key_url, ca_file);
  seen.push_back(page);
  for (auto const& link : LoginLinks(page.body)) {
    auto login = HttpGet(origin + link, ca_file);
    seen.push_back(login);
    if (login.status != 302) continue;
    auto authorize = HttpGet(login.location);
    seen.push_back(authorize);
    if (authorize.status != 302) continue;
    seen.push_back(HttpGet(authorize.location, ca_file));
  }
  return seen;
}

std::filesystem::path WriteMockProviderConfig(
    std::filesystem::path const& dir, std::string const& mock_base,
    std::string const& client_id, std::string const& client_secret,
    std::string const& allowed_scopes) {
  auto secret = dir / "client_secret";
  {
    std::ofstream(secret) << client_secret << "\n";
  }
  std::filesystem::permissions(secret, std::filesystem::perms::owner_read |
                                           std::filesystem::perms::owner_write);
  auto config = dir / "credmon.conf";
  std::ofstream out(config);
  out << "# mock provider\n"
      << "ONEDRIVE_CLIENT_ID = " << client_id << "\n"
      << "ONEDRIVE_CLIENT_SECRET_FILE = " << secret.string() << "\n"
      << "ONEDRIVE_AUTHORIZATION_URL = " << mock_base
      << "/common/oauth2/v2.0/authorize\n"
      << "ONEDRIVE_TOKEN_URL = " << mock_base << "/common/oauth2/v2.0/token\n"
      << "ONEDRIVE_ALLOWED_SCOPES = " << allowed_scopes << "\n";
  return config;
}

std::string SlurpTree(std::filesystem::path const& dir) {
  std::string all;
  std::error_code ec;
  for (auto const& entry :
       std::filesystem::recursive_directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) all += ReadAll(entry.path());
  }
  return all;
}

std::filesystem::path ToolPath(std::string const& name) {
  return std::filesystem::path(CREDXFER_TOOLS_DIR) / name;
}

}  // namespace credxfer::testing

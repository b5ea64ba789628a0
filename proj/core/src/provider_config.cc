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

#include "credxfer/provider_config.h"

#include <algorithm>
#include <cctype>

#include "credxfer/error.h"
#include "credxfer/token.h"
#include "credxfer/url.h"

namespace credxfer {

std::string Trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

KeyValueConfig KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(line_no) + ": expected KEY = VALUE");
    }
    auto key = Trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(line_no) + ": empty key");
    }
    config.entries_[key] = Trim(std::string_view(line).substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(std::filesystem::path const& path) {
  try {
    return Parse(ReadFile(path));
  } catch (Error const& e) {
    if (e.code() == ErrorCode::kIoFailure) {
      throw Error(ErrorCode::kConfigError, e.what());
    }
    throw;
  }
}

std::optional<std::string> KeyValueConfig::Get(std::string const& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ValidateProviderConfig(ProviderConfig const& cfg,
                            bool allow_insecure_http) {
  if (!IsValidProviderName(cfg.name)) {
    throw Error(ErrorCode::kConfigError,
                "invalid provider name '" + cfg.name + "'");
  }
  if (cfg.client_id.empty()) {
    throw Error(ErrorCode::kConfigError, cfg.name + ": empty client id");
  }
  for (auto const* url : {&cfg.authorize_url, &cfg.token_url}) {
    Url parsed;
    try {
      parsed = ParseUrl(*url);
    } catch (Error const& e) {
      throw Error(ErrorCode::kConfigError, cfg.name + ": " + e.what());
    }
    if (parsed.scheme != "https" && !allow_insecure_http) {
      throw Error(ErrorCode::kConfigError,
                  cfg.name + ": " + *url +
                      " is not https (plain http needs the insecure test mode)");
    }
  }
}

std::vector<ProviderConfig> ProvidersFromConfig(KeyValueConfig const& config,
                                                bool allow_insecure_http) {
  static constexpr std::string_view kIdSuffix = "_CLIENT_ID";
  std::vector<ProviderConfig> out;
  for (auto const& [key, value] : config.entries()) {
    if (key.size() <= kIdSuffix.size() ||
        key.compare(key.size() - kIdSuffix.size(), kIdSuffix.size(),
                    kIdSuffix) != 0) {
      continue;
    }
    auto const prefix = key.substr(0, key.size() - kIdSuffix.size());
    auto require = [&](char const* suffix) {
      auto v = config.Get(prefix + suffix);
      if (!v || v->empty()) {
        throw Error(ErrorCode::kConfigError,
                    "missing configuration key " + prefix + suffix);
      }
      return *v;
    };
    ProviderConfig cfg;
    cfg.name = prefix;
    std::transform(cfg.name.begin(), cfg.name.end(), cfg.name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    cfg.client_id = value;
    cfg.client_secret_path = require("_CLIENT_SECRET_FILE");
    cfg.authorize_url = require("_AUTHORIZATION_URL");
    cfg.token_url = require("_TOKEN_URL");
    if (auto scopes = config.Get(prefix + "_ALLOWED_SCOPES")) {
      cfg.allowed_scopes = SplitList(*scopes);
    }
    ValidateProviderConfig(cfg, allow_insecure_http);
    out.push_back(std::move(cfg));
  }
  return out;
}

std::string ReadClientSecret(ProviderConfig const& cfg) {
  auto secret = ReadFile(cfg.client_secret_path);
  while (!secret.empty() &&
         std::isspace(static_cast<unsigned char>(secret.back()))) {
    secret.pop_back();
  }
  if (secret.empty()) {
    throw Error(ErrorCode::kIoFailure,
                "client secret file " + cfg.client_secret_path.string() +
                    " is empty");
  }
  return secret;
}

}  // namespace credxfer

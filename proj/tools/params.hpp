// Copyright 2026 The gsclip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Parameter resolution for the command-line tool. Each value comes from the
// first of: command-line flag, GSCLIP_<NAME> environment variable, the JSON
// config file (subcommand section, then top level), built-in default.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsclip/error.hpp"
#include "gsclip/text.hpp"
#include "json.hpp"

namespace gsclip::cli {

inline std::string env_name(const std::string& name) {
  std::string out = "GSCLIP_";
  for (char c : name) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string config_value_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) out += (out.empty() ? "" : ",") + config_value_string(e);
    return out;
  }
  if (v.is_null()) return "";
  return v.dump();
}

class ParamSet {
 public:
  struct Param {
    std::string name;
    std::string fallback;
    std::string value;
    std::string source;
    CLI::Option* option = nullptr;
    bool echo = true;
  };

  ParamSet(CLI::App* app, std::string section) : app_(app), section_(std::move(section)) {}

  void add(const std::string& name, std::string fallback, const std::string& help, bool echo = true) {
    auto& p = params_.emplace_back();
    p.name = name;
    p.fallback = std::move(fallback);
    p.echo = echo;
    std::string desc = help;
    if (!p.fallback.empty()) desc += " [default: " + p.fallback + "]";
    p.option = app_->add_option("--" + name, p.value, desc);
  }

  /// Fills every unset parameter from env, config, then default.
  void resolve(const nlohmann::json& config) {
    for (auto& p : params_) {
      if (p.option->count() > 0) {
        p.source = "flag";
        continue;
      }
      if (const char* env = std::getenv(env_name(p.name).c_str()); env != nullptr) {
        p.value = env;
        p.source = "env";
        continue;
      }
      if (auto v = from_config(config, p.name)) {
        p.value = *v;
        p.source = "config";
        continue;
      }
      p.value = p.fallback;
      p.source = "default";
    }
  }

  const std::string& str(const std::string& name) const { return find(name).value; }

  const std::string& required(const std::string& name) const {
    const auto& v = find(name).value;
    if (v.empty()) throw Error(ErrorCode::InvalidConfig, "--" + name + " is required");
    return v;
  }

  double real(const std::string& name) const {
    const auto& v = str(name);
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    if (v == "inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || std::isnan(d)) {
      throw Error(ErrorCode::InvalidConfig, "--" + name + " expects a number, got '" + v + "'");
    }
    return d;
  }

  std::uint64_t count(const std::string& name) const {
    const auto& v = str(name);
    char* end = nullptr;
    errno = 0;
    const auto n = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) {
      throw Error(ErrorCode::InvalidConfig, "--" + name + " expects a non-negative integer, got '" + v + "'");
    }
    return n;
  }

  bool boolean(const std::string& name) const {
    const auto v = text::to_lower(str(name));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::InvalidConfig, "--" + name + " expects true or false, got '" + v + "'");
  }

  std::vector<std::string> list(const std::string& name) const {
    std::vector<std::string> out;
    const auto& v = str(name);
    std::size_t pos = 0;
    while (pos <= v.size()) {
      auto comma = v.find(',', pos);
      if (comma == std::string::npos) comma = v.size();
      auto item = text::trim(std::string_view(v).substr(pos, comma - pos));
      if (!item.empty()) out.push_back(std::move(item));
      pos = comma + 1;
    }
    return out;
  }

  bool given(const std::string& name) const { return !find(name).value.empty(); }

  /// {"name": {"value": s, "source": s}} for every echoed parameter.
  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& p : params_) {
      if (p.echo) j[p.name] = {{"value", p.value}, {"source", p.source}};
    }
    return j;
  }

 private:
  const Param& find(const std::string& name) const {
    for (const auto& p : params_) {
      if (p.name == name) return p;
    }
    throw std::logic_error("unknown parameter " + name);
  }

  std::optional<std::string> from_config(const nlohmann::json& config, const std::string& name) const {
    if (!config.is_object()) return std::nullopt;
    if (auto sec = config.find(section_); sec != config.end() && sec->is_object()) {
      if (auto v = sec->find(name); v != sec->end()) return config_value_string(*v);
    }
    if (auto v = config.find(name); v != config.end() && !v->is_object()) return config_value_string(*v);
    return std::nullopt;
  }

  CLI::App* app_;
  std::string section_;
  std::deque<Param> params_;
};

}  // namespace gsclip::cli

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

// Client for an optional prefix-completion service.
//
//   POST <endpoint>   {"prefix": s, "max_candidates": n, "min_log_prob": r|null}
//   200               {"completions": [{"text": s, "log_prob": r}, ...]}
//
// min_log_prob is null when unbounded. Connection failures and 5xx answers
// are retried with exponential backoff.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "gsclip/error.hpp"
#include "gsclip/generators.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gsclip::io {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds timeout{10000};
};

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    throw Error(ErrorCode::InvalidConfig, "endpoint must be an http:// URL, got '" + std::string(url) + "'");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint e;
  e.base = std::string(url.substr(0, path_begin));
  e.path = path_begin == std::string_view::npos ? "/" : std::string(url.substr(path_begin));
  if (e.base.size() <= scheme_end + 3) throw Error(ErrorCode::InvalidConfig, "endpoint has no host");
  return e;
}

/// Parses a completion response body and checks every text extends `prefix`.
inline std::vector<gen::LMCandidateRecord> parse_completion_response(std::string_view body,
                                                                     std::string_view prefix,
                                                                     std::string_view object) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, e.what());
  }
  const auto list = j.is_object() ? j.find("completions") : j.end();
  if (list == j.end() || !list->is_array()) {
    throw Error(ErrorCode::MalformedResponse, "response lacks a 'completions' array");
  }
  std::vector<gen::LMCandidateRecord> out;
  for (const auto& c : *list) {
    if (!c.is_object()) throw Error(ErrorCode::MalformedResponse, "completion is not an object");
    const auto text = c.find("text");
    const auto lp = c.find("log_prob");
    if (text == c.end() || !text->is_string() || lp == c.end() || !lp->is_number()) {
      throw Error(ErrorCode::MalformedResponse, "completion needs string 'text' and numeric 'log_prob'");
    }
    auto t = text->get<std::string>();
    if (t.compare(0, prefix.size(), prefix) != 0) {
      throw Error(ErrorCode::PrefixViolation, "completion '" + t + "' does not start with '" + std::string(prefix) + "'");
    }
    const double v = lp->get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedResponse, "log_prob is not finite");
    out.push_back({std::string(object), std::move(t), v});
  }
  return out;
}

inline std::vector<gen::LMCandidateRecord> fetch_completions(std::string_view endpoint, std::string_view prefix,
                                                             std::string_view object, std::size_t max_candidates,
                                                             double min_log_prob, const RetryPolicy& retry = {}) {
  const Endpoint ep = parse_endpoint(endpoint);
  nlohmann::ordered_json request{{"prefix", prefix}, {"max_candidates", max_candidates}};
  request["min_log_prob"] = std::isfinite(min_log_prob) ? nlohmann::ordered_json(min_log_prob) : nullptr;
  const std::string body = request.dump();

  httplib::Client client(ep.base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(retry.timeout).count();
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);

  std::string last_error;
  auto backoff = retry.initial_backoff;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(ep.path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::MalformedResponse, "HTTP " + std::to_string(res->status) + " from " + std::string(endpoint));
    }
    return parse_completion_response(res->body, prefix, object);
  }
  throw Error(ErrorCode::ServiceUnreachable, std::string(endpoint) + " failed after " +
                                                 std::to_string(retry.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace gsclip::io

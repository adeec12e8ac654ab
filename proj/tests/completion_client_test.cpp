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

#include "gsclip/io/completion_client.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

namespace gsclip::io {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidConfig;
}

const RetryPolicy kFast{3, std::chrono::milliseconds(5), std::chrono::milliseconds(2000)};

/// Local completion service; `reply` decides each response.
class FakeService {
 public:
  explicit FakeService(std::function<void(const httplib::Request&, httplib::Response&, int)> reply) {
    server_.Post("/complete", [this, reply](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      reply(req, res, calls_++);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/complete"; }
  int calls() const { return calls_; }
  const std::string& last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::string last_body_;
};

const char* kGood =
    R"({"completions":[{"text":"a photo of a cat with a hat","log_prob":-2.0},)"
    R"({"text":"a photo of a cat with grass","log_prob":-1.0}]})";

TEST(CompletionClient, Success) {
  FakeService svc([](const auto&, auto& res, int) { res.set_content(kGood, "application/json"); });
  const auto out = fetch_completions(svc.url(), "a photo of a cat with", "cat", 10, -5.0, kFast);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].text, "a photo of a cat with grass");
  EXPECT_EQ(out[1].log_prob, -1.0);
  EXPECT_EQ(out[0].object, "cat");
  const auto req = nlohmann::json::parse(svc.last_body());
  EXPECT_EQ(req.at("prefix"), "a photo of a cat with");
  EXPECT_EQ(req.at("max_candidates"), 10);
  EXPECT_EQ(req.at("min_log_prob"), -5.0);
}

TEST(CompletionClient, UnboundedThresholdIsNull) {
  FakeService svc([](const auto&, auto& res, int) { res.set_content(kGood, "application/json"); });
  fetch_completions(svc.url(), "a photo of a cat with", "cat", 10, -std::numeric_limits<double>::infinity(), kFast);
  EXPECT_TRUE(nlohmann::json::parse(svc.last_body()).at("min_log_prob").is_null());
}

TEST(CompletionClient, PrefixViolationAndMalformed) {
  FakeService svc([](const auto&, auto& res, int) { res.set_content(kGood, "application/json"); });
  EXPECT_EQ(code_of([&] { fetch_completions(svc.url(), "a photo of a dog", "dog", 10, -5.0, kFast); }),
            ErrorCode::PrefixViolation);
  EXPECT_EQ(code_of([] { parse_completion_response("{\"completions\":{}}", "", "cat"); }),
            ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_completion_response("not json", "", "cat"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_completion_response(R"({"completions":[{"text":"x"}]})", "", "cat"); }),
            ErrorCode::MalformedResponse);
}

TEST(CompletionClient, ClientErrorIsNotRetried) {
  FakeService svc([](const auto&, auto& res, int) { res.status = 400; });
  EXPECT_EQ(code_of([&] { fetch_completions(svc.url(), "a", "cat", 1, 0.0, kFast); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(svc.calls(), 1);
}

TEST(CompletionClient, RetriesServerErrorsThenSucceeds) {
  FakeService svc([](const auto&, auto& res, int call) {
    if (call < 2) {
      res.status = 503;
      return;
    }
    res.set_content(kGood, "application/json");
  });
  EXPECT_EQ(fetch_completions(svc.url(), "a photo of a cat", "cat", 10, -5.0, kFast).size(), 2u);
  EXPECT_EQ(svc.calls(), 3);
}

TEST(CompletionClient, GivesUpAfterRetries) {
  FakeService svc([](const auto&, auto& res, int) { res.status = 500; });
  EXPECT_EQ(code_of([&] { fetch_completions(svc.url(), "a", "cat", 1, 0.0, kFast); }), ErrorCode::ServiceUnreachable);
  EXPECT_EQ(svc.calls(), 4);
}

TEST(CompletionClient, UnreachableAndBadEndpoint) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  const auto url = "http://127.0.0.1:" + std::to_string(port) + "/complete";
  EXPECT_EQ(code_of([&] { fetch_completions(url, "a", "cat", 1, 0.0, kFast); }), ErrorCode::ServiceUnreachable);
  EXPECT_EQ(code_of([] { fetch_completions("https://example.org/x", "a", "cat", 1, 0.0, kFast); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(parse_endpoint("http://h:1").path, "/");
}

}  // namespace
}  // namespace gsclip::io

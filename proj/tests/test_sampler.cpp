// Copyright 2026 The chartens Authors. All Rights Reserved.
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

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "chartens/error.hpp"
#include "chartens/label_align.hpp"
#include "chartens/sampler.hpp"
#include "chartens/tsv_ingest.hpp"
#include "oracles.hpp"

using namespace chartens;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected chartens::Error");
  return ErrorKind::Io;
}

// Local chat-completions stand-in that replays a scripted list of responses.
class FakeEndpoint {
 public:
  struct Reply {
    int status;
    std::string body;
  };

  explicit FakeEndpoint(std::vector<Reply> script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      const auto& r = script_[std::min(calls_, script_.size() - 1)];
      ++calls_;
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  SamplerConfig config() const {
    SamplerConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    cfg.api_key_env = "CHARTENS_TEST_KEY";
    cfg.backoff_base_s = 0.001;
    cfg.request_timeout_s = 5.0;
    return cfg;
  }
  std::size_t calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::string body(std::size_t i) {
    std::lock_guard lock(mu_);
    return bodies_.at(i);
  }
  std::string auth(std::size_t i) {
    std::lock_guard lock(mu_);
    return auth_.at(i);
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<Reply> script_;
  std::size_t calls_ = 0;
  std::vector<std::string> bodies_, auth_;
};

std::string ok_body(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
                        {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}}
      .dump();
}

const std::string kImage = std::string("\x89PNG\r\n\x1a\n", 8) + "pixels";

}  // namespace

TEST_CASE("base64 test vectors") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foo") == "Zm9v");
  CHECK(base64_encode("foob") == "Zm9vYg==");
  CHECK(base64_encode("fooba") == "Zm9vYmE=");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  CHECK(base64_encode(std::string("\xff\x00\xfe", 3)) == "/wD+");
}

TEST_CASE("mime sniffing") {
  CHECK(sniff_image_mime(kImage) == "image/png");
  CHECK(sniff_image_mime("\xFF\xD8\xFF\xE0") == "image/jpeg");
  CHECK(sniff_image_mime("GIF89a") == "image/gif");
  CHECK(sniff_image_mime(std::string("RIFF\x10\x00\x00\x00WEBPVP8 ", 16)) == "image/webp");
}

TEST_CASE("request body carries model, temperature, prompt and image") {
  SamplerConfig cfg;
  cfg.temperature = 0.7;
  auto doc = nlohmann::json::parse(build_chat_request(kImage, cfg));
  CHECK(doc["model"] == cfg.model_id);
  CHECK(doc["temperature"].get<double>() == 0.7);
  REQUIRE(doc["messages"].size() == 1);
  const auto& content = doc["messages"][0]["content"];
  CHECK(doc["messages"][0]["role"] == "user");
  CHECK(content[0]["type"] == "text");
  CHECK(content[0]["text"] == std::string(kDefaultPrompt));
  CHECK(content[1]["type"] == "image_url");
  CHECK(content[1]["image_url"]["url"] == "data:image/png;base64," + base64_encode(kImage));
}

TEST_CASE("response parsing") {
  RequestStats stats;
  CHECK(parse_chat_response(ok_body("hello"), &stats) == "hello");
  CHECK(stats.prompt_tokens == 11);
  CHECK(stats.completion_tokens == 7);
  CHECK(parse_chat_response(R"({"choices":[{"message":{"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]}}]})") == "ab");
  CHECK(kind_of([] { parse_chat_response("not json"); }) == ErrorKind::MalformedResponse);
  CHECK(kind_of([] { parse_chat_response(R"({"choices":[]})"); }) == ErrorKind::MalformedResponse);
  CHECK(kind_of([] { parse_chat_response(R"({"choices":[{"message":{"content":null}}]})"); }) ==
        ErrorKind::MalformedResponse);
}

TEST_CASE("live transport against a local endpoint") {
  ::setenv("CHARTENS_TEST_KEY", "sk-test", 1);

  SUBCASE("happy path") {
    FakeEndpoint ep({{200, ok_body("```tsv\n\tA\nx\t1\n```")}});
    RequestStats stats;
    CHECK(vlm_sample(kImage, ep.config(), nullptr, &stats) == "```tsv\n\tA\nx\t1\n```");
    CHECK(ep.calls() == 1);
    CHECK(stats.requests == 1);
    CHECK(ep.auth(0) == "Bearer sk-test");
    auto doc = nlohmann::json::parse(ep.body(0));
    CHECK(doc["model"] == ep.config().model_id);
  }
  SUBCASE("two rate limits then success") {
    FakeEndpoint ep({{429, "{}"}, {429, "{}"}, {200, ok_body("done")}});
    CHECK(vlm_sample(kImage, ep.config()) == "done");
    CHECK(ep.calls() == 3);
  }
  SUBCASE("rate limited beyond retries") {
    FakeEndpoint ep({{429, "{}"}});
    auto cfg = ep.config();
    cfg.max_retries = 2;
    CHECK(kind_of([&] { vlm_sample(kImage, cfg); }) == ErrorKind::RateLimited);
    CHECK(ep.calls() == 3);
  }
  SUBCASE("unauthorized is not retried") {
    FakeEndpoint ep({{401, R"({"error":"bad key"})"}});
    CHECK(kind_of([&] { vlm_sample(kImage, ep.config()); }) == ErrorKind::AuthError);
    CHECK(ep.calls() == 1);
  }
  SUBCASE("server errors exhaust retries") {
    FakeEndpoint ep({{503, "{}"}});
    CHECK(kind_of([&] { vlm_sample(kImage, ep.config()); }) == ErrorKind::TransportError);
    CHECK(ep.calls() == 4);
  }
  SUBCASE("other client errors fail fast") {
    FakeEndpoint ep({{400, "{}"}});
    CHECK(kind_of([&] { vlm_sample(kImage, ep.config()); }) == ErrorKind::TransportError);
    CHECK(ep.calls() == 1);
  }
  SUBCASE("malformed body") {
    FakeEndpoint ep({{200, R"({"choices":[{"message":{}}]})"}});
    CHECK(kind_of([&] { vlm_sample(kImage, ep.config()); }) == ErrorKind::MalformedResponse);
  }
  SUBCASE("sampler wrapper with shared gate") {
    FakeEndpoint ep({{200, ok_body("t")}});
    auto gate = std::make_shared<RequestGate>(2, 0.0);
    auto stats = std::make_shared<RequestStats>();
    VlmSampler s(kImage, ep.config(), gate, stats);
    std::vector<std::thread> workers;
    for (int i = 0; i < 4; ++i) workers.emplace_back([&, i] { CHECK(s.sample(i) == "t"); });
    for (auto& w : workers) w.join();
    CHECK(stats->requests == 4);
  }
}

TEST_CASE("unreachable endpoint and missing credentials") {
  ::setenv("CHARTENS_TEST_KEY", "sk-test", 1);
  SamplerConfig cfg;
  cfg.api_key_env = "CHARTENS_TEST_KEY";
  cfg.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  cfg.max_retries = 1;
  cfg.backoff_base_s = 0.001;
  cfg.request_timeout_s = 1.0;
  CHECK(kind_of([&] { vlm_sample(kImage, cfg); }) == ErrorKind::TransportError);

  cfg.api_key_env = "CHARTENS_TEST_KEY_UNSET";
  ::unsetenv("CHARTENS_TEST_KEY_UNSET");
  CHECK(kind_of([&] { vlm_sample(kImage, cfg); }) == ErrorKind::AuthError);
  CHECK(kind_of([&] { vlm_sample("", SamplerConfig{}); }) == ErrorKind::Io);

  SamplerConfig bad;
  bad.temperature = -1.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("request gate spaces request starts") {
  RequestGate gate(4, 200.0);
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) auto ticket = gate.acquire();
  auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(elapsed >= std::chrono::milliseconds(19));
}

TEST_CASE("identity noise round-trips") {
  std::mt19937_64 rng(31);
  NoiseModel nm;
  CHECK(nm.is_identity());
  for (int i = 0; i < 50; ++i) {
    auto truth = chartens::testing::random_table(rng, 3 + rng() % 8, 1 + rng() % 3);
    if (i % 5 == 0) truth.at(0, 0).reset();
    CHECK(ingest(simulated_sample(truth, nm, i), 0) == truth);
  }
}

TEST_CASE("value noise has the expected magnitude") {
  std::mt19937_64 rng(32);
  auto truth = chartens::testing::random_table(rng, 10, 3);
  NoiseModel nm;
  nm.value_noise_rel = 0.05;
  nm.seed = 77;
  double sum = 0.0;
  std::size_t n = 0;
  for (int d = 0; d < 400; ++d) {
    auto s = ingest(simulated_sample(truth, nm, d), d);
    REQUIRE(s.row_labels == truth.row_labels);
    REQUIRE(s.col_labels == truth.col_labels);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      const double rel = std::fabs(*s.values[k] - *truth.values[k]) / std::fabs(*truth.values[k]);
      CHECK(rel < 0.05 * 6);
      sum += rel;
      ++n;
    }
  }
  const double expected = 0.05 * std::sqrt(2.0 / std::acos(-1.0));
  CHECK(n >= 1000);
  CHECK(sum / static_cast<double>(n) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("transposed emission is re-oriented by ingest") {
  std::mt19937_64 rng(33);
  NoiseModel nm;
  nm.p_transpose = 1.0;
  for (int i = 0; i < 20; ++i) {
    auto truth = chartens::testing::random_table(rng, 4 + rng() % 6, 1 + rng() % 3);
    auto text = simulated_sample(truth, nm, i);
    auto raw = parse_raw(extract_tsv_block(text), 0);
    CHECK(raw.rows.size() == truth.cols() + 1);
    CHECK(ingest(text, 0) == truth);
  }
}

TEST_CASE("samples are reproducible per draw index") {
  std::mt19937_64 rng(34);
  auto truth = chartens::testing::random_table(rng, 8, 3);
  NoiseModel nm;
  nm.value_noise_rel = 0.1;
  nm.p_drop_row = nm.p_drop_col = nm.p_extra_row = nm.p_label_typo = 0.2;
  nm.p_transpose = nm.p_cell_blank = nm.p_ragged = nm.p_outlier = 0.2;
  nm.seed = 5;
  for (int d = 0; d < 30; ++d) CHECK(simulated_sample(truth, nm, d) == simulated_sample(truth, nm, d));
  CHECK(simulated_sample(truth, nm, 0) != simulated_sample(truth, nm, 1));
  NoiseModel other = nm;
  other.seed = 6;
  CHECK(simulated_sample(truth, nm, 0) != simulated_sample(truth, other, 0));
}

TEST_CASE("spurious label pool never self-merges") {
  const auto& pool = spurious_label_pool();
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      INFO(pool[i] << " / " << pool[j]);
      CHECK(nls(pool[i], pool[j]) < 0.5);
    }
}

TEST_CASE("spurious rows keep away from truth labels") {
  std::mt19937_64 rng(35);
  NoiseModel nm;
  nm.p_extra_row = 1.0;
  for (int i = 0; i < 20; ++i) {
    auto truth = chartens::testing::random_table(rng, 6, 2);
    auto s = ingest(simulated_sample(truth, nm, i), 0);
    REQUIRE(s.rows() == truth.rows() + 1);
    for (const auto& l : truth.row_labels) CHECK(nls(l, s.row_labels.back()) < 0.5);
    for (const auto& l : truth.col_labels) CHECK(nls(l, s.row_labels.back()) < 0.5);
  }
}

TEST_CASE("noise model validation") {
  NoiseModel nm;
  nm.p_drop_row = 1.5;
  CHECK(kind_of([&] { nm.validate(); }) == ErrorKind::InvalidConfig);
  nm = {};
  nm.value_noise_rel = -0.1;
  CHECK(kind_of([&] { nm.validate(); }) == ErrorKind::InvalidConfig);
}

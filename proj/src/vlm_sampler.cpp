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

#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "chartens/error.hpp"
#include "chartens/sampler.hpp"

namespace chartens {

const std::string_view kDefaultPrompt =
    "Here is an image of a chart. \n"
    "Please extract the numerical data it represents and return it in TSV (tab-separated values) "
    "format with appropriate headers. \n"
    "Copy the headers exactly as they are in the image. \n"
    "IMPORTANT: For the TSV, use tab (\\t) as the separator.\n"
    "Remember: The sole output should be the TSV table surrounded by ```tsv ```. Nothing else.";

void SamplerConfig::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be >= 0");
  if (max_retries < 0) throw Error(ErrorKind::InvalidConfig, "max_retries must be >= 0");
  if (!(request_timeout_s > 0.0)) throw Error(ErrorKind::InvalidConfig, "request_timeout must be > 0");
  if (!(backoff_base_s >= 0.0)) throw Error(ErrorKind::InvalidConfig, "backoff base must be >= 0");
}

// ---------------------------------------------------------------------------
// RequestGate

RequestGate::RequestGate(int max_concurrent, double max_requests_per_s)
    : slots_(std::max(1, max_concurrent)),
      min_spacing_(max_requests_per_s > 0.0
                       ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(1.0 / max_requests_per_s))
                       : std::chrono::steady_clock::duration::zero()),
      next_start_(std::chrono::steady_clock::now()) {}

std::unique_ptr<RequestGate::Ticket> RequestGate::acquire() {
  std::chrono::steady_clock::time_point start;
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
    start = std::max(next_start_, std::chrono::steady_clock::now());
    next_start_ = start + min_spacing_;
  }
  std::this_thread::sleep_until(start);
  return std::make_unique<Ticket>(*this);
}

void RequestGate::release() {
  {
    std::lock_guard lock(mu_);
    ++slots_;
  }
  cv_.notify_one();
}

// ---------------------------------------------------------------------------
// Wire format

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (std::size_t rest = bytes.size() - i) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string_view sniff_image_mime(std::string_view bytes) {
  if (bytes.starts_with("\x89PNG")) return "image/png";
  if (bytes.starts_with("\xFF\xD8\xFF")) return "image/jpeg";
  if (bytes.starts_with("GIF8")) return "image/gif";
  if (bytes.size() >= 12 && bytes.starts_with("RIFF") && bytes.substr(8, 4) == "WEBP")
    return "image/webp";
  return "image/png";
}

std::string build_chat_request(std::string_view image_bytes, const SamplerConfig& cfg) {
  const std::string data_url =
      "data:" + std::string(sniff_image_mime(image_bytes)) + ";base64," + base64_encode(image_bytes);
  nlohmann::json body = {
      {"model", cfg.model_id},
      {"temperature", cfg.temperature},
      {"messages",
       nlohmann::json::array({{{"role", "user"},
                               {"content", nlohmann::json::array({
                                               {{"type", "text"}, {"text", cfg.prompt_text}},
                                               {{"type", "image_url"}, {"image_url", {{"url", data_url}}}},
                                           })}}})},
  };
  return body.dump();
}

std::string parse_chat_response(std::string_view body, RequestStats* stats) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::MalformedResponse, "response is not JSON");
  if (stats && doc.contains("usage") && doc["usage"].is_object()) {
    const auto& usage = doc["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_integer())
      stats->prompt_tokens += usage["prompt_tokens"].get<long>();
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_integer())
      stats->completion_tokens += usage["completion_tokens"].get<long>();
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    throw Error(ErrorKind::MalformedResponse, "no choices in response");
  const auto& choice = doc["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content"))
    throw Error(ErrorKind::MalformedResponse, "first choice has no message content");
  const auto& content = choice["message"]["content"];
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    bool any = false;
    for (const auto& part : content)
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") &&
          part["text"].is_string()) {
        text += part["text"].get<std::string>();
        any = true;
      }
    if (any) return text;
  }
  throw Error(ErrorKind::MalformedResponse, "first choice has no text content");
}

// ---------------------------------------------------------------------------
// Transport

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re))
    throw Error(ErrorKind::InvalidConfig, "endpoint_url must be http(s)://host[:port]/path: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

std::chrono::duration<double> backoff_delay(double base_s, int attempt) {
  thread_local std::mt19937 gen{std::random_device{}()};
  double jitter = std::uniform_real_distribution<double>(0.0, 0.25)(gen);
  return std::chrono::duration<double>(base_s * std::ldexp(1.0, attempt) * (1.0 + jitter));
}

}  // namespace

std::string vlm_sample(std::string_view image_bytes, const SamplerConfig& cfg, RequestGate* gate,
                       RequestStats* stats) {
  cfg.validate();
  if (image_bytes.empty()) throw Error(ErrorKind::Io, "empty image");
  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (!key || !*key)
      throw Error(ErrorKind::AuthError, "environment variable " + cfg.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto endpoint = split_url(cfg.endpoint_url);
  const std::string body = build_chat_request(image_bytes, cfg);

  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration<double>(cfg.request_timeout_s);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client.set_connection_timeout(usec);
  client.set_read_timeout(usec);
  client.set_write_timeout(usec);

  Error last(ErrorKind::TransportError, "no attempt made");
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(cfg.backoff_base_s, attempt - 1));
    httplib::Result res;
    {
      std::unique_ptr<RequestGate::Ticket> ticket;
      if (gate) ticket = gate->acquire();
      if (stats) ++stats->requests;
      res = client.Post(endpoint.path, headers, body, "application/json");
    }
    if (!res) {
      last = Error(ErrorKind::TransportError, httplib::to_string(res.error()));
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) return parse_chat_response(res->body, stats);
    const std::string detail = "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200);
    if (status == 401 || status == 403) throw Error(ErrorKind::AuthError, detail);
    if (status == 429) {
      last = Error(ErrorKind::RateLimited, detail);
    } else if (status >= 500) {
      last = Error(ErrorKind::TransportError, detail);
    } else {
      throw Error(ErrorKind::TransportError, detail);
    }
  }
  throw last;
}

VlmSampler::VlmSampler(std::string image_bytes, SamplerConfig cfg, std::shared_ptr<RequestGate> gate,
                       std::shared_ptr<RequestStats> stats)
    : image_(std::move(image_bytes)), cfg_(std::move(cfg)), gate_(std::move(gate)), stats_(std::move(stats)) {}

std::string VlmSampler::sample(int) { return vlm_sample(image_, cfg_, gate_.get(), stats_.get()); }

}  // namespace chartens

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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "chartens/ensemble.hpp"
#include "chartens/table.hpp"

namespace chartens {

// Default extraction prompt sent with every chart image.
extern const std::string_view kDefaultPrompt;

struct SamplerConfig {
  std::string endpoint_url = "https://api.groq.com/openai/v1/chat/completions";
  std::string model_id = "meta-llama/llama-4-scout-17b-16e-instruct";
  double temperature = 0.0;
  // Name of the environment variable holding the bearer token; empty sends no token.
  std::string api_key_env = "OPENAI_API_KEY";
  double request_timeout_s = 120.0;
  int max_retries = 3;
  double backoff_base_s = 1.0;  // first retry delay; doubles per attempt, with jitter
  std::string prompt_text = std::string(kDefaultPrompt);

  void validate() const;
};

// Caps concurrent requests and enforces a minimum spacing between request
// starts. One gate is typically shared by every sampler in a batch.
class RequestGate {
 public:
  RequestGate(int max_concurrent, double max_requests_per_s);

  class Ticket {
   public:
    explicit Ticket(RequestGate& gate) : gate_(&gate) {}
    Ticket(const Ticket&) = delete;
    Ticket& operator=(const Ticket&) = delete;
    ~Ticket() { gate_->release(); }

   private:
    RequestGate* gate_;
  };

  // Blocks until a slot is free and the rate limit allows another start.
  [[nodiscard]] std::unique_ptr<Ticket> acquire();

 private:
  void release();

  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
  std::chrono::steady_clock::duration min_spacing_;
  std::chrono::steady_clock::time_point next_start_;
};

struct RequestStats {
  std::atomic<long> requests{0};
  std::atomic<long> prompt_tokens{0};
  std::atomic<long> completion_tokens{0};
};

std::string base64_encode(std::string_view bytes);
// image/png, image/jpeg, image/gif or image/webp from magic bytes; png otherwise.
std::string_view sniff_image_mime(std::string_view bytes);

// Chat-completions request body for one image.
std::string build_chat_request(std::string_view image_bytes, const SamplerConfig& cfg);
// Text of the first choice; throws MalformedResponse.
std::string parse_chat_response(std::string_view body, RequestStats* stats = nullptr);

// One blocking request with retries on transport errors, 429 and 5xx.
// Throws TransportError, AuthError (401/403, or missing key), RateLimited,
// MalformedResponse.
std::string vlm_sample(std::string_view image_bytes, const SamplerConfig& cfg,
                       RequestGate* gate = nullptr, RequestStats* stats = nullptr);

class VlmSampler : public Sampler {
 public:
  VlmSampler(std::string image_bytes, SamplerConfig cfg, std::shared_ptr<RequestGate> gate = nullptr,
             std::shared_ptr<RequestStats> stats = nullptr);
  std::string sample(int draw_index) override;

 private:
  std::string image_;
  SamplerConfig cfg_;
  std::shared_ptr<RequestGate> gate_;
  std::shared_ptr<RequestStats> stats_;
};

// Parametric corruption applied by the simulated sampler.
struct NoiseModel {
  double value_noise_rel = 0.0;  // sigma of multiplicative Gaussian noise
  double p_drop_row = 0.0;
  double p_drop_col = 0.0;
  double p_extra_row = 0.0;
  double p_label_typo = 0.0;
  double p_transpose = 0.0;
  double p_cell_blank = 0.0;
  double p_ragged = 0.0;
  // Gross outliers: a value cell is multiplied by outlier_factor.
  double p_outlier = 0.0;
  double outlier_factor = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_identity() const;
};

// Pool of labels used for spurious rows.
const std::vector<std::string>& spurious_label_pool();

// Deterministic function of (truth, nm, draw_index); returns a fenced ```tsv block.
std::string simulated_sample(const NormalizedTable& truth, const NoiseModel& nm, int draw_index);

class SimulatedSampler : public Sampler {
 public:
  SimulatedSampler(NormalizedTable truth, NoiseModel nm) : truth_(std::move(truth)), nm_(nm) {}
  std::string sample(int draw_index) override { return simulated_sample(truth_, nm_, draw_index); }

 private:
  NormalizedTable truth_;
  NoiseModel nm_;
};

}  // namespace chartens

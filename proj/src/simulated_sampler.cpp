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

#include <algorithm>
#include <random>

#include "chartens/error.hpp"
#include "chartens/label_align.hpp"
#include "chartens/sampler.hpp"

namespace chartens {

void NoiseModel::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorKind::InvalidConfig, std::string(name) + " must lie in [0,1]");
  };
  if (!(value_noise_rel >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be >= 0");
  prob(p_drop_row, "p_drop_row");
  prob(p_drop_col, "p_drop_col");
  prob(p_extra_row, "p_extra_row");
  prob(p_label_typo, "p_label_typo");
  prob(p_transpose, "p_transpose");
  prob(p_cell_blank, "p_cell_blank");
  prob(p_ragged, "p_ragged");
  prob(p_outlier, "p_outlier");
}

bool NoiseModel::is_identity() const {
  return value_noise_rel == 0.0 && p_drop_row == 0.0 && p_drop_col == 0.0 && p_extra_row == 0.0 &&
         p_label_typo == 0.0 && p_transpose == 0.0 && p_cell_blank == 0.0 && p_ragged == 0.0 &&
         p_outlier == 0.0;
}

const std::vector<std::string>& spurious_label_pool() {
  // Pairwise normalized Levenshtein similarity below 0.5, so entries never
  // merge with each other during clustering.
  static const std::vector<std::string> pool = {
      "Unlabeled", "Other", "Misc.", "Projection", "Reference", "Subtotal (est.)", "Baseline",
      "Q&A"};
  return pool;
}

namespace {

constexpr double kSpuriousTau = 0.5;

class DrawRng {
 public:
  DrawRng(std::uint64_t seed, int draw_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(draw_index), 0x5eedu};
    gen_.seed(seq);
  }
  bool chance(double p) { return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(gen_) < p; }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(gen_); }
  char letter() { return static_cast<char>('a' + index(26)); }

 private:
  std::mt19937_64 gen_;
};

std::vector<std::size_t> surviving(std::size_t n, double p_drop, DrawRng& rng) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (!rng.chance(p_drop)) keep.push_back(i);
  if (keep.empty() && n > 0) keep.push_back(rng.index(n));
  return keep;
}

std::string with_typo(std::string label, DrawRng& rng) {
  const std::size_t n = label.size();
  // Deletion only on longer labels so that short ones stay recognisable.
  const std::size_t ops = n >= 4 ? 3 : 2;
  switch (n == 0 ? 1 : rng.index(ops)) {
    case 0: {
      std::size_t pos = rng.index(n);
      char ch = rng.letter();
      while (ch == label[pos]) ch = rng.letter();
      label[pos] = ch;
      break;
    }
    case 1:
      label.insert(label.begin() + static_cast<long>(rng.index(n + 1)), rng.letter());
      break;
    default:
      label.erase(rng.index(n), 1);
  }
  return label;
}

}  // namespace

std::string simulated_sample(const NormalizedTable& truth, const NoiseModel& nm, int draw_index) {
  DrawRng rng(nm.seed, draw_index);
  const auto rows = surviving(truth.rows(), nm.p_drop_row, rng);
  const auto cols = surviving(truth.cols(), nm.p_drop_col, rng);

  NormalizedTable t;
  for (auto r : rows) t.row_labels.push_back(truth.row_labels[r]);
  for (auto c : cols) t.col_labels.push_back(truth.col_labels[c]);
  for (auto r : rows) {
    for (auto c : cols) {
      Value v = truth.at(r, c);
      if (v) {
        if (nm.value_noise_rel > 0.0) *v *= 1.0 + rng.normal(nm.value_noise_rel);
        if (rng.chance(nm.p_outlier)) *v *= nm.outlier_factor;
      }
      if (rng.chance(nm.p_cell_blank)) v.reset();
      t.values.push_back(v);
    }
  }

  for (auto& l : t.row_labels)
    if (rng.chance(nm.p_label_typo)) l = with_typo(l, rng);
  for (auto& l : t.col_labels)
    if (rng.chance(nm.p_label_typo)) l = with_typo(l, rng);

  if (rng.chance(nm.p_extra_row)) {
    std::vector<const std::string*> candidates;
    for (const auto& label : spurious_label_pool()) {
      bool distinct = std::none_of(truth.row_labels.begin(), truth.row_labels.end(),
                                   [&](const auto& l) { return nls(l, label) >= kSpuriousTau; }) &&
                      std::none_of(truth.col_labels.begin(), truth.col_labels.end(),
                                   [&](const auto& l) { return nls(l, label) >= kSpuriousTau; });
      if (distinct) candidates.push_back(&label);
    }
    if (!candidates.empty()) {
      t.row_labels.push_back(*candidates[rng.index(candidates.size())]);
      for (auto c : cols) {
        double lo = 0.0, hi = 1.0;
        bool any = false;
        for (std::size_t r = 0; r < truth.rows(); ++r)
          if (auto v = truth.at(r, c)) {
            lo = any ? std::min(lo, *v) : *v;
            hi = any ? std::max(hi, *v) : *v;
            any = true;
          }
        t.values.push_back(lo < hi ? rng.uniform(lo, hi) : lo);
      }
    }
  }

  if (rng.chance(nm.p_transpose)) t = transpose(t);

  std::string out = "```tsv\n";
  for (const auto& c : t.col_labels) out += '\t' + c;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::vector<std::string> cells{t.row_labels[r]};
    for (std::size_t c = 0; c < t.cols(); ++c)
      cells.push_back(t.at(r, c) ? format_number(*t.at(r, c)) : std::string());
    if (rng.chance(nm.p_ragged)) {
      if (rng.chance(0.5))
        cells.push_back(format_number(rng.uniform(0.0, 100.0)));
      else
        cells.pop_back();
    }
    out += '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += '\t';
      out += cells[i];
    }
  }
  out += "\n```";
  return out;
}

}  // namespace chartens

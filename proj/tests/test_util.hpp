// Copyright 2026 The SciSumm Authors. All Rights Reserved.
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

// Shared helpers for the test suites: random inputs and brute-force oracles
// that deliberately avoid the library's own code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scisumm/scisumm.hpp"

namespace scisumm::testing {

inline std::string data_path(const std::string& name) { return std::string(SCISUMM_TEST_DATA) + "/" + name; }

inline Tensor random_tensor(Shape shape, Rng& rng, double range = 1.0, bool requires_grad = false) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.mutable_data()) v = rng.uniform(-range, range);
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Exhaustive search over subsets of size 1..budget for the best
// ROUGE-1 F1 + ROUGE-2 F1, with n-gram counting done from scratch.
inline double brute_force_best(const Document& doc, std::size_t budget) {
  const auto sents = doc.sentences();
  const Tokens ref = tokenize(doc.reference_summary);
  auto count = [](const std::vector<Tokens>& parts, std::size_t n) {
    std::map<std::vector<std::string>, int> m;
    for (const Tokens& t : parts)
      for (std::size_t i = 0; i + n <= t.size(); ++i) ++m[{t.begin() + i, t.begin() + i + n}];
    return m;
  };
  auto f1 = [](const std::map<std::vector<std::string>, int>& c,
               const std::map<std::vector<std::string>, int>& r) {
    int hits = 0, tc = 0, tr = 0;
    for (const auto& [k, v] : c) {
      tc += v;
      auto it = r.find(k);
      if (it != r.end()) hits += std::min(v, it->second);
    }
    for (const auto& [k, v] : r) tr += v;
    if (tr == 0 || tc == 0 || hits == 0) return 0.0;
    const double p = double(hits) / tc, rc = double(hits) / tr;
    return 2 * p * rc / (p + rc);
  };
  const auto r1 = count({ref}, 1), r2 = count({ref}, 2);
  const std::size_t n = sents.size();
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > budget) continue;
    std::vector<Tokens> parts;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) parts.push_back(sents[i].get().tokens);
    best = std::max(best, f1(count(parts, 1), r1) + f1(count(parts, 2), r2));
  }
  return best;
}

// Per-pair loop implementation of the masked multi-head attention (before the
// output projection), straight from the visibility rules.
inline std::vector<double> naive_attention(const Tensor& x, std::span<const int> mask,
                                           const AttentionParams& p, std::size_t window,
                                           std::size_t heads) {
  const std::size_t n = x.rows(), d = x.cols(), dh = d / heads;
  auto project = [&](const Linear& l) {
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < d; ++o) {
        double acc = l.bias[o];
        for (std::size_t c = 0; c < d; ++c) acc += l.weight[o * d + c] * x[i * d + c];
        out[i * d + o] = acc;
      }
    return out;
  };
  const auto q = project(p.query), k = project(p.key), v = project(p.value);
  const auto qg = project(p.global_query), kg = project(p.global_key), vg = project(p.global_value);
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> out(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0) continue;
    const bool g = mask[i] == 2;
    const auto& Q = g ? qg : q;
    const auto& K = g ? kg : k;
    const auto& V = g ? vg : v;
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<std::size_t> keys;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask[j] == 0) continue;
        const std::size_t dist = i > j ? i - j : j - i;
        if (g || dist <= window || mask[j] == 2) keys.push_back(j);
      }
      std::vector<double> s(keys.size());
      double mx = -1e300;
      for (std::size_t a = 0; a < keys.size(); ++a) {
        double acc = 0.0;
        for (std::size_t c = 0; c < dh; ++c) acc += Q[i * d + h * dh + c] * sc * K[keys[a] * d + h * dh + c];
        s[a] = acc;
        mx = std::max(mx, acc);
      }
      double z = 0.0;
      for (double& e : s) z += (e = std::exp(e - mx));
      for (std::size_t a = 0; a < keys.size(); ++a)
        for (std::size_t c = 0; c < dh; ++c)
          out[i * d + h * dh + c] += s[a] / z * V[keys[a] * d + h * dh + c];
    }
  }
  return out;
}

}  // namespace scisumm::testing

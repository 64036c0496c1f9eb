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

// Timing and peak-allocation comparison of the sliding-window attention
// layer against dense attention.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <optional>
#include <vector>

#include "scisumm/attention.hpp"
#include "scisumm/memory.hpp"
#include "scisumm/nn.hpp"

namespace scisumm {

struct BenchConfig {
  std::vector<std::size_t> sizes = {100, 200, 400, 800};
  std::size_t window = 50;
  double global_ratio = 0.0;
  std::size_t repeats = 5;
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::uint64_t seed = 1;
  // Each repeat runs the forward pass until at least this much time passes.
  double min_repeat_ms = 20.0;
};

struct BenchRow {
  std::size_t n = 0;
  double sparse_ms = 0.0;
  double dense_ms = 0.0;
  std::size_t sparse_peak_bytes = 0;
  std::size_t dense_peak_bytes = 0;
  // Max |sparse - dense| when the window covers the whole input.
  std::optional<double> cross_check;
};

namespace detail {

// Mean milliseconds per call over a block of at least `min_ms`.
template <typename F>
double block_ms(F&& fn, double min_ms) {
  using clock = std::chrono::steady_clock;
  std::size_t iters = 0;
  const auto start = clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++iters;
    elapsed = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  } while (elapsed < min_ms);
  return elapsed / static_cast<double>(iters);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

template <typename F>
std::size_t peak_bytes(F&& fn) {
  const std::size_t base = AllocationTracker::current_bytes();
  AllocationTracker::reset_peak();
  fn();
  return AllocationTracker::peak_bytes() - base;
}

struct BenchCase {
  ParamStore store;
  AttentionParams params;
  Tensor x;
  AttentionMask mask, dense_mask;
  bool cross_check = false;
};

}  // namespace detail

// Repeats run in rounds over all sizes, so a slow stretch on the host
// lands on every size rather than on one.
inline std::vector<BenchRow> run_attention_bench(const BenchConfig& cfg) {
  NoGradGuard no_grad;
  std::vector<std::unique_ptr<detail::BenchCase>> cases;
  for (std::size_t n : cfg.sizes) {
    if (n < cfg.window) {
      throw ArgumentError("bench: n=" + std::to_string(n) + " is smaller than window " +
                          std::to_string(cfg.window));
    }
    auto c = std::make_unique<detail::BenchCase>();
    Rng rng(cfg.seed + n);
    c->params = AttentionParams::create(c->store, "bench", cfg.d_model, 2 * cfg.d_model, rng);
    c->x = uniform_param({round_up(n, cfg.window), cfg.d_model}, rng, 1.0).detach();
    const auto globals = select_global(n, cfg.global_ratio, GlobalPolicy::kStride);
    c->mask = build_attention_mask({n}, cfg.window, {globals}, c->x.rows());
    c->dense_mask = build_attention_mask({n}, 1, {}, c->x.rows());
    c->dense_mask.values[0].resize(c->x.rows(), kMaskPad);
    c->cross_check = cfg.window >= c->x.rows() && globals.empty();
    cases.push_back(std::move(c));
  }
  auto sparse = [&cfg](const detail::BenchCase& c) {
    return global_attention(c.x, c.mask.row(0), c.params, cfg.window, cfg.heads);
  };
  auto dense = [&cfg](const detail::BenchCase& c) {
    return full_attention_reference(c.x, c.dense_mask.row(0), c.params, cfg.heads);
  };

  std::vector<BenchRow> rows(cases.size());
  std::vector<std::vector<double>> sparse_ms(cases.size()), dense_ms(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const detail::BenchCase& c = *cases[i];
    rows[i].n = cfg.sizes[i];
    rows[i].sparse_peak_bytes = detail::peak_bytes([&] { return sparse(c); });
    rows[i].dense_peak_bytes = detail::peak_bytes([&] { return dense(c); });
    if (c.cross_check) {
      const Tensor a = sparse(c), b = dense(c);
      double worst = 0.0;
      for (std::size_t k = 0; k < a.numel(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
      rows[i].cross_check = worst;
    }
  }
  for (std::size_t r = 0; r < std::max<std::size_t>(1, cfg.repeats); ++r) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const detail::BenchCase& c = *cases[i];
      sparse_ms[i].push_back(detail::block_ms([&] { return sparse(c); }, cfg.min_repeat_ms));
      dense_ms[i].push_back(detail::block_ms([&] { return dense(c); }, cfg.min_repeat_ms));
    }
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    rows[i].sparse_ms = detail::median(sparse_ms[i]);
    rows[i].dense_ms = detail::median(dense_ms[i]);
  }
  return rows;
}

inline void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n\tsparse_ms\tdense_ms\tsparse_peak_bytes\tdense_peak_bytes\n";
  for (const BenchRow& r : rows) {
    out << r.n << '\t' << r.sparse_ms << '\t' << r.dense_ms << '\t' << r.sparse_peak_bytes << '\t'
        << r.dense_peak_bytes << '\n';
  }
}

// Ratio of consecutive rows' values (row i+1 over row i).
template <typename Get>
std::vector<double> doubling_ratios(const std::vector<BenchRow>& rows, Get get) {
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(get(rows[i]) / get(rows[i - 1]));
  return out;
}

}  // namespace scisumm

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

// Parameter containers, layers, initialization and gradient checking.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scisumm/ops.hpp"
#include "scisumm/tensor.hpp"

namespace scisumm {

// Portable uniform draws: std::uniform_real_distribution is not specified
// bit-for-bit across standard libraries, mt19937_64 is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

inline constexpr double kInitRange = 0.1;

inline Tensor uniform_param(Shape shape, Rng& rng, double range = kInitRange) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  for (double& v : t.mutable_data()) v = rng.uniform(-range, range);
  return t;
}

// Ordered set of named trainable tensors. Registration order is the
// checkpoint order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw ArgumentError("duplicate parameter name: " + name);
    t.set_requires_grad(true);
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(t));
    return entries_.back().second;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor& at(const std::string& name) const { return entries_.at(lookup(name)).second; }
  Tensor& at(const std::string& name) { return entries_.at(lookup(name)).second; }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<Tensor> tensors() const {
    std::vector<Tensor> out;
    for (const auto& [name, t] : entries_) out.push_back(t);
    return out;
  }

  void zero_grad() {
    for (auto& [name, t] : entries_) t.zero_grad();
  }

  std::size_t total_values() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
  }

  // Deep copy of values; the copy owns fresh leaves.
  ParamStore clone() const {
    ParamStore out;
    for (const auto& [name, t] : entries_) out.add(name, t.detach());
    return out;
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ArgumentError("unknown parameter: " + name);
    return it->second;
  }

  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

// y = x W^T + b, W [out x in], b [out].
struct Linear {
  Tensor weight;
  Tensor bias;

  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }

  static Linear create(ParamStore& store, const std::string& name, std::size_t in,
                       std::size_t out, Rng& rng) {
    Linear layer;
    layer.weight = store.add(name + ".weight", uniform_param({out, in}, rng));
    layer.bias = store.add(name + ".bias", uniform_param({out}, rng));
    return layer;
  }

  static Linear bind(const ParamStore& store, const std::string& name) {
    return {store.at(name + ".weight"), store.at(name + ".bias")};
  }
};

inline Tensor linear(const Tensor& x, const Linear& layer) {
  if (x.rank() != 2 || x.cols() != layer.in_features()) {
    throw DimensionError("linear: input " + shape_str(x.shape()) + " vs weight " +
                         shape_str(layer.weight.shape()));
  }
  return add_bias(matmul_nt(x, layer.weight), layer.bias);
}

struct LayerNormParams {
  Tensor gain;
  Tensor bias;

  // Gain starts at one and bias at zero so a fresh layer is a pure
  // standardization.
  static LayerNormParams create(ParamStore& store, const std::string& name, std::size_t d) {
    return {store.add(name + ".gain", Tensor::full({d}, 1.0)),
            store.add(name + ".bias", Tensor::zeros({d}))};
  }
  static LayerNormParams bind(const ParamStore& store, const std::string& name) {
    return {store.at(name + ".gain"), store.at(name + ".bias")};
  }
};

inline Tensor layer_norm(const Tensor& x, const LayerNormParams& p, double eps = 1e-5) {
  return layer_norm(x, p.gain, p.bias, eps);
}

// Compares reverse-mode gradients of f against central differences over every
// coordinate of `inputs`. Returns max |a - n| / max(|a|, |n|, 1e-8).
inline double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                         double h = 1e-5) {
  for (Tensor& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  backward(f());
  std::vector<std::vector<double>> analytic;
  for (Tensor& t : inputs) {
    auto g = t.mutable_grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  NoGradGuard no_grad;
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = f().item();
      values[i] = saved - h;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

inline double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                         double h = 1e-5) {
  return grad_check([&f, &x]() { return f(x); }, {x}, h);
}

}  // namespace scisumm

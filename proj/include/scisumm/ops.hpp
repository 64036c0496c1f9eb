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

// Differentiable primitives over Tensor.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "scisumm/log.hpp"
#include "scisumm/tensor.hpp"

namespace scisumm {

namespace detail {

template <typename Fwd, typename Deriv>
Tensor unary_map(const Tensor& x, Fwd fwd, Deriv deriv) {
  Buffer out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
  return make_result(x.shape(), std::move(out), {&x}, [deriv](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      in.grad[i] += self.grad[i] * deriv(in.value[i], self.value[i]);
  });
}

inline void accumulate(Node& target, const Buffer& g) {
  target.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) target.grad[i] += g[i];
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return detail::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node& self) {
    for (auto& p : self.parents)
      if (p->requires_grad) detail::accumulate(*p, self.grad);
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return detail::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    if (x.requires_grad) detail::accumulate(x, self.grad);
    if (y.requires_grad) {
      y.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) y.grad[i] -= self.grad[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return detail::make_result(a.shape(), std::move(out), {&a, &b}, [](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    if (x.requires_grad) {
      x.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) x.grad[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      y.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) y.grad[i] += self.grad[i] * x.value[i];
    }
  });
}

inline Tensor scale(const Tensor& a, double c) {
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * c;
  return detail::make_result(a.shape(), std::move(out), {&a}, [c](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    x.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) x.grad[i] += self.grad[i] * c;
  });
}

// x [m x n] + b broadcast over rows; b holds n values (any shape).
inline Tensor add_bias(const Tensor& x, const Tensor& b) {
  const std::size_t m = x.rows(), n = x.cols();
  if (b.numel() != n) {
    throw DimensionError("add_bias: bias " + shape_str(b.shape()) + " vs input " +
                         shape_str(x.shape()));
  }
  Buffer out(x.numel());
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = x[r * n + c] + b[c];
  return detail::make_result(x.shape(), std::move(out), {&x, &b}, [m, n](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    detail::Node& bias = *self.parents[1];
    if (in.requires_grad) detail::accumulate(in, self.grad);
    if (bias.requires_grad) {
      bias.ensure_grad();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) bias.grad[c] += self.grad[r * n + c];
    }
  });
}

// Row r of x scaled by s[r].
inline Tensor scale_rows(const Tensor& x, const Tensor& s) {
  const std::size_t m = x.rows(), n = x.cols();
  if (s.numel() != m) {
    throw DimensionError("scale_rows: scales " + shape_str(s.shape()) + " vs input " +
                         shape_str(x.shape()));
  }
  Buffer out(x.numel());
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = x[r * n + c] * s[r];
  return detail::make_result(x.shape(), std::move(out), {&x, &s}, [m, n](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    detail::Node& sc = *self.parents[1];
    if (in.requires_grad) {
      in.ensure_grad();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c)
          in.grad[r * n + c] += self.grad[r * n + c] * sc.value[r];
    }
    if (sc.requires_grad) {
      sc.ensure_grad();
      for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += self.grad[r * n + c] * in.value[r * n + c];
        sc.grad[r] += acc;
      }
    }
  });
}

namespace detail {

// out[m x n] += a[m x k] * b[k x n]
inline void gemm_nn(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
}

// out[m x n] += a[m x k] * b[n x k]^T
inline void gemm_nt(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      out[i * n + j] += acc;
    }
  }
}

// out[k x n] += a[m x k]^T * b[m x n]
inline void gemm_tn(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* orow = out + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_rank2(a, "matmul");
  detail::require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " * " +
                         shape_str(b.shape()));
  }
  Buffer out(m * n, 0.0);
  detail::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return detail::make_result({m, n}, std::move(out), {&a, &b}, [m, k, n](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    if (x.requires_grad) {
      x.ensure_grad();  // dX = dOut * Y^T
      detail::gemm_nt(self.grad.data(), y.value.data(), x.grad.data(), m, n, k);
    }
    if (y.requires_grad) {
      y.ensure_grad();  // dY = X^T * dOut
      detail::gemm_tn(x.value.data(), self.grad.data(), y.grad.data(), m, k, n);
    }
  });
}

// a [m x k] times b^T where b is [n x k].
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  detail::require_rank2(a, "matmul_nt");
  detail::require_rank2(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + shape_str(a.shape()) +
                         " * " + shape_str(b.shape()) + "^T");
  }
  Buffer out(m * n, 0.0);
  detail::gemm_nt(a.data().data(), b.data().data(), out.data(), m, k, n);
  return detail::make_result({m, n}, std::move(out), {&a, &b}, [m, k, n](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    detail::Node& y = *self.parents[1];
    if (x.requires_grad) {
      x.ensure_grad();  // dX = dOut * Y
      detail::gemm_nn(self.grad.data(), y.value.data(), x.grad.data(), m, n, k);
    }
    if (y.requires_grad) {
      y.ensure_grad();  // dY = dOut^T * X
      detail::gemm_tn(self.grad.data(), x.value.data(), y.grad.data(), m, n, k);
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  detail::require_rank2(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  Buffer out(m * n);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[c * m + r] = a[r * n + c];
  return detail::make_result({n, m}, std::move(out), {&a}, [m, n](detail::Node& self) {
    detail::Node& x = *self.parents[0];
    x.ensure_grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) x.grad[r * n + c] += self.grad[c * m + r];
  });
}

inline Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  Buffer out(a.data().begin(), a.data().end());
  return detail::make_result(std::move(shape), std::move(out), {&a}, [](detail::Node& self) {
    detail::accumulate(*self.parents[0], self.grad);
  });
}

inline Tensor relu(const Tensor& x) {
  return detail::unary_map(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

inline Tensor tanh(const Tensor& x) {
  return detail::unary_map(
      x, [](double v) { return std::tanh(v); },
      [](double, double out) { return 1.0 - out * out; });
}

inline Tensor sigmoid(const Tensor& x) {
  return detail::unary_map(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double out) { return out * (1.0 - out); });
}

inline Tensor log(const Tensor& x) {
  return detail::unary_map(
      x, [](double v) { return std::log(v); }, [](double in, double) { return 1.0 / in; });
}

enum class Activation { kRelu, kTanh, kSigmoid };

inline Tensor activation(const Tensor& x, Activation kind) {
  switch (kind) {
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
    case Activation::kSigmoid: return sigmoid(x);
  }
  return x;
}

inline Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  Buffer out{acc};
  return detail::make_result({1}, std::move(out), {&x}, [](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    in.ensure_grad();
    for (double& g : in.grad) g += self.grad[0];
  });
}

inline Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

// Rank-1: whole tensor. Rank-2: axis 1 normalizes each row, axis 0 each column.
inline Tensor softmax(const Tensor& x, int axis = -1) {
  std::size_t outer, inner, stride_outer, stride_inner;
  if (x.rank() <= 1) {
    outer = 1, inner = x.numel(), stride_outer = 0, stride_inner = 1;
  } else {
    detail::require_rank2(x, "softmax");
    const int ax = axis < 0 ? 1 : axis;
    if (ax > 1) throw ArgumentError("softmax: axis " + std::to_string(axis) + " out of range");
    if (ax == 1) {
      outer = x.rows(), inner = x.cols(), stride_outer = x.cols(), stride_inner = 1;
    } else {
      outer = x.cols(), inner = x.rows(), stride_outer = 1, stride_inner = x.cols();
    }
  }
  Buffer out(x.numel());
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * stride_outer;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inner; ++i) mx = std::max(mx, x[base + i * stride_inner]);
    double z = 0.0;
    for (std::size_t i = 0; i < inner; ++i) {
      const double e = std::exp(x[base + i * stride_inner] - mx);
      out[base + i * stride_inner] = e;
      z += e;
    }
    for (std::size_t i = 0; i < inner; ++i) out[base + i * stride_inner] /= z;
  }
  return detail::make_result(
      x.shape(), std::move(out), {&x},
      [outer, inner, stride_outer, stride_inner](detail::Node& self) {
        detail::Node& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t o = 0; o < outer; ++o) {
          const std::size_t base = o * stride_outer;
          double dot = 0.0;
          for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t idx = base + i * stride_inner;
            dot += self.grad[idx] * self.value[idx];
          }
          for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t idx = base + i * stride_inner;
            in.grad[idx] += self.value[idx] * (self.grad[idx] - dot);
          }
        }
      });
}

// Per-row normalization to zero mean / unit variance followed by gain and
// bias (each holding `cols` values).
inline Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                         double eps = 1e-5) {
  const std::size_t m = x.rows(), d = x.cols();
  if (d == 0) throw ArgumentError("layer_norm: zero-width rows");
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " +
                         shape_str(bias.shape()) + " vs input " + shape_str(x.shape()));
  }
  Buffer out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(m);
  for (std::size_t r = 0; r < m; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += x[r * d + c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = x[r * d + c] - mu;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat[r * d + c] = (x[r * d + c] - mu) * inv_std[r];
      out[r * d + c] = xhat[r * d + c] * gain[c] + bias[c];
    }
  }
  return detail::make_result(
      x.shape(), std::move(out), {&x, &gain, &bias},
      [m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::Node& self) {
        detail::Node& in = *self.parents[0];
        detail::Node& g = *self.parents[1];
        detail::Node& b = *self.parents[2];
        if (g.requires_grad) g.ensure_grad();
        if (b.requires_grad) b.ensure_grad();
        if (in.requires_grad) in.ensure_grad();
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < m; ++r) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const std::size_t i = r * d + c;
            const double dyhat = self.grad[i] * g.value[c];
            sum_dy += dyhat;
            sum_dy_xhat += dyhat * xhat[i];
            if (g.requires_grad) g.grad[c] += self.grad[i] * xhat[i];
            if (b.requires_grad) b.grad[c] += self.grad[i];
          }
          if (!in.requires_grad) continue;
          for (std::size_t c = 0; c < d; ++c) {
            const std::size_t i = r * d + c;
            const double dyhat = self.grad[i] * g.value[c];
            in.grad[i] += inv_std[r] * (dyhat - inv_d * sum_dy - xhat[i] * inv_d * sum_dy_xhat);
          }
        }
      });
}

// Rows [begin, end) of a matrix.
inline Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  detail::require_rank2(x, "slice_rows");
  if (begin > end || end > x.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside " + shape_str(x.shape()));
  }
  const std::size_t n = x.cols();
  Buffer out(x.data().begin() + begin * n, x.data().begin() + end * n);
  return detail::make_result({end - begin, n}, std::move(out), {&x},
                             [begin, n](detail::Node& self) {
                               detail::Node& in = *self.parents[0];
                               in.ensure_grad();
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 in.grad[begin * n + i] += self.grad[i];
                             });
}

// Appends zero rows up to `total_rows`.
inline Tensor pad_rows(const Tensor& x, std::size_t total_rows) {
  detail::require_rank2(x, "pad_rows");
  if (total_rows < x.rows()) {
    throw DimensionError("pad_rows: cannot pad " + shape_str(x.shape()) + " to " +
                         std::to_string(total_rows) + " rows");
  }
  const std::size_t n = x.cols();
  Buffer out(total_rows * n, 0.0);
  std::copy(x.data().begin(), x.data().end(), out.begin());
  const std::size_t live = x.numel();
  return detail::make_result({total_rows, n}, std::move(out), {&x}, [live](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < live; ++i) in.grad[i] += self.grad[i];
  });
}

// Side-by-side concatenation of equal-height matrices.
inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor& t : parts) {
    detail::require_rank2(t, "concat_cols");
    if (t.rows() != m) {
      throw DimensionError("concat_cols: row counts differ, " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(t.shape()));
    }
    offsets.push_back(total);
    total += t.cols();
  }
  Buffer out(m * total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = parts[k].cols();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < w; ++c) out[r * total + offsets[k] + c] = parts[k][r * w + c];
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = {m, total};
  node->value = std::move(out);
  bool track = false;
  if (GradMode::enabled())
    for (const Tensor& t : parts) track = track || t.requires_grad();
  if (track) {
    node->requires_grad = true;
    for (const Tensor& t : parts) node->parents.push_back(t.node());
    node->backward = [m, total, offsets](detail::Node& self) {
      for (std::size_t k = 0; k < self.parents.size(); ++k) {
        detail::Node& in = *self.parents[k];
        if (!in.requires_grad) continue;
        in.ensure_grad();
        const std::size_t w = in.shape.back();
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < w; ++c)
            in.grad[r * w + c] += self.grad[r * total + offsets[k] + c];
      }
    };
  }
  return Tensor(std::move(node));
}

inline std::size_t clamp_index(std::size_t index, std::size_t size, const char* what) {
  if (index < size) return index;
  log_warning(what, ": index ", index, " out of range for table of ", size,
              " rows; clamped to ", size - 1);
  return size - 1;
}

// Gathers table rows. Indices past the end clamp to the last row.
inline Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& indices) {
  detail::require_rank2(table, "gather_rows");
  const std::size_t vocab = table.rows(), d = table.cols();
  if (vocab == 0) throw DimensionError("gather_rows: empty table");
  std::vector<std::size_t> idx(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    idx[i] = clamp_index(indices[i], vocab, "embedding lookup");
  Buffer out(idx.size() * d);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(table.data().begin() + idx[i] * d, d, out.begin() + i * d);
  return detail::make_result({idx.size(), d}, std::move(out), {&table},
                             [idx, d](detail::Node& self) {
                               detail::Node& t = *self.parents[0];
                               t.ensure_grad();
                               for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t c = 0; c < d; ++c)
                                   t.grad[idx[i] * d + c] += self.grad[i * d + c];
                             });
}

// Single-row lookup returning a [d] vector.
inline Tensor embedding_lookup(const Tensor& table, std::size_t index) {
  return reshape(gather_rows(table, {index}), {table.cols()});
}

// Sum over i of softplus(s_i) - y_i * s_i: binary cross-entropy expressed on
// pre-sigmoid scores. Gradient w.r.t. s_i is sigmoid(s_i) - y_i.
inline Tensor bce_with_logits(const Tensor& logits, std::span<const int> labels) {
  if (logits.numel() != labels.size()) {
    throw ArgumentError("bce_with_logits: " + std::to_string(logits.numel()) + " scores vs " +
                        std::to_string(labels.size()) + " labels");
  }
  double total = 0.0;
  std::vector<double> y(labels.begin(), labels.end());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = logits[i];
    const double softplus = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    total += softplus - y[i] * s;
  }
  Buffer out{total};
  return detail::make_result({1}, std::move(out), {&logits}, [y](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = in.value[i];
      const double p = s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
      in.grad[i] += self.grad[0] * (p - y[i]);
    }
  });
}

}  // namespace scisumm

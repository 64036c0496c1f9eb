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

// Sentence-level sparse attention: mask construction, sliding-window local
// attention with global positions, a dense reference, and the transformer
// layer stacked on top of them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "scisumm/errors.hpp"
#include "scisumm/nn.hpp"
#include "scisumm/ops.hpp"
#include "scisumm/tensor.hpp"

namespace scisumm {

// Mask entry values.
inline constexpr int kMaskPad = 0;
inline constexpr int kMaskLocal = 1;
inline constexpr int kMaskGlobal = 2;

// Additive score for padded keys.
inline constexpr double kPadScore = -1e9;

struct AttentionMask {
  std::vector<std::vector<int>> values;  // [batch][padded_len]
  std::vector<std::size_t> doc_lengths;
  std::size_t window = 1;
  std::size_t padded_len = 0;

  std::size_t batch() const { return values.size(); }
  std::span<const int> row(std::size_t b) const { return values.at(b); }

  std::vector<std::size_t> global_positions(std::size_t b) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < padded_len; ++i)
      if (values[b][i] == kMaskGlobal) out.push_back(i);
    return out;
  }
};

inline std::size_t round_up(std::size_t n, std::size_t multiple) {
  return (n + multiple - 1) / multiple * multiple;
}

// Pads every document to a shared length that is a multiple of `window`;
// marks pads 0, real sentences 1, and global sentences 2. Global positions
// are 0-based.
inline AttentionMask build_attention_mask(const std::vector<std::size_t>& doc_lengths,
                                          std::size_t window,
                                          const std::vector<std::vector<std::size_t>>& global_positions,
                                          std::size_t max_sentences = 500) {
  if (window == 0) throw ArgumentError("attention window must be at least 1");
  if (!global_positions.empty() && global_positions.size() != doc_lengths.size()) {
    throw ArgumentError("global position lists (" + std::to_string(global_positions.size()) +
                        ") do not match batch size (" + std::to_string(doc_lengths.size()) + ")");
  }
  std::size_t longest = 0;
  for (std::size_t b = 0; b < doc_lengths.size(); ++b) {
    if (doc_lengths[b] > max_sentences) {
      throw ArgumentError("document " + std::to_string(b) + " has " +
                          std::to_string(doc_lengths[b]) + " sentences, over max_sentences " +
                          std::to_string(max_sentences));
    }
    longest = std::max(longest, doc_lengths[b]);
  }
  AttentionMask mask;
  mask.window = window;
  mask.doc_lengths = doc_lengths;
  mask.padded_len = round_up(std::min(longest, max_sentences), window);
  mask.values.assign(doc_lengths.size(), std::vector<int>(mask.padded_len, kMaskPad));
  for (std::size_t b = 0; b < doc_lengths.size(); ++b) {
    std::fill_n(mask.values[b].begin(), doc_lengths[b], kMaskLocal);
    if (global_positions.empty()) continue;
    for (std::size_t g : global_positions[b]) {
      if (g >= doc_lengths[b]) {
        throw ArgumentError("global position " + std::to_string(g) + " outside document " +
                            std::to_string(b) + " of length " + std::to_string(doc_lengths[b]));
      }
      mask.values[b][g] = kMaskGlobal;
    }
  }
  return mask;
}

enum class GlobalPolicy { kStride, kRandom };

// round(n * ratio / 100) positions, ascending. Stride places one position at
// the center of each of k equal strides.
inline std::vector<std::size_t> select_global(std::size_t n, double ratio_percent,
                                              GlobalPolicy policy, std::uint64_t seed = 0) {
  if (ratio_percent < 0.0 || ratio_percent > 100.0) {
    throw ArgumentError("global ratio must lie in [0, 100], got " + std::to_string(ratio_percent));
  }
  const auto k = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio_percent / 100.0)));
  std::vector<std::size_t> out;
  if (k == 0) return out;
  if (policy == GlobalPolicy::kStride) {
    for (std::size_t j = 0; j < k; ++j) out.push_back((2 * j + 1) * n / (2 * k));
  } else {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    Rng rng(seed);
    shuffle(all, rng);
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.begin(), out.end());
  }
  return out;
}

struct AttentionParams {
  Linear query, key, value;
  Linear global_query, global_key, global_value;
  Linear output;
  Linear ffn_in, ffn_out;
  LayerNormParams norm_attn, norm_ffn;

  static AttentionParams create(ParamStore& store, const std::string& prefix, std::size_t d,
                                std::size_t d_ff, Rng& rng) {
    AttentionParams p;
    p.query = Linear::create(store, prefix + ".attn.query", d, d, rng);
    p.key = Linear::create(store, prefix + ".attn.key", d, d, rng);
    p.value = Linear::create(store, prefix + ".attn.value", d, d, rng);
    p.global_query = Linear::create(store, prefix + ".attn.global_query", d, d, rng);
    p.global_key = Linear::create(store, prefix + ".attn.global_key", d, d, rng);
    p.global_value = Linear::create(store, prefix + ".attn.global_value", d, d, rng);
    p.output = Linear::create(store, prefix + ".attn.output", d, d, rng);
    p.ffn_in = Linear::create(store, prefix + ".ffn.in", d, d_ff, rng);
    p.ffn_out = Linear::create(store, prefix + ".ffn.out", d_ff, d, rng);
    p.norm_attn = LayerNormParams::create(store, prefix + ".norm_attn", d);
    p.norm_ffn = LayerNormParams::create(store, prefix + ".norm_ffn", d);
    return p;
  }

  static AttentionParams bind(const ParamStore& store, const std::string& prefix) {
    AttentionParams p;
    p.query = Linear::bind(store, prefix + ".attn.query");
    p.key = Linear::bind(store, prefix + ".attn.key");
    p.value = Linear::bind(store, prefix + ".attn.value");
    p.global_query = Linear::bind(store, prefix + ".attn.global_query");
    p.global_key = Linear::bind(store, prefix + ".attn.global_key");
    p.global_value = Linear::bind(store, prefix + ".attn.global_value");
    p.output = Linear::bind(store, prefix + ".attn.output");
    p.ffn_in = Linear::bind(store, prefix + ".ffn.in");
    p.ffn_out = Linear::bind(store, prefix + ".ffn.out");
    p.norm_attn = LayerNormParams::bind(store, prefix + ".norm_attn");
    p.norm_ffn = LayerNormParams::bind(store, prefix + ".norm_ffn");
    return p;
  }
};

namespace detail {

// A group of query rows sharing one contiguous key range [k0, k1) plus a few
// out-of-range extra keys.
struct AttentionBlock {
  std::vector<std::size_t> queries;
  std::size_t k0 = 0, k1 = 0;
  std::vector<std::size_t> extra;
  // Per head: queries x (k1 - k0 + extra) probabilities, band first.
  std::vector<Buffer> probs;

  std::size_t width() const { return k1 - k0 + extra.size(); }
  std::size_t key_at(std::size_t c) const { return c < k1 - k0 ? k0 + c : extra[c - (k1 - k0)]; }
};

// Copies head h of rows `rows` ([n x d] source) into a contiguous
// [rows x dh] buffer.
inline void gather_head(const Buffer& src, std::size_t d, std::size_t dh, std::size_t h,
                        const AttentionBlock& blk, bool keys, std::vector<double>& out) {
  const std::size_t count = keys ? blk.width() : blk.queries.size();
  out.resize(count * dh);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t row = keys ? blk.key_at(r) : blk.queries[r];
    std::copy_n(src.begin() + row * d + h * dh, dh, out.begin() + r * dh);
  }
}

inline void scatter_head_add(Buffer& dst, std::size_t d, std::size_t dh, std::size_t h,
                             const AttentionBlock& blk, bool keys, const std::vector<double>& in) {
  const std::size_t count = keys ? blk.width() : blk.queries.size();
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t row = keys ? blk.key_at(r) : blk.queries[r];
    double* target = dst.data() + row * d + h * dh;
    for (std::size_t c = 0; c < dh; ++c) target[c] += in[r * dh + c];
  }
}

// Multi-head attention restricted to the blocks' (query, key) pairs.
// `allowed(i, j)` excludes pairs outright; keys with key_pad[j] get
// kPadScore. Rows not listed as queries produce zero output. Q must be
// pre-scaled.
template <typename Allowed>
Tensor block_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                       std::vector<AttentionBlock> blocks, const std::vector<char>& key_pad,
                       Allowed allowed) {
  const std::size_t n = q.rows(), d = q.cols();
  if (k.shape() != q.shape() || v.shape() != q.shape()) {
    throw DimensionError("attention: q " + shape_str(q.shape()) + ", k " + shape_str(k.shape()) +
                         ", v " + shape_str(v.shape()));
  }
  if (heads == 0 || d % heads != 0) {
    throw ArgumentError("attention: " + std::to_string(heads) + " heads do not divide width " +
                        std::to_string(d));
  }
  const std::size_t dh = d / heads;
  const Buffer& qv = q.node()->value;
  const Buffer& kv = k.node()->value;
  const Buffer& vv = v.node()->value;
  Buffer out(n * d, 0.0);
  std::vector<double> qh, kh, vh, oh;
  for (AttentionBlock& blk : blocks) {
    const std::size_t nq = blk.queries.size(), nk = blk.width();
    blk.probs.assign(heads, Buffer());
    if (nq == 0) continue;
    for (std::size_t h = 0; h < heads; ++h) {
      gather_head(qv, d, dh, h, blk, false, qh);
      gather_head(kv, d, dh, h, blk, true, kh);
      gather_head(vv, d, dh, h, blk, true, vh);
      Buffer p(nq * nk, 0.0);
      gemm_nt(qh.data(), kh.data(), p.data(), nq, dh, nk);
      for (std::size_t r = 0; r < nq; ++r) {
        const std::size_t i = blk.queries[r];
        double* row = p.data() + r * nk;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < nk; ++c) {
          const std::size_t j = blk.key_at(c);
          if (!allowed(i, j)) {
            row[c] = -std::numeric_limits<double>::infinity();
            continue;
          }
          if (key_pad[j]) row[c] += kPadScore;
          mx = std::max(mx, row[c]);
        }
        double z = 0.0;
        for (std::size_t c = 0; c < nk; ++c) {
          row[c] = std::isinf(row[c]) ? 0.0 : std::exp(row[c] - mx);
          z += row[c];
        }
        for (std::size_t c = 0; c < nk; ++c) row[c] /= z;
      }
      oh.assign(nq * dh, 0.0);
      gemm_nn(p.data(), vh.data(), oh.data(), nq, nk, dh);
      for (std::size_t r = 0; r < nq; ++r)
        std::copy_n(oh.begin() + r * dh, dh, out.begin() + blk.queries[r] * d + h * dh);
      blk.probs[h] = std::move(p);
    }
  }
  return make_result(
      {n, d}, std::move(out), {&q, &k, &v},
      [blocks = std::move(blocks), heads, d, dh](Node& self) {
        Node& qn = *self.parents[0];
        Node& kn = *self.parents[1];
        Node& vn = *self.parents[2];
        qn.ensure_grad();
        kn.ensure_grad();
        vn.ensure_grad();
        std::vector<double> qh, kh, vh, doh, dp, dq, dk, dv;
        for (const AttentionBlock& blk : blocks) {
          const std::size_t nq = blk.queries.size(), nk = blk.width();
          if (nq == 0) continue;
          for (std::size_t h = 0; h < heads; ++h) {
            const Buffer& p = blk.probs[h];
            gather_head(qn.value, d, dh, h, blk, false, qh);
            gather_head(kn.value, d, dh, h, blk, true, kh);
            gather_head(vn.value, d, dh, h, blk, true, vh);
            gather_head(self.grad, d, dh, h, blk, false, doh);
            dp.assign(nq * nk, 0.0);
            gemm_nt(doh.data(), vh.data(), dp.data(), nq, dh, nk);
            dv.assign(nk * dh, 0.0);
            gemm_tn(p.data(), doh.data(), dv.data(), nq, nk, dh);
            for (std::size_t r = 0; r < nq; ++r) {
              double dot = 0.0;
              for (std::size_t c = 0; c < nk; ++c) dot += p[r * nk + c] * dp[r * nk + c];
              for (std::size_t c = 0; c < nk; ++c)
                dp[r * nk + c] = p[r * nk + c] * (dp[r * nk + c] - dot);
            }
            dq.assign(nq * dh, 0.0);
            gemm_nn(dp.data(), kh.data(), dq.data(), nq, nk, dh);
            dk.assign(nk * dh, 0.0);
            gemm_tn(dp.data(), qh.data(), dk.data(), nq, nk, dh);
            scatter_head_add(qn.grad, d, dh, h, blk, false, dq);
            scatter_head_add(kn.grad, d, dh, h, blk, true, dk);
            scatter_head_add(vn.grad, d, dh, h, blk, true, dv);
          }
        }
      });
}

inline void check_attention_inputs(const Tensor& x, std::span<const int> mask, std::size_t window,
                                   std::size_t heads) {
  require_rank2(x, "attention");
  if (mask.size() != x.rows()) {
    throw DimensionError("attention: mask of length " + std::to_string(mask.size()) +
                         " for input " + shape_str(x.shape()));
  }
  if (window == 0 || x.rows() % window != 0) {
    throw ArgumentError("attention: padded length " + std::to_string(x.rows()) +
                        " is not a multiple of window " + std::to_string(window));
  }
  if (heads == 0 || x.cols() % heads != 0) {
    throw ArgumentError("attention: " + std::to_string(heads) + " heads do not divide width " +
                        std::to_string(x.cols()));
  }
}

// Local path on pre-projected, pre-scaled q/k/v. Query chunk c covers rows
// [c*w, (c+1)*w) and reads keys [c*w - w, (c+2)*w), so every row sees the w
// rows on each side at O(n*w) cost. Global rows are visible to every query.
inline Tensor local_attention_core(const Tensor& q, const Tensor& k, const Tensor& v,
                                   std::span<const int> mask, std::size_t window,
                                   std::size_t heads, bool skip_global_queries) {
  const std::size_t n = q.rows();
  std::vector<char> pad(n), global(n);
  std::vector<std::size_t> globals;
  for (std::size_t i = 0; i < n; ++i) {
    pad[i] = mask[i] == kMaskPad;
    global[i] = mask[i] == kMaskGlobal;
    if (global[i]) globals.push_back(i);
  }
  std::vector<AttentionBlock> blocks;
  for (std::size_t q0 = 0; q0 < n; q0 += window) {
    AttentionBlock blk;
    const std::size_t q1 = std::min(n, q0 + window);
    for (std::size_t i = q0; i < q1; ++i) {
      if (pad[i] || (skip_global_queries && global[i])) continue;
      blk.queries.push_back(i);
    }
    blk.k0 = q0 >= window ? q0 - window : 0;
    blk.k1 = std::min(n, q1 + window);
    for (std::size_t g : globals)
      if (g < blk.k0 || g >= blk.k1) blk.extra.push_back(g);
    blocks.push_back(std::move(blk));
  }
  const auto allowed = [window, &global](std::size_t i, std::size_t j) {
    const std::size_t dist = i > j ? i - j : j - i;
    return dist <= window || global[j];
  };
  return block_attention(q, k, v, heads, std::move(blocks), pad, allowed);
}

// Global rows attend over every non-pad position; all other rows are zero.
inline Tensor global_attention_core(const Tensor& q, const Tensor& k, const Tensor& v,
                                    std::span<const int> mask, std::size_t heads) {
  const std::size_t n = q.rows();
  std::vector<char> pad(n);
  AttentionBlock blk;
  blk.k0 = 0;
  blk.k1 = n;
  for (std::size_t i = 0; i < n; ++i) {
    pad[i] = mask[i] == kMaskPad;
    if (mask[i] == kMaskGlobal) blk.queries.push_back(i);
  }
  std::vector<AttentionBlock> blocks;
  blocks.push_back(std::move(blk));
  return block_attention(q, k, v, heads, std::move(blocks), pad,
                         [](std::size_t, std::size_t) { return true; });
}

inline double query_scale(std::size_t d, std::size_t heads) {
  return 1.0 / std::sqrt(static_cast<double>(d / heads));
}

}  // namespace detail

// Local attention for every non-pad row: each row attends to the `window`
// rows before and after it plus every global row. Pad rows output zero
// before the output projection.
inline Tensor sliding_window_attention(const Tensor& x, std::span<const int> mask,
                                       const AttentionParams& p, std::size_t window,
                                       std::size_t heads) {
  detail::check_attention_inputs(x, mask, window, heads);
  const double s = detail::query_scale(x.cols(), heads);
  const Tensor q = scale(linear(x, p.query), s);
  const Tensor k = linear(x, p.key);
  const Tensor v = linear(x, p.value);
  return linear(detail::local_attention_core(q, k, v, mask, window, heads, false), p.output);
}

// Sliding-window attention in which rows marked global are recomputed over
// all non-pad positions with their own projections.
inline Tensor global_attention(const Tensor& x, std::span<const int> mask,
                               const AttentionParams& p, std::size_t window, std::size_t heads) {
  detail::check_attention_inputs(x, mask, window, heads);
  const double s = detail::query_scale(x.cols(), heads);
  const bool any_global = std::find(mask.begin(), mask.end(), kMaskGlobal) != mask.end();
  const Tensor q = scale(linear(x, p.query), s);
  const Tensor k = linear(x, p.key);
  const Tensor v = linear(x, p.value);
  Tensor mixed = detail::local_attention_core(q, k, v, mask, window, heads, any_global);
  if (any_global) {
    const Tensor qg = scale(linear(x, p.global_query), s);
    const Tensor kg = linear(x, p.global_key);
    const Tensor vg = linear(x, p.global_value);
    mixed = add(mixed, detail::global_attention_core(qg, kg, vg, mask, heads));
  }
  return linear(mixed, p.output);
}

// Dense O(n^2) attention honoring the same mask semantics, built from
// generic primitives. With the default window every row sees every non-pad
// row.
inline Tensor full_attention_reference(const Tensor& x, std::span<const int> mask,
                                       const AttentionParams& p, std::size_t heads,
                                       std::size_t window = std::numeric_limits<std::size_t>::max()) {
  detail::require_rank2(x, "full_attention_reference");
  const std::size_t n = x.rows(), d = x.cols();
  if (mask.size() != n) throw DimensionError("full_attention_reference: mask length mismatch");
  if (heads == 0 || d % heads != 0) throw ArgumentError("full_attention_reference: bad head count");
  const std::size_t dh = d / heads;
  const double s = detail::query_scale(d, heads);

  std::vector<double> local_bias(n * n), global_bias(n * n), local_rows(n), global_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool row_pad = mask[i] == kMaskPad;
    const bool row_global = mask[i] == kMaskGlobal;
    local_rows[i] = !row_pad && !row_global ? 1.0 : 0.0;
    global_rows[i] = row_global ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      const bool visible = dist <= window || mask[j] == kMaskGlobal;
      const double pad_bias = mask[j] == kMaskPad ? kPadScore : 0.0;
      // Out-of-window pairs get a score far below any pad score.
      local_bias[i * n + j] = visible ? pad_bias : 2.0 * kPadScore;
      global_bias[i * n + j] = pad_bias;
    }
  }
  const Tensor lb = Tensor::from({n, n}, local_bias);
  const Tensor gb = Tensor::from({n, n}, global_bias);

  auto path = [&](const Linear& wq, const Linear& wk, const Linear& wv, const Tensor& bias) {
    const Tensor q = scale(linear(x, wq), s);
    const Tensor k = linear(x, wk);
    const Tensor v = linear(x, wv);
    std::vector<Tensor> per_head;
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<double> sel(d * dh, 0.0);
      for (std::size_t c = 0; c < dh; ++c) sel[(h * dh + c) * dh + c] = 1.0;
      const Tensor pick = Tensor::from({d, dh}, sel);
      const Tensor qh = matmul(q, pick), kh = matmul(k, pick), vh = matmul(v, pick);
      const Tensor probs = softmax(add(matmul_nt(qh, kh), bias), 1);
      per_head.push_back(matmul(probs, vh));
    }
    return concat_cols(per_head);
  };

  Tensor mixed = scale_rows(path(p.query, p.key, p.value, lb), Tensor::from({n}, local_rows));
  if (std::find(mask.begin(), mask.end(), kMaskGlobal) != mask.end()) {
    mixed = add(mixed, scale_rows(path(p.global_query, p.global_key, p.global_value, gb),
                                  Tensor::from({n}, global_rows)));
  }
  return linear(mixed, p.output);
}

// h~ = h + LN(attn(h)); h' = h~ + LN(FFN(h~)), FFN = Linear -> ReLU -> Linear.
inline Tensor transformer_layer(const Tensor& h, std::span<const int> mask,
                                const AttentionParams& p, std::size_t window, std::size_t heads) {
  if (h.rank() != 2 || h.cols() != p.query.in_features()) {
    throw DimensionError("transformer_layer: input " + shape_str(h.shape()) +
                         " vs layer width " + std::to_string(p.query.in_features()));
  }
  const Tensor attn = global_attention(h, mask, p, window, heads);
  const Tensor h_tilde = add(h, layer_norm(attn, p.norm_attn));
  const Tensor ff = linear(relu(linear(h_tilde, p.ffn_in)), p.ffn_out);
  return add(h_tilde, layer_norm(ff, p.norm_ffn));
}

}  // namespace scisumm

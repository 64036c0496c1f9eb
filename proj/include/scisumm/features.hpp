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

// Sentence feature embeddings (length, position, section, correlation,
// saliency) and the attention-weighted document embedding.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "scisumm/errors.hpp"
#include "scisumm/nn.hpp"
#include "scisumm/ops.hpp"

namespace scisumm {

inline constexpr std::size_t kLengthBucketWidth = 10;

struct FeatureSizes {
  std::size_t d = 64;
  std::size_t length_buckets = 100;
  std::size_t position_buckets = 500;
  std::size_t section_buckets = 32;
};

struct FeatureParams {
  Tensor length_table;    // [B_len x d]
  Tensor position_table;  // [B_pos x d]
  Tensor section_table;   // [S_max x d]
  Linear length_proj, position_proj, section_proj, correlation_proj, saliency_proj;
  Tensor correlation_matrix;  // W_c [d x d]
  Tensor saliency_matrix;     // W_s [d x d]
  Tensor sentence_weights;    // W_sents [d x 1]

  static FeatureParams create(ParamStore& store, const FeatureSizes& sz, Rng& rng) {
    FeatureParams p;
    p.length_table = store.add("length_table", uniform_param({sz.length_buckets, sz.d}, rng));
    p.position_table = store.add("position_table", uniform_param({sz.position_buckets, sz.d}, rng));
    p.section_table = store.add("feature_section_table", uniform_param({sz.section_buckets, sz.d}, rng));
    p.length_proj = Linear::create(store, "feature.length", sz.d, sz.d, rng);
    p.position_proj = Linear::create(store, "feature.position", sz.d, sz.d, rng);
    p.section_proj = Linear::create(store, "feature.section", sz.d, sz.d, rng);
    p.correlation_proj = Linear::create(store, "feature.correlation", sz.d, sz.d, rng);
    p.saliency_proj = Linear::create(store, "feature.saliency", sz.d, sz.d, rng);
    p.correlation_matrix = store.add("W_c", uniform_param({sz.d, sz.d}, rng));
    p.saliency_matrix = store.add("W_s", uniform_param({sz.d, sz.d}, rng));
    p.sentence_weights = store.add("W_sents", uniform_param({sz.d, 1}, rng));
    return p;
  }

  static FeatureParams bind(const ParamStore& store) {
    FeatureParams p;
    p.length_table = store.at("length_table");
    p.position_table = store.at("position_table");
    p.section_table = store.at("feature_section_table");
    p.length_proj = Linear::bind(store, "feature.length");
    p.position_proj = Linear::bind(store, "feature.position");
    p.section_proj = Linear::bind(store, "feature.section");
    p.correlation_proj = Linear::bind(store, "feature.correlation");
    p.saliency_proj = Linear::bind(store, "feature.saliency");
    p.correlation_matrix = store.at("W_c");
    p.saliency_matrix = store.at("W_s");
    p.sentence_weights = store.at("W_sents");
    return p;
  }

  std::size_t d() const { return length_table.cols(); }
};

inline std::size_t length_bucket(std::size_t char_length, std::size_t buckets) {
  return std::min(char_length / kLengthBucketWidth, buckets - 1);
}

namespace detail {

inline Tensor bucketed_feature(const Tensor& table, const Linear& proj,
                               const std::vector<std::size_t>& raw) {
  std::vector<std::size_t> idx(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) idx[i] = std::min(raw[i], table.rows() - 1);
  return relu(linear(gather_rows(table, idx), proj));
}

}  // namespace detail

// ReLU(Linear(Embedding(bucket))) per sentence; rows follow the input order.
inline Tensor length_feature(const std::vector<std::size_t>& char_lengths, const FeatureParams& p) {
  std::vector<std::size_t> buckets(char_lengths.size());
  for (std::size_t i = 0; i < buckets.size(); ++i)
    buckets[i] = length_bucket(char_lengths[i], p.length_table.rows());
  return detail::bucketed_feature(p.length_table, p.length_proj, buckets);
}

inline Tensor position_feature(const std::vector<std::size_t>& positions, const FeatureParams& p) {
  return detail::bucketed_feature(p.position_table, p.position_proj, positions);
}

inline Tensor section_feature(const std::vector<std::size_t>& sections, const FeatureParams& p) {
  return detail::bucketed_feature(p.section_table, p.section_proj, sections);
}

// Single-sentence forms returning a [d] vector.
inline Tensor length_feature(std::size_t char_length, const FeatureParams& p) {
  return reshape(length_feature(std::vector<std::size_t>{char_length}, p), {p.d()});
}
inline Tensor position_feature(std::size_t position, const FeatureParams& p) {
  return reshape(position_feature(std::vector<std::size_t>{position}, p), {p.d()});
}
inline Tensor section_feature(std::size_t section, const FeatureParams& p) {
  return reshape(section_feature(std::vector<std::size_t>{section}, p), {p.d()});
}

// tanh(E W_c E^T), the [n x n] sentence correlation matrix.
inline Tensor correlation_matrix(const Tensor& sents, const Tensor& w_c) {
  if (sents.rank() != 2 || w_c.rank() != 2 || w_c.rows() != sents.cols() ||
      w_c.cols() != sents.cols()) {
    throw DimensionError("correlation: sentences " + shape_str(sents.shape()) + " vs W_c " +
                         shape_str(w_c.shape()));
  }
  return tanh(matmul_nt(matmul(sents, w_c), sents));
}

inline Tensor correlation_feature(const Tensor& sents, const FeatureParams& p) {
  const Tensor c = correlation_matrix(sents, p.correlation_matrix);
  return relu(linear(matmul(c, sents), p.correlation_proj));
}

// E_D = (1/n) * sum_i softmax(E W_sents)_i * E_i, returned as [d].
inline Tensor document_embedding(const Tensor& sents, const Tensor& w_sents) {
  if (sents.rank() != 2 || sents.rows() == 0 || w_sents.rank() != 2 ||
      w_sents.rows() != sents.cols() || w_sents.cols() != 1) {
    throw DimensionError("document_embedding: sentences " + shape_str(sents.shape()) +
                         " vs W_sents " + shape_str(w_sents.shape()));
  }
  const std::size_t n = sents.rows();
  const Tensor weights = softmax(reshape(matmul(sents, w_sents), {1, n}), 1);
  return reshape(scale(matmul(weights, sents), 1.0 / static_cast<double>(n)), {sents.cols()});
}

// Softmax weights used by document_embedding, [n].
inline Tensor document_weights(const Tensor& sents, const Tensor& w_sents) {
  return softmax(reshape(matmul(sents, w_sents), {sents.rows()}));
}

// tanh(E W_s E_D^T), one saliency scalar per sentence, [n x 1].
inline Tensor saliency_scores(const Tensor& sents, const Tensor& doc_embedding, const Tensor& w_s) {
  if (sents.rank() != 2 || doc_embedding.numel() != sents.cols() || w_s.rank() != 2 ||
      w_s.rows() != sents.cols() || w_s.cols() != sents.cols()) {
    throw DimensionError("saliency: sentences " + shape_str(sents.shape()) + ", E_D " +
                         shape_str(doc_embedding.shape()) + ", W_s " + shape_str(w_s.shape()));
  }
  return tanh(matmul_nt(matmul(sents, w_s), reshape(doc_embedding, {1, sents.cols()})));
}

// Each sentence row scaled by its saliency, then ReLU(Linear(.)).
inline Tensor saliency_feature(const Tensor& sents, const Tensor& doc_embedding,
                               const FeatureParams& p) {
  const Tensor s = saliency_scores(sents, doc_embedding, p.saliency_matrix);
  return relu(linear(scale_rows(sents, s), p.saliency_proj));
}

}  // namespace scisumm

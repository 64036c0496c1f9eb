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

// End-to-end scorer: sentence embeddings -> sparse transformer layers ->
// sentence features -> per-sentence logits.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scisumm/attention.hpp"
#include "scisumm/corpus.hpp"
#include "scisumm/encoder.hpp"
#include "scisumm/extractor.hpp"
#include "scisumm/features.hpp"
#include "scisumm/nn.hpp"

namespace scisumm {

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t window = 50;
  double global_ratio = 20.0;  // percent of sentences attending globally
  GlobalPolicy global_policy = GlobalPolicy::kStride;
  std::size_t max_sentences = 500;
  std::size_t s_max = 32;
  std::size_t length_buckets = 100;
  std::size_t max_chunk_tokens = 3072;
  std::uint64_t encoder_seed = 7;
  Combine combine = Combine::kSum;
  SegmentParity segment_parity = SegmentParity::kGlobal;

  void check() const {
    if (d_model == 0 || d_model % 2 != 0) throw ArgumentError("d_model must be a positive even number");
    if (heads == 0 || d_model % heads != 0) throw ArgumentError("heads must divide d_model");
    if (window == 0) throw ArgumentError("window must be at least 1");
    if (layers == 0) throw ArgumentError("layers must be at least 1");
    if (max_sentences == 0 || s_max == 0 || length_buckets == 0 || d_ff == 0) {
      throw ArgumentError("table sizes must be positive");
    }
  }
};

struct ModelParams {
  Tensor segment_table;  // [2 x d]
  Tensor section_table;  // [S_max x d]
  std::vector<AttentionParams> layers;
  FeatureParams features;
  Linear output;
};

class Model {
 public:
  // Fresh parameters drawn uniformly from [-0.1, 0.1] under `seed`.
  Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.check();
    Rng rng(seed);
    const std::size_t d = cfg_.d_model;
    store_.add("segment_table", uniform_param({2, d}, rng));
    store_.add("section_table", uniform_param({cfg_.s_max, d}, rng));
    for (std::size_t l = 0; l < cfg_.layers; ++l)
      AttentionParams::create(store_, layer_prefix(l), d, cfg_.d_ff, rng);
    FeatureParams::create(store_, feature_sizes(), rng);
    const std::size_t out_in = cfg_.combine == Combine::kSum ? d : 6 * d;
    Linear::create(store_, "output", out_in, 1, rng);
    bind();
  }

  // Wraps existing parameters (e.g. from a checkpoint).
  Model(ModelConfig cfg, ParamStore store) : cfg_(std::move(cfg)), store_(std::move(store)) {
    cfg_.check();
    bind();
  }

  Model(const Model& other) : cfg_(other.cfg_), store_(other.store_.clone()) { bind(); }
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const ModelParams& parts() const { return parts_; }

  // Sentences attending globally in `doc`. Fixed per document for a run seed.
  std::vector<std::size_t> global_positions(const Document& doc, std::uint64_t seed = 0) const {
    const std::size_t n = std::min(doc.n_sentences(), cfg_.max_sentences);
    return select_global(n, cfg_.global_ratio, cfg_.global_policy,
                         seed ^ detail::fnv1a64(doc.id));
  }

  // Per-sentence logits [n] given precomputed semantic vectors [n x d].
  Tensor logits(const Document& doc, const Tensor& semantic, std::uint64_t seed = 0) const {
    const std::size_t n = doc.n_sentences();
    if (n == 0) throw ArgumentError("document " + doc.id + " has no sentences");
    if (n > cfg_.max_sentences) {
      throw ArgumentError("document " + doc.id + " exceeds max_sentences; truncate it first");
    }
    const Tensor embedded = compose_embeddings(semantic, doc, parts_.segment_table,
                                               parts_.section_table, cfg_.segment_parity);
    const AttentionMask mask =
        build_attention_mask({n}, cfg_.window, {global_positions(doc, seed)}, cfg_.max_sentences);
    Tensor h = pad_rows(embedded, mask.padded_len);
    for (const AttentionParams& layer : parts_.layers)
      h = transformer_layer(h, mask.row(0), layer, cfg_.window, cfg_.heads);
    const Tensor sents = slice_rows(h, 0, n);

    std::vector<std::size_t> lengths, positions, sections;
    for (const Sentence& s : doc.sentences()) {
      lengths.push_back(s.char_length);
      positions.push_back(s.doc_position);
      sections.push_back(s.section_index);
    }
    SentenceFeatures f;
    f.sentence = sents;
    f.length = length_feature(lengths, parts_.features);
    f.position = position_feature(positions, parts_.features);
    f.section = section_feature(sections, parts_.features);
    f.correlation = correlation_feature(sents, parts_.features);
    f.saliency = saliency_feature(sents, document_embedding(sents, parts_.features.sentence_weights),
                                  parts_.features);
    return predict_logits(f, parts_.output, cfg_.combine);
  }

  SentenceScores score(const Document& doc, const Tensor& semantic, std::uint64_t seed = 0) const {
    NoGradGuard no_grad;
    return {sigmoid(logits(doc, semantic, seed)).to_vector()};
  }

  FeatureSizes feature_sizes() const {
    return {cfg_.d_model, cfg_.length_buckets, cfg_.max_sentences, cfg_.s_max};
  }

  static std::string layer_prefix(std::size_t l) { return "layer" + std::to_string(l); }

 private:
  void bind() {
    parts_.segment_table = store_.at("segment_table");
    parts_.section_table = store_.at("section_table");
    parts_.layers.clear();
    for (std::size_t l = 0; l < cfg_.layers; ++l)
      parts_.layers.push_back(AttentionParams::bind(store_, layer_prefix(l)));
    parts_.features = FeatureParams::bind(store_);
    parts_.output = Linear::bind(store_, "output");
  }

  ModelConfig cfg_;
  ParamStore store_;
  ModelParams parts_;
};

}  // namespace scisumm

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

// Sentence score prediction and budgeted selection with trigram blocking.

#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "scisumm/corpus.hpp"
#include "scisumm/nn.hpp"
#include "scisumm/ops.hpp"
#include "scisumm/rouge.hpp"

namespace scisumm {

// How the six [n x d] feature matrices reach the output layer.
enum class Combine { kSum, kConcat };

struct SentenceFeatures {
  Tensor sentence, length, position, section, correlation, saliency;
};

// Pre-sigmoid scores, [n]. kSum adds the features elementwise and expects a
// d -> 1 layer; kConcat joins them side by side and expects 6d -> 1.
inline Tensor predict_logits(const SentenceFeatures& f, const Linear& out, Combine combine = Combine::kSum) {
  const std::vector<Tensor> parts = {f.sentence, f.length, f.position, f.section, f.correlation, f.saliency};
  for (const Tensor& t : parts) {
    if (t.shape() != f.sentence.shape() || t.rank() != 2) {
      throw DimensionError("predict_scores: feature " + shape_str(t.shape()) + " vs sentence " +
                           shape_str(f.sentence.shape()));
    }
  }
  Tensor x;
  if (combine == Combine::kSum) {
    x = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) x = add(x, parts[i]);
  } else {
    x = concat_cols(parts);
  }
  if (out.out_features() != 1) {
    throw DimensionError("predict_scores: output layer " + shape_str(out.weight.shape()) +
                         " must map to one score");
  }
  return reshape(linear(x, out), {f.sentence.rows()});
}

struct SentenceScores {
  std::vector<double> p;
};

inline SentenceScores predict_scores(const SentenceFeatures& f, const Linear& out,
                                     Combine combine = Combine::kSum) {
  const Tensor probs = sigmoid(predict_logits(f, out, combine));
  return {probs.to_vector()};
}

struct SelectionConfig {
  double budget_ratio = 0.20;
  // Absent: no blocking. Present: skip candidates sharing more than this many
  // trigrams with the sentences already accepted.
  std::optional<int> trigram_threshold;
};

// Candidate trigram occurrences that also occur among the selected sentences.
inline std::size_t shared_trigrams(const Tokens& candidate, const std::vector<const Tokens*>& selected) {
  const NgramBag cand = ngrams(candidate, 3);
  if (cand.empty() || selected.empty()) return 0;
  NgramBag pool;
  for (const Tokens* s : selected) pool.merge(ngrams(*s, 3));
  std::size_t shared = 0;
  for (const auto& [key, count] : cand.counts())
    if (pool.count(key) > 0) shared += static_cast<std::size_t>(count);
  return shared;
}

inline std::size_t shared_trigrams(const Sentence& candidate, const std::vector<const Sentence*>& selected) {
  std::vector<const Tokens*> toks;
  for (const Sentence* s : selected) toks.push_back(&s->tokens);
  return shared_trigrams(candidate.tokens, toks);
}

// Greedy top-k by score (ties to the earlier sentence) with optional
// trigram blocking. Returns positions in document order.
inline std::vector<std::size_t> select_sentences(const Document& doc, const SentenceScores& scores,
                                                 const SelectionConfig& cfg) {
  const std::size_t n = doc.n_sentences();
  if (scores.p.size() != n) {
    throw ArgumentError("select_sentences: " + std::to_string(scores.p.size()) +
                        " scores for a document of " + std::to_string(n) + " sentences");
  }
  if (cfg.trigram_threshold && *cfg.trigram_threshold < 0) {
    throw ArgumentError("trigram threshold must be non-negative");
  }
  const std::size_t k = budget_for(n, cfg.budget_ratio);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores.p[a] > scores.p[b]; });

  const auto sents = doc.sentences();
  std::vector<std::size_t> accepted;
  std::vector<const Tokens*> accepted_tokens;
  for (std::size_t i : order) {
    if (accepted.size() >= k) break;
    const Tokens& toks = sents[i].get().tokens;
    if (cfg.trigram_threshold &&
        shared_trigrams(toks, accepted_tokens) > static_cast<std::size_t>(*cfg.trigram_threshold)) {
      continue;
    }
    accepted.push_back(i);
    accepted_tokens.push_back(&toks);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

}  // namespace scisumm

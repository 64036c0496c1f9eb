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

// Losses, learning-rate schedule, gradient clipping and the accumulation
// training loop.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scisumm/corpus.hpp"
#include "scisumm/encoder.hpp"
#include "scisumm/extractor.hpp"
#include "scisumm/model.hpp"
#include "scisumm/nn.hpp"
#include "scisumm/ops.hpp"
#include "scisumm/rouge.hpp"

namespace scisumm {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_labels(std::size_t n, std::span<const int> labels, const char* op) {
  if (n != labels.size()) {
    throw ArgumentError(std::string(op) + ": " + std::to_string(n) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
  }
}

// -sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)] on probabilities. Only the
// true-label term is evaluated, so p = y gives exactly zero.
inline Tensor ce_loss(const Tensor& p, std::span<const int> labels) {
  check_labels(p.numel(), labels, "ce_loss");
  std::vector<int> y(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total -= std::log(y[i] ? p[i] : 1.0 - p[i]);
  return detail::make_result({1}, Buffer{total}, {&p}, [y](detail::Node& self) {
    detail::Node& in = *self.parents[0];
    in.ensure_grad();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = in.value[i];
      in.grad[i] += self.grad[0] * (y[i] ? -1.0 / v : 1.0 / (1.0 - v));
    }
  });
}

// Same loss taking pre-sigmoid scores.
inline Tensor ce_loss_logits(const Tensor& logits, std::span<const int> labels) {
  check_labels(logits.numel(), labels, "ce_loss");
  return bce_with_logits(logits, labels);
}

// Mean over candidates of reward_c * CE(p, labels_c).
inline Tensor reinforced_loss(const Tensor& logits, const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw ArgumentError("reinforced_loss: no candidates");
  Tensor total;
  for (const Candidate& c : candidates) {
    if (c.reward < 0.0 || c.reward > 1.0) {
      throw ArgumentError("reinforced_loss: reward " + std::to_string(c.reward) + " outside [0, 1]");
    }
    const Tensor term = scale(ce_loss_logits(logits, c.labels), c.reward);
    total = total.defined() ? add(total, term) : term;
  }
  return scale(total, 1.0 / static_cast<double>(candidates.size()));
}

inline Tensor reinforced_loss(const Tensor& logits, std::span<const int> labels, double reward_value) {
  return reinforced_loss(logits, {Candidate{{labels.begin(), labels.end()}, reward_value}});
}

// scale * d^-0.5 * min(step^-0.5, step * warmup^-1.5)
inline double noam_lr(std::size_t step, std::size_t d_model, std::size_t warmup, double scale) {
  if (step == 0) throw ArgumentError("noam_lr: step must be at least 1");
  if (warmup == 0) throw ArgumentError("noam_lr: warmup must be at least 1");
  const double s = static_cast<double>(step), w = static_cast<double>(warmup);
  return scale * std::pow(static_cast<double>(d_model), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

inline double global_grad_norm(const ParamStore& params) {
  double sq = 0.0;
  for (const auto& [name, t] : params)
    for (double g : t.grad()) sq += g * g;
  return std::sqrt(sq);
}

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the factor applied (1 when untouched).
inline double clip_gradients(ParamStore& params, double max_norm) {
  if (!(max_norm > 0.0)) throw ArgumentError("clip_gradients: max_norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (auto& [name, t] : params)
    if (t.has_grad())
      for (double& g : t.mutable_grad()) g *= factor;
  return factor;
}

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParamStore& params, double lr) = 0;
};

// w <- w - lr * g
class SgdOptimizer final : public Optimizer {
 public:
  void step(ParamStore& params, double lr) override {
    if (lr == 0.0) return;
    for (auto& [name, t] : params) {
      if (!t.has_grad()) continue;
      auto w = t.mutable_data();
      const auto g = t.grad();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
  }
};

struct TrainConfig {
  double lr_scale = 2.0;
  std::size_t warmup_steps = 50;
  std::size_t accumulation_steps = 10;
  double clip_norm = 5.0;
  std::size_t epochs = 10;
  bool reinforced = false;
  std::size_t candidates_k = 5;
  std::uint64_t seed = 1;
  SelectionConfig selection;

  void check() const {
    if (accumulation_steps == 0) throw ArgumentError("accumulation_steps must be at least 1");
    if (warmup_steps == 0) throw ArgumentError("warmup_steps must be at least 1");
    if (!(clip_norm > 0.0)) throw ArgumentError("clip_norm must be positive");
    if (candidates_k == 0) throw ArgumentError("candidates_k must be at least 1");
  }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;  // "train" or "heldout"
  double loss = 0.0;
  double rouge1_recall = 0.0;
  double rouge2_recall = 0.0;
  double rougeL_recall = 0.0;
  double label_accuracy = 0.0;
  double lr = 0.0;
  std::size_t updates = 0;
};

// A labeled document with its encoder output computed once.
struct PreparedDocument {
  LabeledDocument item;
  Tensor semantic;
  std::vector<Candidate> candidates;  // filled in reinforced mode
};

inline PreparedDocument prepare(LabeledDocument item, const SentenceEncoder& enc,
                                const ModelConfig& cfg) {
  check_labels(item.document.n_sentences(), item.labels, "prepare");
  PreparedDocument out;
  out.semantic = encode_sentences(item.document, enc, cfg.max_chunk_tokens);
  out.item = std::move(item);
  return out;
}

struct Evaluation {
  double loss = 0.0;
  double rouge1_recall = 0.0, rouge2_recall = 0.0, rougeL_recall = 0.0;
  double label_accuracy = 0.0;  // p > 0.5 against labels, over all sentences
};

inline Evaluation evaluate_model(const Model& model, const std::vector<PreparedDocument>& docs,
                                 const SelectionConfig& sel, std::uint64_t seed) {
  Evaluation ev;
  if (docs.empty()) return ev;
  NoGradGuard no_grad;
  std::size_t correct = 0, total = 0;
  for (const PreparedDocument& pd : docs) {
    const Document& doc = pd.item.document;
    const Tensor logits = model.logits(doc, pd.semantic, seed);
    ev.loss += ce_loss_logits(logits, pd.item.labels).item();
    SentenceScores scores{sigmoid(logits).to_vector()};
    for (std::size_t i = 0; i < scores.p.size(); ++i) {
      correct += (scores.p[i] > 0.5) == (pd.item.labels[i] == 1);
      ++total;
    }
    const auto picked = select_sentences(doc, scores, sel);
    std::vector<int> mask(doc.n_sentences(), 0);
    for (std::size_t i : picked) mask[i] = 1;
    const Tokens cand = tokenize(extract_text(doc, mask));
    const Tokens ref = tokenize(doc.reference_summary);
    ev.rouge1_recall += rouge_n(cand, ref, 1).recall;
    ev.rouge2_recall += rouge_n(cand, ref, 2).recall;
    ev.rougeL_recall += rouge_l(cand, ref).recall;
  }
  const double n = static_cast<double>(docs.size());
  ev.loss /= n;
  ev.rouge1_recall /= n;
  ev.rouge2_recall /= n;
  ev.rougeL_recall /= n;
  ev.label_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return ev;
}

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  std::size_t updates = 0;
  std::size_t partial_updates = 0;  // epoch-end flushes of a short batch
};

// Batch size one with gradients accumulated over `accumulation_steps`
// documents; a partial batch at the end of an epoch is flushed. Each update
// averages the accumulated gradients, clips them and applies SGD at the
// NOAM rate.
inline TrainResult train(Model& model, std::vector<PreparedDocument>& train_docs,
                         const std::vector<PreparedDocument>& heldout, const TrainConfig& cfg,
                         const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  cfg.check();
  if (train_docs.empty()) throw ArgumentError("train: empty dataset");
  ParamStore& params = model.params();
  SgdOptimizer optimizer;
  TrainResult result;

  if (cfg.reinforced) {
    for (PreparedDocument& pd : train_docs) {
      if (!pd.candidates.empty()) continue;
      pd.candidates = sample_candidates(pd.item.document, pd.item.labels, cfg.candidates_k,
                                        cfg.seed ^ detail::fnv1a64(pd.item.document.id))
                          .candidates;
    }
  }

  std::vector<std::size_t> order(train_docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed);
  double lr = 0.0;
  params.zero_grad();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t pending = 0;
    auto flush = [&]() {
      if (pending == 0) return;
      if (pending < cfg.accumulation_steps) ++result.partial_updates;
      const double inv = 1.0 / static_cast<double>(pending);
      for (auto& [name, t] : params)
        if (t.has_grad())
          for (double& g : t.mutable_grad()) g *= inv;
      clip_gradients(params, cfg.clip_norm);
      ++result.updates;
      lr = noam_lr(result.updates, model.config().d_model, cfg.warmup_steps, cfg.lr_scale);
      optimizer.step(params, lr);
      params.zero_grad();
      pending = 0;
    };

    for (std::size_t step = 0; step < order.size(); ++step) {
      const PreparedDocument& pd = train_docs[order[step]];
      const Tensor logits = model.logits(pd.item.document, pd.semantic, cfg.seed);
      const Tensor loss = cfg.reinforced ? reinforced_loss(logits, pd.candidates)
                                         : ce_loss_logits(logits, pd.item.labels);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::ostringstream oss;
        oss << "non-finite loss " << value << " at epoch " << epoch << ", update "
            << result.updates << ", document " << pd.item.document.id;
        throw TrainingError(oss.str());
      }
      epoch_loss += value;
      backward(loss);
      if (++pending == cfg.accumulation_steps) flush();
    }
    flush();

    EpochMetrics tm;
    tm.epoch = epoch;
    tm.split = "train";
    tm.loss = epoch_loss / static_cast<double>(order.size());
    tm.lr = lr;
    tm.updates = result.updates;
    result.metrics.push_back(tm);
    if (on_epoch) on_epoch(tm);
    if (!heldout.empty()) {
      const Evaluation ev = evaluate_model(model, heldout, cfg.selection, cfg.seed);
      EpochMetrics hm{epoch, "heldout", ev.loss, ev.rouge1_recall, ev.rouge2_recall,
                      ev.rougeL_recall, ev.label_accuracy, lr, result.updates};
      result.metrics.push_back(hm);
      if (on_epoch) on_epoch(hm);
    }
  }
  return result;
}

}  // namespace scisumm

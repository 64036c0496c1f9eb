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

// ROUGE-1/2/L, the summary-level reward, greedy oracle labeling and
// candidate-summary sampling.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "scisumm/corpus.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/nn.hpp"

namespace scisumm {

// Multiset of n-grams keyed by the joined tokens.
class NgramBag {
 public:
  void add(const std::string& key, int count = 1) {
    counts_[key] += count;
    total_ += count;
  }
  void merge(const NgramBag& other) {
    for (const auto& [k, c] : other.counts_) add(k, c);
  }
  int count(const std::string& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }
  // Number of n-gram occurrences (with multiplicity).
  std::size_t size() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::unordered_map<std::string, int>& counts() const { return counts_; }

  // Sum over keys of min(count here, count in other).
  std::size_t clipped_overlap(const NgramBag& other) const {
    const NgramBag& small = counts_.size() <= other.counts_.size() ? *this : other;
    const NgramBag& large = &small == this ? other : *this;
    std::size_t hits = 0;
    for (const auto& [k, c] : small.counts_) hits += std::min(c, large.count(k));
    return hits;
  }

 private:
  std::unordered_map<std::string, int> counts_;
  std::size_t total_ = 0;
};

inline NgramBag ngrams(const Tokens& tokens, std::size_t n) {
  if (n == 0) throw ArgumentError("ngrams: n must be at least 1");
  NgramBag bag;
  if (tokens.size() < n) return bag;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    bag.add(key);
  }
  return bag;
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the reference is empty and the score is meaningless.
  bool degenerate = false;
};

inline double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

inline RougeScore score_from_counts(std::size_t hits, std::size_t candidate_total,
                                    std::size_t reference_total) {
  RougeScore s;
  if (reference_total == 0) {
    s.degenerate = true;
    return s;
  }
  s.recall = static_cast<double>(hits) / static_cast<double>(reference_total);
  s.precision = candidate_total ? static_cast<double>(hits) / static_cast<double>(candidate_total) : 0.0;
  s.f1 = f_measure(s.precision, s.recall);
  return s;
}

inline RougeScore rouge_n(const NgramBag& candidate, const NgramBag& reference) {
  return score_from_counts(candidate.clipped_overlap(reference), candidate.size(), reference.size());
}

inline RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n) {
  return rouge_n(ngrams(candidate, n), ngrams(reference, n));
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  return score_from_counts(lcs_length(candidate, reference), candidate.size(), reference.size());
}

struct Reward {
  double value = 0.0;
  bool degenerate = false;
};

// Mean of ROUGE-1 F1 and ROUGE-2 F1.
inline Reward reward(const Tokens& candidate, const Tokens& reference) {
  const RougeScore r1 = rouge_n(candidate, reference, 1);
  const RougeScore r2 = rouge_n(candidate, reference, 2);
  return {(r1.f1 + r2.f1) / 2.0, r1.degenerate};
}

inline Reward reward(std::string_view candidate_text, std::string_view reference_text) {
  return reward(tokenize(candidate_text), tokenize(reference_text));
}

// ceil(ratio * n), at least one sentence for a nonempty document.
inline std::size_t budget_for(std::size_t n, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ArgumentError("budget ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

// Scores extracts of a fixed document against its reference. N-grams are
// collected per sentence, so no bigram straddles two selected sentences.
class ExtractScorer {
 public:
  explicit ExtractScorer(const Document& doc) {
    const Tokens ref = tokenize(doc.reference_summary);
    ref_uni_ = ngrams(ref, 1);
    ref_bi_ = ngrams(ref, 2);
    for (const Sentence& s : doc.sentences()) {
      uni_.push_back(ngrams(s.tokens, 1));
      bi_.push_back(ngrams(s.tokens, 2));
    }
  }

  bool degenerate() const { return ref_uni_.empty(); }
  std::size_t size() const { return uni_.size(); }

  // ROUGE-1 F1 + ROUGE-2 F1 of the union of `selected`.
  double objective(const std::vector<std::size_t>& selected) const {
    NgramBag u, b;
    for (std::size_t i : selected) {
      u.merge(uni_.at(i));
      b.merge(bi_.at(i));
    }
    return rouge_n(u, ref_uni_).f1 + rouge_n(b, ref_bi_).f1;
  }

 private:
  NgramBag ref_uni_, ref_bi_;
  std::vector<NgramBag> uni_, bi_;
};

struct OracleResult {
  std::vector<int> labels;
  double objective = 0.0;  // ROUGE-1 F1 + ROUGE-2 F1 of the chosen extract
  bool degenerate = false;
};

// Greedy extract construction: add the sentence with the largest gain in
// ROUGE-1 F1 + ROUGE-2 F1 until the budget is spent or no sentence gains.
inline OracleResult oracle_labels(const Document& doc, std::size_t budget) {
  if (budget == 0) throw ArgumentError("oracle_labels: budget must be at least 1");
  const ExtractScorer scorer(doc);
  OracleResult out;
  out.labels.assign(scorer.size(), 0);
  if (scorer.degenerate()) {
    out.degenerate = true;
    log_warning("document ", doc.id, ": empty reference summary, all labels zero");
    return out;
  }
  std::vector<std::size_t> selected;
  double current = 0.0;
  while (selected.size() < budget) {
    double best = current;
    std::size_t best_i = scorer.size();
    for (std::size_t i = 0; i < scorer.size(); ++i) {
      if (out.labels[i]) continue;
      selected.push_back(i);
      const double value = scorer.objective(selected);
      selected.pop_back();
      if (value > best) best = value, best_i = i;
    }
    if (best_i == scorer.size()) break;
    selected.push_back(best_i);
    out.labels[best_i] = 1;
    current = best;
  }
  out.objective = current;
  return out;
}

// Budget of ceil(budget_ratio * n) sentences.
inline OracleResult oracle_labels_by_ratio(const Document& doc, double budget_ratio = 0.20) {
  return oracle_labels(doc, std::max<std::size_t>(1, budget_for(doc.n_sentences(), budget_ratio)));
}

inline std::string extract_text(const Document& doc, const std::vector<int>& labels) {
  std::string text;
  std::size_t i = 0;
  for (const Sentence& s : doc.sentences()) {
    if (i < labels.size() && labels[i]) {
      if (!text.empty()) text += ' ';
      text += s.text;
    }
    ++i;
  }
  return text;
}

struct Candidate {
  std::vector<int> labels;
  double reward = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  // Fewer than k distinct candidates were available.
  bool short_of_k = false;
};

// Distinct single-swap perturbations of the oracle (one selected sentence
// exchanged for an unselected one), drawn in seeded order. When no swap
// exists the oracle itself is returned.
inline CandidateSet sample_candidates(const Document& doc, const std::vector<int>& oracle,
                                      std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ArgumentError("sample_candidates: k must be at least 1");
  if (oracle.size() != doc.n_sentences()) {
    throw ArgumentError("sample_candidates: " + std::to_string(oracle.size()) +
                        " labels for a document of " + std::to_string(doc.n_sentences()) +
                        " sentences");
  }
  std::vector<std::size_t> on, off;
  for (std::size_t i = 0; i < oracle.size(); ++i) (oracle[i] ? on : off).push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  for (std::size_t a : on)
    for (std::size_t b : off) swaps.emplace_back(a, b);

  const Tokens ref = tokenize(doc.reference_summary);
  auto score = [&](std::vector<int> labels) {
    Candidate c;
    c.reward = reward(tokenize(extract_text(doc, labels)), ref).value;
    c.labels = std::move(labels);
    return c;
  };

  CandidateSet out;
  if (swaps.empty()) {
    out.candidates.push_back(score(oracle));
    out.short_of_k = k > 1;
    return out;
  }
  Rng rng(seed);
  shuffle(swaps, rng);
  for (std::size_t i = 0; i < swaps.size() && out.candidates.size() < k; ++i) {
    std::vector<int> labels = oracle;
    labels[swaps[i].first] = 0;
    labels[swaps[i].second] = 1;
    out.candidates.push_back(score(std::move(labels)));
  }
  out.short_of_k = out.candidates.size() < k;
  return out;
}

}  // namespace scisumm

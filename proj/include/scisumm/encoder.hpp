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

// Sentence-level semantic vectors and the four-way sentence embedding
// (semantic + position + segment + section).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "scisumm/corpus.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/ops.hpp"
#include "scisumm/tensor.hpp"

namespace scisumm {

// Maps a batch of tokenized sentences to an [n x d] matrix.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual Tensor encode(const std::vector<Tokens>& sentences) const = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic stand-in for a pretrained encoder: every token gets a vector
// drawn uniformly from [-1, 1]^d by a generator seeded with hash(token) and
// the encoder seed; a sentence is the mean of its token vectors.
class StubEncoder final : public SentenceEncoder {
 public:
  // Pinned token k maps to sqrt(d) times basis vector k. Every other token
  // is zero on the pinned coordinates, so pinned directions are orthogonal
  // to all hashed ones.
  StubEncoder(std::uint64_t seed, std::size_t d, std::vector<std::string> pinned = {})
      : seed_(seed), d_(d), pinned_(std::move(pinned)) {
    if (d == 0) throw ArgumentError("StubEncoder: dimension must be positive");
    if (pinned_.size() >= d) {
      throw ArgumentError("StubEncoder: " + std::to_string(pinned_.size()) +
                          " pinned tokens need d > " + std::to_string(pinned_.size()));
    }
  }

  std::size_t dim() const override { return d_; }
  const std::vector<std::string>& pinned() const { return pinned_; }

  void token_vector(std::string_view token, double* out) const {
    const std::size_t reserved = pinned_.size();
    for (std::size_t k = 0; k < reserved; ++k) {
      if (pinned_[k] != token) continue;
      std::fill(out, out + d_, 0.0);
      out[k] = std::sqrt(static_cast<double>(d_));
      return;
    }
    std::uint64_t state = detail::fnv1a64(token) ^ (seed_ * 0x9e3779b97f4a7c15ULL);
    std::fill(out, out + reserved, 0.0);
    for (std::size_t i = reserved; i < d_; ++i) {
      const double u = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
      out[i] = 2.0 * u - 1.0;
    }
  }

  std::vector<double> token_vector(std::string_view token) const {
    std::vector<double> v(d_);
    token_vector(token, v.data());
    return v;
  }

  Tensor encode(const std::vector<Tokens>& sentences) const override {
    Tensor out = Tensor::zeros({sentences.size(), d_});
    auto data = out.mutable_data();
    std::vector<double> tmp(d_);
    for (std::size_t r = 0; r < sentences.size(); ++r) {
      const Tokens& toks = sentences[r];
      if (toks.empty()) continue;
      double* row = data.data() + r * d_;
      for (const std::string& t : toks) {
        token_vector(t, tmp.data());
        for (std::size_t i = 0; i < d_; ++i) row[i] += tmp[i];
      }
      const double inv = 1.0 / static_cast<double>(toks.size());
      for (std::size_t i = 0; i < d_; ++i) row[i] *= inv;
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::size_t d_;
  std::vector<std::string> pinned_;
};

// Vectors supplied ahead of time by an external model, keyed by the
// sentence's normalized token string. File format: JSONL of
// {"text": str, "vector": [float, ...]}.
class PrecomputedEncoder final : public SentenceEncoder {
 public:
  explicit PrecomputedEncoder(std::size_t d) : d_(d) {}

  static PrecomputedEncoder load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    std::string line;
    std::size_t n = 0;
    std::optional<PrecomputedEncoder> enc;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("embeddings line " + std::to_string(n) + ": " + e.what());
      }
      auto vec = j.at("vector").get<std::vector<double>>();
      if (!enc) enc.emplace(vec.size());
      enc->add(j.at("text").get<std::string>(), std::move(vec));
    }
    if (!enc) throw ParseError("embeddings file is empty: " + path);
    return std::move(*enc);
  }

  void add(std::string_view text, std::vector<double> vec) {
    if (vec.size() != d_) {
      throw DimensionError("embedding of width " + std::to_string(vec.size()) +
                           " for encoder of width " + std::to_string(d_));
    }
    table_[join(tokenize(text))] = std::move(vec);
  }

  std::size_t dim() const override { return d_; }

  Tensor encode(const std::vector<Tokens>& sentences) const override {
    Tensor out = Tensor::zeros({sentences.size(), d_});
    auto data = out.mutable_data();
    for (std::size_t r = 0; r < sentences.size(); ++r) {
      const std::string key = join(sentences[r]);
      auto it = table_.find(key);
      if (it == table_.end()) throw ArgumentError("no precomputed embedding for sentence: " + key);
      std::copy(it->second.begin(), it->second.end(), data.begin() + r * d_);
    }
    return out;
  }

 private:
  std::size_t d_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

inline std::vector<double> sinusoid_position(std::size_t pos, std::size_t d) {
  if (d % 2 != 0) throw ArgumentError("sinusoid_position: d must be even, got " + std::to_string(d));
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d / 2; ++i) {
    const double angle =
        static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
    v[2 * i] = std::sin(angle);
    v[2 * i + 1] = std::cos(angle);
  }
  return v;
}

// Sentence index ranges [begin, end) sharing one encoder call. Chunks never
// cross a section boundary or split a sentence.
inline std::vector<std::pair<std::size_t, std::size_t>> plan_chunks(
    const Document& doc, std::size_t max_chunk_tokens, std::size_t max_chunk_sentences = 0) {
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  std::size_t pos = 0;
  for (const Section& sec : doc.sections) {
    std::size_t begin = pos, tokens = 0;
    for (const Sentence& s : sec.sentences) {
      if (s.tokens.size() > max_chunk_tokens) {
        throw ArgumentError("sentence " + std::to_string(s.doc_position) + " of document " +
                            doc.id + " has " + std::to_string(s.tokens.size()) +
                            " tokens, over the chunk budget of " +
                            std::to_string(max_chunk_tokens));
      }
      const bool full_tokens = tokens + s.tokens.size() > max_chunk_tokens;
      const bool full_count = max_chunk_sentences && pos - begin >= max_chunk_sentences;
      if (pos > begin && (full_tokens || full_count)) {
        chunks.emplace_back(begin, pos);
        begin = pos;
        tokens = 0;
      }
      tokens += s.tokens.size();
      ++pos;
    }
    if (pos > begin) chunks.emplace_back(begin, pos);
  }
  return chunks;
}

// Semantic vectors for every sentence, computed section by section in chunks
// of at most `max_chunk_tokens` tokens. Rows follow document order.
inline Tensor encode_sentences(const Document& doc, const SentenceEncoder& enc,
                               std::size_t max_chunk_tokens = 3072,
                               std::size_t max_chunk_sentences = 0) {
  const auto sents = doc.sentences();
  const std::size_t d = enc.dim();
  Tensor out = Tensor::zeros({sents.size(), d});
  auto data = out.mutable_data();
  for (const auto& [begin, end] : plan_chunks(doc, max_chunk_tokens, max_chunk_sentences)) {
    std::vector<Tokens> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(sents[i].get().tokens);
    const Tensor part = enc.encode(batch);
    if (part.rows() != batch.size() || part.cols() != d) {
      throw DimensionError("encoder returned " + shape_str(part.shape()) + " for " +
                           std::to_string(batch.size()) + " sentences of width " + std::to_string(d));
    }
    std::copy(part.data().begin(), part.data().end(), data.begin() + begin * d);
  }
  return out;
}

enum class SegmentParity { kGlobal, kPerSection };

// Row i = semantic_i + sinusoid(i) + segment[i mod 2] + section[min(sec_i, S_max-1)].
inline Tensor compose_embeddings(const Tensor& semantic, const Document& doc,
                                 const Tensor& segment_table, const Tensor& section_table,
                                 SegmentParity parity = SegmentParity::kGlobal) {
  const std::size_t n = doc.n_sentences();
  if (semantic.rank() != 2 || semantic.rows() != n) {
    throw DimensionError("compose_embeddings: semantic " + shape_str(semantic.shape()) +
                         " for a document of " + std::to_string(n) + " sentences");
  }
  const std::size_t d = semantic.cols();
  if (segment_table.rank() != 2 || segment_table.rows() != 2 || segment_table.cols() != d) {
    throw DimensionError("compose_embeddings: segment table " + shape_str(segment_table.shape()) +
                         " vs semantic " + shape_str(semantic.shape()));
  }
  if (section_table.rank() != 2 || section_table.rows() == 0 || section_table.cols() != d) {
    throw DimensionError("compose_embeddings: section table " + shape_str(section_table.shape()) +
                         " vs semantic " + shape_str(semantic.shape()));
  }
  std::vector<double> pos(n * d);
  std::vector<std::size_t> seg(n), sec(n);
  const std::size_t s_max = section_table.rows();
  std::size_t i = 0;
  for (const Section& section : doc.sections) {
    std::size_t within = 0;
    for (const Sentence& s : section.sentences) {
      const auto p = sinusoid_position(i, d);
      std::copy(p.begin(), p.end(), pos.begin() + i * d);
      seg[i] = (parity == SegmentParity::kGlobal ? i : within) % 2;
      sec[i] = std::min(s.section_index, s_max - 1);
      ++i, ++within;
    }
  }
  const Tensor position = Tensor::from({n, d}, pos);
  return add(add(add(semantic, position), gather_rows(segment_table, seg)),
             gather_rows(section_table, sec));
}

}  // namespace scisumm

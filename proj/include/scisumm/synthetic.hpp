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

// Generated corpora with a planted salience signal, for learnability checks
// and demos.

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scisumm/corpus.hpp"
#include "scisumm/nn.hpp"

namespace scisumm {

struct PlantedCorpusSpec {
  std::size_t documents = 200;
  std::size_t sections = 4;
  std::size_t sentences_per_section = 10;
  double planted_ratio = 0.20;
  std::size_t vocabulary = 400;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 12;
  std::string marker = "keyfinding";
  std::uint64_t seed = 2024;
};

// Filler sentences draw from a synthetic vocabulary; planted sentences also
// contain the marker token. The reference summary is the planted sentences
// joined in order, and labels mark exactly those sentences.
inline std::vector<LabeledDocument> planted_corpus(const PlantedCorpusSpec& spec) {
  Rng rng(spec.seed);
  std::vector<std::string> vocab;
  static const char* kSyll[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "pa", "do", "gu"};
  for (std::size_t i = 0; i < spec.vocabulary; ++i) {
    std::string w;
    std::size_t x = i;
    do {
      w += kSyll[x % 12];
      x /= 12;
    } while (x);
    vocab.push_back(w + "x");
  }
  const std::size_t n = spec.sections * spec.sentences_per_section;
  const auto planted_count = static_cast<std::size_t>(spec.planted_ratio * static_cast<double>(n) + 0.5);

  std::vector<LabeledDocument> out;
  for (std::size_t d = 0; d < spec.documents; ++d) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx, rng);
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < planted_count; ++i) labels[idx[i]] = 1;

    std::vector<std::pair<std::string, std::vector<std::string>>> sections;
    std::string reference;
    for (std::size_t s = 0; s < spec.sections; ++s) {
      std::vector<std::string> sents;
      for (std::size_t k = 0; k < spec.sentences_per_section; ++k) {
        const std::size_t pos = s * spec.sentences_per_section + k;
        const std::size_t len = spec.min_tokens + rng.below(spec.max_tokens - spec.min_tokens + 1);
        std::vector<std::string> words;
        for (std::size_t t = 0; t < len; ++t) words.push_back(vocab[rng.below(vocab.size())]);
        if (labels[pos]) words[rng.below(len)] = spec.marker;
        std::string text = join(words);
        text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        text += '.';
        if (labels[pos]) reference += (reference.empty() ? "" : " ") + text;
        sents.push_back(std::move(text));
      }
      sections.emplace_back("Section " + std::to_string(s + 1), std::move(sents));
    }
    LabeledDocument ld;
    ld.document = make_document("planted-" + std::to_string(d), reference, sections);
    ld.labels = std::move(labels);
    out.push_back(std::move(ld));
  }
  return out;
}

// Writes the documents (without labels) as a corpus JSONL file.
inline void write_corpus_file(const std::string& path, const std::vector<LabeledDocument>& docs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const LabeledDocument& d : docs) out << serialize_document(d.document) << '\n';
}

}  // namespace scisumm

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

// Trains a small model on a generated corpus whose summary sentences carry a
// marker word, then summarizes a document the model has not seen.
//
//   scisumm_demo [epochs]

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "scisumm/scisumm.hpp"

int main(int argc, char** argv) {
  using namespace scisumm;
  const std::size_t epochs = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;

  RunConfig cfg;
  cfg.merge_text(
      "d_model = 16\n"
      "d_ff = 32\n"
      "layers = 1\n"
      "heads = 2\n"
      "window = 4\n"
      "stub_pinned = keyfinding\n"
      "accumulation_steps = 5\n",
      "demo");

  PlantedCorpusSpec spec;
  spec.documents = 60;
  spec.sections = 3;
  spec.sentences_per_section = 5;
  spec.vocabulary = 120;
  auto corpus = planted_corpus(spec);

  const auto encoder = cfg.make_encoder();
  const ModelConfig mc = cfg.model_config();
  std::vector<PreparedDocument> train_docs, heldout;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    (i + 6 < corpus.size() ? train_docs : heldout).push_back(prepare(corpus[i], *encoder, mc));

  TrainConfig tc;
  tc.epochs = epochs;
  tc.accumulation_steps = cfg.get_uint("accumulation_steps");
  Model model(mc, tc.seed);
  std::cout << std::fixed << std::setprecision(3);
  train(model, train_docs, heldout, tc, [](const EpochMetrics& m) {
    if (m.split == "heldout")
      std::cout << "epoch " << std::setw(2) << m.epoch << "  held-out loss " << m.loss << "  R1 " << m.rouge1_recall
                << "  accuracy " << m.label_accuracy << '\n';
  });

  const PreparedDocument& pd = heldout.front();
  const Document& doc = pd.item.document;
  const SentenceScores scores = model.score(doc, pd.semantic, tc.seed);
  const auto picked = select_sentences(doc, scores, tc.selection);
  std::cout << "\n" << doc.id << ": " << doc.n_sentences() << " sentences, budget " << picked.size() << "\n";
  for (std::size_t i = 0; i < doc.n_sentences(); ++i) {
    const bool chosen = std::find(picked.begin(), picked.end(), i) != picked.end();
    std::cout << (chosen ? " * " : "   ") << std::setw(2) << i << "  p=" << scores.p[i]
              << (pd.item.labels[i] ? "  [planted] " : "            ") << doc.sentence(i).text << '\n';
  }
  return 0;
}

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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "scisumm/config.hpp"
#include "scisumm/encoder.hpp"
#include "test_util.hpp"

namespace scisumm {
namespace {

Document two_by_three() {
  return make_document("d", "ref",
                       {{"intro", {"One two three.", "Four five.", "Six seven eight nine."}},
                        {"body", {"Ten eleven.", "Twelve.", "Thirteen fourteen fifteen."}}});
}

TEST(Sinusoid, Fixtures) {
  const auto zero = sinusoid_position(0, 6);
  EXPECT_EQ(zero, (std::vector<double>{0, 1, 0, 1, 0, 1}));
  const auto one = sinusoid_position(1, 4);
  EXPECT_NEAR(one[0], 0.8415, 1e-4);
  EXPECT_EQ(one[0], std::sin(1.0));
  EXPECT_EQ(one[2], std::sin(1.0 / 100.0));
  for (std::size_t p = 0; p < 50; ++p)
    for (double v : sinusoid_position(p, 16)) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  EXPECT_THROW(sinusoid_position(0, 5), ArgumentError);
}

TEST(StubEncoder, DeterministicMeanOfTokens) {
  const StubEncoder enc(7, 8);
  const Tensor a = enc.encode({{"graph", "neural"}});
  const Tensor b = StubEncoder(7, 8).encode({{"graph", "neural"}});
  EXPECT_EQ(a.to_vector(), b.to_vector());
  const auto g = enc.token_vector("graph"), n = enc.token_vector("neural");
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(a[i], (g[i] + n[i]) / 2);
    EXPECT_GE(g[i], -1.0);
    EXPECT_LE(g[i], 1.0);
  }
  EXPECT_NE(StubEncoder(8, 8).encode({{"graph"}}).to_vector(), enc.encode({{"graph"}}).to_vector());
}

TEST(StubEncoder, PinnedTokensAreOrthogonal) {
  const StubEncoder enc(7, 9, {"marker", "other"});
  const auto m = enc.token_vector("marker"), o = enc.token_vector("other"), w = enc.token_vector("word");
  EXPECT_EQ(m, (std::vector<double>{3, 0, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(o, (std::vector<double>{0, 3, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(w[0], 0.0);
  EXPECT_EQ(w[1], 0.0);
  // Mean of three tokens: the marker coordinate carries exactly 3 / 3.
  EXPECT_EQ(enc.encode({{"word", "marker", "x"}})(0, 0), 1.0);
  EXPECT_THROW(StubEncoder(1, 2, {"a", "b"}), ArgumentError);

  RunConfig cfg;
  cfg.set("d_model", "8");
  cfg.set("stub_pinned", "KeyFinding, other");
  const auto made = cfg.make_encoder();
  EXPECT_EQ(dynamic_cast<const StubEncoder&>(*made).pinned(), (std::vector<std::string>{"keyfinding", "other"}));
  RunConfig plain;
  plain.set("d_model", "8");
  EXPECT_NE(plain.model_hash(), cfg.model_hash());
}

TEST(StubEncoder, RowEquivariance) {
  const StubEncoder enc(3, 5);
  const std::vector<Tokens> s = {{"a", "b"}, {"c"}, {"d", "e", "f"}};
  const Tensor fwd = enc.encode(s);
  const Tensor rev = enc.encode({s[2], s[1], s[0]});
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(fwd(0, c), rev(2, c));
    EXPECT_EQ(fwd(1, c), rev(1, c));
    EXPECT_EQ(fwd(2, c), rev(0, c));
  }
}

TEST(EncodeSentences, ChunkingInvariance) {
  const Document doc = two_by_three();
  const StubEncoder enc(1, 6);
  const Tensor whole = encode_sentences(doc, enc);
  EXPECT_EQ(whole.shape(), (Shape{6, 6}));
  EXPECT_EQ(encode_sentences(doc, enc, 3072, 1).to_vector(), whole.to_vector());
  EXPECT_EQ(encode_sentences(doc, enc, 4).to_vector(), whole.to_vector());
  // Rows follow document order.
  const Tensor last = enc.encode({tokenize("Thirteen fourteen fifteen.")});
  for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(whole(5, c), last[c]);
}

TEST(EncodeSentences, ChunksStayInsideSections) {
  const auto chunks = plan_chunks(two_by_three(), 3072);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0], (std::pair<std::size_t, std::size_t>{0, 3}));
  EXPECT_EQ(chunks[1], (std::pair<std::size_t, std::size_t>{3, 6}));
  for (const auto& [b, e] : plan_chunks(two_by_three(), 4)) EXPECT_LT(b, e);
}

TEST(EncodeSentences, OversizedSentenceNamed) {
  const Document doc = make_document("long", "r", {{"s", {"a b c d e f g h i j k l"}}});
  try {
    encode_sentences(doc, StubEncoder(1, 4), 10);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("sentence 0"), std::string::npos) << e.what();
  }
}

TEST(PrecomputedEncoder, LoadsJsonl) {
  const auto path = std::filesystem::temp_directory_path() / "scisumm_embeddings_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"text": "The cat sat.", "vector": [1, 2]})" << "\n";
    out << R"({"text": "Dogs run", "vector": [3, 4]})" << "\n";
  }
  const PrecomputedEncoder enc = PrecomputedEncoder::load(path.string());
  EXPECT_EQ(enc.dim(), 2u);
  EXPECT_EQ(enc.encode({{"dogs", "run"}, {"the", "cat", "sat"}}).to_vector(), (std::vector<double>{3, 4, 1, 2}));
  EXPECT_THROW(enc.encode({{"unknown"}}), ArgumentError);
  std::filesystem::remove(path);
}

TEST(Compose, ZeroInputsGivePositions) {
  const Document doc = two_by_three();
  const Tensor out = compose_embeddings(Tensor::zeros({6, 4}), doc, Tensor::zeros({2, 4}), Tensor::zeros({3, 4}));
  for (std::size_t i = 0; i < 6; ++i) {
    const auto p = sinusoid_position(i, 4);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out(i, c), p[c]);
  }
}

TEST(Compose, SectionAndSegmentComponents) {
  Rng rng(5);
  const Document doc = two_by_three();
  const Tensor sem = Tensor::zeros({6, 4});
  const Tensor seg = testing::random_tensor({2, 4}, rng);
  const Tensor sec_a = testing::random_tensor({3, 4}, rng), sec_b = testing::random_tensor({3, 4}, rng);
  const Tensor a = compose_embeddings(sem, doc, seg, sec_a), b = compose_embeddings(sem, doc, seg, sec_b);
  // Rows 0 and 2 share a section, so their difference ignores the section table.
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(a(0, c) - a(2, c), b(0, c) - b(2, c), 1e-15);
    // Same parity: the difference is purely positional.
    EXPECT_NEAR(a(0, c) - a(2, c), sinusoid_position(0, 4)[c] - sinusoid_position(2, 4)[c], 1e-15);
  }
  // Section 1 rows carry section_table row 1.
  for (std::size_t c = 0; c < 4; ++c)
    EXPECT_NEAR(a(3, c), sinusoid_position(3, 4)[c] + seg(1, c) + sec_a(1, c), 1e-15);
}

TEST(Compose, PerSectionParity) {
  const Document doc = two_by_three();
  const Tensor seg = Tensor::matrix({{0, 0}, {1, 1}});
  const Tensor global = compose_embeddings(Tensor::zeros({6, 2}), doc, seg, Tensor::zeros({2, 2}));
  const Tensor local =
      compose_embeddings(Tensor::zeros({6, 2}), doc, seg, Tensor::zeros({2, 2}), SegmentParity::kPerSection);
  // Sentence 3 is odd globally but first in its section.
  EXPECT_NEAR(global(3, 0) - local(3, 0), 1.0, 1e-15);
}

TEST(Compose, Additive) {
  Rng rng(6);
  const Document doc = two_by_three();
  const Tensor sem = testing::random_tensor({6, 4}, rng);
  const Tensor seg = testing::random_tensor({2, 4}, rng), sec = testing::random_tensor({2, 4}, rng);
  const Tensor one = compose_embeddings(sem, doc, seg, sec);
  const Tensor two = compose_embeddings(add(sem, sem), doc, seg, sec);
  for (std::size_t i = 0; i < one.numel(); ++i) EXPECT_NEAR(two[i] - one[i], sem[i], 1e-14);
}

TEST(Compose, ShapeMismatch) {
  EXPECT_THROW(compose_embeddings(Tensor::zeros({5, 4}), two_by_three(), Tensor::zeros({2, 4}), Tensor::zeros({2, 4})),
               DimensionError);
  EXPECT_THROW(compose_embeddings(Tensor::zeros({6, 4}), two_by_three(), Tensor::zeros({2, 3}), Tensor::zeros({2, 4})),
               DimensionError);
}

}  // namespace
}  // namespace scisumm

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

#include <fstream>
#include <set>

#include "json.hpp"
#include "scisumm/rouge.hpp"
#include "test_util.hpp"

namespace scisumm {
namespace {

TEST(Ngrams, WindowsWithMultiplicity) {
  const NgramBag two = ngrams({"a", "b", "c"}, 2);
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(two.count("a\x1f" "b"), 1);
  EXPECT_EQ(two.count("b\x1f" "c"), 1);
  EXPECT_TRUE(ngrams({"a"}, 2).empty());
  const NgramBag uni = ngrams({"a", "a", "a"}, 1);
  EXPECT_EQ(uni.size(), 3u);
  EXPECT_EQ(uni.count("a"), 3);
  EXPECT_THROW(ngrams({"a"}, 0), ArgumentError);
}

TEST(Ngrams, SizeFormula) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    Tokens toks(rng.below(12), "w");
    for (auto& w : toks) w = std::string(1, static_cast<char>('a' + rng.below(3)));
    for (std::size_t n = 1; n <= 4; ++n)
      EXPECT_EQ(ngrams(toks, n).size(), toks.size() >= n ? toks.size() - n + 1 : 0u);
  }
}

TEST(RougeN, HandComputedFixtures) {
  const RougeScore same = rouge_n({"the", "cat"}, {"the", "cat"}, 1);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.f1, 1.0);

  const RougeScore partial = rouge_n({"the", "cat"}, {"the", "cat", "sat"}, 1);
  EXPECT_DOUBLE_EQ(partial.recall, 2.0 / 3.0);
  EXPECT_EQ(partial.precision, 1.0);

  const RougeScore disjoint = rouge_n({"x", "y"}, {"a", "b"}, 2);
  EXPECT_EQ(disjoint.recall, 0.0);
  EXPECT_EQ(disjoint.precision, 0.0);
  EXPECT_EQ(disjoint.f1, 0.0);
}

TEST(RougeN, ClipsCounts) {
  const RougeScore s = rouge_n({"a", "a", "a"}, {"a", "b"}, 1);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.precision, 1.0 / 3.0);
}

TEST(RougeN, EmptyReferenceIsDegenerate) {
  const RougeScore s = rouge_n({"a"}, {}, 1);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(s.recall, 0.0);
}

TEST(RougeN, Properties) {
  Rng rng(11);
  auto random_tokens = [&](std::size_t max_len) {
    Tokens t(1 + rng.below(max_len));
    for (auto& w : t) w = std::string(1, static_cast<char>('a' + rng.below(5)));
    return t;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const Tokens a = random_tokens(10);
    for (std::size_t n : {1u, 2u}) {
      if (a.size() < n) continue;
      const RougeScore s = rouge_n(a, a, n);
      EXPECT_EQ(s.recall, 1.0);
      EXPECT_EQ(s.precision, 1.0);
    }
    // Candidate containing the reference as a multiset has unit recall.
    const Tokens ref = random_tokens(8);
    Tokens cand = ref;
    const Tokens extra = random_tokens(5);
    cand.insert(cand.begin() + static_cast<std::ptrdiff_t>(rng.below(cand.size() + 1)), extra.begin(), extra.end());
    EXPECT_EQ(rouge_n(cand, ref, 1).recall, 1.0);

    const RougeScore r = rouge_n(random_tokens(10), ref, 2);
    for (double v : {r.precision, r.recall, r.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    if (r.precision + r.recall > 0) EXPECT_DOUBLE_EQ(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall));
  }
}

TEST(RougeL, LcsFixtures) {
  EXPECT_EQ(rouge_l({"a", "b", "c"}, {"a", "b", "c"}).recall, 1.0);
  EXPECT_EQ(lcs_length({"a", "b", "c", "d"}, {"a", "c", "b", "d"}), 3u);
  const RougeScore s = rouge_l({"a", "b", "c", "d"}, {"a", "c", "b", "d"});
  EXPECT_DOUBLE_EQ(s.recall, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.precision, 3.0 / 4.0);
  EXPECT_EQ(rouge_l({"q"}, {"a", "b"}).recall, 0.0);
  EXPECT_TRUE(rouge_l({"q"}, {}).degenerate);
}

TEST(RougeL, LcsBounds) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    Tokens a(rng.below(10)), b(rng.below(10));
    for (auto& w : a) w = std::string(1, static_cast<char>('a' + rng.below(4)));
    for (auto& w : b) w = std::string(1, static_cast<char>('a' + rng.below(4)));
    const std::size_t l = lcs_length(a, b);
    EXPECT_LE(l, std::min(a.size(), b.size()));
    EXPECT_EQ(l, lcs_length(b, a));
  }
}

TEST(Reward, Fixtures) {
  EXPECT_EQ(reward("the cat sat", "the cat sat").value, 1.0);
  EXPECT_EQ(reward("dogs run", "the cat sat").value, 0.0);
  // R1: 2 of 3 unigrams both ways -> F1 2/3. R2: 1 of 2 bigrams -> F1 1/2.
  EXPECT_DOUBLE_EQ(reward("the cat sat", "the cat ran").value, 7.0 / 12.0);
  const Reward degenerate = reward("the cat", "");
  EXPECT_TRUE(degenerate.degenerate);
  EXPECT_EQ(degenerate.value, 0.0);
}

TEST(Reward, AlwaysInUnitInterval) {
  Rng rng(23);
  const char* words[] = {"a", "b", "c", "d", "e"};
  for (int t = 0; t < 300; ++t) {
    std::string c, r;
    for (std::uint64_t i = 0; i < rng.below(8); ++i) c += std::string(words[rng.below(5)]) + " ";
    for (std::uint64_t i = 0; i < 1 + rng.below(8); ++i) r += std::string(words[rng.below(5)]) + " ";
    const double v = reward(c, r).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

Document three_sentences() {
  return make_document("t", "graph neural networks learn node features",
                       {{"s", {"We study protein folding.", "Graph neural networks learn node features.",
                               "Results are promising."}}});
}

TEST(OracleLabels, PicksVerbatimSentenceFirst) {
  const OracleResult r = oracle_labels(three_sentences(), 1);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_DOUBLE_EQ(r.objective, 2.0);
}

TEST(OracleLabels, StopsWhenNoGain) {
  const OracleResult r = oracle_labels(three_sentences(), 3);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 1, 0}));
}

TEST(OracleLabels, RejectsZeroBudget) { EXPECT_THROW(oracle_labels(three_sentences(), 0), ArgumentError); }

TEST(OracleLabels, EmptyReference) {
  Document doc = three_sentences();
  doc.reference_summary = "";
  ScopedLogCapture logs;
  const OracleResult r = oracle_labels(doc, 2);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(logs.warnings(), 1);
}

TEST(OracleLabels, BudgetForRatio) {
  EXPECT_EQ(budget_for(10, 0.2), 2u);
  EXPECT_EQ(budget_for(11, 0.2), 3u);
  EXPECT_EQ(budget_for(15, 0.2), 3u);
  EXPECT_EQ(budget_for(3, 0.2), 1u);
  EXPECT_EQ(budget_for(7, 1.0), 7u);
  EXPECT_THROW(budget_for(7, 0.0), ArgumentError);
}

TEST(OracleLabels, SixSentenceDocMatchesExhaustiveSearch) {
  const Document doc = make_document(
      "six", "sparse attention scales linearly with document length while full attention does not",
      {{"a", {"Sparse attention scales linearly.", "We use a window.", "Full attention is quadratic."}},
       {"b", {"Document length matters.", "The attention does not scale.", "Results follow."}}});
  const OracleResult r = oracle_labels(doc, 2);
  EXPECT_NEAR(r.objective, testing::brute_force_best(doc, 2), 1e-12);
}

TEST(OracleLabels, MatchesCommittedGolden) {
  std::map<std::string, Document> docs;
  {
    std::ifstream in(testing::data_path("oracle_fixtures.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      Document d = parse_document(line);
      docs.emplace(d.id, std::move(d));
    }
  }
  std::ifstream in(testing::data_path("oracle_golden.jsonl"));
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    const auto g = nlohmann::json::parse(line);
    const Document& doc = docs.at(g["id"].get<std::string>());
    const auto budget = g["budget"].get<std::size_t>();
    const OracleResult r = oracle_labels(doc, budget);
    EXPECT_NEAR(r.objective, g["best_objective"].get<double>(), 1e-12) << doc.id << " budget " << budget;
    EXPECT_NEAR(testing::brute_force_best(doc, budget), g["best_objective"].get<double>(), 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 72);
}

Document six_doc() {
  return make_document("cand", "alpha beta gamma delta",
                       {{"x", {"alpha beta", "gamma delta", "noise one", "noise two", "noise three", "noise four"}}});
}

TEST(SampleCandidates, CardinalityAndDistinctness) {
  const Document doc = six_doc();
  const std::vector<int> oracle = {1, 1, 0, 0, 0, 0};
  const CandidateSet set = sample_candidates(doc, oracle, 3, 42);
  ASSERT_EQ(set.candidates.size(), 3u);
  EXPECT_FALSE(set.short_of_k);
  std::set<std::vector<int>> seen;
  for (const Candidate& c : set.candidates) {
    EXPECT_EQ(std::count(c.labels.begin(), c.labels.end(), 1), 2);
    EXPECT_NE(c.labels, oracle);
    EXPECT_GE(c.reward, 0.0);
    EXPECT_LE(c.reward, 1.0);
    seen.insert(c.labels);
  }
  EXPECT_EQ(seen.size(), 3u);
  // 2 selected x 4 unselected swaps exist; asking for more is flagged.
  const CandidateSet all = sample_candidates(doc, oracle, 20, 42);
  EXPECT_EQ(all.candidates.size(), 8u);
  EXPECT_TRUE(all.short_of_k);
}

TEST(SampleCandidates, DeterministicUnderSeed) {
  const Document doc = six_doc();
  const std::vector<int> oracle = {1, 1, 0, 0, 0, 0};
  const CandidateSet a = sample_candidates(doc, oracle, 4, 9);
  const CandidateSet b = sample_candidates(doc, oracle, 4, 9);
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(a.candidates[i].labels, b.candidates[i].labels);
    EXPECT_EQ(a.candidates[i].reward, b.candidates[i].reward);
  }
}

TEST(SampleCandidates, NoSwapReturnsOracle) {
  const Document doc = make_document("all", "a b", {{"x", {"a", "b"}}});
  const CandidateSet set = sample_candidates(doc, {1, 1}, 1, 0);
  ASSERT_EQ(set.candidates.size(), 1u);
  EXPECT_EQ(set.candidates[0].labels, (std::vector<int>{1, 1}));
  EXPECT_FALSE(set.short_of_k);
  EXPECT_DOUBLE_EQ(set.candidates[0].reward, 1.0);
  EXPECT_TRUE(sample_candidates(doc, {1, 1}, 3, 0).short_of_k);
  EXPECT_THROW(sample_candidates(doc, {1, 1}, 0, 0), ArgumentError);
}

}  // namespace
}  // namespace scisumm

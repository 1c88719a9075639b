/*
 * Copyright 2026 The Stresskit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stresskit/framecodec.h"

#include <gtest/gtest.h>

#include <cmath>

#include "stresskit/error.h"
#include "testing.h"

namespace stresskit {
namespace {

using testing::Rng;

WordRecord Word(double t0, double t1, std::vector<NucleusSpan> nuclei,
                std::optional<int> stress) {
  WordRecord w;
  w.word_id = "w";
  w.t0 = t0;
  w.t1 = t1;
  w.nuclei = std::move(nuclei);
  for (size_t k = 0; k < w.nuclei.size(); ++k) w.nuclei[k].syllable_index = k;
  w.stress_index = stress;
  return w;
}

FrameLogitSeq FromLabels(const std::vector<int>& labels) {
  FrameLogitSeq s;
  s.word_id = "w";
  for (int l : labels) s.logits.push_back(l ? FrameLogit{0.0, 1.0} : FrameLogit{1.0, 0.0});
  return s;
}

TEST(Encode, MidpointRuleExample) {
  const WordRecord w = Word(0.0, 0.2, {{0.06, 0.10}, {0.12, 0.18}}, 0);
  const FrameLabelSeq s = EncodeLabels(w);
  EXPECT_EQ(s.hop_ms, 20);
  EXPECT_EQ(s.labels, (std::vector<int>{0, 0, 0, 1, 1, 0, 0, 0, 0, 0}));
  EXPECT_FALSE(s.empty_nucleus_warning);
}

TEST(Encode, SubFrameNucleusWarns) {
  const WordRecord w = Word(0.0, 0.2, {{0.031, 0.045}, {0.12, 0.18}}, 0);
  const FrameLabelSeq s = EncodeLabels(w);
  for (int l : s.labels) EXPECT_EQ(l, 0);
  EXPECT_TRUE(s.empty_nucleus_warning);
  EXPECT_FALSE(EveryNucleusHasFrame(w));
}

TEST(Encode, MissingStressRefused) {
  EXPECT_THROW(EncodeLabels(Word(0.0, 0.2, {{0.0, 0.1}, {0.1, 0.2}}, std::nullopt)),
               InvalidArgument);
}

TEST(Encode, FrameCount) {
  EXPECT_EQ(FrameCount(0.2, 20), 10u);
  EXPECT_EQ(FrameCount(0.201, 20), 11u);
  EXPECT_EQ(FrameCount(0.3 - 0.1, 20), 10u);
  EXPECT_EQ(FrameCount(0.019, 20), 1u);
}

TEST(Encode, MatchesDirectMembershipOnRandomWords) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const WordRecord w = testing::RandomWord(rng, std::to_string(i));
    const FrameLabelSeq s = EncodeLabels(w);
    const double dur = w.t1 - w.t0;
    ASSERT_EQ(s.labels.size(), static_cast<size_t>(std::ceil(dur / 0.02 - 1e-9)));
    const NucleusSpan& n = w.nuclei[*w.stress_index];
    int runs = 0;
    for (size_t f = 0; f < s.labels.size(); ++f) {
      const double mid = w.t0 + 0.02 * f + 0.01;
      ASSERT_EQ(s.labels[f], (mid >= n.t0 && mid < n.t1) ? 1 : 0) << i << " frame " << f;
      if (s.labels[f] && (f == 0 || !s.labels[f - 1])) ++runs;
    }
    EXPECT_LE(runs, 1);
    EXPECT_EQ(s.empty_nucleus_warning, runs == 0);
  }
}

TEST(Decode, SpanOverMiddleNucleus) {
  // Nuclei over frames 1-2, 4-6 and 8-9.
  const WordRecord w = Word(0.0, 0.2, {{0.02, 0.06}, {0.08, 0.14}, {0.16, 0.2}}, 2);
  const auto p = DecodeLogits(FromLabels({0, 0, 0, 0, 0, 0, 0, 0, 1, 1}), w);
  EXPECT_EQ(p.predicted_index, 2);
  EXPECT_EQ(p.n_nuclei, 3);
  EXPECT_EQ(p.gold_index, 2);
  EXPECT_DOUBLE_EQ(p.score, 1.0);
}

TEST(Decode, LongestSpanWins) {
  const WordRecord w = Word(0.0, 0.24, {{0.0, 0.08}, {0.12, 0.24}}, 1);
  const auto p = DecodeLogits(FromLabels({1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 0}), w);
  EXPECT_EQ(p.predicted_index, 1);
  const auto q = DecodeLogits(FromLabels({1, 1, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0}), w);
  EXPECT_EQ(q.predicted_index, 0);
}

TEST(Decode, EqualSpansPickEarliest) {
  const WordRecord w = Word(0.0, 0.2, {{0.0, 0.08}, {0.12, 0.2}}, 1);
  EXPECT_EQ(DecodeLogits(FromLabels({1, 1, 0, 0, 0, 0, 0, 1, 1, 0}), w).predicted_index, 0);
}

TEST(Decode, FallbackToMaxMargin) {
  const WordRecord w = Word(0.0, 0.2, {{0.0, 0.08}, {0.12, 0.2}}, 0);
  FrameLogitSeq s = FromLabels(std::vector<int>(10, 0));
  s.logits[1] = {0.5, 0.2};  // margin -0.3, the largest
  const auto p = DecodeLogits(s, w);
  EXPECT_EQ(p.predicted_index, 0);
  EXPECT_NEAR(p.score, -0.3, 1e-12);
}

TEST(Decode, TiesAreNegative) {
  const WordRecord w = Word(0.0, 0.2, {{0.0, 0.08}, {0.12, 0.2}}, 0);
  FrameLogitSeq s;
  s.word_id = "w";
  s.logits.assign(10, {0.0, 0.0});
  s.logits[8] = {0.0, 1e-9};
  EXPECT_EQ(DecodeLogits(s, w).predicted_index, 1);
}

TEST(Decode, SpanBetweenNucleiUsesDistance) {
  // Span at frames 5-6 (0.10-0.14) touches neither nucleus; its midpoint
  // 0.12 is 0.09 from nucleus 0 and 0.055 from nucleus 1.
  const WordRecord w = Word(0.0, 0.3, {{0.0, 0.06}, {0.15, 0.2}}, 1);
  std::vector<int> l(15, 0);
  l[5] = l[6] = 1;
  EXPECT_EQ(DecodeLogits(FromLabels(l), w).predicted_index, 1);
  l.assign(15, 0);
  l[3] = 1;  // midpoint 0.07: 0.04 from nucleus 0, 0.105 from nucleus 1
  EXPECT_EQ(DecodeLogits(FromLabels(l), w).predicted_index, 0);
}

TEST(Decode, Errors) {
  const WordRecord w = Word(0.0, 0.2, {{0.0, 0.08}, {0.12, 0.2}}, 0);
  EXPECT_NO_THROW(DecodeLogits(FromLabels(std::vector<int>(9, 0)), w));
  EXPECT_NO_THROW(DecodeLogits(FromLabels(std::vector<int>(11, 0)), w));
  EXPECT_THROW(DecodeLogits(FromLabels(std::vector<int>(8, 0)), w), InvalidArgument);
  EXPECT_THROW(DecodeLogits(FromLabels(std::vector<int>(12, 0)), w), InvalidArgument);
  EXPECT_THROW(DecodeLogits(FromLabels({}), w), InvalidArgument);
  FrameLogitSeq bad = FromLabels(std::vector<int>(10, 0));
  bad.logits[3].pos = INFINITY;
  EXPECT_THROW(DecodeLogits(bad, w), InvalidArgument);
  bad.logits[3].pos = NAN;
  EXPECT_THROW(DecodeLogits(bad, w), InvalidArgument);
  const WordRecord mono = Word(0.0, 0.2, {{0.0, 0.08}}, 0);
  EXPECT_THROW(DecodeLogits(FromLabels(std::vector<int>(10, 0)), mono), InvalidArgument);
}

TEST(Codec, RoundTripOnRandomWords) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const WordRecord w = testing::RandomCodecWord(rng, std::to_string(i));
    ASSERT_TRUE(EveryNucleusHasFrame(w));
    ASSERT_TRUE(RoundtripCheck(w)) << i;
    // Independent one-hot logits built from the midpoint rule.
    const NucleusSpan& n = w.nuclei[*w.stress_index];
    const size_t frames = static_cast<size_t>(std::ceil((w.t1 - w.t0) / 0.02 - 1e-9));
    std::vector<int> labels(frames);
    for (size_t f = 0; f < frames; ++f) {
      const double mid = w.t0 + 0.02 * f + 0.01;
      labels[f] = mid >= n.t0 && mid < n.t1;
    }
    ASSERT_EQ(DecodeLogits(FromLabels(labels), w).predicted_index, *w.stress_index) << i;
  }
}

TEST(Codec, TotalOnArbitraryLogits) {
  Rng rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const WordRecord w = testing::RandomWord(rng, std::to_string(i));
    FrameLogitSeq s;
    s.word_id = w.word_id;
    const int frames = static_cast<int>(FrameCount(w.t1 - w.t0, 20)) +
                       testing::UniformInt(rng, -1, 1);
    const double scale = std::pow(10.0, testing::UniformInt(rng, -3, 300));
    for (int f = 0; f < std::max(frames, 1); ++f) {
      s.logits.push_back({scale * gauss(rng), scale * gauss(rng)});
    }
    const auto p = DecodeLogits(s, w);
    ASSERT_GE(p.predicted_index, 0);
    ASSERT_LT(p.predicted_index, static_cast<int>(w.nuclei.size()));
    ASSERT_EQ(p.n_nuclei, static_cast<int>(w.nuclei.size()));
  }
}

TEST(Codec, InvariantToPerFrameShift) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const WordRecord w = testing::RandomWord(rng, "w");
    FrameLogitSeq s;
    for (size_t f = 0; f < FrameCount(w.t1 - w.t0, 20); ++f) {
      s.logits.push_back({testing::Uniform(rng, -2, 2), testing::Uniform(rng, -2, 2)});
    }
    FrameLogitSeq shifted = s;
    for (auto& l : shifted.logits) {
      // Powers of two keep the margins exact.
      const double c = std::ldexp(1.0, testing::UniformInt(rng, -4, 4)) *
                       (testing::UniformInt(rng, 0, 1) ? 1 : -1);
      l.neg += c;
      l.pos += c;
    }
    const auto a = DecodeLogits(s, w);
    const auto b = DecodeLogits(shifted, w);
    EXPECT_EQ(a.predicted_index, b.predicted_index);
    EXPECT_EQ(DecodeLogits(s, w).score, a.score);
  }
}

}  // namespace
}  // namespace stresskit

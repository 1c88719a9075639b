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

// 20 ms frame labels for the stressed nucleus, and the decoder that turns
// per-frame logits back into one stressed nucleus per word.

#ifndef STRESSKIT_FRAMECODEC_H_
#define STRESSKIT_FRAMECODEC_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stresskit/corpus.h"

namespace stresskit {

inline constexpr int kLabelHopMs = 20;

struct FrameLabelSeq {
  std::string word_id;
  int hop_ms = kLabelHopMs;
  std::vector<int> labels;
  // Set when the stressed nucleus contains no frame midpoint.
  bool empty_nucleus_warning = false;
};

struct FrameLogit {
  double neg = 0.0;
  double pos = 0.0;
};

struct FrameLogitSeq {
  std::string word_id;
  int hop_ms = kLabelHopMs;
  std::vector<FrameLogit> logits;
};

struct PredictionRecord {
  std::string word_id;
  int predicted_index = 0;
  std::optional<int> gold_index;
  int n_nuclei = 0;
  double score = 0.0;
};

// ceil(duration / hop), robust to binary rounding of the duration.
size_t FrameCount(double duration_s, int hop_ms);

// Frame i covers [t0 + i*20 ms, t0 + (i+1)*20 ms); its label is 1 iff its
// midpoint lies in [t0, t1) of the stressed nucleus. Throws InvalidArgument
// when the word has no stress_index or no duration.
FrameLabelSeq EncodeLabels(const WordRecord& word);

// Per-frame argmax (ties negative), longest positive run (ties earliest),
// then the nucleus holding most of that run's frame midpoints (ties: larger
// temporal overlap, then closer midpoint, then earlier nucleus). Without any
// positive frame the frame with the largest pos - neg margin stands in for
// the run. Score is the mean margin over the chosen run. Throws
// InvalidArgument when the frame count is off by more than one frame, the
// word has fewer than two nuclei, or the logits are empty or non-finite.
PredictionRecord DecodeLogits(const FrameLogitSeq& logits,
                              const WordRecord& word);

// decode(one-hot(encode(word))) == stress_index.
bool RoundtripCheck(const WordRecord& word);

// True when every nucleus of `word` contains at least one frame midpoint.
bool EveryNucleusHasFrame(const WordRecord& word);

}  // namespace stresskit

#endif  // STRESSKIT_FRAMECODEC_H_

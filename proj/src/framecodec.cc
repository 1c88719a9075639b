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

#include <algorithm>
#include <cmath>
#include <limits>

#include "stresskit/error.h"

namespace stresskit {
namespace {

double FrameMid(double word_t0, size_t i, double hop_s) {
  return word_t0 + (static_cast<double>(i) + 0.5) * hop_s;
}

bool Inside(double t, const NucleusSpan& n) { return t >= n.t0 && t < n.t1; }

struct Span {
  size_t first = 0;
  size_t last = 0;  // inclusive
  size_t length() const { return last - first + 1; }
};

int NearestNucleus(const WordRecord& word, const Span& span, double hop_s) {
  const double lo = word.t0 + static_cast<double>(span.first) * hop_s;
  const double hi = word.t0 + static_cast<double>(span.last + 1) * hop_s;
  const double mid = 0.5 * (lo + hi);
  int best = 0;
  size_t best_frames = 0;
  double best_overlap = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < word.nuclei.size(); ++k) {
    const NucleusSpan& n = word.nuclei[k];
    size_t frames = 0;
    for (size_t i = span.first; i <= span.last; ++i) {
      if (Inside(FrameMid(word.t0, i, hop_s), n)) ++frames;
    }
    const double overlap = std::max(0.0, std::min(hi, n.t1) - std::max(lo, n.t0));
    const double dist = std::fabs(mid - 0.5 * (n.t0 + n.t1));
    const bool better =
        frames > best_frames ||
        (frames == best_frames &&
         (overlap > best_overlap ||
          (overlap == best_overlap && dist < best_dist)));
    if (k == 0 || better) {
      best = static_cast<int>(k);
      best_frames = frames;
      best_overlap = overlap;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

size_t FrameCount(double duration_s, int hop_ms) {
  const double frames = duration_s * 1000.0 / hop_ms;
  return static_cast<size_t>(std::ceil(frames - 1e-6));
}

FrameLabelSeq EncodeLabels(const WordRecord& word) {
  if (!word.stress_index) {
    throw InvalidArgument("word " + word.word_id + " has no stress_index");
  }
  if (!(word.duration() > 0.0)) {
    throw InvalidArgument("word " + word.word_id + " has no duration");
  }
  const auto idx = static_cast<size_t>(*word.stress_index);
  if (idx >= word.nuclei.size()) {
    throw InvalidArgument("word " + word.word_id +
                          ": stress_index out of range");
  }
  const NucleusSpan& stressed = word.nuclei[idx];
  const double hop_s = kLabelHopMs / 1000.0;
  FrameLabelSeq seq;
  seq.word_id = word.word_id;
  seq.hop_ms = kLabelHopMs;
  seq.labels.resize(FrameCount(word.duration(), kLabelHopMs));
  bool any = false;
  for (size_t i = 0; i < seq.labels.size(); ++i) {
    const bool on = Inside(FrameMid(word.t0, i, hop_s), stressed);
    seq.labels[i] = on ? 1 : 0;
    any = any || on;
  }
  seq.empty_nucleus_warning = !any;
  return seq;
}

PredictionRecord DecodeLogits(const FrameLogitSeq& seq,
                              const WordRecord& word) {
  if (word.nuclei.size() < 2) {
    throw InvalidArgument("word " + word.word_id + " has fewer than 2 nuclei");
  }
  if (seq.logits.empty()) {
    throw InvalidArgument("no logits for word " + word.word_id);
  }
  if (seq.hop_ms <= 0) throw InvalidArgument("logit hop must be positive");
  const size_t expected = FrameCount(word.duration(), seq.hop_ms);
  const size_t got = seq.logits.size();
  if (got + 1 < expected || got > expected + 1) {
    throw InvalidArgument("word " + word.word_id + ": " + std::to_string(got) +
                          " logit frames, expected " +
                          std::to_string(expected) + " +/- 1");
  }
  for (const auto& l : seq.logits) {
    if (!std::isfinite(l.neg) || !std::isfinite(l.pos)) {
      throw InvalidArgument("non-finite logit for word " + word.word_id);
    }
  }
  const double hop_s = seq.hop_ms / 1000.0;

  // Longest maximal run of positive frames, earliest on ties.
  std::optional<Span> chosen;
  for (size_t i = 0; i < got;) {
    if (!(seq.logits[i].pos > seq.logits[i].neg)) {
      ++i;
      continue;
    }
    Span run{i, i};
    while (run.last + 1 < got &&
           seq.logits[run.last + 1].pos > seq.logits[run.last + 1].neg) {
      ++run.last;
    }
    if (!chosen || run.length() > chosen->length()) chosen = run;
    i = run.last + 1;
  }
  if (!chosen) {
    size_t best = 0;
    for (size_t i = 1; i < got; ++i) {
      if (seq.logits[i].pos - seq.logits[i].neg >
          seq.logits[best].pos - seq.logits[best].neg) {
        best = i;
      }
    }
    chosen = Span{best, best};
  }

  PredictionRecord rec;
  rec.word_id = word.word_id;
  rec.n_nuclei = static_cast<int>(word.nuclei.size());
  rec.gold_index = word.stress_index;
  rec.predicted_index = NearestNucleus(word, *chosen, hop_s);
  double margin = 0.0;
  for (size_t i = chosen->first; i <= chosen->last; ++i) {
    margin += seq.logits[i].pos - seq.logits[i].neg;
  }
  rec.score = margin / static_cast<double>(chosen->length());
  return rec;
}

bool EveryNucleusHasFrame(const WordRecord& word) {
  const double hop_s = kLabelHopMs / 1000.0;
  const size_t n = FrameCount(word.duration(), kLabelHopMs);
  for (const auto& nucleus : word.nuclei) {
    bool hit = false;
    for (size_t i = 0; i < n && !hit; ++i) {
      hit = Inside(FrameMid(word.t0, i, hop_s), nucleus);
    }
    if (!hit) return false;
  }
  return true;
}

bool RoundtripCheck(const WordRecord& word) {
  const FrameLabelSeq labels = EncodeLabels(word);
  FrameLogitSeq logits;
  logits.word_id = word.word_id;
  logits.hop_ms = labels.hop_ms;
  for (int l : labels.labels) {
    logits.logits.push_back(l == 1 ? FrameLogit{0.0, 1.0} : FrameLogit{1.0, 0.0});
  }
  return DecodeLogits(logits, word).predicted_index == *word.stress_index;
}

}  // namespace stresskit

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

// Synthetic stressed-word corpus: vowel-like harmonic nuclei separated by
// noise consonants, with the stressed nucleus louder, longer and higher.
// Used for end-to-end checks where real recordings are not available.

#ifndef STRESSKIT_SYNTH_H_
#define STRESSKIT_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "stresskit/audio.h"
#include "stresskit/corpus.h"
#include "stresskit/textgrid.h"

namespace stresskit {

struct SynthOptions {
  int num_words = 500;
  int num_speakers = 20;
  int min_syllables = 2;
  int max_syllables = 4;
  double stress_gain_db = 6.0;
  double stress_duration_factor = 1.5;
  double stress_f0_factor = 1.3;
  uint64_t seed = 1;
};

struct SyntheticRecording {
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  AudioClip audio;
  // Tiers: "words", "nuclei" (interval) and "stress" (point, "1" at the
  // stressed nucleus centre).
  TextGridDoc grid;
};

// Deterministic in (options.seed, speaker_index).
SyntheticRecording SynthesizeRecording(const SynthOptions& options,
                                       int speaker_index, int num_words);

struct SynthCorpusFile {
  std::string textgrid_path;
  std::string wav_path;
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
};

// Writes <speaker>.wav and <speaker>.TextGrid per speaker into `out_dir`
// plus speakers.tsv (stem, speaker, gender). Words are spread evenly over
// the speakers.
std::vector<SynthCorpusFile> WriteSyntheticCorpus(const SynthOptions& options,
                                                  const std::string& out_dir);

}  // namespace stresskit

#endif  // STRESSKIT_SYNTH_H_

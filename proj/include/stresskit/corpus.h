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

// Word/nucleus manifests built from annotated TextGrids, orthographic
// normalization, and speaker-disjoint corpus splits.

#ifndef STRESSKIT_CORPUS_H_
#define STRESSKIT_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stresskit/textgrid.h"

namespace stresskit {

struct NucleusSpan {
  double t0 = 0.0;
  double t1 = 0.0;
  int syllable_index = 0;
};

enum class Gender { kFemale, kMale, kUnknown };

std::string_view GenderCode(Gender g);  // "F", "M", "unknown"
Gender ParseGender(std::string_view code);

// One multi-syllabic word with its candidate nuclei.
struct WordRecord {
  std::string word_id;
  std::string text;
  std::string audio_path;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<NucleusSpan> nuclei;
  std::optional<int> stress_index;
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  std::string dataset;

  double duration() const { return t1 - t0; }
};

// Throws InvalidArgument when `word` breaks a WordRecord invariant: fewer
// than two nuclei, nuclei unsorted or outside [t0, t1], t0 >= t1 for a
// nucleus, syllable_index not matching position, stress_index out of range.
void ValidateWordRecord(const WordRecord& word);

struct ManifestOptions {
  std::string word_tier = "words";
  std::string nucleus_tier = "nuclei";
  std::optional<std::string> stress_tier;  // absent: no gold stress
  // A nucleus label containing any of these characters rejects its word.
  std::string error_symbols = "?!";
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  std::string dataset;
  // Prefix of every word_id; the word's position in the word tier is
  // appended as a zero-padded counter.
  std::string id_prefix;
};

struct RejectedWord {
  std::string word_id;
  std::string text;
  std::string audio_path;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string reason;
};

struct Manifest {
  std::vector<WordRecord> records;
  std::vector<RejectedWord> rejects;
};

// Builds one WordRecord per labelled word interval holding at least two
// labelled nuclei. Nuclei belong to the word containing their midpoint.
// A stress tier marks a nucleus with a non-empty interval or point whose
// midpoint (time) lies inside it. Throws InvalidArgument when a named tier
// is missing or is of the wrong kind; per-word problems go to `rejects`.
Manifest BuildManifest(const TextGridDoc& doc, const std::string& audio_path,
                       const ManifestOptions& options);

// Replaces lj, nj and dž (and their single-code-point ligatures) with the
// placeholders ʎ, ɲ and ǆ. Expects lower-case input.
std::string NormalizeDigraphs(std::string_view word);

// Lower-cases ASCII, Latin-1 and Latin Extended-A letters (enough for
// Croatian, Serbian Latin and Slovenian orthography).
std::string CaseFold(std::string_view word);

// CaseFold followed by NormalizeDigraphs: the identity of a word form.
std::string WordForm(std::string_view word);

// Number of code points in a UTF-8 string.
size_t Utf8Length(std::string_view text);

struct SpeakerSplit {
  std::vector<WordRecord> train;
  std::vector<WordRecord> test;
};

// Assigns whole speakers to train or test. The test share of words is kept
// within 5 points of `test_fraction` whenever some assignment allows it, and
// among those the female/male word balance of the test side is made as
// even as possible. Deterministic for a fixed seed. Throws InvalidArgument
// with fewer than two speakers or a fraction outside (0, 1).
SpeakerSplit SplitSpeakers(const std::vector<WordRecord>& records,
                           double test_fraction, uint64_t seed);

// Absolute deviation from 50/50 of the female share of gendered words in
// `records` (0.5 when none are gendered).
double GenderImbalance(const std::vector<WordRecord>& records);

}  // namespace stresskit

#endif  // STRESSKIT_CORPUS_H_

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

// Line-delimited JSON files exchanged between pipeline stages: manifests,
// rejects, nucleus features, frame labels and logits, predictions, and
// contour dumps.
//
// Every file written here may start with a header line
//   {"_header": {"tool": "stresskit", "version": ..., "kind": ...}}
// which readers skip. Files produced elsewhere need not carry one.

#ifndef STRESSKIT_FORMATS_H_
#define STRESSKIT_FORMATS_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stresskit/corpus.h"
#include "stresskit/framecodec.h"
#include "stresskit/prosody.h"
#include "stresskit/svm.h"

namespace stresskit {

using Json = nlohmann::json;

inline constexpr char kToolName[] = "stresskit";
inline constexpr char kToolVersion[] = "0.1.0";

struct OutputHeader {
  std::string kind;
  std::optional<uint64_t> seed;
  std::optional<std::string> created;  // omitted in deterministic runs
};

Json HeaderJson(const OutputHeader& header);

// One JSON value per line; nlohmann's shortest round-trip number format.
void WriteJsonl(const std::string& path, const std::optional<OutputHeader>& header,
                const std::vector<Json>& rows);
// Skips blank lines and header lines. Throws ParseError with the line.
std::vector<Json> ReadJsonl(const std::string& path);

Json ToJson(const WordRecord& r);
WordRecord WordRecordFromJson(const Json& j);
Json ToJson(const RejectedWord& r);

void WriteManifest(const std::string& path, const std::vector<WordRecord>& records,
                   const std::optional<OutputHeader>& header);
std::vector<WordRecord> ReadManifest(const std::string& path);

// One nucleus of one word, as emitted by the feature extractor.
struct FeatureLine {
  std::string word_id;
  int nucleus_index = 0;
  int n_nuclei = 0;
  std::optional<int> label;  // 1 stressed, 0 not, absent without gold
  NucleusFeatures features;
  uint32_t quality = kQualityOk;
  std::string speaker_id;
};

Json ToJson(const FeatureLine& f);
FeatureLine FeatureLineFromJson(const Json& j);
std::vector<FeatureLine> ReadFeatures(const std::string& path);
// Lines without a label are dropped.
std::vector<TrainInstance> ToTrainInstances(const std::vector<FeatureLine>& lines);

Json ToJson(const FrameLabelSeq& s);
Json ToJson(const FrameLogitSeq& s);
FrameLogitSeq LogitSeqFromJson(const Json& j);
std::vector<FrameLogitSeq> ReadLogits(const std::string& path);

Json ToJson(const PredictionRecord& p);
PredictionRecord PredictionFromJson(const Json& j);
std::vector<PredictionRecord> ReadPredictions(const std::string& path);

// Per-frame dump of one word's contours.
std::vector<Json> ContourRows(const std::string& word_id, const ProsodyTracks& t);

}  // namespace stresskit

#endif  // STRESSKIT_FORMATS_H_

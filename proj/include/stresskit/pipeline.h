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

// Stage functions composed by the command-line tool. Each is usable
// in-process; the CLI only adds argument parsing and file layout.

#ifndef STRESSKIT_PIPELINE_H_
#define STRESSKIT_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stresskit/corpus.h"
#include "stresskit/formats.h"
#include "stresskit/svm.h"

namespace stresskit {

struct SkippedWord {
  std::string word_id;
  std::string reason;
};

struct FeatureExtraction {
  std::vector<FeatureLine> lines;  // sorted by (word_id, nucleus_index)
  std::vector<SkippedWord> skipped;
  std::vector<Json> contours;      // filled when requested
};

// Loads each referenced recording once, resamples it to 16 kHz, and
// computes nucleus features word by word. Recordings are processed on up to
// `threads` workers; the output order does not depend on scheduling.
// Unreadable audio skips the affected words.
FeatureExtraction ExtractFeatures(const std::vector<WordRecord>& records,
                                  const std::string& audio_root, int threads,
                                  bool dump_contours = false);

// Word-level SVM predictions, one per word with at least two nuclei, in
// first-appearance order. Score is the Platt probability of the chosen
// nucleus when the model carries Platt parameters, else its decision value.
std::vector<PredictionRecord> PredictFromFeatures(
    const SvmModel& model, const std::vector<FeatureLine>& lines);

// Trains on `data` and attaches Platt parameters fitted on the training
// decision values (skipped if the fit fails; reported through `platt_ok`).
SvmModel TrainWithPlatt(const std::vector<TrainInstance>& data,
                        const TrainOptions& options, TrainReport* report,
                        bool* platt_ok);

struct TestSet {
  std::string tag;
  std::vector<FeatureLine> lines;
};

struct CurvePoint {
  int train_size = 0;
  int repeat = 0;
  uint64_t seed = 0;
  std::vector<std::string> sampled_word_ids;
  std::vector<double> accuracy;  // one per test set
};

struct CurveSummary {
  int train_size = 0;
  std::vector<double> mean;
  std::vector<double> sd;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::vector<CurveSummary> summary;
  std::vector<int> skipped_sizes;
};

// Seed of one subsample; recorded next to every point.
uint64_t CurveSeed(uint64_t seed, int size, int repeat);

// For each size, `repeats` uniform word subsamples of the training
// features, an SVM per subsample, and word accuracy on every test set.
// Sizes larger than the number of training words are skipped.
CurveResult RunLearningCurve(const std::vector<FeatureLine>& train,
                             const std::vector<TestSet>& tests,
                             const std::vector<int>& sizes, int repeats,
                             uint64_t seed, const TrainOptions& options);

// CSV with point and summary rows.
std::string CurveCsv(const CurveResult& result,
                     const std::vector<TestSet>& tests);

}  // namespace stresskit

#endif  // STRESSKIT_PIPELINE_H_

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

// Word-level accuracy, bootstrap intervals, stress-position confusion,
// inter-annotator agreement, and corpus stress analyses.

#ifndef STRESSKIT_METRICS_H_
#define STRESSKIT_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stresskit/corpus.h"
#include "stresskit/framecodec.h"

namespace stresskit {

struct EvalReport {
  size_t n_words = 0;
  size_t n_correct = 0;
  double accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string tag;
};

// Throws InvalidArgument for an empty input or a record without gold.
EvalReport WordAccuracy(std::span<const PredictionRecord> preds);

// Per-word 0/1 correctness, in input order.
std::vector<int> CorrectnessVector(std::span<const PredictionRecord> preds);

struct Interval95 {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap of the mean of a 0/1 vector. A resample of n words
// holds Binomial(n, mean) correct words, so each resample is drawn as one
// binomial count. Quantiles use linear interpolation between order
// statistics. Deterministic for a fixed seed.
Interval95 BootstrapCi(std::span<const int> correct, double level = 0.95,
                       int resamples = 10000, uint64_t seed = 0);

struct ConfusionMatrix {
  int max_position = 0;
  // counts[gold - 1][predicted - 1], positions 1-based.
  std::vector<std::vector<size_t>> counts;

  size_t Total() const;
  std::vector<std::vector<double>> RowPercentages() const;
};

ConfusionMatrix BuildConfusionMatrix(std::span<const PredictionRecord> preds);

// Share of common word_ids with identical indices. Throws InvalidArgument
// when the maps share no word_id.
double ObservedAgreement(const std::map<std::string, int>& a,
                         const std::map<std::string, int>& b);

// Nominal Krippendorff alpha from the coincidence matrix. Units with fewer
// than two values are not pairable and are ignored. Returns nullopt when
// expected disagreement is zero (a single value overall). Throws
// InvalidArgument without any pairable unit or with fewer than two units.
std::optional<double> KrippendorffAlpha(
    const std::map<std::string, std::vector<int>>& annotations);

struct AgreementReport {
  size_t n_items = 0;
  double observed_agreement = 0.0;
  std::optional<double> alpha;
};

struct StressVariation {
  size_t eligible_words = 0;
  double varying_fraction = 0.0;
  std::vector<std::string> varying_words;  // sorted word forms
};

StressVariation AnalyzeStressVariation(std::span<const WordRecord> records,
                                       size_t min_count = 5);

struct CrosslingualOverlap {
  size_t test_forms = 0;
  size_t overlap_words = 0;
  double overlap_pct = 0.0;  // of distinct test forms, as a fraction
  size_t unseen_stress_words = 0;
  double unseen_pct = 0.0;   // of overlapping forms, as a fraction
};

CrosslingualOverlap AnalyzeCrosslingualOverlap(
    std::span<const WordRecord> train, std::span<const WordRecord> test);

double Mean(std::span<const double> v);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double SampleSd(std::span<const double> v);

}  // namespace stresskit

#endif  // STRESSKIT_METRICS_H_

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

// Binary RBF/linear support vector machine over nucleus features, trained
// with sequential minimal optimization, plus Platt calibration and
// word-level decoding.

#ifndef STRESSKIT_SVM_H_
#define STRESSKIT_SVM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stresskit/prosody.h"

namespace stresskit {

using FeatureVector = std::array<double, kNumFeatures>;

enum class KernelType { kRbf, kLinear };

std::string_view KernelName(KernelType k);
KernelType ParseKernel(std::string_view name);

// Z-score standardization; columns with zero spread keep sd = 1.
struct Scaler {
  FeatureVector means{};
  FeatureVector sds{};

  static Scaler Identity();
  static Scaler Fit(std::span<const FeatureVector> rows);
  FeatureVector Apply(const FeatureVector& x) const;
};

struct PlattParams {
  double a = 0.0;
  double b = 0.0;
};

struct SvmModel {
  KernelType kernel = KernelType::kRbf;
  std::vector<FeatureVector> support_vectors;  // already standardized
  std::vector<double> dual_coefs;              // alpha_i * y_i
  double bias = 0.0;
  double gamma = 0.1;
  double c = 10.0;
  Scaler scaler = Scaler::Identity();
  std::optional<PlattParams> platt;

  double Kernel(const FeatureVector& u, const FeatureVector& v) const;
  // sum_i coef_i * K(scale(x), sv_i) + bias
  double DecisionValue(const FeatureVector& x) const;
  double DecisionValue(const NucleusFeatures& x) const {
    return DecisionValue(x.ToArray());
  }
  // Decision value for an input that is already standardized.
  double DecisionValueScaled(const FeatureVector& z) const;
};

struct TrainInstance {
  NucleusFeatures features;
  int label = 0;  // 1 = stressed nucleus
  std::string word_id;
  int nucleus_index = 0;
};

struct TrainOptions {
  double c = 10.0;
  std::optional<double> gamma;  // nullopt: "scale"
  KernelType kernel = KernelType::kRbf;
  double tol = 1e-3;
  // Iteration cap is max_passes * max(number of instances, 100).
  int max_passes = 10000;
  uint64_t seed = 0;
  bool standardize = true;
};

struct TrainReport {
  int64_t iterations = 0;
  bool converged = false;
  double max_kkt_violation = 0.0;
  double dual_objective = 0.0;
  size_t num_support_vectors = 0;
};

// Throws TrainingError for fewer than two instances, a single class, a
// non-finite feature (naming the word), or a non-positive C or gamma.
SvmModel TrainSvm(std::span<const TrainInstance> data,
                  const TrainOptions& options, TrainReport* report = nullptr);

// gamma = 1 / (n_features * variance of all standardized entries).
double ScaleGamma(std::span<const FeatureVector> standardized);

// Fits p(f) = 1 / (1 + exp(a * f + b)) by Newton's method with backtracking
// on smoothed targets (Lin, Lin and Weng's variant of Platt scaling).
// Throws InvalidArgument when a class is missing, ConvergenceError after 100
// iterations without convergence.
PlattParams PlattFit(std::span<const double> decisions,
                     std::span<const int> labels);

double PlattProbability(const PlattParams& p, double decision);

struct WordPrediction {
  int predicted_index = 0;
  std::vector<double> scores;  // decision value per nucleus
};

// Argmax of the decision values, ties to the lowest index. Throws
// InvalidArgument for an empty word.
WordPrediction PredictWord(const SvmModel& model,
                           std::span<const NucleusFeatures> nuclei);

// First index of the maximum; the tie rule shared by all word decoders.
int ArgmaxFirst(std::span<const double> scores);

// Versioned JSON text. Decision values survive a round trip bit for bit.
std::string SerializeModel(const SvmModel& model);
SvmModel ParseModel(const std::string& text);
void SaveModel(const std::string& path, const SvmModel& model);
SvmModel LoadModel(const std::string& path);

struct WordInstances {
  std::string word_id;
  std::vector<NucleusFeatures> nuclei;
  std::optional<int> gold_index;
};

// Groups instances by word_id (first-appearance order), nuclei ordered by
// nucleus_index; gold is the label-1 nucleus when exactly one exists.
std::vector<WordInstances> GroupByWord(std::span<const TrainInstance> data);

struct GridPoint {
  KernelType kernel = KernelType::kRbf;
  double c = 0.0;
  double word_accuracy = 0.0;
};

// Trains one model per (kernel, C) on `train` and scores word-level
// accuracy on `dev`.
std::vector<GridPoint> GridSearch(std::span<const TrainInstance> train,
                                  std::span<const TrainInstance> dev,
                                  std::span<const KernelType> kernels,
                                  std::span<const double> cs,
                                  const TrainOptions& base);

}  // namespace stresskit

#endif  // STRESSKIT_SVM_H_

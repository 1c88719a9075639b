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

#include "stresskit/metrics.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "stresskit/error.h"

namespace stresskit {
namespace {

double Quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EvalReport WordAccuracy(std::span<const PredictionRecord> preds) {
  if (preds.empty()) throw InvalidArgument("no predictions to evaluate");
  EvalReport r;
  for (const auto& p : preds) {
    if (!p.gold_index) {
      throw InvalidArgument("prediction for " + p.word_id + " has no gold");
    }
    ++r.n_words;
    if (p.predicted_index == *p.gold_index) ++r.n_correct;
  }
  r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_words);
  r.ci_low = r.ci_high = r.accuracy;
  return r;
}

std::vector<int> CorrectnessVector(std::span<const PredictionRecord> preds) {
  std::vector<int> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    out.push_back(p.gold_index && p.predicted_index == *p.gold_index ? 1 : 0);
  }
  return out;
}

Interval95 BootstrapCi(std::span<const int> correct, double level,
                       int resamples, uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("confidence level must lie in (0, 1)");
  }
  if (correct.empty()) throw InvalidArgument("bootstrap needs n >= 1");
  if (resamples < 1) throw InvalidArgument("resamples must be positive");
  const auto n = static_cast<int64_t>(correct.size());
  int64_t hits = 0;
  for (int c : correct) hits += c != 0 ? 1 : 0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  std::mt19937_64 rng(seed);
  std::binomial_distribution<int64_t> draw(n, p);
  std::vector<double> stats(static_cast<size_t>(resamples));
  for (auto& s : stats) {
    s = static_cast<double>(draw(rng)) / static_cast<double>(n);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  return {Quantile(stats, tail), Quantile(stats, 1.0 - tail)};
}

size_t ConfusionMatrix::Total() const {
  size_t total = 0;
  for (const auto& row : counts) {
    for (size_t c : row) total += c;
  }
  return total;
}

std::vector<std::vector<double>> ConfusionMatrix::RowPercentages() const {
  std::vector<std::vector<double>> out;
  for (const auto& row : counts) {
    size_t sum = 0;
    for (size_t c : row) sum += c;
    std::vector<double> pct(row.size(), 0.0);
    for (size_t k = 0; k < row.size() && sum > 0; ++k) {
      pct[k] = 100.0 * static_cast<double>(row[k]) / static_cast<double>(sum);
    }
    out.push_back(std::move(pct));
  }
  return out;
}

ConfusionMatrix BuildConfusionMatrix(std::span<const PredictionRecord> preds) {
  if (preds.empty()) throw InvalidArgument("no predictions for confusion");
  ConfusionMatrix m;
  for (const auto& p : preds) {
    if (!p.gold_index) {
      throw InvalidArgument("prediction for " + p.word_id + " has no gold");
    }
    m.max_position =
        std::max({m.max_position, *p.gold_index + 1, p.predicted_index + 1});
  }
  const auto size = static_cast<size_t>(m.max_position);
  m.counts.assign(size, std::vector<size_t>(size, 0));
  for (const auto& p : preds) {
    ++m.counts[static_cast<size_t>(*p.gold_index)]
              [static_cast<size_t>(p.predicted_index)];
  }
  return m;
}

double ObservedAgreement(const std::map<std::string, int>& a,
                         const std::map<std::string, int>& b) {
  size_t common = 0;
  size_t same = 0;
  for (const auto& [id, value] : a) {
    const auto it = b.find(id);
    if (it == b.end()) continue;
    ++common;
    if (it->second == value) ++same;
  }
  if (common == 0) throw InvalidArgument("annotations share no word_id");
  return static_cast<double>(same) / static_cast<double>(common);
}

std::optional<double> KrippendorffAlpha(
    const std::map<std::string, std::vector<int>>& annotations) {
  if (annotations.size() < 2) {
    throw InvalidArgument("alpha needs at least two items");
  }
  // Coincidence matrix o[c][k]: each unit with m >= 2 values contributes
  // 1 / (m - 1) per ordered pair of distinct annotations.
  std::map<int, std::map<int, double>> o;
  bool pairable = false;
  for (const auto& [id, values] : annotations) {
    const size_t m = values.size();
    if (m < 2) continue;
    pairable = true;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = 0; j < m; ++j) {
        if (i != j) o[values[i]][values[j]] += w;
      }
    }
  }
  if (!pairable) {
    throw InvalidArgument("alpha needs an item with at least two annotations");
  }
  std::map<int, double> marginal;
  double n = 0.0;
  double disagree = 0.0;
  for (const auto& [c, row] : o) {
    for (const auto& [k, v] : row) {
      marginal[c] += v;
      n += v;
      if (c != k) disagree += v;
    }
  }
  double expected = 0.0;
  for (const auto& [c, nc] : marginal) {
    for (const auto& [k, nk] : marginal) {
      if (c != k) expected += nc * nk;
    }
  }
  if (expected == 0.0) return std::nullopt;
  return 1.0 - (n - 1.0) * disagree / expected;
}

StressVariation AnalyzeStressVariation(std::span<const WordRecord> records,
                                       size_t min_count) {
  std::map<std::string, std::pair<size_t, std::set<int>>> forms;
  for (const auto& r : records) {
    if (!r.stress_index) continue;
    auto& entry = forms[WordForm(r.text)];
    ++entry.first;
    entry.second.insert(*r.stress_index);
  }
  StressVariation out;
  for (const auto& [form, entry] : forms) {
    if (entry.first < min_count) continue;
    ++out.eligible_words;
    if (entry.second.size() > 1) out.varying_words.push_back(form);
  }
  out.varying_fraction =
      out.eligible_words > 0
          ? static_cast<double>(out.varying_words.size()) /
                static_cast<double>(out.eligible_words)
          : 0.0;
  return out;
}

CrosslingualOverlap AnalyzeCrosslingualOverlap(
    std::span<const WordRecord> train, std::span<const WordRecord> test) {
  std::map<std::string, std::set<int>> train_positions;
  for (const auto& r : train) {
    auto& s = train_positions[WordForm(r.text)];
    if (r.stress_index) s.insert(*r.stress_index);
  }
  std::map<std::string, std::set<int>> test_positions;
  for (const auto& r : test) {
    auto& s = test_positions[WordForm(r.text)];
    if (r.stress_index) s.insert(*r.stress_index);
  }
  CrosslingualOverlap out;
  out.test_forms = test_positions.size();
  for (const auto& [form, positions] : test_positions) {
    const auto it = train_positions.find(form);
    if (it == train_positions.end()) continue;
    ++out.overlap_words;
    const bool unseen =
        std::any_of(positions.begin(), positions.end(),
                    [&](int p) { return it->second.count(p) == 0; });
    if (unseen) ++out.unseen_stress_words;
  }
  if (out.test_forms > 0) {
    out.overlap_pct = static_cast<double>(out.overlap_words) /
                      static_cast<double>(out.test_forms);
  }
  if (out.overlap_words > 0) {
    out.unseen_pct = static_cast<double>(out.unseen_stress_words) /
                     static_cast<double>(out.overlap_words);
  }
  return out;
}

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleSd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace stresskit

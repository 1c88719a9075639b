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

#include "stresskit/pipeline.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "stresskit/audio.h"
#include "stresskit/error.h"
#include "stresskit/metrics.h"
#include "stresskit/prosody.h"

namespace stresskit {
namespace {

struct RecordingJob {
  std::string path;
  std::vector<const WordRecord*> words;
};

struct RecordingOutput {
  std::vector<FeatureLine> lines;
  std::vector<SkippedWord> skipped;
  std::vector<Json> contours;
};

RecordingOutput ProcessRecording(const RecordingJob& job, bool dump) {
  RecordingOutput out;
  AudioClip clip;
  try {
    clip = LoadWav(job.path);
    if (clip.sample_rate_hz != kCanonicalRateHz && !clip.samples.empty()) {
      clip = ResampleLinear(clip, kCanonicalRateHz);
    }
  } catch (const Error& e) {
    for (const WordRecord* w : job.words) {
      out.skipped.push_back({w->word_id, e.what()});
    }
    return out;
  }
  for (const WordRecord* w : job.words) {
    try {
      const AudioClip word_audio =
          Slice(clip, w->t0 - clip.origin_s, w->t1 - clip.origin_s);
      const ProsodyTracks tracks = ComputeProsody(word_audio);
      if (tracks.intensity.frames.empty()) {
        out.skipped.push_back({w->word_id, "word shorter than one frame"});
        continue;
      }
      const auto feats = ComputeWordFeatures(tracks, *w);
      for (size_t i = 0; i < feats.size(); ++i) {
        FeatureLine line;
        line.word_id = w->word_id;
        line.nucleus_index = static_cast<int>(i);
        line.n_nuclei = static_cast<int>(feats.size());
        if (w->stress_index) {
          line.label = *w->stress_index == static_cast<int>(i) ? 1 : 0;
        }
        line.features = feats[i].features;
        line.quality = feats[i].quality;
        line.speaker_id = w->speaker_id;
        out.lines.push_back(std::move(line));
      }
      if (dump) {
        auto rows = ContourRows(w->word_id, tracks);
        out.contours.insert(out.contours.end(), rows.begin(), rows.end());
      }
    } catch (const Error& e) {
      out.skipped.push_back({w->word_id, e.what()});
    }
  }
  return out;
}

}  // namespace

FeatureExtraction ExtractFeatures(const std::vector<WordRecord>& records,
                                  const std::string& audio_root, int threads,
                                  bool dump_contours) {
  std::map<std::string, size_t> slot;
  std::vector<RecordingJob> jobs;
  for (const auto& r : records) {
    std::filesystem::path p(r.audio_path);
    if (p.is_relative() && !audio_root.empty()) {
      p = std::filesystem::path(audio_root) / p;
    }
    auto [it, inserted] = slot.emplace(p.string(), jobs.size());
    if (inserted) jobs.push_back({p.string(), {}});
    jobs[it->second].words.push_back(&r);
  }

  std::vector<RecordingOutput> outputs(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < jobs.size(); k = next++) {
      outputs[k] = ProcessRecording(jobs[k], dump_contours);
    }
  };
  const int n_threads =
      std::clamp(threads, 1, static_cast<int>(std::max<size_t>(jobs.size(), 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  FeatureExtraction result;
  for (auto& o : outputs) {
    std::move(o.lines.begin(), o.lines.end(), std::back_inserter(result.lines));
    std::move(o.skipped.begin(), o.skipped.end(),
              std::back_inserter(result.skipped));
    std::move(o.contours.begin(), o.contours.end(),
              std::back_inserter(result.contours));
  }
  std::stable_sort(result.lines.begin(), result.lines.end(),
                   [](const FeatureLine& a, const FeatureLine& b) {
                     return std::tie(a.word_id, a.nucleus_index) <
                            std::tie(b.word_id, b.nucleus_index);
                   });
  std::stable_sort(result.skipped.begin(), result.skipped.end(),
                   [](const SkippedWord& a, const SkippedWord& b) {
                     return a.word_id < b.word_id;
                   });
  std::stable_sort(result.contours.begin(), result.contours.end(),
                   [](const Json& a, const Json& b) {
                     return a["word_id"].get<std::string>() <
                            b["word_id"].get<std::string>();
                   });
  return result;
}

std::vector<PredictionRecord> PredictFromFeatures(
    const SvmModel& model, const std::vector<FeatureLine>& lines) {
  std::vector<TrainInstance> instances;
  instances.reserve(lines.size());
  for (const auto& f : lines) {
    instances.push_back({f.features, f.label.value_or(0), f.word_id,
                         f.nucleus_index});
  }
  std::map<std::string, bool> has_gold;
  for (const auto& f : lines) {
    auto& g = has_gold[f.word_id];
    g = g || f.label.has_value();
  }
  std::vector<PredictionRecord> preds;
  for (const auto& w : GroupByWord(instances)) {
    if (w.nuclei.size() < 2) continue;
    const WordPrediction wp = PredictWord(model, w.nuclei);
    PredictionRecord p;
    p.word_id = w.word_id;
    p.predicted_index = wp.predicted_index;
    p.n_nuclei = static_cast<int>(w.nuclei.size());
    if (has_gold[w.word_id]) p.gold_index = w.gold_index;
    const double best = wp.scores[static_cast<size_t>(wp.predicted_index)];
    p.score = model.platt ? PlattProbability(*model.platt, best) : best;
    preds.push_back(std::move(p));
  }
  return preds;
}

SvmModel TrainWithPlatt(const std::vector<TrainInstance>& data,
                        const TrainOptions& options, TrainReport* report,
                        bool* platt_ok) {
  SvmModel model = TrainSvm(data, options, report);
  std::vector<double> decisions;
  std::vector<int> labels;
  decisions.reserve(data.size());
  for (const auto& inst : data) {
    decisions.push_back(model.DecisionValue(inst.features));
    labels.push_back(inst.label);
  }
  bool ok = true;
  try {
    model.platt = PlattFit(decisions, labels);
  } catch (const Error&) {
    ok = false;
  }
  if (platt_ok != nullptr) *platt_ok = ok;
  return model;
}

uint64_t CurveSeed(uint64_t seed, int size, int repeat) {
  return seed * 1000003ULL + static_cast<uint64_t>(size) * 1000ULL +
         static_cast<uint64_t>(repeat);
}

CurveResult RunLearningCurve(const std::vector<FeatureLine>& train,
                             const std::vector<TestSet>& tests,
                             const std::vector<int>& sizes, int repeats,
                             uint64_t seed, const TrainOptions& options) {
  std::map<std::string, std::vector<const FeatureLine*>> by_word;
  for (const auto& f : train) {
    if (f.label) by_word[f.word_id].push_back(&f);
  }
  std::vector<std::string> word_ids;
  for (const auto& [id, lines] : by_word) word_ids.push_back(id);

  std::vector<std::vector<FeatureLine>> test_lines;
  for (const auto& t : tests) test_lines.push_back(t.lines);

  CurveResult result;
  for (int size : sizes) {
    if (size <= 0 || static_cast<size_t>(size) > word_ids.size()) {
      result.skipped_sizes.push_back(size);
      continue;
    }
    CurveSummary summary;
    summary.train_size = size;
    std::vector<std::vector<double>> acc_by_test(tests.size());
    for (int r = 0; r < repeats; ++r) {
      CurvePoint point;
      point.train_size = size;
      point.repeat = r;
      point.seed = CurveSeed(seed, size, r);
      std::vector<std::string> ids = word_ids;
      std::mt19937_64 rng(point.seed);
      std::shuffle(ids.begin(), ids.end(), rng);
      ids.resize(static_cast<size_t>(size));
      std::sort(ids.begin(), ids.end());
      std::vector<TrainInstance> data;
      for (const auto& id : ids) {
        for (const FeatureLine* f : by_word[id]) {
          data.push_back({f->features, *f->label, f->word_id, f->nucleus_index});
        }
      }
      TrainOptions opts = options;
      opts.seed = point.seed;
      const SvmModel model = TrainSvm(data, opts);
      for (size_t t = 0; t < tests.size(); ++t) {
        const auto preds = PredictFromFeatures(model, test_lines[t]);
        std::vector<PredictionRecord> gold;
        for (const auto& p : preds) {
          if (p.gold_index) gold.push_back(p);
        }
        const double acc = gold.empty() ? 0.0 : WordAccuracy(gold).accuracy;
        point.accuracy.push_back(acc);
        acc_by_test[t].push_back(acc);
      }
      point.sampled_word_ids = std::move(ids);
      result.points.push_back(std::move(point));
    }
    for (const auto& accs : acc_by_test) {
      summary.mean.push_back(Mean(accs));
      summary.sd.push_back(SampleSd(accs));
    }
    result.summary.push_back(std::move(summary));
  }
  return result;
}

std::string CurveCsv(const CurveResult& result,
                     const std::vector<TestSet>& tests) {
  std::ostringstream out;
  out.precision(10);
  out << "kind,train_size,repeat,seed";
  for (const auto& t : tests) out << ",acc_" << t.tag;
  for (const auto& t : tests) out << ",sd_" << t.tag;
  out << ",note\n";
  constexpr char kNote[] =
      "SVM leg; the constant-training-step control applies to the external "
      "transformer leg only";
  for (const auto& p : result.points) {
    out << "point," << p.train_size << ',' << p.repeat << ',' << p.seed;
    for (double a : p.accuracy) out << ',' << a;
    for (size_t t = 0; t < tests.size(); ++t) out << ',';
    out << ',' << kNote << '\n';
  }
  for (const auto& s : result.summary) {
    out << "summary," << s.train_size << ",,";
    for (double m : s.mean) out << ',' << m;
    for (double sd : s.sd) out << ',' << sd;
    out << ',' << kNote << '\n';
  }
  return out.str();
}

}  // namespace stresskit

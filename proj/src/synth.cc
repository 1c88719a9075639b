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

#include "stresskit/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "stresskit/error.h"

namespace stresskit {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Syllable {
  const char* onset;
  const char* vowel;
};

constexpr std::array<Syllable, 16> kSyllables = {{
    {"k", "a"}, {"l", "o"}, {"n", "i"}, {"m", "a"}, {"lj", "e"}, {"nj", "a"},
    {"d", "o"}, {"v", "e"}, {"r", "i"}, {"p", "u"}, {"s", "e"}, {"t", "o"},
    {"dž", "a"}, {"g", "u"}, {"b", "i"}, {"z", "e"},
}};

double FormantGain(double f) {
  auto peak = [f](double centre, double width) {
    const double d = (f - centre) / width;
    return 1.0 / (1.0 + d * d);
  };
  return peak(700.0, 250.0) + 0.7 * peak(1200.0, 300.0) + 0.05;
}

void AppendNoise(std::vector<double>& out, size_t n, double amplitude,
                 std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double prev = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = gauss(rng);
    out.push_back(amplitude * 0.7 * (w - prev));  // first difference: hiss
    prev = w;
  }
}

void AppendVowel(std::vector<double>& out, size_t n, double f0_start,
                 double f0_end, double rms_target, int rate,
                 std::mt19937_64& rng) {
  std::vector<double> v(n, 0.0);
  std::uniform_real_distribution<double> phase0(0.0, kTwoPi);
  const int harmonics =
      static_cast<int>(4000.0 / std::max(f0_start, f0_end));
  std::vector<double> phase(static_cast<size_t>(harmonics) + 1);
  for (auto& p : phase) p = phase0(rng);
  for (size_t i = 0; i < n; ++i) {
    const double frac = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    const double f0 = f0_start + frac * (f0_end - f0_start);
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      auto& p = phase[static_cast<size_t>(h)];
      p += kTwoPi * h * f0 / rate;
      s += FormantGain(h * f0) * std::sin(p);
    }
    v[i] = s;
  }
  const double rms = Rms(v);
  const size_t ramp = std::min<size_t>(n / 2, static_cast<size_t>(0.015 * rate));
  for (size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) {
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
    } else if (i >= n - ramp) {
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) / ramp);
    }
    out.push_back(rms > 0 ? v[i] / rms * rms_target * env : 0.0);
  }
}

Interval MakeInterval(double a, double b, std::string text) {
  return Interval{a, b, std::move(text)};
}

// Fills gaps so the tier tiles [0, end] as Praat interval tiers do.
std::vector<Interval> Tile(const std::vector<Interval>& labelled, double end) {
  std::vector<Interval> out;
  double cursor = 0.0;
  for (const auto& iv : labelled) {
    if (iv.xmin > cursor) out.push_back(MakeInterval(cursor, iv.xmin, ""));
    out.push_back(iv);
    cursor = iv.xmax;
  }
  if (end > cursor) out.push_back(MakeInterval(cursor, end, ""));
  return out;
}

}  // namespace

SyntheticRecording SynthesizeRecording(const SynthOptions& options,
                                       int speaker_index, int num_words) {
  if (options.min_syllables < 2 ||
      options.max_syllables < options.min_syllables) {
    throw InvalidArgument("synthetic words need 2 <= min <= max syllables");
  }
  const int rate = kCanonicalRateHz;
  std::mt19937_64 rng(options.seed * 1000003ULL +
                      static_cast<uint64_t>(speaker_index) * 7919ULL + 17ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticRecording rec;
  char id[32];
  std::snprintf(id, sizeof(id), "spk%03d", speaker_index);
  rec.speaker_id = id;
  rec.gender = speaker_index % 2 == 0 ? Gender::kFemale : Gender::kMale;
  const double speaker_f0 = rec.gender == Gender::kFemale ? uniform(180.0, 230.0)
                                                          : uniform(100.0, 135.0);
  const double speaker_rms = uniform(0.04, 0.09);
  const double stress_gain = std::pow(10.0, options.stress_gain_db / 20.0);

  std::vector<double>& s = rec.audio.samples;
  rec.audio.sample_rate_hz = rate;
  auto now = [&] { return static_cast<double>(s.size()) / rate; };
  auto samples = [&](double sec) {
    return static_cast<size_t>(std::lround(sec * rate));
  };

  std::vector<Interval> words;
  std::vector<Interval> nuclei;
  Tier stress;
  stress.name = "stress";
  stress.kind = TierKind::kPoint;

  std::uniform_int_distribution<int> n_syll(options.min_syllables,
                                            options.max_syllables);
  std::uniform_int_distribution<size_t> pick(0, kSyllables.size() - 1);
  AppendNoise(s, samples(uniform(0.15, 0.25)), 0.001, rng);
  for (int w = 0; w < num_words; ++w) {
    const int k = n_syll(rng);
    std::uniform_int_distribution<int> pick_stress(0, k - 1);
    const int stressed = pick_stress(rng);
    const double word_t0 = now();
    std::string text;
    for (int i = 0; i < k; ++i) {
      const Syllable& syl = kSyllables[pick(rng)];
      text += syl.onset;
      text += syl.vowel;
      AppendNoise(s, samples(uniform(0.035, 0.065)), speaker_rms * 0.25, rng);
      const bool is_stressed = i == stressed;
      double dur = uniform(0.075, 0.11);
      double f0 = speaker_f0 * (1.0 - 0.06 * i / std::max(1, k - 1)) *
                  uniform(0.96, 1.04);
      double rms = speaker_rms * std::pow(10.0, uniform(-1.5, 1.5) / 20.0);
      if (is_stressed) {
        dur *= options.stress_duration_factor;
        f0 *= options.stress_f0_factor;
        rms *= stress_gain;
      }
      const double v0 = now();
      AppendVowel(s, samples(dur), f0 * 1.02, f0 * 0.98, rms, rate, rng);
      const double v1 = now();
      nuclei.push_back(MakeInterval(v0, v1, syl.vowel));
      if (is_stressed) stress.points.push_back({0.5 * (v0 + v1), "1"});
    }
    AppendNoise(s, samples(uniform(0.0, 0.03)), speaker_rms * 0.2, rng);
    words.push_back(MakeInterval(word_t0, now(), text));
    AppendNoise(s, samples(uniform(0.15, 0.25)), 0.001, rng);
  }
  for (double& x : s) x = std::clamp(x, -1.0, 1.0);

  const double end = now();
  rec.grid.xmin = 0.0;
  rec.grid.xmax = end;
  Tier word_tier{"words", TierKind::kInterval, 0.0, end, Tile(words, end), {}};
  Tier nucleus_tier{"nuclei", TierKind::kInterval, 0.0, end, Tile(nuclei, end),
                    {}};
  stress.xmin = 0.0;
  stress.xmax = end;
  rec.grid.tiers = {std::move(word_tier), std::move(nucleus_tier),
                    std::move(stress)};
  return rec;
}

std::vector<SynthCorpusFile> WriteSyntheticCorpus(const SynthOptions& options,
                                                  const std::string& out_dir) {
  if (options.num_speakers < 1 || options.num_words < options.num_speakers) {
    throw InvalidArgument("need at least one word per synthetic speaker");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<SynthCorpusFile> files;
  std::ofstream map(std::filesystem::path(out_dir) / "speakers.tsv");
  if (!map) throw Error("cannot write speakers.tsv in " + out_dir);
  const int base = options.num_words / options.num_speakers;
  const int extra = options.num_words % options.num_speakers;
  for (int k = 0; k < options.num_speakers; ++k) {
    const int n = base + (k < extra ? 1 : 0);
    SyntheticRecording rec = SynthesizeRecording(options, k, n);
    const auto stem = std::filesystem::path(out_dir) / rec.speaker_id;
    SynthCorpusFile f;
    f.wav_path = stem.string() + ".wav";
    f.textgrid_path = stem.string() + ".TextGrid";
    f.speaker_id = rec.speaker_id;
    f.gender = rec.gender;
    WriteWav16(f.wav_path, rec.audio);
    WriteTextGridFile(f.textgrid_path, rec.grid);
    map << rec.speaker_id << '\t' << rec.speaker_id << '\t'
        << GenderCode(rec.gender) << '\n';
    files.push_back(std::move(f));
  }
  return files;
}

}  // namespace stresskit

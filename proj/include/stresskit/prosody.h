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

// Prosodic contours (pitch, intensity, sonority) and the per-nucleus
// prominence features derived from them.

#ifndef STRESSKIT_PROSODY_H_
#define STRESSKIT_PROSODY_H_

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "stresskit/audio.h"
#include "stresskit/corpus.h"

namespace stresskit {

inline constexpr double kFrameHopS = 0.010;
inline constexpr double kShortWindowS = 0.030;  // intensity, sonority
inline constexpr double kPitchWindowS = 0.040;
inline constexpr double kPitchFloorHz = 75.0;
inline constexpr double kPitchCeilingHz = 500.0;
inline constexpr double kVoicingThreshold = 0.45;
inline constexpr double kIntensityReference = 2e-5;
inline constexpr double kSonorityBandLowHz = 300.0;
inline constexpr double kSonorityBandHighHz = 2300.0;

struct TrackFrame {
  double value = 0.0;
  bool voiced = true;
};

// Frame i is centred at start_s + i * hop_s (absolute time).
struct Track {
  double hop_s = kFrameHopS;
  double start_s = 0.0;
  std::vector<TrackFrame> frames;

  double TimeAt(size_t i) const {
    return start_s + static_cast<double>(i) * hop_s;
  }
};

struct ProsodyTracks {
  Track pitch;      // Hz, unvoiced frames carry 0
  Track intensity;  // dB re 2e-5, floored at 0
  Track sonority;   // RMS x in-band energy fraction
};

// 30 ms Hann-weighted RMS in dB at a 10 ms hop.
Track IntensityContour(const AudioClip& clip);

// Normalized-autocorrelation F0 over a 40 ms window at a 10 ms hop, lags
// covering 75-500 Hz, refined by parabolic interpolation. Frames whose best
// correlation is below 0.45 are unvoiced. Frames share centres with the
// 30 ms tracks; the window is zero-padded at the clip edges.
Track PitchContour(const AudioClip& clip);

// 30 ms Hann-weighted RMS times the share of spectral energy in
// 300-2300 Hz.
Track SonorityContour(const AudioClip& clip);

// All three contours on a shared frame grid.
ProsodyTracks ComputeProsody(const AudioClip& clip);

inline constexpr size_t kNumFeatures = 10;

struct NucleusFeatures {
  double pitch_auc_prom = 1.0;
  double pitch_mean_prom = 1.0;
  double pitch_peak_prom = 1.0;
  double int_auc_prom = 1.0;
  double int_mean_prom = 1.0;
  double int_peak_prom = 1.0;
  double son_auc_prom = 1.0;
  double son_mean_prom = 1.0;
  double son_peak_prom = 1.0;
  double duration_s = 0.0;

  std::array<double, kNumFeatures> ToArray() const;
  static NucleusFeatures FromArray(const std::array<double, kNumFeatures>& a);
};

extern const std::array<std::string_view, kNumFeatures> kFeatureNames;

// Bits of FeatureResult::quality.
enum FeatureQuality : uint32_t {
  kQualityOk = 0,
  kNoVoicedPitchInWord = 1u << 0,   // pitch ratios set to 1.0
  kZeroIntensityMean = 1u << 1,     // intensity ratios set to 1.0
  kZeroSonorityMean = 1u << 2,      // sonority ratios set to 1.0
  kNoFrameInNucleus = 1u << 3,      // nearest frame used for int/son
  kUnvoicedNucleus = 1u << 4,       // pitch ratios are 0
};

struct FeatureResult {
  NucleusFeatures features;
  uint32_t quality = kQualityOk;
};

// Frames belong to an interval [t0, t1) when their centre lies inside it;
// pitch statistics use voiced frames only. For each signal the nucleus
// mean, peak and duration-normalized trapezoidal AUC are divided by the
// word-level mean. The AUC is integrated between adjacent selected frames
// and divided by the integrated span, so a constant contour yields 1.0.
FeatureResult ComputeNucleusFeatures(const ProsodyTracks& tracks,
                                     double word_t0, double word_t1,
                                     const NucleusSpan& nucleus);

std::vector<FeatureResult> ComputeWordFeatures(const ProsodyTracks& tracks,
                                               const WordRecord& word);

}  // namespace stresskit

#endif  // STRESSKIT_PROSODY_H_

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

#ifndef STRESSKIT_AUDIO_H_
#define STRESSKIT_AUDIO_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stresskit {

// All analysis runs at this rate; a 20 ms frame is 320 samples.
inline constexpr int kCanonicalRateHz = 16000;

// Mono PCM in [-1, 1]. `origin_s` is the time of sample 0 in the source
// recording, so slices keep absolute time.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalRateHz;
  double origin_s = 0.0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// RIFF/WAVE with 16-bit integer PCM or 32-bit IEEE float, mono or stereo
// (channels averaged). Integer samples are scaled by 1/32768. Throws
// AudioError naming the offending header field.
AudioClip DecodeWav(std::string_view bytes);
AudioClip LoadWav(const std::string& path);

// Writes 16-bit mono PCM; samples are clipped to [-1, 1).
void WriteWav16(const std::string& path, const AudioClip& clip);

// Linear interpolation onto a grid of round(n * target / source) samples.
// Returns the input unchanged when the rates match. Throws InvalidArgument
// for target_hz <= 0 or an empty clip.
AudioClip ResampleLinear(const AudioClip& clip, int target_hz);

// Samples [round(t0 * rate), round(t0 * rate) + round((t1 - t0) * rate)),
// times relative to the clip origin. Throws InvalidArgument when the range
// is outside [0, duration] or reversed.
AudioClip Slice(const AudioClip& clip, double t0, double t1);

double Rms(std::span<const double> samples);

}  // namespace stresskit

#endif  // STRESSKIT_AUDIO_H_

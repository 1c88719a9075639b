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

#include "stresskit/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stresskit/error.h"

namespace stresskit {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(std::string_view b, size_t at) {
  return static_cast<uint16_t>(static_cast<unsigned char>(b[at]) |
                               (static_cast<unsigned char>(b[at + 1]) << 8));
}

uint32_t ReadU32(std::string_view b, size_t at) {
  return static_cast<uint32_t>(ReadU16(b, at)) |
         (static_cast<uint32_t>(ReadU16(b, at + 2)) << 16);
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string& out, uint32_t v) {
  PutU16(out, static_cast<uint16_t>(v & 0xFFFF));
  PutU16(out, static_cast<uint16_t>(v >> 16));
}

}  // namespace

AudioClip DecodeWav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw AudioError("not a RIFF/WAVE file (bad RIFF or WAVE tag)");
  }
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t rate = 0;
  uint16_t bits = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;
  size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const uint32_t size = ReadU32(b, pos + 4);
    const size_t body = pos + 8;
    const size_t avail = std::min<size_t>(size, b.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw AudioError("fmt chunk too short");
      format = ReadU16(b, body);
      channels = ReadU16(b, body + 2);
      rate = ReadU32(b, body + 4);
      bits = ReadU16(b, body + 14);
      if (format == kFormatExtensible && avail >= 26) {
        format = ReadU16(b, body + 24);  // first two bytes of SubFormat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = b.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw AudioError("missing fmt chunk");
  if (!have_data) throw AudioError("missing data chunk");
  if (channels != 1 && channels != 2) {
    throw AudioError("unsupported channel count (NumChannels=" +
                     std::to_string(channels) + ")");
  }
  if (rate == 0) throw AudioError("invalid SampleRate=0");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw AudioError("unsupported sample format (AudioFormat=" +
                     std::to_string(format) +
                     ", BitsPerSample=" + std::to_string(bits) + ")");
  }
  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t frames = data.size() / frame_bytes;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      const size_t at = i * frame_bytes + c * bytes_per_sample;
      double v = 0.0;
      if (pcm16) {
        v = static_cast<int16_t>(ReadU16(data, at)) / 32768.0;
      } else {
        const uint32_t raw = ReadU32(data, at);
        float f = 0.0f;
        std::memcpy(&f, &raw, sizeof(f));
        if (!std::isfinite(f)) {
          throw AudioError("non-finite float sample at frame " +
                           std::to_string(i));
        }
        v = std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
      acc += v;
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

AudioClip LoadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioError("cannot open audio file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return DecodeWav(buf.str());
  } catch (const AudioError& e) {
    throw AudioError(path + ": " + e.what());
  }
}

void WriteWav16(const std::string& path, const AudioClip& clip) {
  const auto data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(clip.sample_rate_hz));
  PutU32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto q = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    PutU16(out, static_cast<uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw AudioError("cannot write audio file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

AudioClip ResampleLinear(const AudioClip& clip, int target_hz) {
  if (target_hz <= 0) throw InvalidArgument("target rate must be positive");
  if (clip.samples.empty()) throw InvalidArgument("cannot resample empty clip");
  if (target_hz == clip.sample_rate_hz) return clip;
  const size_t n = clip.samples.size();
  const double ratio = static_cast<double>(clip.sample_rate_hz) / target_hz;
  const auto m = static_cast<size_t>(std::llround(
      static_cast<double>(n) * target_hz / clip.sample_rate_hz));
  AudioClip out;
  out.sample_rate_hz = target_hz;
  out.origin_s = clip.origin_s;
  out.samples.resize(m);
  for (size_t j = 0; j < m; ++j) {
    const double pos = static_cast<double>(j) * ratio;
    const auto i = static_cast<size_t>(pos);
    if (i + 1 >= n) {
      out.samples[j] = clip.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out.samples[j] =
        clip.samples[i] + frac * (clip.samples[i + 1] - clip.samples[i]);
  }
  return out;
}

AudioClip Slice(const AudioClip& clip, double t0, double t1) {
  const double eps = 0.5 / clip.sample_rate_hz;
  if (!(t0 >= 0.0) || !(t1 >= t0) || t1 > clip.duration() + eps) {
    throw InvalidArgument("slice [" + std::to_string(t0) + ", " +
                          std::to_string(t1) + "] outside clip of " +
                          std::to_string(clip.duration()) + " s");
  }
  const auto rate = static_cast<double>(clip.sample_rate_hz);
  const auto start = static_cast<size_t>(std::llround(t0 * rate));
  auto count = static_cast<size_t>(std::llround((t1 - t0) * rate));
  const size_t n = clip.samples.size();
  if (start > n) throw InvalidArgument("slice start beyond clip end");
  count = std::min(count, n - start);
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.origin_s = clip.origin_s + t0;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     clip.samples.begin() +
                         static_cast<std::ptrdiff_t>(start + count));
  return out;
}

double Rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace stresskit

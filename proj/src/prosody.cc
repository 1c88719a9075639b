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

#include "stresskit/prosody.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include <unsupported/Eigen/FFT>

#include "stresskit/error.h"

namespace stresskit {

const std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "pitch_auc_prom", "pitch_mean_prom", "pitch_peak_prom",
    "int_auc_prom",   "int_mean_prom",   "int_peak_prom",
    "son_auc_prom",   "son_mean_prom",   "son_peak_prom",
    "duration_s"};

std::array<double, kNumFeatures> NucleusFeatures::ToArray() const {
  return {pitch_auc_prom, pitch_mean_prom, pitch_peak_prom,
          int_auc_prom,   int_mean_prom,   int_peak_prom,
          son_auc_prom,   son_mean_prom,   son_peak_prom,
          duration_s};
}

NucleusFeatures NucleusFeatures::FromArray(
    const std::array<double, kNumFeatures>& a) {
  NucleusFeatures f;
  f.pitch_auc_prom = a[0];
  f.pitch_mean_prom = a[1];
  f.pitch_peak_prom = a[2];
  f.int_auc_prom = a[3];
  f.int_mean_prom = a[4];
  f.int_peak_prom = a[5];
  f.son_auc_prom = a[6];
  f.son_mean_prom = a[7];
  f.son_peak_prom = a[8];
  f.duration_s = a[9];
  return f;
}

namespace {

// Shared frame grid: centres every hop, the first one half a short window
// into the clip.
struct FrameGrid {
  size_t hop = 0;
  size_t short_window = 0;
  size_t pitch_window = 0;
  size_t first_centre = 0;
  size_t count = 0;
  double hop_s = 0.0;
  double start_s = 0.0;
};

FrameGrid MakeGrid(const AudioClip& clip) {
  if (clip.sample_rate_hz <= 0) throw InvalidArgument("invalid sample rate");
  const double rate = clip.sample_rate_hz;
  FrameGrid g;
  g.hop = static_cast<size_t>(std::lround(kFrameHopS * rate));
  g.short_window = static_cast<size_t>(std::lround(kShortWindowS * rate));
  g.pitch_window = static_cast<size_t>(std::lround(kPitchWindowS * rate));
  g.first_centre = g.short_window / 2;
  const size_t n = clip.samples.size();
  g.count = n >= g.short_window ? 1 + (n - g.short_window) / g.hop : 0;
  g.hop_s = static_cast<double>(g.hop) / rate;
  g.start_s = clip.origin_s + static_cast<double>(g.first_centre) / rate;
  return g;
}

Track EmptyTrack(const FrameGrid& g) {
  Track t;
  t.hop_s = g.hop_s;
  t.start_s = g.start_s;
  return t;
}

std::vector<double> HannWindow(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                (static_cast<double>(i) + 0.5) /
                                static_cast<double>(n));
  }
  return w;
}

double WeightedRms(const double* x, const std::vector<double>& w) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    num += w[i] * x[i] * x[i];
    den += w[i];
  }
  return std::sqrt(num / den);
}

struct PitchEstimate {
  bool voiced = false;
  double hz = 0.0;
};

PitchEstimate EstimatePitch(const std::vector<double>& frame, int rate) {
  const size_t m = frame.size();
  std::vector<double> x(frame);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(m);
  for (double& v : x) v -= mean;

  std::vector<double> cum(m + 1, 0.0);  // prefix sums of x^2
  for (size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + x[i] * x[i];
  if (cum[m] < 1e-12) return {};

  const auto lag_min =
      static_cast<size_t>(std::ceil(rate / kPitchCeilingHz));
  const auto lag_max = std::min(
      static_cast<size_t>(std::floor(rate / kPitchFloorHz)), m / 2);
  if (lag_max <= lag_min + 1) return {};

  std::vector<double> r(lag_max + 2, 0.0);
  double best = -1.0;
  for (size_t lag = lag_min; lag <= lag_max + 1 && lag < m; ++lag) {
    const size_t len = m - lag;
    double acc = 0.0;
    for (size_t n = 0; n < len; ++n) acc += x[n] * x[n + lag];
    const double e0 = cum[len];
    const double e1 = cum[m] - cum[lag];
    const double den = std::sqrt(e0 * e1);
    r[lag] = den > 0.0 ? acc / den : 0.0;
    if (lag <= lag_max) best = std::max(best, r[lag]);
  }
  if (best < kVoicingThreshold) return {};

  // Earliest peak close to the global maximum; this avoids sub-octave
  // errors where the correlation at twice the period is almost as high.
  size_t chosen = 0;
  for (size_t lag = lag_min; lag <= lag_max; ++lag) {
    const bool left_ok = lag == lag_min || r[lag] >= r[lag - 1];
    const bool right_ok = r[lag] >= r[lag + 1];
    if (left_ok && right_ok && r[lag] >= 0.9 * best) {
      chosen = lag;
      break;
    }
  }
  if (chosen == 0) return {};

  double refined = static_cast<double>(chosen);
  if (chosen > lag_min) {
    const double a = r[chosen - 1];
    const double b = r[chosen];
    const double c = r[chosen + 1];
    const double curvature = a - 2.0 * b + c;
    if (curvature < 0.0) {
      refined += std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
    }
  }
  const double hz = std::clamp(rate / refined, kPitchFloorHz, kPitchCeilingHz);
  return {true, hz};
}

}  // namespace

Track IntensityContour(const AudioClip& clip) {
  const FrameGrid g = MakeGrid(clip);
  Track track = EmptyTrack(g);
  const std::vector<double> w = HannWindow(g.short_window);
  track.frames.resize(g.count);
  for (size_t i = 0; i < g.count; ++i) {
    const double rms = WeightedRms(&clip.samples[i * g.hop], w);
    const double db =
        20.0 * std::log10(std::max(rms, 1e-6) / kIntensityReference);
    track.frames[i] = {std::max(db, 0.0), true};
  }
  return track;
}

Track PitchContour(const AudioClip& clip) {
  const FrameGrid g = MakeGrid(clip);
  Track track = EmptyTrack(g);
  if (clip.samples.size() < g.pitch_window) return track;
  track.frames.resize(g.count);
  const auto n = static_cast<std::ptrdiff_t>(clip.samples.size());
  const auto half = static_cast<std::ptrdiff_t>(g.pitch_window / 2);
  std::vector<double> frame(g.pitch_window);
  for (size_t i = 0; i < g.count; ++i) {
    const auto centre = static_cast<std::ptrdiff_t>(g.first_centre + i * g.hop);
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(frame.size());
         ++k) {
      const std::ptrdiff_t at = centre - half + k;
      frame[static_cast<size_t>(k)] =
          (at >= 0 && at < n) ? clip.samples[static_cast<size_t>(at)] : 0.0;
    }
    const PitchEstimate est = EstimatePitch(frame, clip.sample_rate_hz);
    track.frames[i] = {est.voiced ? est.hz : 0.0, est.voiced};
  }
  return track;
}

Track SonorityContour(const AudioClip& clip) {
  const FrameGrid g = MakeGrid(clip);
  Track track = EmptyTrack(g);
  const size_t win = g.short_window;
  const std::vector<double> w = HannWindow(win);
  const double bin_hz = static_cast<double>(clip.sample_rate_hz) / win;
  Eigen::FFT<double> fft;
  std::vector<double> windowed(win);
  std::vector<std::complex<double>> spectrum;
  track.frames.resize(g.count);
  for (size_t i = 0; i < g.count; ++i) {
    const double* x = &clip.samples[i * g.hop];
    for (size_t k = 0; k < win; ++k) windowed[k] = w[k] * x[k];
    fft.fwd(spectrum, windowed);
    double band = 0.0;
    double total = 0.0;
    for (size_t k = 0; k <= win / 2; ++k) {
      const double e = std::norm(spectrum[k]);
      total += e;
      const double f = static_cast<double>(k) * bin_hz;
      if (f >= kSonorityBandLowHz && f <= kSonorityBandHighHz) band += e;
    }
    const double fraction = total > 0.0 ? band / total : 0.0;
    track.frames[i] = {WeightedRms(x, w) * fraction, true};
  }
  return track;
}

ProsodyTracks ComputeProsody(const AudioClip& clip) {
  return {PitchContour(clip), IntensityContour(clip), SonorityContour(clip)};
}

namespace {

struct Stats {
  double auc = 0.0;  // duration-normalized
  double mean = 0.0;
  double peak = 0.0;
};

std::vector<size_t> SelectFrames(const Track& track, double t0, double t1,
                                 bool voiced_only) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < track.frames.size(); ++i) {
    const double t = track.TimeAt(i);
    if (t < t0 || t >= t1) continue;
    if (voiced_only && !track.frames[i].voiced) continue;
    idx.push_back(i);
  }
  return idx;
}

Stats Summarize(const Track& track, const std::vector<size_t>& idx) {
  Stats s;
  double sum = 0.0;
  s.peak = track.frames[idx.front()].value;
  for (size_t i : idx) {
    sum += track.frames[i].value;
    s.peak = std::max(s.peak, track.frames[i].value);
  }
  s.mean = sum / static_cast<double>(idx.size());
  double area = 0.0;
  double span = 0.0;
  for (size_t k = 1; k < idx.size(); ++k) {
    if (idx[k] != idx[k - 1] + 1) continue;
    area += 0.5 *
            (track.frames[idx[k - 1]].value + track.frames[idx[k]].value) *
            track.hop_s;
    span += track.hop_s;
  }
  s.auc = span > 0.0 ? area / span : s.mean;
  return s;
}

double WordMean(const Track& track, double t0, double t1, bool voiced_only) {
  const auto idx = SelectFrames(track, t0, t1, voiced_only);
  if (idx.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i : idx) sum += track.frames[i].value;
  return sum / static_cast<double>(idx.size());
}

size_t NearestFrame(const Track& track, double t) {
  const double pos = std::round((t - track.start_s) / track.hop_s);
  const double last = static_cast<double>(track.frames.size() - 1);
  return static_cast<size_t>(std::clamp(pos, 0.0, last));
}

}  // namespace

FeatureResult ComputeNucleusFeatures(const ProsodyTracks& tracks,
                                     double word_t0, double word_t1,
                                     const NucleusSpan& nucleus) {
  if (!(nucleus.t0 < nucleus.t1)) {
    throw InvalidArgument("nucleus must have positive duration");
  }
  if (nucleus.t0 < word_t0 - kTimeTolerance ||
      nucleus.t1 > word_t1 + kTimeTolerance) {
    throw InvalidArgument("nucleus outside the word");
  }
  FeatureResult result;
  NucleusFeatures& f = result.features;
  f.duration_s = nucleus.t1 - nucleus.t0;
  const double mid = 0.5 * (nucleus.t0 + nucleus.t1);

  // Intensity and sonority: every frame counts.
  auto energy_like = [&](const Track& track, uint32_t zero_flag, double& auc,
                         double& mean, double& peak) {
    const double word_mean = WordMean(track, word_t0, word_t1, false);
    if (!(word_mean > 0.0) || track.frames.empty()) {
      result.quality |= zero_flag;
      auc = mean = peak = 1.0;
      return;
    }
    auto idx = SelectFrames(track, nucleus.t0, nucleus.t1, false);
    if (idx.empty()) {
      result.quality |= kNoFrameInNucleus;
      idx.push_back(NearestFrame(track, mid));
    }
    const Stats s = Summarize(track, idx);
    auc = s.auc / word_mean;
    mean = s.mean / word_mean;
    peak = s.peak / word_mean;
  };
  energy_like(tracks.intensity, kZeroIntensityMean, f.int_auc_prom,
              f.int_mean_prom, f.int_peak_prom);
  energy_like(tracks.sonority, kZeroSonorityMean, f.son_auc_prom,
              f.son_mean_prom, f.son_peak_prom);

  const double pitch_mean = WordMean(tracks.pitch, word_t0, word_t1, true);
  if (!(pitch_mean > 0.0)) {
    result.quality |= kNoVoicedPitchInWord;
    f.pitch_auc_prom = f.pitch_mean_prom = f.pitch_peak_prom = 1.0;
  } else {
    const auto idx = SelectFrames(tracks.pitch, nucleus.t0, nucleus.t1, true);
    if (idx.empty()) {
      result.quality |= kUnvoicedNucleus;
      f.pitch_auc_prom = f.pitch_mean_prom = f.pitch_peak_prom = 0.0;
    } else {
      const Stats s = Summarize(tracks.pitch, idx);
      f.pitch_auc_prom = s.auc / pitch_mean;
      f.pitch_mean_prom = s.mean / pitch_mean;
      f.pitch_peak_prom = s.peak / pitch_mean;
    }
  }
  return result;
}

std::vector<FeatureResult> ComputeWordFeatures(const ProsodyTracks& tracks,
                                               const WordRecord& word) {
  std::vector<FeatureResult> out;
  out.reserve(word.nuclei.size());
  for (const NucleusSpan& n : word.nuclei) {
    out.push_back(ComputeNucleusFeatures(tracks, word.t0, word.t1, n));
  }
  return out;
}

}  // namespace stresskit

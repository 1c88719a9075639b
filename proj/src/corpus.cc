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

#include "stresskit/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "stresskit/error.h"

namespace stresskit {
namespace {

std::u32string DecodeUtf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = c;
    if (c >= 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    }
    if (extra > 0 && i + extra >= s.size()) {
      // Truncated sequence: pass the lead byte through as U+FFFD.
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    for (int k = 1; k <= extra; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += 1 + extra;
  }
  return out;
}

std::string EncodeUtf8(std::u32string_view s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

char32_t LowerCase(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x1C4 || c == 0x1C5) return 0x1C6;  // DŽ, Dž
  if (c == 0x1C7 || c == 0x1C8) return 0x1C9;  // LJ, Lj
  if (c == 0x1CA || c == 0x1CB) return 0x1CC;  // NJ, Nj
  return c;
}

constexpr char32_t kPalatalLateral = 0x28E;  // ʎ
constexpr char32_t kPalatalNasal = 0x272;    // ɲ
constexpr char32_t kDzhLigature = 0x1C6;     // ǆ
constexpr char32_t kZCaron = 0x17E;          // ž

std::string Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<double> StressMarks(const Tier& tier) {
  std::vector<double> marks;
  if (tier.kind == TierKind::kInterval) {
    for (const auto& iv : tier.intervals) {
      if (!Trim(iv.text).empty()) marks.push_back(0.5 * (iv.xmin + iv.xmax));
    }
  } else {
    for (const auto& p : tier.points) {
      if (!Trim(p.text).empty()) marks.push_back(p.time);
    }
  }
  return marks;
}

const Tier& RequireIntervalTier(const TextGridDoc& doc,
                                const std::string& name) {
  const Tier* tier = doc.FindTier(name);
  if (tier == nullptr) {
    throw InvalidArgument("missing tier \"" + name + "\"");
  }
  if (tier->kind != TierKind::kInterval) {
    throw InvalidArgument("tier \"" + name + "\" is not an interval tier");
  }
  return *tier;
}

std::string PaddedIndex(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return buf;
}

// --- speaker split ----------------------------------------------------------

struct SpeakerStats {
  std::string id;
  size_t words = 0;
  size_t female = 0;
  size_t male = 0;
};

double Imbalance(size_t female, size_t male) {
  if (female + male == 0) return 0.5;
  return std::fabs(static_cast<double>(female) /
                       static_cast<double>(female + male) -
                   0.5);
}

struct Assignment {
  std::vector<bool> in_test;
  size_t test_words = 0;
  size_t female = 0;
  size_t male = 0;
};

// Lexicographic quality: feasibility first, then gender balance, then share
// error. Smaller is better.
std::tuple<int, double, double> Score(const Assignment& a, size_t total,
                                      double fraction) {
  const double share =
      static_cast<double>(a.test_words) / static_cast<double>(total);
  const double err = std::fabs(share - fraction);
  const bool feasible = err <= 0.05 + 1e-12;
  return {feasible ? 0 : 1, feasible ? Imbalance(a.female, a.male) : err, err};
}

}  // namespace

std::string_view GenderCode(Gender g) {
  switch (g) {
    case Gender::kFemale:
      return "F";
    case Gender::kMale:
      return "M";
    case Gender::kUnknown:
      break;
  }
  return "unknown";
}

Gender ParseGender(std::string_view code) {
  if (code == "F" || code == "f" || code == "female") return Gender::kFemale;
  if (code == "M" || code == "m" || code == "male") return Gender::kMale;
  return Gender::kUnknown;
}

void ValidateWordRecord(const WordRecord& w) {
  const std::string where = "word " + w.word_id + ": ";
  if (!(w.t0 < w.t1)) throw InvalidArgument(where + "t0 >= t1");
  if (w.nuclei.size() < 2) {
    throw InvalidArgument(where + "fewer than two nuclei");
  }
  for (size_t i = 0; i < w.nuclei.size(); ++i) {
    const NucleusSpan& n = w.nuclei[i];
    if (!(n.t0 < n.t1)) throw InvalidArgument(where + "empty nucleus");
    if (n.syllable_index != static_cast<int>(i)) {
      throw InvalidArgument(where + "syllable_index does not match position");
    }
    if (n.t0 < w.t0 - kTimeTolerance || n.t1 > w.t1 + kTimeTolerance) {
      throw InvalidArgument(where + "nucleus outside the word");
    }
    if (i > 0 && n.t0 < w.nuclei[i - 1].t0) {
      throw InvalidArgument(where + "nuclei not sorted");
    }
  }
  if (w.stress_index &&
      (*w.stress_index < 0 ||
       *w.stress_index >= static_cast<int>(w.nuclei.size()))) {
    throw InvalidArgument(where + "stress_index out of range");
  }
}

Manifest BuildManifest(const TextGridDoc& doc, const std::string& audio_path,
                       const ManifestOptions& options) {
  const Tier& words = RequireIntervalTier(doc, options.word_tier);
  const Tier& nuclei = RequireIntervalTier(doc, options.nucleus_tier);
  std::vector<double> marks;
  if (options.stress_tier) {
    const Tier* stress = doc.FindTier(*options.stress_tier);
    if (stress == nullptr) {
      throw InvalidArgument("missing tier \"" + *options.stress_tier + "\"");
    }
    marks = StressMarks(*stress);
  }
  std::string prefix = options.id_prefix;
  if (prefix.empty()) {
    prefix = std::filesystem::path(audio_path).stem().string() + "_";
  }

  Manifest out;
  size_t word_counter = 0;
  for (const Interval& wiv : words.intervals) {
    const std::string text = Trim(wiv.text);
    if (text.empty()) continue;
    const std::string word_id = prefix + PaddedIndex(word_counter++);
    auto reject = [&](std::string reason) {
      out.rejects.push_back(
          {word_id, text, audio_path, wiv.xmin, wiv.xmax, std::move(reason)});
    };

    std::vector<const Interval*> inside;
    for (const Interval& niv : nuclei.intervals) {
      if (Trim(niv.text).empty()) continue;
      const double mid = 0.5 * (niv.xmin + niv.xmax);
      if (mid >= wiv.xmin && mid < wiv.xmax) inside.push_back(&niv);
    }
    if (inside.size() < 2) continue;  // monosyllabic or unaligned

    bool flagged = false;
    bool crosses = false;
    for (const Interval* n : inside) {
      if (n->text.find_first_of(options.error_symbols) != std::string::npos) {
        flagged = true;
      }
      if (n->xmin < wiv.xmin - kTimeTolerance ||
          n->xmax > wiv.xmax + kTimeTolerance) {
        crosses = true;
      }
    }
    if (flagged) {
      reject("annotator error symbol on a nucleus");
      continue;
    }
    if (crosses) {
      reject("nucleus crosses the word boundary");
      continue;
    }

    WordRecord rec;
    rec.word_id = word_id;
    rec.text = text;
    rec.audio_path = audio_path;
    rec.t0 = wiv.xmin;
    rec.t1 = wiv.xmax;
    rec.speaker_id = options.speaker_id;
    rec.gender = options.gender;
    rec.dataset = options.dataset;
    for (size_t i = 0; i < inside.size(); ++i) {
      rec.nuclei.push_back(
          {inside[i]->xmin, inside[i]->xmax, static_cast<int>(i)});
    }
    if (options.stress_tier) {
      std::vector<int> marked;
      for (size_t i = 0; i < rec.nuclei.size(); ++i) {
        const NucleusSpan& n = rec.nuclei[i];
        const bool hit = std::any_of(marks.begin(), marks.end(), [&](double t) {
          return t >= n.t0 - kTimeTolerance && t <= n.t1 + kTimeTolerance;
        });
        if (hit) marked.push_back(static_cast<int>(i));
      }
      if (marked.size() != 1) {
        reject("stress marked on " + std::to_string(marked.size()) +
               " nuclei");
        continue;
      }
      rec.stress_index = marked.front();
    }
    try {
      ValidateWordRecord(rec);
    } catch (const InvalidArgument& e) {
      reject(e.what());
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string NormalizeDigraphs(std::string_view word) {
  const std::u32string in = DecodeUtf8(word);
  std::u32string out;
  out.reserve(in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    const char32_t c = in[i];
    const char32_t next = i + 1 < in.size() ? in[i + 1] : 0;
    if (c == U'l' && next == U'j') {
      out.push_back(kPalatalLateral);
      ++i;
    } else if (c == U'n' && next == U'j') {
      out.push_back(kPalatalNasal);
      ++i;
    } else if (c == U'd' && next == kZCaron) {
      out.push_back(kDzhLigature);
      ++i;
    } else if (c == 0x1C9) {
      out.push_back(kPalatalLateral);
    } else if (c == 0x1CC) {
      out.push_back(kPalatalNasal);
    } else {
      out.push_back(c);
    }
  }
  return EncodeUtf8(out);
}

std::string CaseFold(std::string_view word) {
  std::u32string cps = DecodeUtf8(word);
  for (char32_t& c : cps) c = LowerCase(c);
  return EncodeUtf8(cps);
}

std::string WordForm(std::string_view word) {
  return NormalizeDigraphs(CaseFold(Trim(word)));
}

size_t Utf8Length(std::string_view text) { return DecodeUtf8(text).size(); }

double GenderImbalance(const std::vector<WordRecord>& records) {
  size_t female = 0;
  size_t male = 0;
  for (const auto& r : records) {
    if (r.gender == Gender::kFemale) ++female;
    if (r.gender == Gender::kMale) ++male;
  }
  return Imbalance(female, male);
}

SpeakerSplit SplitSpeakers(const std::vector<WordRecord>& records,
                           double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie in (0, 1)");
  }
  std::map<std::string, SpeakerStats> by_id;
  for (const auto& r : records) {
    SpeakerStats& s = by_id[r.speaker_id];
    s.id = r.speaker_id;
    ++s.words;
    if (r.gender == Gender::kFemale) ++s.female;
    if (r.gender == Gender::kMale) ++s.male;
  }
  if (by_id.size() < 2) {
    throw InvalidArgument("speaker split needs at least two speakers, got " +
                          std::to_string(by_id.size()));
  }
  std::vector<SpeakerStats> speakers;
  for (auto& [id, stats] : by_id) speakers.push_back(stats);
  const size_t n = speakers.size();
  const size_t total = records.size();

  auto make = [&](const std::vector<bool>& in_test) {
    Assignment a;
    a.in_test = in_test;
    for (size_t i = 0; i < n; ++i) {
      if (!in_test[i]) continue;
      a.test_words += speakers[i].words;
      a.female += speakers[i].female;
      a.male += speakers[i].male;
    }
    return a;
  };

  // Random restarts: shuffle the speakers and take the prefix whose word
  // share is closest to the target, keeping both sides non-empty.
  std::mt19937_64 rng(seed);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double target = test_fraction * static_cast<double>(total);
  Assignment best;
  bool have_best = false;
  for (int trial = 0; trial < 1000; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> in_test(n, false);
    size_t acc = 0;
    size_t best_len = 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (size_t len = 1; len < n; ++len) {
      acc += speakers[order[len - 1]].words;
      const double err = std::fabs(static_cast<double>(acc) - target);
      if (err < best_err) {
        best_err = err;
        best_len = len;
      }
      if (static_cast<double>(acc) >= target) break;
    }
    for (size_t k = 0; k < best_len; ++k) in_test[order[k]] = true;
    Assignment cand = make(in_test);
    if (!have_best ||
        Score(cand, total, test_fraction) < Score(best, total, test_fraction)) {
      best = std::move(cand);
      have_best = true;
    }
  }

  // Local search over single moves and pairwise swaps.
  auto sides_ok = [n](const std::vector<bool>& in_test) {
    const auto k = std::count(in_test.begin(), in_test.end(), true);
    return k >= 1 && static_cast<size_t>(k) < n;
  };
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i; j < n; ++j) {
        std::vector<bool> trial = best.in_test;
        if (i == j) {
          trial[i] = !trial[i];
        } else {
          if (trial[i] == trial[j]) continue;
          trial[i] = !trial[i];
          trial[j] = !trial[j];
        }
        if (!sides_ok(trial)) continue;
        Assignment cand = make(trial);
        if (Score(cand, total, test_fraction) <
            Score(best, total, test_fraction)) {
          best = std::move(cand);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }

  SpeakerSplit split;
  std::map<std::string, bool> test_speakers;
  for (size_t i = 0; i < n; ++i) test_speakers[speakers[i].id] = best.in_test[i];
  for (const auto& r : records) {
    (test_speakers[r.speaker_id] ? split.test : split.train).push_back(r);
  }
  return split;
}

}  // namespace stresskit

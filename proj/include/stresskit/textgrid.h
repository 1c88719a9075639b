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

// Praat TextGrid documents: reading (long and short text forms, UTF-8 or
// UTF-16) and writing (long form).

#ifndef STRESSKIT_TEXTGRID_H_
#define STRESSKIT_TEXTGRID_H_

#include <string>
#include <string_view>
#include <vector>

namespace stresskit {

// Absolute tolerance used when comparing times read from text.
inline constexpr double kTimeTolerance = 1e-9;

struct Interval {
  double xmin = 0.0;
  double xmax = 0.0;
  std::string text;
};

struct Point {
  double time = 0.0;
  std::string text;
};

enum class TierKind { kInterval, kPoint };

struct Tier {
  std::string name;
  TierKind kind = TierKind::kInterval;
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<Interval> intervals;  // kInterval only
  std::vector<Point> points;        // kPoint only
};

struct TextGridDoc {
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<Tier> tiers;

  // Returns nullptr when no tier has this name.
  const Tier* FindTier(std::string_view name) const;
};

// Parses a TextGrid in long ("ooTextFile") or short text form. The input
// may be UTF-8 (with or without BOM) or UTF-16 (LE/BE, BOM or BOM-less).
// Throws ParseError carrying the offending line number.
TextGridDoc ParseTextGrid(std::string_view bytes);

// Reads and parses a file. Throws Error when the file cannot be opened.
TextGridDoc ReadTextGridFile(const std::string& path);

// Emits the long text form. Throws InvalidArgument when `doc` violates its
// invariants (see ValidateTextGrid).
std::string SerializeTextGrid(const TextGridDoc& doc);

void WriteTextGridFile(const std::string& path, const TextGridDoc& doc);

// Checks xmin <= xmax for the document, each tier and each interval, that
// tiers lie within the document bounds, that interval tiers are sorted and
// non-overlapping, and that point tiers are sorted. Throws InvalidArgument.
void ValidateTextGrid(const TextGridDoc& doc);

// Same tier order, names, kinds, labels, and all times within kTimeTolerance.
bool StructurallyEqual(const TextGridDoc& a, const TextGridDoc& b);

// Decodes UTF-16 (either byte order) or BOM-prefixed UTF-8 to plain UTF-8.
std::string DecodeToUtf8(std::string_view bytes);

}  // namespace stresskit

#endif  // STRESSKIT_TEXTGRID_H_

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

#include "stresskit/textgrid.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <variant>

#include "stresskit/error.h"

namespace stresskit {
namespace {

void AppendUtf8(std::string& out, char32_t cp) {
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

std::string Utf16ToUtf8(std::string_view bytes, bool big_endian) {
  std::string out;
  out.reserve(bytes.size() / 2);
  auto unit = [&](size_t i) -> char16_t {
    const auto hi = static_cast<unsigned char>(bytes[big_endian ? i : i + 1]);
    const auto lo = static_cast<unsigned char>(bytes[big_endian ? i + 1 : i]);
    return static_cast<char16_t>((hi << 8) | lo);
  };
  for (size_t i = 0; i + 1 < bytes.size(); i += 2) {
    char32_t cp = unit(i);
    if (cp >= 0xD800 && cp <= 0xDBFF && i + 3 < bytes.size()) {
      const char32_t low = unit(i + 2);
      if (low >= 0xDC00 && low <= 0xDFFF) {
        cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
        i += 2;
      }
    }
    AppendUtf8(out, cp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer. Praat's text format is free-form: only numbers, quoted strings
// and <exists>/<absent> flags carry data. Labels such as "xmin =", bracketed
// indices and "!" comments are skipped.

struct Token {
  enum class Kind { kNumber, kString, kFlag, kEnd } kind = Kind::kEnd;
  double number = 0.0;
  std::string text;
  bool flag = false;
  int line = 0;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  Token Next() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' ||
                 c == '\v') {
        ++pos_;
      } else if (c == '!') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '"') {
        return ReadString();
      } else if (c == '[') {
        while (pos_ < text_.size() && text_[pos_] != ']') {
          if (text_[pos_] == '\n') ++line_;
          ++pos_;
        }
        if (pos_ < text_.size()) ++pos_;
      } else {
        const size_t start = pos_;
        while (pos_ < text_.size() && !IsSpace(text_[pos_]) &&
               text_[pos_] != '"' && text_[pos_] != '[') {
          ++pos_;
        }
        std::string_view word = text_.substr(start, pos_ - start);
        if (word == "<exists>" || word == "<absent>") {
          Token t;
          t.kind = Token::Kind::kFlag;
          t.flag = word == "<exists>";
          t.line = line_;
          return t;
        }
        if (auto value = ParseNumber(word)) {
          Token t;
          t.kind = Token::Kind::kNumber;
          t.number = *value;
          t.text = std::string(word);
          t.line = line_;
          return t;
        }
      }
    }
    Token end;
    end.line = line_;
    return end;
  }

  int line() const { return line_; }

 private:
  static bool IsSpace(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  }

  static std::optional<double> ParseNumber(std::string_view word) {
    if (word.empty()) return std::nullopt;
    const char c = word.front();
    if (!(c == '-' || c == '+' || c == '.' || (c >= '0' && c <= '9'))) {
      return std::nullopt;
    }
    if (c == '+') word.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(word.data(), word.data() + word.size(), value);
    if (ec != std::errc() || ptr != word.data() + word.size()) {
      return std::nullopt;
    }
    return value;
  }

  Token ReadString() {
    Token t;
    t.kind = Token::Kind::kString;
    t.line = line_;
    ++pos_;  // opening quote
    while (true) {
      if (pos_ >= text_.size()) {
        throw ParseError("unterminated string", t.line);
      }
      const char c = text_[pos_++];
      if (c == '"') {
        if (pos_ < text_.size() && text_[pos_] == '"') {
          t.text.push_back('"');
          ++pos_;
          continue;
        }
        return t;
      }
      if (c == '\n') ++line_;
      t.text.push_back(c);
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(text) {}

  TextGridDoc Parse() {
    const Token file_type = Expect(Token::Kind::kString, "file type");
    if (file_type.text.rfind("ooTextFile", 0) != 0) {
      throw ParseError("malformed header: expected \"ooTextFile\", got \"" +
                           file_type.text + "\"",
                       file_type.line);
    }
    const Token object_class = Expect(Token::Kind::kString, "object class");
    if (object_class.text != "TextGrid") {
      throw ParseError("malformed header: object class is \"" +
                           object_class.text + "\", not \"TextGrid\"",
                       object_class.line);
    }
    TextGridDoc doc;
    doc.xmin = Expect(Token::Kind::kNumber, "xmin").number;
    const Token xmax = Expect(Token::Kind::kNumber, "xmax");
    doc.xmax = xmax.number;
    if (doc.xmin > doc.xmax) {
      throw ParseError("malformed header: xmin > xmax", xmax.line);
    }
    const Token exists = Expect(Token::Kind::kFlag, "tiers flag");
    size_t declared = 0;
    if (exists.flag) {
      declared = ExpectCount("tier count");
    }
    for (size_t k = 0; k < declared; ++k) {
      Token cls = tokens_.Next();
      if (cls.kind == Token::Kind::kEnd) {
        throw ParseError("tier-count mismatch: header declares " +
                             std::to_string(declared) + " tiers, found " +
                             std::to_string(k),
                         cls.line);
      }
      if (cls.kind != Token::Kind::kString) {
        throw ParseError("expected tier class string", cls.line);
      }
      doc.tiers.push_back(ParseTier(cls, doc));
    }
    const Token extra = tokens_.Next();
    if (extra.kind != Token::Kind::kEnd) {
      throw ParseError("tier-count mismatch: data after the " +
                           std::to_string(declared) + " declared tiers",
                       extra.line);
    }
    return doc;
  }

 private:
  Token Expect(Token::Kind kind, const char* what) {
    Token t = tokens_.Next();
    if (t.kind == Token::Kind::kEnd) {
      throw ParseError(std::string("unexpected end of file, expected ") + what,
                       t.line);
    }
    if (t.kind != kind) {
      throw ParseError(std::string("unexpected token, expected ") + what,
                       t.line);
    }
    return t;
  }

  size_t ExpectCount(const char* what) {
    const Token t = Expect(Token::Kind::kNumber, what);
    if (t.number < 0 || t.number != std::floor(t.number)) {
      throw ParseError(std::string("invalid ") + what + " '" + t.text + "'",
                       t.line);
    }
    return static_cast<size_t>(t.number);
  }

  Tier ParseTier(const Token& cls, const TextGridDoc& doc) {
    Tier tier;
    if (cls.text == "IntervalTier") {
      tier.kind = TierKind::kInterval;
    } else if (cls.text == "TextTier" || cls.text == "PointTier") {
      tier.kind = TierKind::kPoint;
    } else {
      throw ParseError("unknown tier class \"" + cls.text + "\"", cls.line);
    }
    tier.name = Expect(Token::Kind::kString, "tier name").text;
    tier.xmin = Expect(Token::Kind::kNumber, "tier xmin").number;
    const Token xmax = Expect(Token::Kind::kNumber, "tier xmax");
    tier.xmax = xmax.number;
    if (tier.xmin > tier.xmax ||
        tier.xmin < doc.xmin - kTimeTolerance ||
        tier.xmax > doc.xmax + kTimeTolerance) {
      throw ParseError("tier \"" + tier.name + "\" bounds outside the grid",
                       xmax.line);
    }
    const size_t count = ExpectCount("entry count");
    if (tier.kind == TierKind::kInterval) {
      tier.intervals.reserve(count);
      for (size_t i = 0; i < count; ++i) {
        Interval iv;
        const Token lo = Expect(Token::Kind::kNumber, "interval xmin");
        iv.xmin = lo.number;
        iv.xmax = Expect(Token::Kind::kNumber, "interval xmax").number;
        iv.text = Expect(Token::Kind::kString, "interval text").text;
        if (iv.xmin > iv.xmax) {
          throw ParseError("interval xmin > xmax in tier \"" + tier.name + "\"",
                           lo.line);
        }
        if (!tier.intervals.empty() &&
            iv.xmin < tier.intervals.back().xmax - kTimeTolerance) {
          throw ParseError(
              "non-monotone intervals in tier \"" + tier.name + "\"", lo.line);
        }
        if (iv.xmin < tier.xmin - kTimeTolerance ||
            iv.xmax > tier.xmax + kTimeTolerance) {
          throw ParseError("interval outside tier \"" + tier.name + "\"",
                           lo.line);
        }
        tier.intervals.push_back(std::move(iv));
      }
    } else {
      tier.points.reserve(count);
      for (size_t i = 0; i < count; ++i) {
        Point p;
        const Token time = Expect(Token::Kind::kNumber, "point time");
        p.time = time.number;
        p.text = Expect(Token::Kind::kString, "point mark").text;
        if (!tier.points.empty() &&
            p.time < tier.points.back().time - kTimeTolerance) {
          throw ParseError("non-monotone points in tier \"" + tier.name + "\"",
                           time.line);
        }
        tier.points.push_back(std::move(p));
      }
    }
    return tier;
  }

  Tokenizer tokens_;
};

std::string FormatNumber(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string Quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool Near(double a, double b) { return std::fabs(a - b) <= kTimeTolerance; }

}  // namespace

const Tier* TextGridDoc::FindTier(std::string_view name) const {
  for (const auto& tier : tiers) {
    if (tier.name == name) return &tier;
  }
  return nullptr;
}

std::string DecodeToUtf8(std::string_view bytes) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
      static_cast<unsigned char>(bytes[1]) == 0xBB &&
      static_cast<unsigned char>(bytes[2]) == 0xBF) {
    return std::string(bytes.substr(3));
  }
  if (bytes.size() >= 2) {
    const auto b0 = static_cast<unsigned char>(bytes[0]);
    const auto b1 = static_cast<unsigned char>(bytes[1]);
    if (b0 == 0xFF && b1 == 0xFE) return Utf16ToUtf8(bytes.substr(2), false);
    if (b0 == 0xFE && b1 == 0xFF) return Utf16ToUtf8(bytes.substr(2), true);
    // BOM-less UTF-16: the header is ASCII, so one byte of each pair is 0.
    if (b0 != 0 && b1 == 0) return Utf16ToUtf8(bytes, false);
    if (b0 == 0 && b1 != 0) return Utf16ToUtf8(bytes, true);
  }
  return std::string(bytes);
}

TextGridDoc ParseTextGrid(std::string_view bytes) {
  const std::string text = DecodeToUtf8(bytes);
  return Parser(text).Parse();
}

TextGridDoc ReadTextGridFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open TextGrid file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseTextGrid(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void ValidateTextGrid(const TextGridDoc& doc) {
  if (!(doc.xmin <= doc.xmax)) {
    throw InvalidArgument("TextGrid xmin > xmax");
  }
  for (const auto& tier : doc.tiers) {
    const std::string where = "tier \"" + tier.name + "\": ";
    if (!(tier.xmin <= tier.xmax)) {
      throw InvalidArgument(where + "xmin > xmax");
    }
    if (tier.xmin < doc.xmin - kTimeTolerance ||
        tier.xmax > doc.xmax + kTimeTolerance) {
      throw InvalidArgument(where + "bounds outside the grid");
    }
    if (tier.kind == TierKind::kInterval) {
      if (!tier.points.empty()) {
        throw InvalidArgument(where + "interval tier holds points");
      }
      for (size_t i = 0; i < tier.intervals.size(); ++i) {
        const auto& iv = tier.intervals[i];
        if (!(iv.xmin <= iv.xmax)) {
          throw InvalidArgument(where + "interval xmin > xmax");
        }
        if (iv.xmin < tier.xmin - kTimeTolerance ||
            iv.xmax > tier.xmax + kTimeTolerance) {
          throw InvalidArgument(where + "interval outside tier bounds");
        }
        if (i > 0 && iv.xmin < tier.intervals[i - 1].xmax - kTimeTolerance) {
          throw InvalidArgument(where + "overlapping or unsorted intervals");
        }
      }
    } else {
      if (!tier.intervals.empty()) {
        throw InvalidArgument(where + "point tier holds intervals");
      }
      for (size_t i = 1; i < tier.points.size(); ++i) {
        if (tier.points[i].time < tier.points[i - 1].time - kTimeTolerance) {
          throw InvalidArgument(where + "unsorted points");
        }
      }
    }
  }
}

std::string SerializeTextGrid(const TextGridDoc& doc) {
  ValidateTextGrid(doc);
  std::string out;
  auto line = [&out](int indent, std::string_view body) {
    out.append(static_cast<size_t>(indent), ' ');
    out.append(body);
    out.push_back('\n');
  };
  line(0, "File type = \"ooTextFile\"");
  line(0, "Object class = \"TextGrid\"");
  line(0, "");
  line(0, "xmin = " + FormatNumber(doc.xmin) + " ");
  line(0, "xmax = " + FormatNumber(doc.xmax) + " ");
  line(0, "tiers? <exists> ");
  line(0, "size = " + std::to_string(doc.tiers.size()) + " ");
  line(0, "item []: ");
  for (size_t k = 0; k < doc.tiers.size(); ++k) {
    const Tier& tier = doc.tiers[k];
    const bool intervals = tier.kind == TierKind::kInterval;
    line(4, "item [" + std::to_string(k + 1) + "]:");
    line(8, std::string("class = ") +
                (intervals ? "\"IntervalTier\"" : "\"TextTier\"") + " ");
    line(8, "name = " + Quote(tier.name) + " ");
    line(8, "xmin = " + FormatNumber(tier.xmin) + " ");
    line(8, "xmax = " + FormatNumber(tier.xmax) + " ");
    if (intervals) {
      line(8, "intervals: size = " + std::to_string(tier.intervals.size()) +
                  " ");
      for (size_t i = 0; i < tier.intervals.size(); ++i) {
        const Interval& iv = tier.intervals[i];
        line(8, "intervals [" + std::to_string(i + 1) + "]:");
        line(12, "xmin = " + FormatNumber(iv.xmin) + " ");
        line(12, "xmax = " + FormatNumber(iv.xmax) + " ");
        line(12, "text = " + Quote(iv.text) + " ");
      }
    } else {
      line(8, "points: size = " + std::to_string(tier.points.size()) + " ");
      for (size_t i = 0; i < tier.points.size(); ++i) {
        const Point& p = tier.points[i];
        line(8, "points [" + std::to_string(i + 1) + "]:");
        line(12, "number = " + FormatNumber(p.time) + " ");
        line(12, "mark = " + Quote(p.text) + " ");
      }
    }
  }
  return out;
}

void WriteTextGridFile(const std::string& path, const TextGridDoc& doc) {
  const std::string text = SerializeTextGrid(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write TextGrid file: " + path);
  out << text;
}

bool StructurallyEqual(const TextGridDoc& a, const TextGridDoc& b) {
  if (!Near(a.xmin, b.xmin) || !Near(a.xmax, b.xmax)) return false;
  if (a.tiers.size() != b.tiers.size()) return false;
  for (size_t k = 0; k < a.tiers.size(); ++k) {
    const Tier& ta = a.tiers[k];
    const Tier& tb = b.tiers[k];
    if (ta.name != tb.name || ta.kind != tb.kind || !Near(ta.xmin, tb.xmin) ||
        !Near(ta.xmax, tb.xmax) || ta.intervals.size() != tb.intervals.size() ||
        ta.points.size() != tb.points.size()) {
      return false;
    }
    for (size_t i = 0; i < ta.intervals.size(); ++i) {
      const Interval& x = ta.intervals[i];
      const Interval& y = tb.intervals[i];
      if (!Near(x.xmin, y.xmin) || !Near(x.xmax, y.xmax) || x.text != y.text) {
        return false;
      }
    }
    for (size_t i = 0; i < ta.points.size(); ++i) {
      if (!Near(ta.points[i].time, tb.points[i].time) ||
          ta.points[i].text != tb.points[i].text) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace stresskit

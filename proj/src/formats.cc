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

#include "stresskit/formats.h"

#include <fstream>

#include "stresskit/error.h"

namespace stresskit {
namespace {

bool IsHeader(const Json& j) { return j.is_object() && j.contains("_header"); }

template <typename T>
std::optional<T> OptionalField(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

struct NumberedRow {
  int line = 0;
  Json value;
};

std::vector<NumberedRow> ReadNumbered(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<NumberedRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
    if (IsHeader(j)) continue;
    rows.push_back({lineno, std::move(j)});
  }
  return rows;
}

template <typename Fn>
auto ConvertRows(const std::string& path, Fn&& fn) {
  const std::vector<NumberedRow> rows = ReadNumbered(path);
  std::vector<std::decay_t<decltype(fn(rows.front().value))>> out;
  out.reserve(rows.size());
  for (const NumberedRow& row : rows) {
    try {
      out.push_back(fn(row.value));
    } catch (const Json::exception& e) {
      throw ParseError(path + ": " + e.what(), row.line);
    } catch (const InvalidArgument& e) {
      throw ParseError(path + ": " + e.what(), row.line);
    }
  }
  return out;
}

}  // namespace

Json HeaderJson(const OutputHeader& header) {
  Json h = {{"tool", kToolName}, {"version", kToolVersion},
            {"kind", header.kind}};
  if (header.seed) h["seed"] = *header.seed;
  if (header.created) h["created"] = *header.created;
  return Json{{"_header", h}};
}

void WriteJsonl(const std::string& path,
                const std::optional<OutputHeader>& header,
                const std::vector<Json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  if (header) out << HeaderJson(*header).dump() << '\n';
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw Error("write failed: " + path);
}

std::vector<Json> ReadJsonl(const std::string& path) {
  std::vector<Json> rows;
  for (auto& r : ReadNumbered(path)) rows.push_back(std::move(r.value));
  return rows;
}

Json ToJson(const WordRecord& r) {
  Json nuclei = Json::array();
  for (const auto& n : r.nuclei) {
    nuclei.push_back(
        {{"t0", n.t0}, {"t1", n.t1}, {"syllable_index", n.syllable_index}});
  }
  Json j = {{"word_id", r.word_id},     {"text", r.text},
            {"audio_path", r.audio_path}, {"t0", r.t0},
            {"t1", r.t1},               {"nuclei", nuclei}};
  j["stress_index"] = r.stress_index ? Json(*r.stress_index) : Json(nullptr);
  j["speaker_id"] = r.speaker_id;
  j["gender"] = GenderCode(r.gender);
  j["dataset"] = r.dataset;
  return j;
}

WordRecord WordRecordFromJson(const Json& j) {
  WordRecord r;
  r.word_id = j.at("word_id").get<std::string>();
  r.text = j.value("text", std::string());
  r.audio_path = j.value("audio_path", std::string());
  r.t0 = j.at("t0").get<double>();
  r.t1 = j.at("t1").get<double>();
  for (const auto& n : j.at("nuclei")) {
    r.nuclei.push_back({n.at("t0").get<double>(), n.at("t1").get<double>(),
                        n.value("syllable_index",
                                static_cast<int>(r.nuclei.size()))});
  }
  r.stress_index = OptionalField<int>(j, "stress_index");
  r.speaker_id = j.value("speaker_id", std::string());
  r.gender = ParseGender(j.value("gender", std::string("unknown")));
  r.dataset = j.value("dataset", std::string());
  return r;
}

Json ToJson(const RejectedWord& r) {
  return {{"word_id", r.word_id}, {"text", r.text},
          {"audio_path", r.audio_path}, {"t0", r.t0},
          {"t1", r.t1}, {"reason", r.reason}};
}

void WriteManifest(const std::string& path,
                   const std::vector<WordRecord>& records,
                   const std::optional<OutputHeader>& header) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(ToJson(r));
  WriteJsonl(path, header, rows);
}

std::vector<WordRecord> ReadManifest(const std::string& path) {
  return ConvertRows(path, [](const Json& j) {
    WordRecord r = WordRecordFromJson(j);
    ValidateWordRecord(r);
    return r;
  });
}

Json ToJson(const FeatureLine& f) {
  Json feats = Json::object();
  const auto values = f.features.ToArray();
  for (size_t k = 0; k < kNumFeatures; ++k) {
    feats[std::string(kFeatureNames[k])] = values[k];
  }
  Json j = {{"word_id", f.word_id}, {"nucleus_index", f.nucleus_index},
            {"n_nuclei", f.n_nuclei}};
  j["label"] = f.label ? Json(*f.label) : Json(nullptr);
  j["features"] = feats;
  j["quality"] = f.quality;
  j["speaker_id"] = f.speaker_id;
  return j;
}

FeatureLine FeatureLineFromJson(const Json& j) {
  FeatureLine f;
  f.word_id = j.at("word_id").get<std::string>();
  f.nucleus_index = j.at("nucleus_index").get<int>();
  f.n_nuclei = j.value("n_nuclei", 0);
  f.label = OptionalField<int>(j, "label");
  std::array<double, kNumFeatures> values{};
  const Json& feats = j.at("features");
  for (size_t k = 0; k < kNumFeatures; ++k) {
    values[k] = feats.at(std::string(kFeatureNames[k])).get<double>();
  }
  f.features = NucleusFeatures::FromArray(values);
  f.quality = j.value("quality", 0u);
  f.speaker_id = j.value("speaker_id", std::string());
  return f;
}

std::vector<FeatureLine> ReadFeatures(const std::string& path) {
  return ConvertRows(path, FeatureLineFromJson);
}

std::vector<TrainInstance> ToTrainInstances(
    const std::vector<FeatureLine>& lines) {
  std::vector<TrainInstance> out;
  out.reserve(lines.size());
  for (const auto& f : lines) {
    if (!f.label) continue;
    out.push_back({f.features, *f.label, f.word_id, f.nucleus_index});
  }
  return out;
}

Json ToJson(const FrameLabelSeq& s) {
  Json j = {{"word_id", s.word_id}, {"hop_ms", s.hop_ms}, {"labels", s.labels}};
  if (s.empty_nucleus_warning) j["warning"] = "stressed nucleus holds no frame midpoint";
  return j;
}

Json ToJson(const FrameLogitSeq& s) {
  Json logits = Json::array();
  for (const auto& l : s.logits) logits.push_back({l.neg, l.pos});
  return {{"word_id", s.word_id}, {"hop_ms", s.hop_ms}, {"logits", logits}};
}

FrameLogitSeq LogitSeqFromJson(const Json& j) {
  FrameLogitSeq s;
  s.word_id = j.at("word_id").get<std::string>();
  s.hop_ms = j.value("hop_ms", kLabelHopMs);
  for (const auto& pair : j.at("logits")) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ParseError("logit entry for " + s.word_id + " is not a pair", 0);
    }
    s.logits.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return s;
}

std::vector<FrameLogitSeq> ReadLogits(const std::string& path) {
  return ConvertRows(path, LogitSeqFromJson);
}

Json ToJson(const PredictionRecord& p) {
  Json j = {{"word_id", p.word_id}, {"predicted_index", p.predicted_index}};
  j["gold_index"] = p.gold_index ? Json(*p.gold_index) : Json(nullptr);
  j["n_nuclei"] = p.n_nuclei;
  j["score"] = p.score;
  return j;
}

PredictionRecord PredictionFromJson(const Json& j) {
  PredictionRecord p;
  p.word_id = j.at("word_id").get<std::string>();
  p.predicted_index = j.at("predicted_index").get<int>();
  p.gold_index = OptionalField<int>(j, "gold_index");
  p.n_nuclei = j.value("n_nuclei", 0);
  p.score = j.value("score", 0.0);
  return p;
}

std::vector<PredictionRecord> ReadPredictions(const std::string& path) {
  return ConvertRows(path, PredictionFromJson);
}

std::vector<Json> ContourRows(const std::string& word_id,
                              const ProsodyTracks& t) {
  std::vector<Json> rows;
  const size_t n = t.intensity.frames.size();
  for (size_t i = 0; i < n; ++i) {
    const bool has_pitch = i < t.pitch.frames.size();
    rows.push_back({{"word_id", word_id},
                    {"time", t.intensity.TimeAt(i)},
                    {"pitch", has_pitch ? t.pitch.frames[i].value : 0.0},
                    {"voiced", has_pitch && t.pitch.frames[i].voiced},
                    {"intensity", t.intensity.frames[i].value},
                    {"sonority", i < t.sonority.frames.size()
                                     ? t.sonority.frames[i].value
                                     : 0.0}});
  }
  return rows;
}

}  // namespace stresskit

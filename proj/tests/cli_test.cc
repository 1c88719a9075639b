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

#include "stresskit/cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "stresskit/formats.h"
#include "stresskit/metrics.h"
#include "stresskit/textgrid.h"

namespace stresskit {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Tier IntervalTier(const std::string& name, double xmax,
                  std::vector<Interval> intervals) {
  Tier t;
  t.name = name;
  t.kind = TierKind::kInterval;
  t.xmax = xmax;
  t.intervals = std::move(intervals);
  return t;
}

Json LoadJson(const fs::path& p) { return Json::parse(Slurp(p)); }

size_t CountLines(const fs::path& p, const std::string& prefix = "") {
  std::ifstream in(p);
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.find("\"_header\"") != std::string::npos) continue;
    if (line[0] == '#') continue;
    if (line.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() /
                         ("stresskit_cli_" + std::to_string(::getpid())));
    fs::create_directories(*root_);
    ASSERT_EQ(Run({"synth", "--out", Dir("corpus"), "--words", "120",
                   "--speakers", "6", "--seed", "5", "--deterministic"}),
              0);
    std::vector<std::string> ingest = {"ingest", "--out", Dir("ingest"),
                                       "--stress-tier", "stress",
                                       "--speaker-map",
                                       Dir("corpus") + "/speakers.tsv",
                                       "--deterministic"};
    for (const auto& e : fs::directory_iterator(Dir("corpus"))) {
      if (e.path().extension() != ".wav") continue;
      auto grid = e.path();
      grid.replace_extension(".TextGrid");
      ingest.insert(ingest.end(), {"--wav", e.path().string(), "--textgrid",
                                   grid.string()});
    }
    ASSERT_EQ(Run(ingest), 0);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }

  static int Run(const std::vector<std::string>& args,
                 std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = RunCli(args, out, err);
    if (err_text) *err_text = err.str();
    return rc;
  }
  static std::string Dir(const std::string& name) {
    return (*root_ / name).string();
  }
  static std::string Manifest() { return Dir("ingest") + "/manifest.jsonl"; }

  // split, features, train, predict, eval under `prefix`.
  static void Pipeline(const std::string& prefix,
                       const std::vector<std::string>& extra_train = {}) {
    const std::vector<std::string> det = {"--deterministic", "--seed", "7"};
    auto with = [&](std::vector<std::string> a) {
      a.insert(a.end(), det.begin(), det.end());
      return a;
    };
    ASSERT_EQ(Run(with({"split", "--out", Dir(prefix + "split"), "--manifest",
                        Manifest()})),
              0);
    for (const char* part : {"train", "test"}) {
      ASSERT_EQ(Run(with({"features", "--out", Dir(prefix + "feat_" + part),
                          "--manifest",
                          Dir(prefix + "split") + "/" + part + ".jsonl"})),
                0);
    }
    auto train = with({"train", "--out", Dir(prefix + "train"), "--features",
                       Dir(prefix + "feat_train") + "/features.jsonl"});
    train.insert(train.end(), extra_train.begin(), extra_train.end());
    ASSERT_EQ(Run(train), 0);
    ASSERT_EQ(Run(with({"predict", "--out", Dir(prefix + "predict"),
                        "--model", Dir(prefix + "train") + "/model.json",
                        "--features",
                        Dir(prefix + "feat_test") + "/features.jsonl"})),
              0);
    ASSERT_EQ(Run(with({"eval", "--out", Dir(prefix + "eval"),
                        "--predictions",
                        Dir(prefix + "predict") + "/predictions.jsonl",
                        "--resamples", "500", "--tag", "synthetic"})),
              0);
  }

  static fs::path* root_;
};

fs::path* CliTest::root_ = nullptr;

TEST_F(CliTest, IngestWritesManifestAndRunFiles) {
  EXPECT_EQ(CountLines(Manifest()), 120u);
  EXPECT_TRUE(fs::exists(Dir("ingest") + "/rejects.jsonl"));
  EXPECT_TRUE(fs::exists(Dir("ingest") + "/config.toml"));
  EXPECT_TRUE(fs::exists(Dir("ingest") + "/run.log"));
  std::ifstream in(Manifest());
  std::string first;
  std::getline(in, first);
  const Json h = Json::parse(first).at("_header");
  EXPECT_EQ(h.at("tool"), "stresskit");
  EXPECT_EQ(h.at("version"), kToolVersion);
  EXPECT_EQ(h.at("kind"), "manifest");
  std::set<std::string> speakers;
  for (const auto& w : ReadManifest(Manifest())) {
    speakers.insert(w.speaker_id);
    EXPECT_TRUE(w.stress_index.has_value());
  }
  EXPECT_EQ(speakers.size(), 6u);
}

TEST_F(CliTest, IngestErrorSymbolAndMissingTier) {
  TextGridDoc doc;
  doc.xmax = 2.0;
  doc.tiers.push_back(IntervalTier(
      "words", 2.0, {{0.0, 1.0, "voda"}, {1.0, 2.0, "kuća"}}));
  doc.tiers.push_back(IntervalTier(
      "nuclei", 2.0,
      {{0.0, 0.2, ""}, {0.2, 0.4, "o"}, {0.4, 0.6, ""}, {0.6, 0.8, "a"},
       {0.8, 1.2, ""}, {1.2, 1.4, "u"}, {1.4, 1.6, ""}, {1.6, 1.8, "a?"},
       {1.8, 2.0, ""}}));
  const std::string grid = Dir("fx.TextGrid");
  WriteTextGridFile(grid, doc);
  const std::string wav = Dir("fx.wav");
  std::ofstream(wav) << "";
  ASSERT_EQ(Run({"ingest", "--out", Dir("fx_ok"), "--textgrid", grid, "--wav",
                 wav}),
            0);
  EXPECT_EQ(CountLines(Dir("fx_ok") + "/manifest.jsonl"), 1u);
  EXPECT_EQ(CountLines(Dir("fx_ok") + "/rejects.jsonl"), 1u);

  std::string err;
  EXPECT_EQ(Run({"ingest", "--out", Dir("fx_bad"), "--textgrid", grid,
                 "--wav", wav, "--nucleus-tier", "vowels"},
                &err),
            kExitFailure);
  EXPECT_NE(err.find("vowels"), std::string::npos);
  const Json e = LoadJson(Dir("fx_bad") + "/error.json");
  EXPECT_NE(e.at("error").get<std::string>().find("vowels"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Run({}), kExitUsage);
  EXPECT_EQ(Run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(Run({"train", "--out", Dir("x")}), kExitUsage);
  EXPECT_EQ(Run({"eval", "--out", Dir("x"), "--predictions", Dir("nope")}),
            kExitUsage);
  EXPECT_EQ(Run({"--help"}), kExitOk);
}

TEST_F(CliTest, EndToEndPipeline) {
  Pipeline("a_");
  const Json report = LoadJson(Dir("a_eval") + "/report.json");
  const double acc = report.at("accuracy");
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_LE(report.at("ci_low").get<double>(), acc);
  EXPECT_GE(report.at("ci_high").get<double>(), acc);
  EXPECT_EQ(report.at("tag"), "synthetic");

  // Report accuracy matches an in-process computation on the same file.
  const auto preds = ReadPredictions(Dir("a_predict") + "/predictions.jsonl");
  EXPECT_EQ(report.at("n_words").get<size_t>(), preds.size());
  EXPECT_DOUBLE_EQ(acc, WordAccuracy(preds).accuracy);

  const Json split = LoadJson(Dir("a_split") + "/split.json");
  EXPECT_TRUE(split.contains("_header"));
  EXPECT_EQ(CountLines(Dir("a_split") + "/train.jsonl") +
                CountLines(Dir("a_split") + "/test.jsonl"),
            120u);
  for (const char* f : {"report.txt", "confusion.csv", "confusion_percent.csv"}) {
    const std::string text = Slurp(Dir("a_eval") + "/" + f);
    EXPECT_FALSE(text.empty()) << f;
  }
  EXPECT_EQ(Slurp(Dir("a_eval") + "/report.txt").rfind("# stresskit 0.1.0 ", 0),
            0u);
}

TEST_F(CliTest, DeterministicRerunsAreByteIdentical) {
  Pipeline("b_");
  Pipeline("c_");
  const std::vector<std::pair<std::string, std::string>> files = {
      {"split", "train.jsonl"},        {"split", "split.json"},
      {"feat_train", "features.jsonl"}, {"train", "model.json"},
      {"train", "train_report.json"},   {"predict", "predictions.jsonl"},
      {"eval", "report.json"},          {"eval", "report.txt"}};
  for (const auto& [dir, file] : files) {
    EXPECT_EQ(Slurp(Dir("b_" + dir) + "/" + file),
              Slurp(Dir("c_" + dir) + "/" + file))
        << dir << "/" << file;
  }
}

TEST_F(CliTest, PerfectPredictionsGiveDegenerateInterval) {
  const std::string path = Dir("perfect.jsonl");
  {
    std::ofstream out(path);
    for (int i = 0; i < 50; ++i) {
      out << Json{{"word_id", "w" + std::to_string(i)},
                  {"predicted_index", i % 3},
                  {"gold_index", i % 3},
                  {"n_nuclei", 3},
                  {"score", 1.0}}
                 .dump()
          << '\n';
    }
  }
  ASSERT_EQ(Run({"eval", "--out", Dir("perfect"), "--predictions", path,
                 "--resamples", "200"}),
            0);
  const Json r = LoadJson(Dir("perfect") + "/report.json");
  EXPECT_EQ(r.at("accuracy").get<double>(), 1.0);
  EXPECT_EQ(r.at("ci_low").get<double>(), 1.0);
  EXPECT_EQ(r.at("ci_high").get<double>(), 1.0);
}

TEST_F(CliTest, ConfigFileAndFlagOverride) {
  ASSERT_EQ(Run({"features", "--out", Dir("cfg_feat"), "--manifest",
                 Manifest(), "--deterministic"}),
            0);
  const std::string features = Dir("cfg_feat") + "/features.jsonl";
  const std::string cfg = Dir("train.toml");
  std::ofstream(cfg) << "[train]\nC = 0.5\nkernel = \"linear\"\n";
  ASSERT_EQ(Run({"--config", cfg, "train", "--out", Dir("cfg_a"),
                 "--features", features}),
            0);
  const Json a = LoadJson(Dir("cfg_a") + "/train_report.json");
  EXPECT_EQ(a.at("C").get<double>(), 0.5);
  EXPECT_EQ(a.at("kernel"), "linear");
  ASSERT_EQ(Run({"--config", cfg, "train", "--out", Dir("cfg_b"),
                 "--features", features, "--C", "2"}),
            0);
  const Json b = LoadJson(Dir("cfg_b") + "/train_report.json");
  EXPECT_EQ(b.at("C").get<double>(), 2.0);
  EXPECT_EQ(b.at("kernel"), "linear");
  EXPECT_NE(Slurp(Dir("cfg_b") + "/config.toml").find("2"), std::string::npos);
}

TEST_F(CliTest, EncodeOneHotDecode) {
  ASSERT_EQ(Run({"encode", "--out", Dir("enc"), "--manifest", Manifest()}), 0);
  const std::string logits = Dir("logits.jsonl");
  {
    std::ifstream in(Dir("enc") + "/labels.jsonl");
    std::ofstream out(logits);
    std::string line;
    while (std::getline(in, line)) {
      const Json j = Json::parse(line);
      if (j.contains("_header")) continue;
      Json pairs = Json::array();
      for (int l : j.at("labels")) pairs.push_back({l ? 0.0 : 1.0, l ? 1.0 : 0.0});
      out << Json{{"word_id", j.at("word_id")}, {"logits", pairs}}.dump() << '\n';
    }
  }
  ASSERT_EQ(Run({"decode", "--out", Dir("dec"), "--logits", logits,
                 "--manifest", Manifest()}),
            0);
  const auto preds = ReadPredictions(Dir("dec") + "/predictions.jsonl");
  ASSERT_EQ(preds.size(), 120u);
  EXPECT_DOUBLE_EQ(WordAccuracy(preds).accuracy, 1.0);
}

TEST_F(CliTest, AgreeAndAnalyze) {
  ASSERT_EQ(Run({"agree", "--out", Dir("agree"), "--annotations", Manifest(),
                 Manifest()}),
            0);
  const Json a = LoadJson(Dir("agree") + "/agreement.json");
  EXPECT_TRUE(a.contains("_header"));
  EXPECT_NE(Slurp(Dir("agree") + "/agreement.txt").find("1.0"),
            std::string::npos);
  ASSERT_EQ(Run({"analyze", "--out", Dir("analyze"), "--train", Manifest(),
                 "--test", Manifest(), "--min-count", "1"}),
            0);
  EXPECT_TRUE(LoadJson(Dir("analyze") + "/analysis.json").contains("_header"));
  EXPECT_TRUE(fs::exists(Dir("analyze") + "/analysis.txt"));
}

TEST_F(CliTest, CurveRowCounts) {
  ASSERT_EQ(Run({"features", "--out", Dir("curve_feat"), "--manifest",
                 Manifest(), "--deterministic"}),
            0);
  const std::string features = Dir("curve_feat") + "/features.jsonl";
  ASSERT_EQ(Run({"curve", "--out", Dir("curve"), "--train-features", features,
                 "--test-features", features, "--sizes", "40", "80",
                 "--repeats", "2", "--manifest", Manifest(), "--seed", "3",
                 "--deterministic"}),
            0);
  const fs::path csv = Dir("curve") + "/curve.csv";
  EXPECT_EQ(CountLines(csv, "point,"), 4u);
  EXPECT_EQ(CountLines(csv, "summary,"), 2u);
  EXPECT_TRUE(fs::exists(Dir("curve") + "/subsets/size_0040_rep_00.jsonl"));
  EXPECT_EQ(CountLines(Dir("curve") + "/subsets/size_0080_rep_01.jsonl"), 80u);
}

}  // namespace
}  // namespace stresskit

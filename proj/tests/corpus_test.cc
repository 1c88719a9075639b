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

#include <gtest/gtest.h>

#include <set>

#include "stresskit/error.h"
#include "testing.h"

namespace stresskit {
namespace {

using testing::Rng;

Tier IntervalTier(const std::string& name, double xmax,
                  std::vector<Interval> intervals) {
  Tier t;
  t.name = name;
  t.kind = TierKind::kInterval;
  t.xmax = xmax;
  t.intervals = std::move(intervals);
  return t;
}

TEST(Manifest, SingleWordWithStress) {
  TextGridDoc doc;
  doc.xmax = 1.0;
  doc.tiers.push_back(IntervalTier("words", 1.0, {{0.0, 1.0, "kuća"}}));
  doc.tiers.push_back(IntervalTier(
      "nuclei", 1.0,
      {{0.0, 0.1, ""}, {0.1, 0.2, "u"}, {0.2, 0.5, ""}, {0.5, 0.6, "a"},
       {0.6, 1.0, ""}}));
  doc.tiers.push_back(IntervalTier(
      "stress", 1.0, {{0.0, 0.5, ""}, {0.5, 0.6, "1"}, {0.6, 1.0, ""}}));
  ManifestOptions o;
  o.stress_tier = "stress";
  o.speaker_id = "s1";
  o.gender = Gender::kFemale;
  const Manifest m = BuildManifest(doc, "x.wav", o);
  ASSERT_EQ(m.records.size(), 1u);
  const WordRecord& w = m.records[0];
  EXPECT_EQ(w.text, "kuća");
  ASSERT_EQ(w.nuclei.size(), 2u);
  EXPECT_EQ(w.nuclei[0].t0, 0.1);
  EXPECT_EQ(w.nuclei[1].syllable_index, 1);
  ASSERT_TRUE(w.stress_index.has_value());
  EXPECT_EQ(*w.stress_index, 1);
  EXPECT_EQ(w.speaker_id, "s1");
  EXPECT_EQ(w.gender, Gender::kFemale);
  EXPECT_TRUE(m.rejects.empty());
}

TEST(Manifest, MonosyllabicWordExcluded) {
  TextGridDoc doc;
  doc.xmax = 1.0;
  doc.tiers.push_back(IntervalTier("words", 1.0, {{0.0, 1.0, "da"}}));
  doc.tiers.push_back(
      IntervalTier("nuclei", 1.0, {{0.0, 0.4, ""}, {0.4, 0.6, "a"},
                                   {0.6, 1.0, ""}}));
  const Manifest m = BuildManifest(doc, "x.wav", {});
  EXPECT_TRUE(m.records.empty());
}

// Five two-syllable words; the third carries an annotator error mark.
TextGridDoc FiveWordFixture() {
  TextGridDoc doc;
  doc.xmax = 5.0;
  std::vector<Interval> words, nuclei;
  std::vector<Point> stress;
  const char* texts[] = {"voda", "ljeto", "kuća", "njiva", "džep"};
  for (int i = 0; i < 5; ++i) {
    const double t = i;
    words.push_back({t, t + 1.0, texts[i]});
    nuclei.push_back({t, t + 0.2, ""});
    nuclei.push_back({t + 0.2, t + 0.4, "a"});
    nuclei.push_back({t + 0.4, t + 0.6, ""});
    nuclei.push_back({t + 0.6, t + 0.8, i == 2 ? "a?" : "e"});
    nuclei.push_back({t + 0.8, t + 1.0, ""});
    stress.push_back({t + 0.3, "1"});
  }
  doc.tiers.push_back(IntervalTier("words", 5.0, words));
  doc.tiers.push_back(IntervalTier("nuclei", 5.0, nuclei));
  Tier s;
  s.name = "stress";
  s.kind = TierKind::kPoint;
  s.xmax = 5.0;
  s.points = stress;
  doc.tiers.push_back(s);
  return doc;
}

TEST(Manifest, ErrorSymbolRejectsWord) {
  ManifestOptions o;
  o.stress_tier = "stress";
  o.id_prefix = "fx_";
  const Manifest m = BuildManifest(FiveWordFixture(), "fx.wav", o);
  ASSERT_EQ(m.records.size(), 4u);
  ASSERT_EQ(m.rejects.size(), 1u);
  EXPECT_EQ(m.rejects[0].text, "kuća");
  EXPECT_FALSE(m.rejects[0].reason.empty());
  for (const auto& w : m.records) {
    EXPECT_NE(w.text, "kuća");
    EXPECT_EQ(w.stress_index, 0);
    EXPECT_EQ(w.word_id.rfind("fx_", 0), 0u);
    EXPECT_NO_THROW(ValidateWordRecord(w));
  }
  std::set<std::string> ids;
  for (const auto& w : m.records) ids.insert(w.word_id);
  EXPECT_EQ(ids.size(), 4u);
}

TEST(Manifest, ErrorSymbolsConfigurable) {
  ManifestOptions o;
  o.stress_tier = "stress";
  o.error_symbols = "#";
  const Manifest m = BuildManifest(FiveWordFixture(), "fx.wav", o);
  EXPECT_EQ(m.records.size(), 5u);
}

TEST(Manifest, StressOnTwoNucleiRejected) {
  TextGridDoc doc = FiveWordFixture();
  doc.tiers[2].points.insert(doc.tiers[2].points.begin() + 1,
                             Point{0.7, "1"});
  ManifestOptions o;
  o.stress_tier = "stress";
  const Manifest m = BuildManifest(doc, "fx.wav", o);
  EXPECT_EQ(m.records.size(), 3u);
  ASSERT_EQ(m.rejects.size(), 2u);
  EXPECT_NE(m.rejects[0].reason.find("2"), std::string::npos);
}

TEST(Manifest, StressOnNoNucleusRejected) {
  TextGridDoc doc = FiveWordFixture();
  doc.tiers[2].points.erase(doc.tiers[2].points.begin());
  ManifestOptions o;
  o.stress_tier = "stress";
  const Manifest m = BuildManifest(doc, "fx.wav", o);
  EXPECT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.rejects.size(), 2u);
}

TEST(Manifest, MissingTierNamed) {
  ManifestOptions o;
  o.nucleus_tier = "syllables";
  try {
    BuildManifest(FiveWordFixture(), "fx.wav", o);
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("syllables"), std::string::npos);
  }
}

TEST(Manifest, WithoutStressTierNoGold) {
  const Manifest m = BuildManifest(FiveWordFixture(), "fx.wav", {});
  ASSERT_EQ(m.records.size(), 4u);
  for (const auto& w : m.records) EXPECT_FALSE(w.stress_index.has_value());
}

TEST(Manifest, RandomGridsYieldValidRecords) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    TextGridDoc doc;
    std::vector<Interval> words, nuclei;
    std::vector<Point> stress;
    double t = 0.0;
    const int n_words = testing::UniformInt(rng, 1, 12);
    for (int w = 0; w < n_words; ++w) {
      const double w0 = t;
      const int n = testing::UniformInt(rng, 1, 4);
      double u = w0;
      int stressed = testing::UniformInt(rng, 0, n - 1);
      for (int k = 0; k < n; ++k) {
        const double gap = testing::Uniform(rng, 0.01, 0.1);
        const double len = testing::Uniform(rng, 0.02, 0.2);
        nuclei.push_back({u, u + gap, ""});
        nuclei.push_back({u + gap, u + gap + len, "V"});
        if (k == stressed) stress.push_back({u + gap + len / 2, "1"});
        u += gap + len;
      }
      nuclei.push_back({u, u + 0.05, ""});
      u += 0.05;
      words.push_back({w0, u, "w"});
      t = u;
    }
    doc.xmax = t;
    doc.tiers.push_back(IntervalTier("words", t, words));
    doc.tiers.push_back(IntervalTier("nuclei", t, nuclei));
    Tier s;
    s.name = "stress";
    s.kind = TierKind::kPoint;
    s.xmax = t;
    s.points = stress;
    doc.tiers.push_back(s);
    ManifestOptions o;
    o.stress_tier = "stress";
    const Manifest m = BuildManifest(doc, "r.wav", o);
    for (const auto& w : m.records) {
      EXPECT_NO_THROW(ValidateWordRecord(w));
      ASSERT_GE(w.nuclei.size(), 2u);
      EXPECT_LT(*w.stress_index, static_cast<int>(w.nuclei.size()));
      for (size_t k = 0; k < w.nuclei.size(); ++k) {
        EXPECT_GE(w.nuclei[k].t0, w.t0);
        EXPECT_LE(w.nuclei[k].t1, w.t1);
        if (k > 0) {
          EXPECT_LE(w.nuclei[k - 1].t1, w.nuclei[k].t0);
        }
      }
    }
  }
}

TEST(WordRecord, ValidateCatchesBrokenInvariants) {
  WordRecord w;
  w.word_id = "w";
  w.t0 = 0.0;
  w.t1 = 1.0;
  w.nuclei = {{0.1, 0.2, 0}, {0.5, 0.6, 1}};
  w.stress_index = 1;
  EXPECT_NO_THROW(ValidateWordRecord(w));
  WordRecord bad = w;
  bad.stress_index = 2;
  EXPECT_THROW(ValidateWordRecord(bad), InvalidArgument);
  bad = w;
  bad.nuclei.pop_back();
  EXPECT_THROW(ValidateWordRecord(bad), InvalidArgument);
  bad = w;
  std::swap(bad.nuclei[0], bad.nuclei[1]);
  EXPECT_THROW(ValidateWordRecord(bad), InvalidArgument);
  bad = w;
  bad.nuclei[1].t1 = 1.2;
  EXPECT_THROW(ValidateWordRecord(bad), InvalidArgument);
}

TEST(Digraphs, Examples) {
  EXPECT_EQ(NormalizeDigraphs("ljeto"), "ʎeto");
  EXPECT_EQ(NormalizeDigraphs("kava"), "kava");
  EXPECT_EQ(NormalizeDigraphs("njiva"), "ɲiva");
  EXPECT_EQ(NormalizeDigraphs("džep"), "ǆep");
  const std::string in = "nadživjeti";
  const std::string out = NormalizeDigraphs(in);
  EXPECT_EQ(out, "naǆivjeti");
  EXPECT_EQ(Utf8Length(out), Utf8Length(in) - 1);
}

TEST(Digraphs, LigaturesFolded) {
  EXPECT_EQ(NormalizeDigraphs("ǉeto"), "ʎeto");
  EXPECT_EQ(NormalizeDigraphs("ǌiva"), "ɲiva");
}

TEST(Digraphs, NeverLongerAndIdempotent) {
  const std::vector<std::string> alphabet = {"l", "j", "n", "d", "ž", "a",
                                             "ǉ", "ǌ", "ǆ", "z", "e", "ʎ"};
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = testing::UniformInt(rng, 0, 12);
    for (int k = 0; k < len; ++k) {
      s += alphabet[testing::UniformInt(rng, 0,
                                        static_cast<int>(alphabet.size()) - 1)];
    }
    const std::string once = NormalizeDigraphs(s);
    EXPECT_LE(Utf8Length(once), Utf8Length(s)) << s;
    EXPECT_EQ(NormalizeDigraphs(once), once) << s;
  }
}

TEST(WordForm, CaseFoldsCroatianLetters) {
  EXPECT_EQ(WordForm("Ljeto"), "ʎeto");
  EXPECT_EQ(WordForm("ČAŠA"), "čaša");
  EXPECT_EQ(WordForm("  Džep "), "ǆep");
  EXPECT_EQ(WordForm("ĐURĐA"), "đurđa");
}

std::vector<WordRecord> SpeakerCorpus(Rng& rng, int n_speakers) {
  std::vector<WordRecord> out;
  for (int s = 0; s < n_speakers; ++s) {
    const int n = testing::UniformInt(rng, 5, 60);
    const Gender g = testing::UniformInt(rng, 0, 1) ? Gender::kFemale
                                                    : Gender::kMale;
    for (int k = 0; k < n; ++k) {
      WordRecord w;
      w.word_id = "s" + std::to_string(s) + "_" + std::to_string(k);
      w.speaker_id = "spk" + std::to_string(s);
      w.gender = g;
      w.t1 = 1.0;
      w.nuclei = {{0.1, 0.2, 0}, {0.5, 0.6, 1}};
      out.push_back(w);
    }
  }
  return out;
}

std::set<std::string> Speakers(const std::vector<WordRecord>& rs) {
  std::set<std::string> s;
  for (const auto& r : rs) s.insert(r.speaker_id);
  return s;
}

TEST(Split, TwoSpeakersOnePerSide) {
  std::vector<WordRecord> rs;
  for (int s = 0; s < 2; ++s) {
    for (int k = 0; k < 10; ++k) {
      WordRecord w;
      w.word_id = std::to_string(s) + "_" + std::to_string(k);
      w.speaker_id = s == 0 ? "f" : "m";
      w.gender = s == 0 ? Gender::kFemale : Gender::kMale;
      rs.push_back(w);
    }
  }
  const SpeakerSplit sp = SplitSpeakers(rs, 0.5, 1);
  EXPECT_EQ(Speakers(sp.train).size(), 1u);
  EXPECT_EQ(Speakers(sp.test).size(), 1u);
}

TEST(Split, RefusesSingleSpeakerAndBadFraction) {
  Rng rng(1);
  auto rs = SpeakerCorpus(rng, 1);
  EXPECT_THROW(SplitSpeakers(rs, 0.2, 0), InvalidArgument);
  rs = SpeakerCorpus(rng, 5);
  EXPECT_THROW(SplitSpeakers(rs, 0.0, 0), InvalidArgument);
  EXPECT_THROW(SplitSpeakers(rs, 1.0, 0), InvalidArgument);
}

TEST(Split, DisjointCompleteAndDeterministic) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rs = SpeakerCorpus(rng, testing::UniformInt(rng, 2, 30));
    const uint64_t seed = rng();
    const SpeakerSplit a = SplitSpeakers(rs, 0.2, seed);
    const SpeakerSplit b = SplitSpeakers(rs, 0.2, seed);
    EXPECT_EQ(a.train.size() + a.test.size(), rs.size());
    std::set<std::string> both;
    for (const auto& s : Speakers(a.train)) {
      EXPECT_EQ(Speakers(a.test).count(s), 0u);
    }
    ASSERT_EQ(a.test.size(), b.test.size());
    for (size_t i = 0; i < a.test.size(); ++i) {
      EXPECT_EQ(a.test[i].word_id, b.test[i].word_id);
    }
  }
}

TEST(Split, FortySixSpeakers) {
  Rng rng(46);
  const auto rs = SpeakerCorpus(rng, 46);
  const SpeakerSplit sp = SplitSpeakers(rs, 0.15, 7);
  const double share =
      static_cast<double>(sp.test.size()) / static_cast<double>(rs.size());
  EXPECT_GE(share, 0.10);
  EXPECT_LE(share, 0.20);
  for (const auto& s : Speakers(sp.train)) {
    EXPECT_EQ(Speakers(sp.test).count(s), 0u);
  }
}

// Best gender balance among 1000 random speaker assignments whose test share
// is within 5 points of the target.
double BestRandomImbalance(const std::vector<WordRecord>& rs, double fraction,
                           uint64_t seed) {
  std::map<std::string, std::vector<const WordRecord*>> by_speaker;
  for (const auto& r : rs) by_speaker[r.speaker_id].push_back(&r);
  Rng rng(seed);
  double best = 1.0;
  for (int k = 0; k < 1000; ++k) {
    double f = 0.0, m = 0.0, total = 0.0;
    for (const auto& [id, words] : by_speaker) {
      if (testing::Uniform(rng, 0.0, 1.0) >= fraction) continue;
      total += words.size();
      (words[0]->gender == Gender::kFemale ? f : m) += words.size();
    }
    if (std::fabs(total / rs.size() - fraction) > 0.05 || f + m == 0) continue;
    best = std::min(best, std::fabs(f / (f + m) - 0.5));
  }
  return best;
}

TEST(Split, BalanceAtLeastAsGoodAsRandomAssignments) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rs = SpeakerCorpus(rng, testing::UniformInt(rng, 8, 40));
    const SpeakerSplit sp = SplitSpeakers(rs, 0.2, trial);
    const double share =
        static_cast<double>(sp.test.size()) / static_cast<double>(rs.size());
    const double best = BestRandomImbalance(rs, 0.2, 100 + trial);
    if (best < 1.0) {
      EXPECT_LE(std::fabs(share - 0.2), 0.05 + 1e-12);
      EXPECT_LE(GenderImbalance(sp.test), best + 1e-12) << "trial " << trial;
    }
  }
}

TEST(Split, GenderImbalance) {
  std::vector<WordRecord> rs(4);
  rs[0].gender = rs[1].gender = rs[2].gender = Gender::kFemale;
  rs[3].gender = Gender::kMale;
  EXPECT_DOUBLE_EQ(GenderImbalance(rs), 0.25);
  rs.resize(0);
  EXPECT_DOUBLE_EQ(GenderImbalance(rs), 0.5);
}

}  // namespace
}  // namespace stresskit

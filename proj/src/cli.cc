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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <spdlog/logger.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/ostream_sink.h>

#include "CLI11.hpp"
#include "stresskit/corpus.h"
#include "stresskit/error.h"
#include "stresskit/formats.h"
#include "stresskit/framecodec.h"
#include "stresskit/metrics.h"
#include "stresskit/pipeline.h"
#include "stresskit/svm.h"
#include "stresskit/synth.h"
#include "stresskit/textgrid.h"

namespace stresskit {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string out;
  uint64_t seed = 0;
  bool deterministic = false;
  int threads = 1;
};

void AddCommon(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--out", o.out, "Run directory for outputs")->required();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_flag("--deterministic", o.deterministic,
                "Omit timestamps from headers and the run log");
  sub->add_option("--threads", o.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// One invocation's run directory.
class Run {
 public:
  Run(std::string command, const CommonOptions& opts, std::ostream& err)
      : command_(std::move(command)), opts_(opts), dir_(opts.out) {
    fs::create_directories(dir_);
    auto file_sink = std::make_shared<spdlog::sinks::basic_file_sink_st>(
        (dir_ / "run.log").string(), true);
    auto err_sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    err_sink->set_level(spdlog::level::warn);
    log_ = std::make_shared<spdlog::logger>(
        "stresskit", spdlog::sinks_init_list{file_sink, err_sink});
    log_->set_pattern(opts.deterministic ? "[%l] %v"
                                         : "[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
    log_->set_level(spdlog::level::info);
    log_->info("{} {} {}", kToolName, kToolVersion, command_);
  }

  ~Run() { log_->flush(); }

  spdlog::logger& log() { return *log_; }
  const fs::path& dir() const { return dir_; }
  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  OutputHeader Header(const std::string& kind) const {
    OutputHeader h;
    h.kind = kind;
    h.seed = opts_.seed;
    if (!opts_.deterministic) h.created = Timestamp();
    return h;
  }

  Json JsonHeader(const std::string& kind) const {
    return HeaderJson(Header(kind))["_header"];
  }

  std::string TextHeader(const std::string& kind) const {
    std::string line = std::string("# ") + kToolName + " " + kToolVersion +
                       " " + kind + " seed=" + std::to_string(opts_.seed);
    if (!opts_.deterministic) line += " created=" + Timestamp();
    return line + "\n";
  }

  void WriteText(const std::string& name, const std::string& text) const {
    std::ofstream f(Path(name), std::ios::binary);
    if (!f) throw Error("cannot write " + Path(name));
    f << text;
  }

  void WriteJson(const std::string& name, const Json& j) const {
    WriteText(name, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  CommonOptions opts_;
  fs::path dir_;
  std::shared_ptr<spdlog::logger> log_;
};

std::string FormatFixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// --- ingest -----------------------------------------------------------------

struct IngestOptions {
  std::vector<std::string> textgrids;
  std::vector<std::string> wavs;
  std::string word_tier = "words";
  std::string nucleus_tier = "nuclei";
  std::string stress_tier;
  std::string error_symbols = "?!";
  std::string speaker_map;
  std::string dataset;
  std::string gender = "unknown";
};

std::map<std::string, std::pair<std::string, Gender>> ReadSpeakerMap(
    const std::string& path) {
  std::map<std::string, std::pair<std::string, Gender>> map;
  std::ifstream in(path);
  if (!in) throw Error("cannot open speaker map " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string stem, speaker, gender;
    if (!std::getline(fields, stem, '\t') ||
        !std::getline(fields, speaker, '\t')) {
      throw ParseError(path + ": expected stem<TAB>speaker[<TAB>gender]",
                       lineno);
    }
    std::getline(fields, gender, '\t');
    map[stem] = {speaker, ParseGender(gender)};
  }
  return map;
}

void CmdIngest(const IngestOptions& o, Run& run) {
  if (o.textgrids.size() != o.wavs.size()) {
    throw InvalidArgument("--textgrid and --wav must be given pairwise (" +
                          std::to_string(o.textgrids.size()) + " vs " +
                          std::to_string(o.wavs.size()) + ")");
  }
  std::map<std::string, std::pair<std::string, Gender>> speakers;
  if (!o.speaker_map.empty()) speakers = ReadSpeakerMap(o.speaker_map);

  std::vector<WordRecord> records;
  std::vector<RejectedWord> rejects;
  for (size_t k = 0; k < o.textgrids.size(); ++k) {
    const TextGridDoc doc = ReadTextGridFile(o.textgrids[k]);
    const std::string stem = fs::path(o.wavs[k]).stem().string();
    ManifestOptions mo;
    mo.word_tier = o.word_tier;
    mo.nucleus_tier = o.nucleus_tier;
    if (!o.stress_tier.empty()) mo.stress_tier = o.stress_tier;
    mo.error_symbols = o.error_symbols;
    mo.dataset = o.dataset;
    mo.speaker_id = stem;
    mo.gender = ParseGender(o.gender);
    if (auto it = speakers.find(stem); it != speakers.end()) {
      mo.speaker_id = it->second.first;
      mo.gender = it->second.second;
    }
    mo.id_prefix = stem + "_";
    Manifest m;
    try {
      m = BuildManifest(doc, o.wavs[k], mo);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(o.textgrids[k] + ": " + e.what());
    }
    run.log().info("{}: {} words, {} rejected", o.textgrids[k],
                   m.records.size(), m.rejects.size());
    std::move(m.records.begin(), m.records.end(), std::back_inserter(records));
    std::move(m.rejects.begin(), m.rejects.end(), std::back_inserter(rejects));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.word_id < b.word_id; });
  WriteManifest(run.Path("manifest.jsonl"), records, run.Header("manifest"));
  std::vector<Json> reject_rows;
  for (const auto& r : rejects) reject_rows.push_back(ToJson(r));
  WriteJsonl(run.Path("rejects.jsonl"), run.Header("rejects"), reject_rows);
  run.log().info("manifest: {} words; rejects: {}", records.size(),
                 rejects.size());
}

// --- features ---------------------------------------------------------------

struct FeaturesOptions {
  std::string manifest;
  std::string audio_root;
  bool dump_contours = false;
};

void CmdFeatures(const FeaturesOptions& o, const CommonOptions& c, Run& run) {
  const auto records = ReadManifest(o.manifest);
  const FeatureExtraction fx =
      ExtractFeatures(records, o.audio_root, c.threads, o.dump_contours);
  std::vector<Json> rows;
  rows.reserve(fx.lines.size());
  for (const auto& f : fx.lines) rows.push_back(ToJson(f));
  WriteJsonl(run.Path("features.jsonl"), run.Header("features"), rows);
  std::vector<Json> skipped;
  for (const auto& s : fx.skipped) {
    run.log().warn("skipped {}: {}", s.word_id, s.reason);
    skipped.push_back({{"word_id", s.word_id}, {"reason", s.reason}});
  }
  WriteJsonl(run.Path("skipped.jsonl"), run.Header("skipped"), skipped);
  if (o.dump_contours) {
    WriteJsonl(run.Path("contours.jsonl"), run.Header("contours"),
               fx.contours);
  }
  run.log().info("{} nucleus lines from {} words, {} words skipped",
                 fx.lines.size(), records.size() - fx.skipped.size(),
                 fx.skipped.size());
}

// --- train ------------------------------------------------------------------

struct SvmCliOptions {
  double c = 10.0;
  std::string gamma = "scale";
  std::string kernel = "rbf";
  double tol = 1e-3;
  int max_passes = 10000;
  bool no_standardize = false;
};

void AddSvmOptions(CLI::App* sub, SvmCliOptions& o) {
  sub->add_option("--C", o.c, "Soft-margin constant")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--gamma", o.gamma, "RBF width, or \"scale\"")
      ->capture_default_str();
  sub->add_option("--kernel", o.kernel, "rbf or linear")
      ->capture_default_str()
      ->check(CLI::IsMember({"rbf", "linear"}));
  sub->add_option("--tol", o.tol, "KKT tolerance")->capture_default_str();
  sub->add_option("--max-passes", o.max_passes,
                  "Iteration cap in multiples of the instance count")
      ->capture_default_str();
  sub->add_flag("--no-standardize", o.no_standardize,
                "Feed raw features to the kernel");
}

TrainOptions ToTrainOptions(const SvmCliOptions& o, uint64_t seed) {
  TrainOptions t;
  t.c = o.c;
  if (o.gamma != "scale") {
    try {
      t.gamma = std::stod(o.gamma);
    } catch (const std::exception&) {
      throw InvalidArgument("--gamma must be a number or \"scale\"");
    }
  }
  t.kernel = ParseKernel(o.kernel);
  t.tol = o.tol;
  t.max_passes = o.max_passes;
  t.seed = seed;
  t.standardize = !o.no_standardize;
  return t;
}

struct TrainCliOptions {
  std::string features;
  SvmCliOptions svm;
  bool grid = false;
  double dev_fraction = 0.2;
};

void CmdTrain(const TrainCliOptions& o, const CommonOptions& c, Run& run) {
  const auto lines = ReadFeatures(o.features);
  const auto data = ToTrainInstances(lines);
  const TrainOptions opts = ToTrainOptions(o.svm, c.seed);
  if (o.grid) {
    // Word-level holdout drawn with the run seed.
    std::vector<std::string> ids;
    for (const auto& w : GroupByWord(data)) ids.push_back(w.word_id);
    std::mt19937_64 rng(c.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_dev = static_cast<size_t>(
        std::llround(o.dev_fraction * static_cast<double>(ids.size())));
    std::set<std::string> dev_ids(ids.begin(),
                                  ids.begin() + static_cast<long>(n_dev));
    std::vector<TrainInstance> train_part, dev_part;
    for (const auto& inst : data) {
      (dev_ids.count(inst.word_id) ? dev_part : train_part).push_back(inst);
    }
    const std::vector<KernelType> kernels = {KernelType::kRbf,
                                             KernelType::kLinear};
    const std::vector<double> cs = {0.1, 1.0, 10.0, 100.0};
    const auto grid = GridSearch(train_part, dev_part, kernels, cs, opts);
    std::ostringstream csv;
    csv << run.TextHeader("grid") << "kernel,C,dev_word_accuracy\n";
    for (const auto& g : grid) {
      csv << KernelName(g.kernel) << ',' << g.c << ','
          << FormatFixed(g.word_accuracy, 6) << '\n';
      run.log().info("grid {} C={} dev accuracy {:.4f}", KernelName(g.kernel),
                     g.c, g.word_accuracy);
    }
    run.WriteText("grid.csv", csv.str());
  }
  TrainReport report;
  bool platt_ok = false;
  const SvmModel model = TrainWithPlatt(data, opts, &report, &platt_ok);
  if (!report.converged) {
    run.log().warn("SMO stopped at the iteration cap ({} iterations)",
                   report.iterations);
  }
  if (!platt_ok) run.log().warn("Platt fit failed; model has no calibration");
  SaveModel(run.Path("model.json"), model);
  run.WriteJson("train_report.json",
                {{"_header", run.JsonHeader("train_report")},
                 {"instances", data.size()},
                 {"iterations", report.iterations},
                 {"converged", report.converged},
                 {"max_kkt_violation", report.max_kkt_violation},
                 {"dual_objective", report.dual_objective},
                 {"support_vectors", report.num_support_vectors},
                 {"gamma", model.gamma},
                 {"C", model.c},
                 {"kernel", KernelName(model.kernel)},
                 {"platt", platt_ok}});
  run.log().info("trained on {} instances: {} support vectors", data.size(),
                 report.num_support_vectors);
}

// --- predict ----------------------------------------------------------------

void WritePredictions(Run& run, const std::vector<PredictionRecord>& preds) {
  std::vector<Json> rows;
  rows.reserve(preds.size());
  for (const auto& p : preds) rows.push_back(ToJson(p));
  WriteJsonl(run.Path("predictions.jsonl"), run.Header("predictions"), rows);
}

void CmdPredict(const std::string& model_path, const std::string& features,
                Run& run) {
  const SvmModel model = LoadModel(model_path);
  auto preds = PredictFromFeatures(model, ReadFeatures(features));
  std::stable_sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
    return a.word_id < b.word_id;
  });
  WritePredictions(run, preds);
  run.log().info("{} word predictions", preds.size());
}

// --- encode / decode ----------------------------------------------------------

void CmdEncode(const std::string& manifest, Run& run) {
  std::vector<Json> rows;
  size_t warnings = 0;
  for (const auto& w : ReadManifest(manifest)) {
    if (!w.stress_index) {
      run.log().warn("{}: no gold stress, not encoded", w.word_id);
      continue;
    }
    const FrameLabelSeq seq = EncodeLabels(w);
    if (seq.empty_nucleus_warning) {
      ++warnings;
      run.log().warn("{}: stressed nucleus holds no frame midpoint",
                     w.word_id);
    }
    rows.push_back(ToJson(seq));
  }
  WriteJsonl(run.Path("labels.jsonl"), run.Header("frame_labels"), rows);
  run.log().info("{} label sequences, {} all-zero", rows.size(), warnings);
}

void CmdDecode(const std::string& logits_path, const std::string& manifest,
               Run& run) {
  std::map<std::string, WordRecord> words;
  for (auto& w : ReadManifest(manifest)) words.emplace(w.word_id, std::move(w));
  std::vector<PredictionRecord> preds;
  for (const auto& seq : ReadLogits(logits_path)) {
    const auto it = words.find(seq.word_id);
    if (it == words.end()) {
      throw InvalidArgument("logits for unknown word " + seq.word_id);
    }
    preds.push_back(DecodeLogits(seq, it->second));
  }
  std::stable_sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
    return a.word_id < b.word_id;
  });
  if (preds.size() != words.size()) {
    run.log().warn("{} manifest words have no logits",
                   words.size() - preds.size());
  }
  WritePredictions(run, preds);
  run.log().info("{} decoded words", preds.size());
}

// --- eval -------------------------------------------------------------------

struct EvalOptions {
  std::string predictions;
  std::string tag;
  double level = 0.95;
  int resamples = 10000;
};

void CmdEval(const EvalOptions& o, const CommonOptions& c, Run& run) {
  const auto preds = ReadPredictions(o.predictions);
  EvalReport report = WordAccuracy(preds);
  report.tag = o.tag;
  const auto ci = BootstrapCi(CorrectnessVector(preds), o.level, o.resamples,
                              c.seed);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  const ConfusionMatrix cm = BuildConfusionMatrix(preds);
  const auto pct = cm.RowPercentages();

  Json counts = Json::array();
  for (const auto& row : cm.counts) counts.push_back(row);
  run.WriteJson("report.json",
                {{"_header", run.JsonHeader("eval_report")},
                 {"tag", report.tag},
                 {"n_words", report.n_words},
                 {"n_correct", report.n_correct},
                 {"accuracy", report.accuracy},
                 {"ci_level", o.level},
                 {"ci_low", report.ci_low},
                 {"ci_high", report.ci_high},
                 {"resamples", o.resamples},
                 {"confusion",
                  {{"max_position", cm.max_position},
                   {"counts", counts},
                   {"row_percent", pct}}}});

  std::ostringstream txt;
  txt << run.TextHeader("eval_report");
  txt << std::left << std::setw(12) << "tag" << std::setw(10) << "words"
      << std::setw(10) << "accuracy" << "ci" << '\n';
  txt << std::setw(12) << (report.tag.empty() ? "-" : report.tag)
      << std::setw(10) << report.n_words << std::setw(10)
      << FormatFixed(100.0 * report.accuracy, 1) << '['
      << FormatFixed(100.0 * report.ci_low, 1) << ", "
      << FormatFixed(100.0 * report.ci_high, 1) << "]\n\n";
  txt << "confusion (rows: gold position, columns: predicted, % of row)\n";
  txt << std::setw(8) << "gold";
  for (int k = 1; k <= cm.max_position; ++k) {
    txt << std::right << std::setw(8) << k;
  }
  txt << std::right << std::setw(8) << "n" << '\n';
  for (size_t g = 0; g < cm.counts.size(); ++g) {
    size_t n = 0;
    for (size_t v : cm.counts[g]) n += v;
    txt << std::left << std::setw(8) << g + 1;
    for (double p : pct[g]) txt << std::right << std::setw(8) << FormatFixed(p, 1);
    txt << std::right << std::setw(8) << n << '\n';
  }
  run.WriteText("report.txt", txt.str());

  std::ostringstream csv;
  csv << "gold\\predicted";
  for (int k = 1; k <= cm.max_position; ++k) csv << ',' << k;
  csv << '\n';
  for (size_t g = 0; g < cm.counts.size(); ++g) {
    csv << g + 1;
    for (size_t v : cm.counts[g]) csv << ',' << v;
    csv << '\n';
  }
  run.WriteText("confusion.csv", csv.str());
  std::ostringstream pcsv;
  pcsv << "gold\\predicted";
  for (int k = 1; k <= cm.max_position; ++k) pcsv << ',' << k;
  pcsv << '\n';
  for (size_t g = 0; g < pct.size(); ++g) {
    pcsv << g + 1;
    for (double p : pct[g]) pcsv << ',' << FormatFixed(p, 4);
    pcsv << '\n';
  }
  run.WriteText("confusion_percent.csv", pcsv.str());
  run.log().info("accuracy {:.4f} [{:.4f}, {:.4f}] over {} words",
                 report.accuracy, report.ci_low, report.ci_high,
                 report.n_words);
}

// --- agree ------------------------------------------------------------------

void CmdAgree(const std::vector<std::string>& manifests, Run& run) {
  if (manifests.size() < 2) {
    throw InvalidArgument("agree needs at least two annotation manifests");
  }
  std::vector<std::map<std::string, int>> choices;
  std::map<std::string, std::vector<int>> units;
  for (const auto& path : manifests) {
    std::map<std::string, int> m;
    for (const auto& w : ReadManifest(path)) {
      if (!w.stress_index) continue;
      m[w.word_id] = *w.stress_index;
      units[w.word_id].push_back(*w.stress_index);
    }
    choices.push_back(std::move(m));
  }
  AgreementReport report;
  report.observed_agreement = ObservedAgreement(choices[0], choices[1]);
  for (const auto& [id, v] : units) {
    if (v.size() >= 2) ++report.n_items;
  }
  report.alpha = KrippendorffAlpha(units);
  Json pairwise = Json::array();
  for (size_t a = 0; a < choices.size(); ++a) {
    for (size_t b = a + 1; b < choices.size(); ++b) {
      pairwise.push_back({{"a", manifests[a]},
                          {"b", manifests[b]},
                          {"observed_agreement",
                           ObservedAgreement(choices[a], choices[b])}});
    }
  }
  run.WriteJson("agreement.json",
                {{"_header", run.JsonHeader("agreement")},
                 {"n_items", report.n_items},
                 {"observed_agreement", report.observed_agreement},
                 {"alpha", report.alpha ? Json(*report.alpha) : Json(nullptr)},
                 {"alpha_status", report.alpha ? "ok" : "undefined"},
                 {"pairwise", pairwise}});
  std::ostringstream txt;
  txt << run.TextHeader("agreement") << std::left << std::setw(24)
      << "items (>=2 annotations)" << report.n_items << '\n'
      << std::setw(24) << "observed agreement"
      << FormatFixed(100.0 * report.observed_agreement, 1) << "%\n"
      << std::setw(24) << "Krippendorff alpha"
      << (report.alpha ? FormatFixed(*report.alpha, 3) : "undefined") << '\n';
  run.WriteText("agreement.txt", txt.str());
  run.log().info("observed agreement {:.4f}; alpha {}",
                 report.observed_agreement,
                 report.alpha ? FormatFixed(*report.alpha, 4) : "undefined");
}

// --- analyze ----------------------------------------------------------------

void CmdAnalyze(const std::string& train_path,
                const std::vector<std::string>& test_paths, size_t min_count,
                Run& run) {
  const auto train = ReadManifest(train_path);
  const StressVariation var = AnalyzeStressVariation(train, min_count);
  Json j = {{"_header", run.JsonHeader("analysis")},
            {"stress_variation",
             {{"manifest", train_path},
              {"min_count", min_count},
              {"eligible_words", var.eligible_words},
              {"varying_fraction", var.varying_fraction},
              {"varying_words", var.varying_words}}}};
  std::ostringstream txt;
  txt << run.TextHeader("analysis");
  txt << "stress variation (forms with >= " << min_count << " occurrences)\n"
      << "  eligible " << var.eligible_words << ", varying "
      << var.varying_words.size() << " ("
      << FormatFixed(100.0 * var.varying_fraction, 1) << "%)\n";
  Json overlaps = Json::array();
  if (!test_paths.empty()) {
    txt << "\n" << std::left << std::setw(28) << "test set" << std::setw(10)
        << "forms" << std::setw(16) << "overlap" << "unseen stress\n";
  }
  for (const auto& path : test_paths) {
    const auto test = ReadManifest(path);
    const CrosslingualOverlap o = AnalyzeCrosslingualOverlap(train, test);
    overlaps.push_back({{"manifest", path},
                        {"test_forms", o.test_forms},
                        {"overlap_words", o.overlap_words},
                        {"overlap_pct", o.overlap_pct},
                        {"unseen_stress_words", o.unseen_stress_words},
                        {"unseen_pct", o.unseen_pct}});
    txt << std::setw(28) << fs::path(path).stem().string() << std::setw(10)
        << o.test_forms << std::setw(16)
        << (std::to_string(o.overlap_words) + " (" +
            FormatFixed(100.0 * o.overlap_pct, 0) + "%)")
        << o.unseen_stress_words << " (" << FormatFixed(100.0 * o.unseen_pct, 0)
        << "%)\n";
  }
  j["crosslingual_overlap"] = overlaps;
  run.WriteJson("analysis.json", j);
  run.WriteText("analysis.txt", txt.str());
}

// --- split ------------------------------------------------------------------

void CmdSplit(const std::string& manifest, double fraction,
              const CommonOptions& c, Run& run) {
  const auto records = ReadManifest(manifest);
  const SpeakerSplit split = SplitSpeakers(records, fraction, c.seed);
  WriteManifest(run.Path("train.jsonl"), split.train, run.Header("manifest"));
  WriteManifest(run.Path("test.jsonl"), split.test, run.Header("manifest"));
  auto speakers = [](const std::vector<WordRecord>& rs) {
    std::set<std::string> s;
    for (const auto& r : rs) s.insert(r.speaker_id);
    return std::vector<std::string>(s.begin(), s.end());
  };
  run.WriteJson("split.json",
                {{"_header", run.JsonHeader("split")},
                 {"test_fraction", fraction},
                 {"train_words", split.train.size()},
                 {"test_words", split.test.size()},
                 {"test_share", static_cast<double>(split.test.size()) /
                                    static_cast<double>(records.size())},
                 {"test_gender_imbalance", GenderImbalance(split.test)},
                 {"train_speakers", speakers(split.train)},
                 {"test_speakers", speakers(split.test)}});
}

// --- curve ------------------------------------------------------------------

struct CurveCliOptions {
  std::string train_features;
  std::vector<std::string> test_features;
  std::vector<int> sizes = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  int repeats = 10;
  std::string manifest;
  SvmCliOptions svm;
};

void CmdCurve(const CurveCliOptions& o, const CommonOptions& c, Run& run) {
  const auto train = ReadFeatures(o.train_features);
  std::vector<TestSet> tests;
  for (const auto& path : o.test_features) {
    tests.push_back({fs::path(path).stem().string(), ReadFeatures(path)});
  }
  if (tests.empty()) throw InvalidArgument("curve needs --test-features");
  // Distinct tags even when files share a stem.
  for (size_t k = 0; k < tests.size(); ++k) {
    for (size_t j = 0; j < k; ++j) {
      if (tests[j].tag == tests[k].tag) tests[k].tag += "_" + std::to_string(k);
    }
  }
  const CurveResult result = RunLearningCurve(
      train, tests, o.sizes, o.repeats, c.seed, ToTrainOptions(o.svm, c.seed));
  for (int s : result.skipped_sizes) {
    run.log().warn("size {} exceeds the training words; row skipped", s);
  }
  run.WriteText("curve.csv", run.TextHeader("curve") + CurveCsv(result, tests));

  if (!o.manifest.empty()) {
    // Subsets for the externally trained transformer leg.
    std::map<std::string, WordRecord> words;
    for (auto& w : ReadManifest(o.manifest)) words.emplace(w.word_id, w);
    fs::create_directories(run.dir() / "subsets");
    for (const auto& p : result.points) {
      std::vector<WordRecord> subset;
      for (const auto& id : p.sampled_word_ids) {
        if (auto it = words.find(id); it != words.end()) {
          subset.push_back(it->second);
        }
      }
      char name[64];
      std::snprintf(name, sizeof(name), "subsets/size_%04d_rep_%02d.jsonl",
                    p.train_size, p.repeat);
      WriteManifest(run.Path(name), subset, run.Header("manifest_subset"));
    }
  }
  for (const auto& s : result.summary) {
    run.log().info("size {}: mean accuracy {:.4f} (sd {:.4f}) on {}",
                   s.train_size, s.mean.front(), s.sd.front(),
                   tests.front().tag);
  }
}

// --- synth ------------------------------------------------------------------

void CmdSynth(const SynthOptions& o, Run& run) {
  const auto files = WriteSyntheticCorpus(o, run.dir().string());
  run.log().info("{} synthetic recordings, {} words", files.size(),
                 o.num_words);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Primary-stress detection toolkit", "stresskit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key = value option file");
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions common;
  IngestOptions ingest;
  FeaturesOptions features;
  TrainCliOptions train;
  std::string model_path, predict_features, encode_manifest, logits_path,
      decode_manifest, analyze_train, split_manifest;
  EvalOptions eval;
  std::vector<std::string> agree_manifests, analyze_tests;
  size_t min_count = 5;
  double test_fraction = 0.2;
  CurveCliOptions curve;
  SynthOptions synth;

  auto* sub = app.add_subcommand("ingest", "Build a word manifest from TextGrids");
  AddCommon(sub, common);
  sub->add_option("--textgrid", ingest.textgrids, "TextGrid files")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--wav", ingest.wavs, "Recordings, paired with --textgrid")
      ->required();
  sub->add_option("--word-tier", ingest.word_tier)->capture_default_str();
  sub->add_option("--nucleus-tier", ingest.nucleus_tier)->capture_default_str();
  sub->add_option("--stress-tier", ingest.stress_tier,
                  "Tier marking the stressed nucleus");
  sub->add_option("--error-symbols", ingest.error_symbols,
                  "Nucleus label characters that reject a word")
      ->capture_default_str();
  sub->add_option("--speaker-map", ingest.speaker_map,
                  "TSV: audio stem, speaker id, gender")
      ->check(CLI::ExistingFile);
  sub->add_option("--dataset", ingest.dataset);
  sub->add_option("--gender", ingest.gender, "Gender when not in the map")
      ->capture_default_str();

  sub = app.add_subcommand("features", "Extract nucleus prominence features");
  AddCommon(sub, common);
  sub->add_option("--manifest", features.manifest)->required()->check(CLI::ExistingFile);
  sub->add_option("--audio-root", features.audio_root,
                  "Prefix for relative audio paths");
  sub->add_flag("--dump-contours", features.dump_contours);

  sub = app.add_subcommand("train", "Train the nucleus SVM");
  AddCommon(sub, common);
  sub->add_option("--features", train.features)->required()->check(CLI::ExistingFile);
  AddSvmOptions(sub, train.svm);
  sub->add_flag("--grid", train.grid,
                "Also score kernel x C on a word-level holdout");
  sub->add_option("--dev-fraction", train.dev_fraction)->capture_default_str();

  sub = app.add_subcommand("predict", "Word-level SVM predictions");
  AddCommon(sub, common);
  sub->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  sub->add_option("--features", predict_features)->required()->check(CLI::ExistingFile);

  sub = app.add_subcommand("encode", "20 ms frame labels for gold stress");
  AddCommon(sub, common);
  sub->add_option("--manifest", encode_manifest)->required()->check(CLI::ExistingFile);

  sub = app.add_subcommand("decode", "Word predictions from frame logits");
  AddCommon(sub, common);
  sub->add_option("--logits", logits_path)->required()->check(CLI::ExistingFile);
  sub->add_option("--manifest", decode_manifest)->required()->check(CLI::ExistingFile);

  sub = app.add_subcommand("eval", "Accuracy, bootstrap CI and confusion");
  AddCommon(sub, common);
  sub->add_option("--predictions", eval.predictions)->required()->check(CLI::ExistingFile);
  sub->add_option("--tag", eval.tag);
  sub->add_option("--level", eval.level)->capture_default_str();
  sub->add_option("--resamples", eval.resamples)->capture_default_str();

  sub = app.add_subcommand("agree", "Inter-annotator agreement");
  AddCommon(sub, common);
  sub->add_option("--annotations", agree_manifests, "Two or more manifests")
      ->required()
      ->check(CLI::ExistingFile);

  sub = app.add_subcommand("analyze", "Stress variation and lexical overlap");
  AddCommon(sub, common);
  sub->add_option("--train", analyze_train)->required()->check(CLI::ExistingFile);
  sub->add_option("--test", analyze_tests)->check(CLI::ExistingFile);
  sub->add_option("--min-count", min_count)->capture_default_str();

  sub = app.add_subcommand("split", "Speaker-disjoint, gender-balanced split");
  AddCommon(sub, common);
  sub->add_option("--manifest", split_manifest)->required()->check(CLI::ExistingFile);
  sub->add_option("--test-fraction", test_fraction)->capture_default_str();

  sub = app.add_subcommand("curve", "Learning-curve harness");
  AddCommon(sub, common);
  sub->add_option("--train-features", curve.train_features)
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--test-features", curve.test_features)
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--sizes", curve.sizes)->capture_default_str();
  sub->add_option("--repeats", curve.repeats)->capture_default_str();
  sub->add_option("--manifest", curve.manifest,
                  "Write the sampled manifest subsets")
      ->check(CLI::ExistingFile);
  AddSvmOptions(sub, curve.svm);

  sub = app.add_subcommand("synth", "Write a synthetic stressed-word corpus");
  AddCommon(sub, common);
  sub->add_option("--words", synth.num_words)->capture_default_str();
  sub->add_option("--speakers", synth.num_speakers)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string name = active->get_name();
  std::optional<Run> run;
  try {
    run.emplace(name, common, err);
    run->WriteText("config.toml", app.config_to_str(true, false));
    if (name == "ingest") {
      CmdIngest(ingest, *run);
    } else if (name == "features") {
      CmdFeatures(features, common, *run);
    } else if (name == "train") {
      CmdTrain(train, common, *run);
    } else if (name == "predict") {
      CmdPredict(model_path, predict_features, *run);
    } else if (name == "encode") {
      CmdEncode(encode_manifest, *run);
    } else if (name == "decode") {
      CmdDecode(logits_path, decode_manifest, *run);
    } else if (name == "eval") {
      CmdEval(eval, common, *run);
    } else if (name == "agree") {
      CmdAgree(agree_manifests, *run);
    } else if (name == "analyze") {
      CmdAnalyze(analyze_train, analyze_tests, min_count, *run);
    } else if (name == "split") {
      CmdSplit(split_manifest, test_fraction, common, *run);
    } else if (name == "curve") {
      CmdCurve(curve, common, *run);
    } else if (name == "synth") {
      synth.seed = common.seed;
      CmdSynth(synth, *run);
    }
  } catch (const std::exception& e) {
    const Json report = {{"command", name}, {"error", e.what()}};
    err << report.dump() << '\n';
    if (run) {
      run->log().error("{}", e.what());
      try {
        run->WriteJson("error.json", report);
      } catch (const std::exception&) {
      }
    }
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace stresskit

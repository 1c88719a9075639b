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

#include "stresskit/svm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "stresskit/error.h"

namespace stresskit {
namespace {

using json = nlohmann::json;

constexpr char kModelFormat[] = "stresskit-svm/1";
constexpr double kTau = 1e-12;

double SquaredDistance(const FeatureVector& u, const FeatureVector& v) {
  double d = 0.0;
  for (size_t k = 0; k < kNumFeatures; ++k) {
    const double t = u[k] - v[k];
    d += t * t;
  }
  return d;
}

double Dot(const FeatureVector& u, const FeatureVector& v) {
  double d = 0.0;
  for (size_t k = 0; k < kNumFeatures; ++k) d += u[k] * v[k];
  return d;
}

// Two-variable SMO on the dual  min 1/2 a'Qa - e'a,  0 <= a <= C, y'a = 0,
// with maximal-violating-pair selection.
class SmoSolver {
 public:
  SmoSolver(const std::vector<FeatureVector>& x, const std::vector<int>& y,
            const SvmModel& kernel, double c, uint64_t seed)
      : x_(x), y_(y), kernel_(kernel), c_(c), n_(x.size()),
        rows_(x.size()), alpha_(x.size(), 0.0), grad_(x.size(), -1.0),
        diag_(x.size()) {
    for (size_t i = 0; i < n_; ++i) diag_[i] = kernel_.Kernel(x_[i], x_[i]);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }

  void Solve(double tol, int64_t max_iter, TrainReport& report) {
    int64_t iter = 0;
    bool converged = false;
    while (iter < max_iter) {
      size_t i = 0;
      size_t j = 0;
      double gap = 0.0;
      if (!SelectPair(i, j, gap) || gap <= tol) {
        converged = true;
        break;
      }
      Update(i, j);
      ++iter;
    }
    report.iterations = iter;
    report.converged = converged;
  }

  double Rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    size_t free = 0;
    for (size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (alpha_[t] >= c_) {
        if (y_[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (y_[t] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free;
        sum += yg;
      }
    }
    return free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
  }

  const std::vector<double>& alpha() const { return alpha_; }

  double DualObjective() const {
    // -(1/2 a'Qa - e'a) with Qa = grad + 1
    double obj = 0.0;
    for (size_t t = 0; t < n_; ++t) {
      obj += alpha_[t] - 0.5 * alpha_[t] * (grad_[t] + 1.0);
    }
    return obj;
  }

 private:
  const std::vector<double>& Row(size_t i) {
    std::vector<double>& row = rows_[i];
    if (row.empty()) {
      row.resize(n_);
      for (size_t t = 0; t < n_; ++t) row[t] = kernel_.Kernel(x_[i], x_[t]);
    }
    return row;
  }

  bool InUp(size_t t) const {
    return (y_[t] == +1 && alpha_[t] < c_) || (y_[t] == -1 && alpha_[t] > 0.0);
  }
  bool InLow(size_t t) const {
    return (y_[t] == -1 && alpha_[t] < c_) || (y_[t] == +1 && alpha_[t] > 0.0);
  }

  // Scans in the seeded order; ties go to the first index visited.
  bool SelectPair(size_t& i, size_t& j, double& gap) const {
    double m = -std::numeric_limits<double>::infinity();
    double big_m = std::numeric_limits<double>::infinity();
    bool have_i = false;
    bool have_j = false;
    for (size_t t : order_) {
      const double v = -y_[t] * grad_[t];
      if (InUp(t) && v > m) {
        m = v;
        i = t;
        have_i = true;
      }
      if (InLow(t) && v < big_m) {
        big_m = v;
        j = t;
        have_j = true;
      }
    }
    if (!have_i || !have_j) return false;
    gap = m - big_m;
    return true;
  }

  void Update(size_t i, size_t j) {
    const std::vector<double>& ki = Row(i);
    const std::vector<double>& kj = Row(j);
    const double yi = y_[i];
    const double yj = y_[j];
    const double qij = yi * yj * ki[j];
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = diag_[i] + diag_[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = diag_[i] + diag_[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (size_t t = 0; t < n_; ++t) {
      grad_[t] += y_[t] * (yi * ki[t] * di + yj * kj[t] * dj);
    }
  }

  const std::vector<FeatureVector>& x_;
  const std::vector<int>& y_;
  const SvmModel& kernel_;
  const double c_;
  const size_t n_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<double> diag_;
  std::vector<size_t> order_;
};

json VectorJson(const FeatureVector& v) {
  return json(std::vector<double>(v.begin(), v.end()));
}

FeatureVector VectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != kNumFeatures) {
    throw ParseError("model vector has " + std::to_string(values.size()) +
                         " entries, expected " + std::to_string(kNumFeatures),
                     0);
  }
  FeatureVector v{};
  std::copy(values.begin(), values.end(), v.begin());
  return v;
}

}  // namespace

std::string_view KernelName(KernelType k) {
  return k == KernelType::kRbf ? "rbf" : "linear";
}

KernelType ParseKernel(std::string_view name) {
  if (name == "rbf") return KernelType::kRbf;
  if (name == "linear") return KernelType::kLinear;
  throw InvalidArgument("unknown kernel \"" + std::string(name) + "\"");
}

Scaler Scaler::Identity() {
  Scaler s;
  s.means.fill(0.0);
  s.sds.fill(1.0);
  return s;
}

Scaler Scaler::Fit(std::span<const FeatureVector> rows) {
  Scaler s = Identity();
  if (rows.empty()) return s;
  const auto n = static_cast<double>(rows.size());
  for (size_t k = 0; k < kNumFeatures; ++k) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[k];
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) var += (r[k] - mean) * (r[k] - mean);
    var /= n;
    s.means[k] = mean;
    const double sd = std::sqrt(var);
    s.sds[k] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureVector Scaler::Apply(const FeatureVector& x) const {
  FeatureVector z{};
  for (size_t k = 0; k < kNumFeatures; ++k) z[k] = (x[k] - means[k]) / sds[k];
  return z;
}

double SvmModel::Kernel(const FeatureVector& u, const FeatureVector& v) const {
  if (kernel == KernelType::kLinear) return Dot(u, v);
  return std::exp(-gamma * SquaredDistance(u, v));
}

double SvmModel::DecisionValueScaled(const FeatureVector& z) const {
  double f = bias;
  for (size_t i = 0; i < support_vectors.size(); ++i) {
    f += dual_coefs[i] * Kernel(z, support_vectors[i]);
  }
  return f;
}

double SvmModel::DecisionValue(const FeatureVector& x) const {
  return DecisionValueScaled(scaler.Apply(x));
}

double ScaleGamma(std::span<const FeatureVector> standardized) {
  if (standardized.empty()) return 1.0 / kNumFeatures;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& r : standardized) {
    for (double v : r) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double count = static_cast<double>(standardized.size() * kNumFeatures);
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  return var > 0.0 ? 1.0 / (kNumFeatures * var) : 1.0;
}

SvmModel TrainSvm(std::span<const TrainInstance> data,
                  const TrainOptions& options, TrainReport* report) {
  if (data.size() < 2) {
    throw TrainingError("training needs at least two instances");
  }
  if (!(options.c > 0.0)) throw TrainingError("C must be positive");
  if (options.gamma && !(*options.gamma > 0.0)) {
    throw TrainingError("gamma must be positive");
  }
  std::vector<FeatureVector> raw;
  std::vector<int> y;
  raw.reserve(data.size());
  y.reserve(data.size());
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& inst : data) {
    const FeatureVector v = inst.features.ToArray();
    for (double f : v) {
      if (!std::isfinite(f)) {
        throw TrainingError("non-finite feature in word " + inst.word_id +
                            " (nucleus " +
                            std::to_string(inst.nucleus_index) + ")");
      }
    }
    raw.push_back(v);
    y.push_back(inst.label == 1 ? +1 : -1);
    (inst.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw TrainingError("training data holds a single class");
  }

  SvmModel model;
  model.kernel = options.kernel;
  model.c = options.c;
  model.scaler = options.standardize ? Scaler::Fit(raw) : Scaler::Identity();
  std::vector<FeatureVector> x;
  x.reserve(raw.size());
  for (const auto& r : raw) x.push_back(model.scaler.Apply(r));
  model.gamma = options.gamma ? *options.gamma : ScaleGamma(x);

  SmoSolver solver(x, y, model, options.c, options.seed);
  TrainReport local;
  const int64_t max_iter = static_cast<int64_t>(std::max(options.max_passes, 1)) *
                           static_cast<int64_t>(std::max<size_t>(x.size(), 100));
  solver.Solve(options.tol, max_iter, local);

  model.bias = -solver.Rho();
  const auto& alpha = solver.alpha();
  for (size_t i = 0; i < x.size(); ++i) {
    if (alpha[i] > 0.0) {
      model.support_vectors.push_back(x[i]);
      model.dual_coefs.push_back(std::min(alpha[i], options.c) * y[i]);
    }
  }
  local.dual_objective = solver.DualObjective();
  local.num_support_vectors = model.support_vectors.size();

  // Explicit KKT check with the final bias.
  double worst = 0.0;
  for (size_t t = 0; t < x.size(); ++t) {
    const double margin = y[t] * model.DecisionValueScaled(x[t]);
    double v = 0.0;
    if (alpha[t] <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (alpha[t] >= options.c) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::fabs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  local.max_kkt_violation = worst;
  if (report != nullptr) *report = local;
  return model;
}

PlattParams PlattFit(std::span<const double> decisions,
                     std::span<const int> labels) {
  if (decisions.size() != labels.size()) {
    throw InvalidArgument("decisions and labels differ in length");
  }
  double prior1 = 0.0;
  double prior0 = 0.0;
  for (int l : labels) (l == 1 ? prior1 : prior0) += 1.0;
  if (prior1 == 0.0 || prior0 == 0.0) {
    throw InvalidArgument("Platt fit needs both classes");
  }
  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const size_t n = decisions.size();
  std::vector<double> t(n);
  for (size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z))
                  : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  double gnorm = 0.0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      double p = 0.0;
      double q = 0.0;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    gnorm = std::hypot(g1, g2);
    if (std::fabs(g1) < kEps && std::fabs(g2) < kEps) return {a, b};

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    // No descent possible: the objective is flat to machine precision.
    if (!moved) return {a, b};
  }
  throw ConvergenceError("Platt fit did not converge in 100 iterations "
                         "(gradient norm " + std::to_string(gnorm) + ")",
                         gnorm);
}

double PlattProbability(const PlattParams& p, double decision) {
  const double z = p.a * decision + p.b;
  return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

int ArgmaxFirst(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("argmax over an empty sequence");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<int>(best);
}

WordPrediction PredictWord(const SvmModel& model,
                           std::span<const NucleusFeatures> nuclei) {
  if (nuclei.empty()) throw InvalidArgument("word has no nuclei");
  WordPrediction out;
  out.scores.reserve(nuclei.size());
  for (const auto& n : nuclei) out.scores.push_back(model.DecisionValue(n));
  out.predicted_index = ArgmaxFirst(out.scores);
  return out;
}

std::string SerializeModel(const SvmModel& model) {
  json j;
  j["format"] = kModelFormat;
  j["kernel"] = KernelName(model.kernel);
  j["C"] = model.c;
  j["gamma"] = model.gamma;
  j["bias"] = model.bias;
  j["scaler"] = {{"means", VectorJson(model.scaler.means)},
                 {"sds", VectorJson(model.scaler.sds)}};
  j["feature_names"] = std::vector<std::string>(kFeatureNames.begin(),
                                                kFeatureNames.end());
  json svs = json::array();
  for (const auto& sv : model.support_vectors) svs.push_back(VectorJson(sv));
  j["support_vectors"] = std::move(svs);
  j["dual_coefs"] = model.dual_coefs;
  if (model.platt) {
    j["platt"] = {{"A", model.platt->a}, {"B", model.platt->b}};
  } else {
    j["platt"] = nullptr;
  }
  return j.dump(1) + "\n";
}

SvmModel ParseModel(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not JSON: ") + e.what(), 0);
  }
  if (!j.contains("format") || j["format"] != kModelFormat) {
    throw ParseError(std::string("unsupported model format, expected ") +
                         kModelFormat,
                     0);
  }
  try {
    SvmModel m;
    m.kernel = ParseKernel(j.at("kernel").get<std::string>());
    m.c = j.at("C").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.bias = j.at("bias").get<double>();
    m.scaler.means = VectorFromJson(j.at("scaler").at("means"));
    m.scaler.sds = VectorFromJson(j.at("scaler").at("sds"));
    for (const auto& sv : j.at("support_vectors")) {
      m.support_vectors.push_back(VectorFromJson(sv));
    }
    m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    if (m.dual_coefs.size() != m.support_vectors.size() ||
        m.dual_coefs.empty()) {
      throw ParseError("support vector / coefficient count mismatch", 0);
    }
    if (j.contains("platt") && !j["platt"].is_null()) {
      m.platt = PlattParams{j["platt"].at("A").get<double>(),
                            j["platt"].at("B").get<double>()};
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what(), 0);
  }
}

void SaveModel(const std::string& path, const SvmModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << SerializeModel(model);
}

SvmModel LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseModel(buf.str());
}

std::vector<WordInstances> GroupByWord(std::span<const TrainInstance> data) {
  std::vector<WordInstances> words;
  std::map<std::string, size_t> slot;
  std::vector<std::vector<const TrainInstance*>> members;
  for (const auto& inst : data) {
    auto [it, inserted] = slot.emplace(inst.word_id, words.size());
    if (inserted) {
      words.push_back({inst.word_id, {}, std::nullopt});
      members.emplace_back();
    }
    members[it->second].push_back(&inst);
  }
  for (size_t w = 0; w < words.size(); ++w) {
    auto& m = members[w];
    std::stable_sort(m.begin(), m.end(), [](const auto* a, const auto* b) {
      return a->nucleus_index < b->nucleus_index;
    });
    int positives = 0;
    for (size_t k = 0; k < m.size(); ++k) {
      words[w].nuclei.push_back(m[k]->features);
      if (m[k]->label == 1) {
        ++positives;
        words[w].gold_index = static_cast<int>(k);
      }
    }
    if (positives != 1) words[w].gold_index.reset();
  }
  return words;
}

std::vector<GridPoint> GridSearch(std::span<const TrainInstance> train,
                                  std::span<const TrainInstance> dev,
                                  std::span<const KernelType> kernels,
                                  std::span<const double> cs,
                                  const TrainOptions& base) {
  const auto dev_words = GroupByWord(dev);
  std::vector<GridPoint> grid;
  for (KernelType kernel : kernels) {
    for (double c : cs) {
      TrainOptions opts = base;
      opts.kernel = kernel;
      opts.c = c;
      const SvmModel model = TrainSvm(train, opts);
      size_t scored = 0;
      size_t correct = 0;
      for (const auto& w : dev_words) {
        if (!w.gold_index) continue;
        ++scored;
        if (PredictWord(model, w.nuclei).predicted_index == *w.gold_index) {
          ++correct;
        }
      }
      grid.push_back({kernel, c,
                      scored > 0 ? static_cast<double>(correct) / scored : 0.0});
    }
  }
  return grid;
}

}  // namespace stresskit

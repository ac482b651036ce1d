//
// Copyright 2026 The vdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "vdm/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "vdm/baselines.h"
#include "vdm/neural_min.h"
#include "vdm/pat.h"
#include "vdm/random.h"

namespace vdm::eval {
namespace {

using nlohmann::json;

// Evaluation seeds depend only on the sweep seed, so one g always scores the
// same whichever spec produced it.
constexpr std::uint64_t kClassifierSalt = 0xc1a55;
constexpr std::uint64_t kAdversarySalt = 0xad5;

// Runs fn(0..n-1) on `threads` workers that pull the next index as they free
// up.
void ParallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

absl::StatusOr<int> IntParam(const json& params, const char* key,
                             std::optional<int> fallback = std::nullopt) {
  if (!params.contains(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(absl::StrCat("missing parameter ", key));
  }
  if (!params[key].is_number_integer()) {
    return absl::InvalidArgumentError(absl::StrCat("parameter ", key, " must be an integer"));
  }
  return params[key].get<int>();
}

absl::StatusOr<double> RealParam(const json& params, const char* key,
                                 std::optional<double> fallback = std::nullopt) {
  if (!params.contains(key)) {
    if (fallback.has_value()) return *fallback;
    return absl::InvalidArgumentError(absl::StrCat("missing parameter ", key));
  }
  if (!params[key].is_number()) {
    return absl::InvalidArgumentError(absl::StrCat("parameter ", key, " must be a number"));
  }
  return params[key].get<double>();
}

std::string FingerprintHex(std::uint64_t h) { return absl::StrFormat("%016x", h); }

json ClassifierJson(const ClassifierErrors& c) {
  return {{"val", c.val}, {"test", c.test}};
}

json AdversaryJson(const AdversaryErrors& a) {
  return {{"names", a.names},
          {"val", a.val},
          {"test", a.test},
          {"baseline_test", a.baseline_test},
          {"mean_val", a.mean_val},
          {"mean_test", a.mean_test},
          {"mean_baseline_test", a.mean_baseline_test},
          {"mask_violations", a.mask_violations}};
}

std::string Num(double x) { return absl::StrFormat("%.6f", x); }

}  // namespace

absl::StatusOr<ClassifierErrors> UtilityRisk(const Generalization& g,
                                             const DatasetView& data,
                                             const nn::TrainSchedule& schedule) {
  absl::StatusOr<DatasetView> z = Apply(g, data);
  if (!z.ok()) return z.status();
  const DatasetView train = z->Part(Split::kTrain);
  const DatasetView val = z->Part(Split::kVal);
  const DatasetView test = z->Part(Split::kTest);
  if (train.num_rows() == 0 || val.num_rows() == 0 || test.num_rows() == 0) {
    return absl::FailedPreconditionError("evaluation needs train, val and test rows");
  }
  absl::StatusOr<nn::FitResult> fit = nn::TrainClassifier(train, val, schedule);
  if (!fit.ok()) return fit.status();
  const std::vector<int> predicted = nn::Argmax(fit->net.Predict(nn::FeatureMatrix(test)));
  return ClassifierErrors{fit->val_error, nn::ErrorRate(predicted, nn::Labels(test))};
}

absl::StatusOr<AdversaryErrors> PrivacyRisk(const Generalization& g,
                                            const DatasetView& data,
                                            const adversaries::AdversaryOptions& options) {
  AdversaryErrors out;
  if (g.schema().personal().empty()) return out;
  // One breach holding the val rows followed by the test rows; errors are
  // split afterwards.
  const std::vector<std::size_t> val_rows = data.RowsIn(Split::kVal);
  std::vector<std::size_t> rows = val_rows;
  const std::vector<std::size_t> test_rows = data.RowsIn(Split::kTest);
  rows.insert(rows.end(), test_rows.begin(), test_rows.end());
  if (val_rows.empty() || test_rows.empty()) {
    return absl::FailedPreconditionError("evaluation needs val and test rows");
  }
  adversaries::BreachScenario s;
  s.g = g;
  s.prior = data.Part(Split::kTrain);
  s.prior_val = data.Part(Split::kVal);
  s.breach = data.Subset(rows);
  absl::StatusOr<adversaries::ReconstructionReport> report =
      adversaries::A1Reconstruct(s, options);
  if (!report.ok()) return report.status();
  const std::size_t nv = val_rows.size();
  for (const adversaries::AttributeReport& a : report->attributes) {
    std::size_t wrong_val = 0, wrong_test = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool wrong =
          a.predictions[i] != ReferenceClass(g.schema()[a.attribute], s.breach.value(i, a.attribute));
      (i < nv ? wrong_val : wrong_test) += wrong;
    }
    std::size_t base_wrong = 0;
    {
      // The majority-class error restricted to the test rows.
      std::vector<int> count(ReferenceCardinality(g.schema()[a.attribute]), 0);
      for (std::size_t r = 0; r < s.prior.num_rows(); ++r) {
        ++count[ReferenceClass(g.schema()[a.attribute], s.prior.value(r, a.attribute))];
      }
      const int majority =
          static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
      for (std::size_t i = nv; i < rows.size(); ++i) {
        base_wrong +=
            ReferenceClass(g.schema()[a.attribute], s.breach.value(i, a.attribute)) != majority;
      }
    }
    out.names.push_back(a.name);
    out.val.push_back(static_cast<double>(wrong_val) / nv);
    out.test.push_back(static_cast<double>(wrong_test) / test_rows.size());
    out.baseline_test.push_back(static_cast<double>(base_wrong) / test_rows.size());
    out.mask_violations += a.mask_violations;
  }
  out.mean_val = Mean(out.val);
  out.mean_test = Mean(out.test);
  out.mean_baseline_test = Mean(out.baseline_test);
  return out;
}

json BucketReport::ToJson() const {
  json attrs = json::array();
  for (const AttributeBuckets& a : attributes) {
    attrs.push_back({{"name", a.name},
                     {"k", a.k},
                     {"c", a.c},
                     {"reduction", a.reduction},
                     {"suppressed", a.suppressed}});
  }
  return {{"attributes", std::move(attrs)},
          {"total_buckets", total_buckets},
          {"num_suppressed", num_suppressed}};
}

BucketReport MakeBucketReport(const Generalization& g, const DatasetView& data) {
  const Schema& schema = g.schema();
  const DatasetView train = data.Part(Split::kTrain);
  BucketReport report;
  for (int a : schema.features()) {
    AttributeBuckets b;
    b.name = schema[a].name;
    const AttributeMap& m = g.map(a);
    if (schema[a].is_discrete()) {
      b.c = schema[a].cardinality;
    } else {
      std::set<double> distinct;
      for (std::size_t r = 0; r < train.num_rows(); ++r) distinct.insert(train.value(r, a));
      b.c = std::max<int>(1, static_cast<int>(distinct.size()));
    }
    b.k = m.passthrough ? b.c : std::min(m.k, b.c);
    b.reduction = 1.0 - static_cast<double>(b.k) / b.c;
    b.suppressed = m.suppressed();
    report.total_buckets += m.passthrough ? 1 : m.k;
    report.num_suppressed += b.suppressed;
    report.attributes.push_back(std::move(b));
  }
  return report;
}

json ParetoPoint::ToJson() const {
  json out = {{"minimizer", minimizer},
              {"params", params},
              {"generalization_file", generalization_file},
              {"fingerprint", FingerprintHex(fingerprint)},
              {"failed", failed}};
  if (failed) {
    out["failure"] = failure;
    return out;
  }
  out["classifier_error"] = ClassifierJson(classifier);
  out["adversary_error"] = AdversaryJson(adversary);
  out["buckets"] = buckets.ToJson();
  return out;
}

absl::StatusOr<ParetoPoint> Evaluate(const Generalization& g, const DatasetView& data,
                                     const EvalOptions& options) {
  ParetoPoint p;
  p.g = g;
  p.fingerprint = g.Fingerprint();
  absl::StatusOr<ClassifierErrors> clf = UtilityRisk(g, data, options.classifier);
  if (!clf.ok()) return clf.status();
  absl::StatusOr<AdversaryErrors> adv = PrivacyRisk(g, data, options.adversary);
  if (!adv.ok()) return adv.status();
  p.classifier = *clf;
  p.adversary = *std::move(adv);
  p.buckets = MakeBucketReport(g, data);
  return p;
}

absl::StatusOr<std::vector<ParetoPoint>> LimitPoints(const DatasetView& data,
                                                     const EvalOptions& options) {
  std::vector<ParetoPoint> out;
  const std::pair<const char*, Generalization> limits[] = {
      {"limit_none", Generalization::Identity(data.schema())},
      {"limit_full", Generalization::Full(data.schema())}};
  for (const auto& [name, g] : limits) {
    absl::StatusOr<ParetoPoint> p = Evaluate(g, data, options);
    if (!p.ok()) return p.status();
    p->minimizer = name;
    out.push_back(*std::move(p));
  }
  return out;
}

std::vector<std::size_t> ParetoFront(const std::vector<ParetoPoint>& points) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].failed) order.push_back(i);
  }
  auto clf = [&](std::size_t i) { return points[i].classifier.val; };
  auto adv = [&](std::size_t i) { return points[i].adversary.mean_val; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clf(a) < clf(b) || (clf(a) == clf(b) && adv(a) > adv(b));
  });
  // Walk groups of equal classifier error. A point is dominated by a strictly
  // better classifier error with adversary error at least as high, or by an
  // equal classifier error with strictly higher adversary error.
  std::vector<std::size_t> front;
  double best_before = -std::numeric_limits<double>::infinity();
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && clf(order[hi]) == clf(order[lo])) ++hi;
    const double group_best = adv(order[lo]);
    for (std::size_t i = lo; i < hi; ++i) {
      const double a = adv(order[i]);
      if (best_before >= a || group_best > a) continue;
      front.push_back(order[i]);
    }
    best_before = std::max(best_before, group_best);
    lo = hi;
  }
  std::sort(front.begin(), front.end());
  return front;
}

absl::Status ValidateSpec(const MinimizerSpec& spec, const Schema& schema) {
  const json& p = spec.params;
  if (!p.is_object()) return absl::InvalidArgumentError("params must be an object");
  if (spec.minimizer == "uniform") {
    absl::StatusOr<int> k = IntParam(p, "k");
    if (!k.ok()) return k.status();
    if (*k < 1) return absl::InvalidArgumentError("uniform k must be at least 1");
  } else if (spec.minimizer == "featsel") {
    if (p.contains("k") && p["k"] == "all") return absl::OkStatus();
    absl::StatusOr<int> k = IntParam(p, "k");
    if (!k.ok()) return k.status();
    if (*k < 0) return absl::InvalidArgumentError("featsel k must be nonnegative");
  } else if (spec.minimizer == "pat") {
    pat::PatConfig config;
    absl::StatusOr<int> leaves = IntParam(p, "max_leaves");
    absl::StatusOr<double> alpha = RealParam(p, "alpha");
    absl::StatusOr<int> min_leaf = IntParam(p, "min_samples_leaf", config.min_samples_leaf);
    if (!leaves.ok()) return leaves.status();
    if (!alpha.ok()) return alpha.status();
    if (!min_leaf.ok()) return min_leaf.status();
    config.max_leaves = *leaves;
    config.alpha = *alpha;
    config.min_samples_leaf = *min_leaf;
    return pat::ValidateConfig(config);
  } else if (spec.minimizer == "iterative") {
    absl::StatusOr<double> t = RealParam(p, "target_error");
    absl::StatusOr<int> k = IntParam(p, "k_init", 4);
    if (!t.ok()) return t.status();
    if (!k.ok()) return k.status();
    if (*k < 1) return absl::InvalidArgumentError("k_init must be at least 1");
  } else if (spec.minimizer == "advtrain" || spec.minimizer == "mutualinf") {
    neural::NeuralOptions o;
    absl::StatusOr<double> lambda = RealParam(p, "lambda");
    absl::StatusOr<int> k = IntParam(p, "buckets", o.buckets);
    if (!lambda.ok()) return lambda.status();
    if (!k.ok()) return k.status();
    o.lambda = *lambda;
    o.buckets = *k;
    return neural::ValidateOptions(o);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown minimizer '", spec.minimizer, "'"));
  }
  (void)schema;
  return absl::OkStatus();
}

absl::StatusOr<std::vector<MinimizerSpec>> DefaultGrid(const std::string& minimizer,
                                                       const Schema& schema,
                                                       double clf_err_identity,
                                                       double clf_err_full) {
  std::vector<MinimizerSpec> grid;
  if (minimizer == "uniform") {
    for (int k = 1; k <= 5; ++k) grid.push_back({minimizer, {{"k", k}}});
  } else if (minimizer == "featsel") {
    for (int k : {2, 4, 8, 10, 20}) grid.push_back({minimizer, {{"k", k}}});
    grid.push_back({minimizer, {{"k", "all"}}});
  } else if (minimizer == "pat") {
    for (int leaves : {2, 4, 6, 8, 10, 20, 50, 100, 200}) {
      for (int j = 0; j < 12; ++j) {
        grid.push_back({minimizer, {{"max_leaves", leaves}, {"alpha", j / 11.0}}});
      }
    }
  } else if (minimizer == "iterative") {
    if (!(clf_err_full > clf_err_identity)) {
      return absl::FailedPreconditionError(
          "iterative grid needs the full-generalization error above the identity error");
    }
    for (int j = 1; j <= 7; ++j) {
      const double t = clf_err_identity + (clf_err_full - clf_err_identity) * j / 8.0;
      grid.push_back({minimizer, {{"target_error", t}, {"k_init", 4}}});
    }
  } else if (minimizer == "advtrain" || minimizer == "mutualinf") {
    for (int j = 0; j <= 8; ++j) {
      grid.push_back({minimizer, {{"lambda", j / 8.0}, {"buckets", 5}}});
    }
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown minimizer '", minimizer, "'"));
  }
  (void)schema;
  return grid;
}

absl::StatusOr<Generalization> RunMinimizer(const MinimizerSpec& spec,
                                            const DatasetView& data, std::uint64_t seed) {
  if (absl::Status st = ValidateSpec(spec, data.schema()); !st.ok()) return st;
  const json& p = spec.params;
  const DatasetView train = data.Part(Split::kTrain);
  if (train.num_rows() == 0) return absl::FailedPreconditionError("no train rows");
  if (spec.minimizer == "uniform") {
    return baselines::UniformMinimize(data.schema(), p["k"].get<int>(), seed);
  }
  if (spec.minimizer == "featsel") {
    const int features = static_cast<int>(data.schema().features().size());
    const int k = p["k"] == "all" ? features : std::min(p["k"].get<int>(), features);
    return baselines::AnovaFeatureSelect(train, k);
  }
  if (spec.minimizer == "pat") {
    pat::PatConfig config;
    config.max_leaves = p["max_leaves"].get<int>();
    config.alpha = p["alpha"].get<double>();
    if (p.contains("min_samples_leaf")) {
      config.min_samples_leaf = p["min_samples_leaf"].get<int>();
    }
    return pat::Minimize(train, config);
  }
  if (spec.minimizer == "iterative") {
    baselines::IterativeOptions options;
    options.target_error = p["target_error"].get<double>();
    options.k_init = p.value("k_init", 4);
    options.schedule.seed = seed;
    std::vector<std::size_t> rows = data.RowsIn(Split::kTrain);
    const std::vector<std::size_t> val = data.RowsIn(Split::kVal);
    rows.insert(rows.end(), val.begin(), val.end());
    std::sort(rows.begin(), rows.end());
    absl::StatusOr<baselines::IterativeResult> r =
        baselines::IterativeMinimize(data.Subset(rows), options);
    if (!r.ok()) return r.status();
    return r->generalization;
  }
  neural::NeuralOptions options;
  options.lambda = p["lambda"].get<double>();
  options.buckets = p.value("buckets", options.buckets);
  options.schedule.seed = seed;
  absl::StatusOr<neural::NeuralResult> r = spec.minimizer == "advtrain"
                                               ? neural::AdvTrainFit(train, options)
                                               : neural::MutualInfFit(train, options);
  if (!r.ok()) return r.status();
  return r->generalization;
}

std::vector<ParetoPoint> Sweep(const std::vector<MinimizerSpec>& specs,
                               const DatasetView& data, const SweepOptions& options) {
  EvalOptions eval = options.eval;
  eval.classifier.seed = MixSeed(options.seed, kClassifierSalt);
  eval.adversary.schedule.seed = MixSeed(options.seed, kAdversarySalt);

  // Minimize.
  std::vector<absl::StatusOr<Generalization>> gens(specs.size(),
                                                   absl::UnknownError("not run"));
  ParallelFor(specs.size(), options.threads, [&](std::size_t i) {
    const std::uint64_t seed =
        MixSeed(options.seed, StableHash(specs[i].minimizer + specs[i].params.dump()));
    gens[i] = RunMinimizer(specs[i], data, seed);
  });

  // Evaluate each distinct generalization once.
  std::vector<std::size_t> distinct;
  std::vector<std::size_t> slot(specs.size(), 0);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!gens[i].ok()) continue;
    auto same = std::find_if(distinct.begin(), distinct.end(),
                             [&](std::size_t j) { return *gens[j] == *gens[i]; });
    slot[i] = static_cast<std::size_t>(same - distinct.begin());
    if (same == distinct.end()) distinct.push_back(i);
  }
  std::vector<absl::StatusOr<ParetoPoint>> evaluated(distinct.size(),
                                                     absl::UnknownError("not run"));
  ParallelFor(distinct.size(), options.threads, [&](std::size_t d) {
    evaluated[d] = Evaluate(*gens[distinct[d]], data, eval);
  });

  std::vector<ParetoPoint> points;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ParetoPoint p;
    if (!gens[i].ok()) {
      p.failed = true;
      p.failure = std::string(gens[i].status().message());
    } else if (!evaluated[slot[i]].ok()) {
      p.failed = true;
      p.failure = std::string(evaluated[slot[i]].status().message());
      p.g = *gens[i];
      p.fingerprint = gens[i]->Fingerprint();
    } else {
      p = *evaluated[slot[i]];
    }
    p.minimizer = specs[i].minimizer;
    p.params = specs[i].params;
    if (!p.failed && !options.output_dir.empty()) {
      const std::string rel =
          absl::StrCat("generalizations/g_", FingerprintHex(p.fingerprint), ".json");
      const std::filesystem::path path = std::filesystem::path(options.output_dir) / rel;
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
      if (!std::filesystem::exists(path)) {
        if (absl::Status st = p.g.WriteFile(path.string()); !st.ok()) {
          p.failed = true;
          p.failure = std::string(st.message());
        }
      }
      p.generalization_file = rel;
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::string PointsCsv(const std::vector<ParetoPoint>& points) {
  // Per-attribute columns follow the first successful point.
  std::vector<std::string> personal, features;
  for (const ParetoPoint& p : points) {
    if (p.failed) continue;
    personal = p.adversary.names;
    for (const AttributeBuckets& b : p.buckets.attributes) features.push_back(b.name);
    break;
  }
  std::string out =
      "minimizer,params,clf_err_val,clf_err_test,adv_err_val,adv_err_test,"
      "adv_baseline_test,total_buckets,failed,generalization_file";
  for (const std::string& n : personal) {
    out += "," + QuoteCsvField("adv_err_val:" + n) + "," + QuoteCsvField("adv_err_test:" + n);
  }
  for (const std::string& n : features) out += "," + QuoteCsvField("k:" + n);
  out += "\n";
  for (const ParetoPoint& p : points) {
    out += QuoteCsvField(p.minimizer) + "," + QuoteCsvField(p.params.dump());
    if (p.failed) {
      out += ",,,,,,,1," + QuoteCsvField(p.generalization_file);
      out += std::string(2 * personal.size() + features.size(), ',');
      out += "\n";
      continue;
    }
    out += absl::StrCat(",", Num(p.classifier.val), ",", Num(p.classifier.test), ",",
                        Num(p.adversary.mean_val), ",", Num(p.adversary.mean_test), ",",
                        Num(p.adversary.mean_baseline_test), ",", p.buckets.total_buckets,
                        ",0,", QuoteCsvField(p.generalization_file));
    for (std::size_t i = 0; i < personal.size(); ++i) {
      out += absl::StrCat(",", Num(p.adversary.val[i]), ",", Num(p.adversary.test[i]));
    }
    for (const AttributeBuckets& b : p.buckets.attributes) out += absl::StrCat(",", b.k);
    out += "\n";
  }
  return out;
}

json PointsJson(const std::vector<ParetoPoint>& points) {
  json arr = json::array();
  for (const ParetoPoint& p : points) arr.push_back(p.ToJson());
  return {{"points", std::move(arr)}};
}

absl::StatusOr<std::vector<ParetoPoint>> PointsFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array()) {
    return absl::InvalidArgumentError("points document needs a 'points' array");
  }
  std::vector<ParetoPoint> out;
  try {
    for (const json& item : doc["points"]) {
      ParetoPoint p;
      p.minimizer = item.at("minimizer").get<std::string>();
      p.params = item.value("params", json::object());
      p.generalization_file = item.value("generalization_file", "");
      p.fingerprint = std::stoull(item.value("fingerprint", "0"), nullptr, 16);
      p.failed = item.value("failed", false);
      if (p.failed) {
        p.failure = item.value("failure", "");
        out.push_back(std::move(p));
        continue;
      }
      const json& c = item.at("classifier_error");
      p.classifier = {c.at("val").get<double>(), c.at("test").get<double>()};
      const json& a = item.at("adversary_error");
      p.adversary.names = a.at("names").get<std::vector<std::string>>();
      p.adversary.val = a.at("val").get<std::vector<double>>();
      p.adversary.test = a.at("test").get<std::vector<double>>();
      p.adversary.baseline_test = a.at("baseline_test").get<std::vector<double>>();
      p.adversary.mean_val = a.at("mean_val").get<double>();
      p.adversary.mean_test = a.at("mean_test").get<double>();
      p.adversary.mean_baseline_test = a.at("mean_baseline_test").get<double>();
      p.adversary.mask_violations = a.value("mask_violations", std::size_t{0});
      const json& b = item.at("buckets");
      p.buckets.total_buckets = b.at("total_buckets").get<int>();
      p.buckets.num_suppressed = b.at("num_suppressed").get<int>();
      for (const json& attr : b.at("attributes")) {
        p.buckets.attributes.push_back({attr.at("name").get<std::string>(),
                                        attr.at("k").get<int>(), attr.at("c").get<int>(),
                                        attr.at("reduction").get<double>(),
                                        attr.at("suppressed").get<bool>()});
      }
      out.push_back(std::move(p));
    }
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed point: ", e.what()));
  }
  return out;
}

json FrontJson(const std::vector<ParetoPoint>& points,
               const std::vector<ParetoPoint>& limits) {
  std::vector<ParetoPoint> all = limits;
  all.insert(all.end(), points.begin(), points.end());
  const std::vector<std::size_t> front = ParetoFront(all);
  json out = json::array();
  std::vector<bool> listed(all.size(), false);
  for (std::size_t i : front) {
    json p = all[i].ToJson();
    p["on_front"] = true;
    p["limit"] = i < limits.size();
    out.push_back(std::move(p));
    listed[i] = true;
  }
  // Limit points always appear, on the front or not.
  for (std::size_t i = 0; i < limits.size(); ++i) {
    if (listed[i]) continue;
    json p = all[i].ToJson();
    p["on_front"] = false;
    p["limit"] = true;
    out.push_back(std::move(p));
  }
  return {{"selection", "validation"}, {"points", std::move(out)}};
}

}  // namespace vdm::eval

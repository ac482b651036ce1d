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

#ifndef VDM_EVAL_H_
#define VDM_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vdm/adversaries.h"
#include "vdm/dataset.h"
#include "vdm/generalize.h"
#include "vdm/nn.h"

namespace vdm::eval {

struct EvalOptions {
  nn::TrainSchedule classifier;
  adversaries::AdversaryOptions adversary;
};

// Reference-classifier error on g(val) and g(test), trained on g(train).
struct ClassifierErrors {
  double val = 0.0;
  double test = 0.0;
};
absl::StatusOr<ClassifierErrors> UtilityRisk(const Generalization& g,
                                             const DatasetView& data,
                                             const nn::TrainSchedule& schedule);

// A1 errors per personal attribute on the val and test rows. The adversary's
// prior is the train split.
struct AdversaryErrors {
  std::vector<std::string> names;
  std::vector<double> val;
  std::vector<double> test;
  std::vector<double> baseline_test;
  double mean_val = 0.0;
  double mean_test = 0.0;
  double mean_baseline_test = 0.0;
  std::size_t mask_violations = 0;
};
absl::StatusOr<AdversaryErrors> PrivacyRisk(
    const Generalization& g, const DatasetView& data,
    const adversaries::AdversaryOptions& options);

struct AttributeBuckets {
  std::string name;
  int k = 1;
  // Original size: the cardinality, or the number of distinct train values
  // of a continuous attribute.
  int c = 1;
  double reduction = 0.0;
  // Fully generalized; need not be collected.
  bool suppressed = false;
};

struct BucketReport {
  std::vector<AttributeBuckets> attributes;
  int total_buckets = 0;
  int num_suppressed = 0;

  nlohmann::json ToJson() const;
};
BucketReport MakeBucketReport(const Generalization& g, const DatasetView& data);

struct ParetoPoint {
  std::string minimizer;
  nlohmann::json params = nlohmann::json::object();
  std::string generalization_file;
  std::uint64_t fingerprint = 0;
  Generalization g;

  ClassifierErrors classifier;
  AdversaryErrors adversary;
  BucketReport buckets;

  bool failed = false;
  std::string failure;

  nlohmann::json ToJson() const;
};

// Classifier and adversary errors plus the bucket report of one g.
absl::StatusOr<ParetoPoint> Evaluate(const Generalization& g, const DatasetView& data,
                                     const EvalOptions& options);

// No generalization and full generalization, in that order.
absl::StatusOr<std::vector<ParetoPoint>> LimitPoints(const DatasetView& data,
                                                     const EvalOptions& options);

// Indices of points not dominated on (validation classifier error, lower is
// better; validation mean adversary error, higher is better). Equal points are
// all kept; failed points never are. Ascending index order.
std::vector<std::size_t> ParetoFront(const std::vector<ParetoPoint>& points);

// One minimizer run.
struct MinimizerSpec {
  std::string minimizer;  // uniform, featsel, pat, iterative, advtrain, mutualinf
  nlohmann::json params = nlohmann::json::object();
};

absl::Status ValidateSpec(const MinimizerSpec& spec, const Schema& schema);

// Default hyperparameter grid of a minimizer. Iterative targets lie strictly
// between the two limit classifier errors, which the caller supplies.
absl::StatusOr<std::vector<MinimizerSpec>> DefaultGrid(const std::string& minimizer,
                                                       const Schema& schema,
                                                       double clf_err_identity = 0.0,
                                                       double clf_err_full = 0.0);

// Runs one minimizer on the train split (and val, where it needs one).
absl::StatusOr<Generalization> RunMinimizer(const MinimizerSpec& spec,
                                            const DatasetView& data, std::uint64_t seed);

struct SweepOptions {
  EvalOptions eval;
  std::uint64_t seed = 0;
  int threads = 1;
  // When set, every distinct generalization is written here.
  std::string output_dir;
};

// One point per spec, in spec order. Specs yielding the same generalization
// share one evaluation. A failing run yields a failed point.
std::vector<ParetoPoint> Sweep(const std::vector<MinimizerSpec>& specs,
                               const DatasetView& data, const SweepOptions& options);

// points.csv: one row per point, per-attribute columns appended.
std::string PointsCsv(const std::vector<ParetoPoint>& points);
nlohmann::json PointsJson(const std::vector<ParetoPoint>& points);
absl::StatusOr<std::vector<ParetoPoint>> PointsFromJson(const nlohmann::json& doc);

// Front plus the limit points.
nlohmann::json FrontJson(const std::vector<ParetoPoint>& points,
                         const std::vector<ParetoPoint>& limits);

}  // namespace vdm::eval

#endif  // VDM_EVAL_H_

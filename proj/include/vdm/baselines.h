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

#ifndef VDM_BASELINES_H_
#define VDM_BASELINES_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vdm/dataset.h"
#include "vdm/generalize.h"
#include "vdm/nn.h"

namespace vdm::baselines {

// Continuous features get k equal-width buckets (bucket(x) = max(1, ceil(kx))).
// Discrete features get their values shuffled into min(c, k) buckets with
// every bucket used.
absl::StatusOr<Generalization> UniformMinimize(const Schema& schema, int k,
                                               std::uint64_t seed);

// One-way ANOVA F statistic of a column grouped by class. +inf when the
// within-class sum of squares is 0 and the between-class one is not; 0 for a
// constant column.
double AnovaF(std::span<const double> column, std::span<const int> labels);

// Per-feature F (max over one-hot columns for discrete attributes), aligned
// with schema indices; the target gets NaN.
std::vector<double> FeatureScores(const DatasetView& train);

// Keeps the k features with the largest F unchanged and suppresses the rest.
// Ties go to the lower attribute index.
absl::StatusOr<Generalization> AnovaFeatureSelect(const DatasetView& train,
                                                  int k);

// Optimal contiguous grouping of sorted scores into exactly `groups` groups
// minimizing the mean of per-group population variances.
struct Grouping {
  std::vector<int> group_of;  // 0-based group per score
  double objective = 0.0;
};
absl::StatusOr<Grouping> GroupScores(std::span<const double> sorted_scores,
                                     int groups);

// table[a][g] = minimal mean variance for the first a scores in g groups
// (infinity when g > a). Exposed for tests.
std::vector<std::vector<double>> GroupingTable(
    std::span<const double> sorted_scores, int max_groups);

// Thresholds splitting `values` at the k-quantiles (midpoints between the
// sorted values at ranks floor(j*n/k)-1 and floor(j*n/k)); duplicates merged.
std::vector<double> QuantileThresholds(std::vector<double> values, int k);

// Binary logistic regression for "label is the last class", full-batch
// gradient descent. Returns one weight per one-hot column followed by the bias.
std::vector<double> LogisticWeights(const DatasetView& train, int epochs = 200,
                                    double step = 0.1, double l2 = 1e-4);

struct IterativeOptions {
  int k_init = 5;
  // Validation classifier error must stay below this.
  double target_error = 0.2;
  // Maximum number of reference trainings (classifier or adversary).
  int eval_budget = std::numeric_limits<int>::max();
  nn::TrainSchedule schedule;
};

struct IterativeResult {
  Generalization generalization;
  bool budget_exhausted = false;
  int trainings = 0;
  // Feature processing order and the per-attribute estimates behind it.
  std::vector<int> order;
  std::vector<double> delta_clf;
  std::vector<double> delta_adv;
};

// Logistic-weight grouping of discrete values and quantile splits of
// continuous ones at k_init, followed by greedy reduction of k_i.
absl::StatusOr<Generalization> InitialGeneralization(const DatasetView& train,
                                                     int k);

// `view` must contain train and val rows.
absl::StatusOr<IterativeResult> IterativeMinimize(const DatasetView& view,
                                                  const IterativeOptions& options);

}  // namespace vdm::baselines

#endif  // VDM_BASELINES_H_

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

#include "vdm/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm::baselines {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// var[i][j]: population variance of scores[i..j].
std::vector<std::vector<double>> RangeVariances(std::span<const double> s) {
  const std::size_t n = s.size();
  std::vector<std::vector<double>> var(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      const double count = static_cast<double>(j - i + 1);
      const double delta = s[j] - mean;
      mean += delta / count;
      m2 += delta * (s[j] - mean);
      var[i][j] = std::max(0.0, m2 / count);
    }
  }
  return var;
}

// sums[a][g]: minimal sum of variances for the first a scores in g groups;
// cut[a][g]: start index of the last group.
void SolveGrouping(std::span<const double> s, int max_groups,
                   std::vector<std::vector<double>>& sums,
                   std::vector<std::vector<int>>& cut) {
  const int n = static_cast<int>(s.size());
  const auto var = RangeVariances(s);
  sums.assign(n + 1, std::vector<double>(max_groups + 1, kInf));
  cut.assign(n + 1, std::vector<int>(max_groups + 1, -1));
  sums[0][0] = 0.0;
  for (int a = 1; a <= n; ++a) {
    for (int g = 1; g <= std::min(a, max_groups); ++g) {
      for (int b = g - 1; b < a; ++b) {
        if (sums[b][g - 1] == kInf) continue;
        const double value = sums[b][g - 1] + var[b][a - 1];
        if (value < sums[a][g]) {
          sums[a][g] = value;
          cut[a][g] = b;
        }
      }
    }
  }
}

absl::StatusOr<double> ClassifierError(const Generalization& g,
                                       const DatasetView& train,
                                       const DatasetView& val,
                                       const nn::TrainSchedule& schedule) {
  absl::StatusOr<DatasetView> gt = Apply(g, train);
  if (!gt.ok()) return gt.status();
  absl::StatusOr<DatasetView> gv = Apply(g, val);
  if (!gv.ok()) return gv.status();
  absl::StatusOr<nn::FitResult> fit = nn::TrainClassifier(*gt, *gv, schedule);
  if (!fit.ok()) return fit.status();
  return fit->val_error;
}

// Validation error of a net predicting personal attribute `p` from the whole
// generalized record.
absl::StatusOr<double> AdversaryError(const Generalization& g,
                                      const DatasetView& train,
                                      const DatasetView& val, int p,
                                      const nn::TrainSchedule& schedule) {
  absl::StatusOr<DatasetView> gt = Apply(g, train);
  if (!gt.ok()) return gt.status();
  absl::StatusOr<DatasetView> gv = Apply(g, val);
  if (!gv.ok()) return gv.status();
  const Schema& schema = train.schema();
  const AttributeSchema& target = schema[p];
  const int classes = ReferenceCardinality(target);
  auto labels = [&](const DatasetView& v) {
    std::vector<int> y(v.num_rows());
    for (std::size_t r = 0; r < y.size(); ++r) {
      y[r] = ReferenceClass(target, v.value(r, p));
    }
    return y;
  };
  const std::vector<int> y = labels(train), y_val = labels(val);
  const nn::Matrix x = nn::FeatureMatrix(*gt);
  const nn::Matrix x_val = nn::FeatureMatrix(*gv);
  absl::StatusOr<nn::FitResult> fit =
      nn::FitSoftmax(x, y, classes, x_val, y_val, schedule);
  if (!fit.ok()) return fit.status();
  return fit->val_error;
}

Generalization WithSuppressed(const Generalization& g, int attribute) {
  std::vector<AttributeMap> maps = g.maps();
  maps[attribute] = AttributeMap::Suppressed(g.schema()[attribute]);
  return *Generalization::Create(g.schema(), std::move(maps));
}

Generalization WithMap(const Generalization& g, int attribute, AttributeMap map) {
  std::vector<AttributeMap> maps = g.maps();
  maps[attribute] = std::move(map);
  return *Generalization::Create(g.schema(), std::move(maps));
}

// Column offset of every feature in the one-hot encoding of all features.
std::vector<std::size_t> ColumnOffsets(const Schema& schema) {
  std::vector<std::size_t> offset(schema.size(), 0);
  std::size_t next = 0;
  for (int a : schema.features()) {
    offset[a] = next;
    next += schema[a].is_discrete() ? schema[a].cardinality : 1;
  }
  return offset;
}

AttributeMap GroupedValues(const std::vector<double>& weights, int k) {
  const int c = static_cast<int>(weights.size());
  std::vector<int> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] < weights[b]; });
  std::vector<double> sorted(c);
  for (int i = 0; i < c; ++i) sorted[i] = weights[order[i]];
  const Grouping grouping = *GroupScores(sorted, std::min(k, c));
  std::vector<int> value_map(c);
  for (int i = 0; i < c; ++i) value_map[order[i]] = grouping.group_of[i] + 1;
  return AttributeMap::FromValueMap(std::move(value_map));
}

struct AttributeBuilder {
  const DatasetView& train;
  std::vector<double> logistic;
  std::vector<std::size_t> offset;

  explicit AttributeBuilder(const DatasetView& t)
      : train(t), logistic(LogisticWeights(t)), offset(ColumnOffsets(t.schema())) {}

  AttributeMap Build(int a, int k) const {
    const AttributeSchema& attr = train.schema()[a];
    if (attr.is_discrete()) {
      std::vector<double> w(logistic.begin() + offset[a],
                            logistic.begin() + offset[a] + attr.cardinality);
      return GroupedValues(w, k);
    }
    std::vector<double> values(train.num_rows());
    for (std::size_t r = 0; r < values.size(); ++r) values[r] = train.value(r, a);
    return AttributeMap::FromThresholds(QuantileThresholds(std::move(values), k));
  }
};

}  // namespace

absl::StatusOr<Generalization> UniformMinimize(const Schema& schema, int k,
                                               std::uint64_t seed) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  Rng rng(MixSeed(seed, 0x756e69666f726dULL));
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const AttributeSchema& attr = schema[a];
    if (attr.is_target()) {
      maps.push_back(AttributeMap::Identity(attr));
    } else if (!attr.is_discrete()) {
      std::vector<double> thresholds;
      for (int j = 1; j < k; ++j) thresholds.push_back(static_cast<double>(j) / k);
      maps.push_back(AttributeMap::FromThresholds(std::move(thresholds)));
    } else {
      const int c = attr.cardinality;
      const int buckets = std::min(c, k);
      std::vector<int> values(c);
      std::iota(values.begin(), values.end(), 0);
      rng.Shuffle(std::span<int>(values));
      std::vector<int> value_map(c);
      for (int i = 0; i < c; ++i) {
        value_map[values[i]] =
            i < buckets ? i + 1 : 1 + static_cast<int>(rng.Index(buckets));
      }
      maps.push_back(AttributeMap::FromValueMap(std::move(value_map)));
    }
  }
  return Generalization::Create(schema, std::move(maps));
}

double AnovaF(std::span<const double> column, std::span<const int> labels) {
  const std::size_t n = column.size();
  if (n == 0) return 0.0;
  const int classes = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<double> sum(classes, 0.0), count(classes, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum[labels[i]] += column[i];
    count[labels[i]] += 1.0;
    total += column[i];
  }
  const double grand = total / n;
  double between = 0.0;
  int groups = 0;
  for (int c = 0; c < classes; ++c) {
    if (count[c] == 0.0) continue;
    ++groups;
    const double mean = sum[c] / count[c];
    between += count[c] * (mean - grand) * (mean - grand);
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = column[i] - sum[labels[i]] / count[labels[i]];
    within += d * d;
  }
  // Sums of squares this small are rounding noise of an exact zero.
  const double scale = std::max(1.0, grand * grand * n);
  if (between <= 1e-12 * scale) return 0.0;
  const double df_between = groups - 1.0;
  const double df_within = static_cast<double>(n) - groups;
  if (within <= 1e-12 * scale || df_within <= 0.0) return kInf;
  return (between / df_between) / (within / df_within);
}

std::vector<double> FeatureScores(const DatasetView& train) {
  const Schema& schema = train.schema();
  const std::vector<int> labels = nn::Labels(train);
  std::vector<double> scores(schema.size(), std::nan(""));
  std::vector<double> column(train.num_rows());
  for (int a : schema.features()) {
    if (!schema[a].is_discrete()) {
      for (std::size_t r = 0; r < column.size(); ++r) column[r] = train.value(r, a);
      scores[a] = AnovaF(column, labels);
      continue;
    }
    double best = 0.0;
    for (int v = 1; v <= schema[a].cardinality; ++v) {
      for (std::size_t r = 0; r < column.size(); ++r) {
        column[r] = train.index(r, a) == v ? 1.0 : 0.0;
      }
      best = std::max(best, AnovaF(column, labels));
    }
    scores[a] = best;
  }
  return scores;
}

absl::StatusOr<Generalization> AnovaFeatureSelect(const DatasetView& train,
                                                  int k) {
  const Schema& schema = train.schema();
  const int d = static_cast<int>(schema.features().size());
  if (k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must lie in [1, ", d, "], got ", k));
  }
  if (train.num_rows() == 0) return absl::InvalidArgumentError("empty training set");
  const std::vector<double> scores = FeatureScores(train);
  std::vector<int> ranked = schema.features();
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    maps.push_back(schema[a].is_target() ? AttributeMap::Identity(schema[a])
                                         : AttributeMap::Suppressed(schema[a]));
  }
  for (int i = 0; i < k; ++i) maps[ranked[i]] = AttributeMap::Identity(schema[ranked[i]]);
  return Generalization::Create(schema, std::move(maps));
}

std::vector<std::vector<double>> GroupingTable(std::span<const double> sorted_scores,
                                               int max_groups) {
  std::vector<std::vector<double>> sums;
  std::vector<std::vector<int>> cut;
  SolveGrouping(sorted_scores, max_groups, sums, cut);
  for (auto& row : sums) {
    for (int g = 1; g <= max_groups; ++g) {
      if (row[g] != kInf) row[g] /= g;
    }
  }
  return sums;
}

absl::StatusOr<Grouping> GroupScores(std::span<const double> sorted_scores,
                                     int groups) {
  const int n = static_cast<int>(sorted_scores.size());
  if (groups < 1 || groups > n) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot group ", n, " scores into ", groups, " groups"));
  }
  std::vector<std::vector<double>> sums;
  std::vector<std::vector<int>> cut;
  SolveGrouping(sorted_scores, groups, sums, cut);
  Grouping out;
  out.group_of.resize(n);
  out.objective = sums[n][groups] / groups;
  int end = n;
  for (int g = groups; g >= 1; --g) {
    const int start = cut[end][g];
    for (int i = start; i < end; ++i) out.group_of[i] = g - 1;
    end = start;
  }
  return out;
}

std::vector<double> QuantileThresholds(std::vector<double> values, int k) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<double> thresholds;
  if (n == 0) return thresholds;
  for (int j = 1; j < k; ++j) {
    const std::size_t i = (static_cast<std::size_t>(j) * n) / k;
    if (i == 0 || i >= n) continue;
    thresholds.push_back(values[i - 1] + (values[i] - values[i - 1]) / 2.0);
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  return thresholds;
}

std::vector<double> LogisticWeights(const DatasetView& train, int epochs,
                                    double step, double l2) {
  const nn::Matrix x = nn::FeatureMatrix(train);
  const int positive = train.schema().num_classes() - 1;
  Eigen::VectorXd y(train.num_rows());
  for (std::size_t r = 0; r < train.num_rows(); ++r) {
    y[r] = train.label(r) == positive ? 1.0 : 0.0;
  }
  const double n = std::max<double>(1.0, train.num_rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  for (int e = 0; e < epochs; ++e) {
    Eigen::VectorXd z = (x * w).array() + b;
    Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    Eigen::VectorXd residual = p - y;
    w -= step * (x.transpose() * residual / n + l2 * w);
    b -= step * residual.sum() / n;
  }
  std::vector<double> out(w.data(), w.data() + w.size());
  out.push_back(b);
  return out;
}

absl::StatusOr<Generalization> InitialGeneralization(const DatasetView& train,
                                                     int k) {
  if (k < 1) return absl::InvalidArgumentError("k_init must be at least 1");
  if (train.num_rows() == 0) return absl::InvalidArgumentError("empty training set");
  const Schema& schema = train.schema();
  AttributeBuilder builder(train);
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    maps.push_back(schema[a].is_target() ? AttributeMap::Identity(schema[a])
                                         : builder.Build(static_cast<int>(a), k));
  }
  return Generalization::Create(schema, std::move(maps));
}

absl::StatusOr<IterativeResult> IterativeMinimize(const DatasetView& view,
                                                  const IterativeOptions& options) {
  if (options.k_init < 1) return absl::InvalidArgumentError("k_init must be at least 1");
  if (options.eval_budget < 0) {
    return absl::InvalidArgumentError("eval_budget must be non-negative");
  }
  const DatasetView train = view.Part(Split::kTrain);
  const DatasetView val = view.Part(Split::kVal);
  if (train.num_rows() == 0 || val.num_rows() == 0) {
    return absl::FailedPreconditionError(
        "iterative minimizer needs train and validation rows");
  }
  const Schema& schema = view.schema();
  AttributeBuilder builder(train);
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    maps.push_back(schema[a].is_target() ? AttributeMap::Identity(schema[a])
                                         : builder.Build(static_cast<int>(a),
                                                         options.k_init));
  }
  absl::StatusOr<Generalization> start = Generalization::Create(schema, maps);
  if (!start.ok()) return start.status();

  IterativeResult result;
  result.generalization = *start;
  result.delta_clf.assign(schema.size(), 0.0);
  result.delta_adv.assign(schema.size(), 0.0);
  auto spend = [&]() {
    if (result.trainings >= options.eval_budget) {
      result.budget_exhausted = true;
      return false;
    }
    ++result.trainings;
    return true;
  };

  // Mean adversary error over personal attributes; nullopt on exhaustion.
  auto adversary = [&](const Generalization& g) -> absl::StatusOr<std::optional<double>> {
    const std::vector<int>& personal = schema.personal();
    if (personal.empty()) return std::optional<double>(0.0);
    double mean = 0.0;
    for (int p : personal) {
      if (!spend()) return std::optional<double>();
      absl::StatusOr<double> e = AdversaryError(g, train, val, p, options.schedule);
      if (!e.ok()) return e.status();
      mean += *e;
    }
    return std::optional<double>(mean / personal.size());
  };

  const std::vector<int>& features = schema.features();
  result.order = features;
  if (!spend()) return result;
  absl::StatusOr<double> base_clf =
      ClassifierError(*start, train, val, options.schedule);
  if (!base_clf.ok()) return base_clf.status();
  absl::StatusOr<std::optional<double>> base_adv = adversary(*start);
  if (!base_adv.ok()) return base_adv.status();
  if (!base_adv->has_value()) return result;

  for (int a : features) {
    const Generalization suppressed = WithSuppressed(*start, a);
    if (suppressed == *start) continue;
    if (!spend()) return result;
    absl::StatusOr<double> e = ClassifierError(suppressed, train, val, options.schedule);
    if (!e.ok()) return e.status();
    result.delta_clf[a] = *e - *base_clf;
    absl::StatusOr<std::optional<double>> adv = adversary(suppressed);
    if (!adv.ok()) return adv.status();
    if (!adv->has_value()) return result;
    result.delta_adv[a] = **adv - **base_adv;
  }
  std::stable_sort(result.order.begin(), result.order.end(), [&](int a, int b) {
    return result.delta_clf[a] - result.delta_adv[a] <
           result.delta_clf[b] - result.delta_adv[b];
  });

  Generalization current = *start;
  // A start that already misses the target leaves nothing to reduce.
  const bool reducible = *base_clf < options.target_error;
  for (int a : result.order) {
    if (!reducible) break;
    int requested = std::min(options.k_init, current.k(a));
    while (requested > 1) {
      --requested;
      AttributeMap candidate = builder.Build(a, requested);
      if (candidate == current.map(a)) continue;
      const Generalization trial = WithMap(current, a, std::move(candidate));
      if (!spend()) {
        result.generalization = current;
        return result;
      }
      absl::StatusOr<double> e = ClassifierError(trial, train, val, options.schedule);
      if (!e.ok()) return e.status();
      if (*e >= options.target_error) break;
      current = trial;
    }
  }
  result.generalization = current;
  return result;
}

}  // namespace vdm::baselines

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

#ifndef VDM_ADVERSARIES_H_
#define VDM_ADVERSARIES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vdm/dataset.h"
#include "vdm/generalize.h"
#include "vdm/nn.h"

namespace vdm::adversaries {

// What a reconstruction adversary works with: the generalization g, a
// full-granularity prior sample to train on (optionally with validation rows
// for L2 tuning), and the breached rows. Only g(breach) is shown to the
// attack; the breach's true values score it.
struct BreachScenario {
  Generalization g;
  DatasetView prior;
  std::optional<DatasetView> prior_val;
  DatasetView breach;

  absl::Status Validate() const;
};

// Train/val parts of `data` as the prior, test part as the breach.
BreachScenario ScenarioFromSplits(const Generalization& g, const DatasetView& data);

struct AdversaryOptions {
  nn::TrainSchedule schedule;
};

struct AttributeReport {
  int attribute = -1;
  std::string name;
  double error = 0.0;
  // Error of always predicting the prior's majority class.
  double baseline_error = 0.0;
  std::size_t evaluated = 0;
  // Per breached row: predicted reference class, or -1 when not kept (A2).
  std::vector<int> predictions;
  std::vector<double> confidence;
  // Predictions outside the observed bucket's pre-image. Always 0; counted
  // so that tests and reports can assert it.
  std::size_t mask_violations = 0;
  // A6 rows whose mask intersection was empty.
  std::size_t inconsistent = 0;
};

struct ReconstructionReport {
  std::vector<AttributeReport> attributes;
  double mean_error = 0.0;
  double mean_baseline = 0.0;

  nlohmann::json ToJson() const;
};

// Reference classes of personal attribute `p` compatible with the observed
// generalized value `z` (a bucket index, or the raw value for passthrough
// continuous maps).
std::vector<bool> ClassMask(const Generalization& g, int p, double z);

// Masked argmax; -1 when the mask is empty.
int MaskedArgmax(std::span<const double> scores, const std::vector<bool>& mask);

// A1: one net per personal attribute on one-hot(g(prior)), logits masked by
// the pre-image of the observed bucket.
absl::StatusOr<ReconstructionReport> A1Reconstruct(const BreachScenario& scenario,
                                                   const AdversaryOptions& options);

// A2: A1 predictions whose max masked logit is among the ceil(k% * n) largest
// for that attribute.
absl::StatusOr<ReconstructionReport> A2HighCertainty(const BreachScenario& scenario,
                                                     double k_percent,
                                                     const AdversaryOptions& options);

// Reconstruction of `target` with side information: one-hot(z), the raw
// non-personal attributes and the raw values of `known` personal attributes.
absl::StatusOr<AttributeReport> SideInfoAttack(const BreachScenario& scenario,
                                               int target, std::span<const int> known,
                                               const AdversaryOptions& options);

// A3: non-personal attributes known; every personal attribute predicted.
absl::StatusOr<ReconstructionReport> A3NonPersonal(const BreachScenario& scenario,
                                                   const AdversaryOptions& options);
// A4: all other personal attributes known as well.
absl::StatusOr<ReconstructionReport> A4LeaveOneOut(const BreachScenario& scenario,
                                                   const AdversaryOptions& options);
// A5: for each prefix size k of `ordering` (schema order when empty), the
// first k personal attributes are known and attribute k+1 is predicted;
// the mean runs over k.
absl::StatusOr<ReconstructionReport> A5Prefix(const BreachScenario& scenario,
                                              std::vector<int> ordering,
                                              const AdversaryOptions& options);

// A6: two breaches of the same rows under different generalizations. Softmax
// outputs of the two A1 models are averaged and masked by the intersection of
// both pre-images, falling back to the first mask when it is empty.
absl::StatusOr<ReconstructionReport> A6MultiBreach(const BreachScenario& first,
                                                   const BreachScenario& second,
                                                   const AdversaryOptions& options);

// Estimates p(x_A = a | x_B = b) from a generalized dataset by count ratios.
class LinkEstimator {
 public:
  // `generalized` holds records under g (any schema-aligned generalized view).
  LinkEstimator(const Generalization& g, const DatasetView& generalized,
                std::vector<int> attrs_a, std::vector<int> attrs_b);

  // nullopt when no generalized record matches g_B(b).
  std::optional<double> Conditional(std::span<const double> a,
                                    std::span<const double> b) const;

  // Counts used by Conditional, exposed for inspection.
  int JointCount(std::span<const double> a, std::span<const double> b) const;
  int MarginalCount(std::span<const double> b) const;

 private:
  std::vector<int> Key(std::span<const int> attrs, std::span<const double> values) const;

  Generalization g_;
  std::vector<int> attrs_a_;
  std::vector<int> attrs_b_;
  std::vector<int> joint_attrs_;
  std::map<std::vector<int>, int> joint_;
  std::map<std::vector<int>, int> marginal_;
};

struct LinkageReport {
  double match_rate = 0.0;
  // Same procedure without the generalized data: every candidate ties.
  double random_baseline = 0.0;
  std::size_t records = 0;
  // A-side records with no candidate having a nonzero denominator.
  std::size_t skipped = 0;
  // Chosen B-side index per A-side record, -1 when skipped.
  std::vector<int> links;

  nlohmann::json ToJson() const;
};

// A7: a_side[i] and b_side[i] belong to the same individual; values are in
// attrs_a / attrs_b order on the schema's (normalized) scale.
absl::StatusOr<LinkageReport> A7Linkability(
    const Generalization& g, const DatasetView& generalized,
    const std::vector<int>& attrs_a, const std::vector<int>& attrs_b,
    const std::vector<std::vector<double>>& a_side,
    const std::vector<std::vector<double>>& b_side, std::uint64_t seed);

// Conjunction of bucket memberships describing one generalized record.
struct Predicate {
  struct Clause {
    int attribute = -1;
    bool discrete = true;
    std::vector<int> values;                // discrete
    double lo = 0.0, hi = 1.0;              // continuous (lo, hi]; [0, hi] when lo == 0
  };
  std::vector<Clause> clauses;

  bool Matches(std::span<const double> record) const;
  std::string ToString(const Schema& schema) const;
};

struct SinglingOutReport {
  // Distinct generalized feature tuples and their utilization.
  std::map<std::vector<double>, int> utilization;
  int min_utilization = 0;
  int num_at_min = 0;
  // One predicate per utilization-1 record.
  std::vector<Predicate> predicates;

  nlohmann::json ToJson(const Schema& schema) const;
};

// A8 over a generalized view produced by g.
SinglingOutReport A8SinglingOut(const Generalization& g,
                                const DatasetView& generalized);

}  // namespace vdm::adversaries

#endif  // VDM_ADVERSARIES_H_

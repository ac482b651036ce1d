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

#ifndef VDM_PAT_H_
#define VDM_PAT_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "vdm/dataset.h"
#include "vdm/generalize.h"

namespace vdm::pat {

// Candidate orderings of a discrete attribute's values. The ordering giving
// the best root split is frozen for the whole tree so that the union of all
// prefix cuts is a partition of the attribute.
enum class CategoricalOrdering {
  kPositiveRate,  // ascending rate of the last target class
  kFrequency,     // ascending count
  kNatural,       // ascending value index
};

struct PatConfig {
  double alpha = 0.5;
  int max_leaves = 10;
  int min_samples_leaf = 100;
  std::vector<CategoricalOrdering> categorical_orderings = {
      CategoricalOrdering::kPositiveRate, CategoricalOrdering::kFrequency,
      CategoricalOrdering::kNatural};
};

absl::Status ValidateConfig(const PatConfig& config);

// Label and personal-attribute histograms of a sample set.
struct SampleCounts {
  double n = 0.0;
  std::vector<double> label;
  std::vector<std::vector<double>> personal;

  static SampleCounts Empty(const Schema& schema);
  void Add(const DatasetView& view, std::size_t row, double weight = 1.0);
};

// Privacy-aware Gini:
//   (1-a) * s_y * G(y) + a * (1 - mean_p s_p * G(p)),  s_V = V/(V-1),
// with G the multi-class Gini impurity. Personal attributes with a single
// value contribute 0 to the mean.
double PGini(const SampleCounts& counts, double alpha);

// Components of PGini before the alpha blend.
struct PGiniTerms {
  double utility = 0.0;   // s_y * G(y)
  double privacy = 0.0;   // 1 - mean_p s_p * G(p)
};
PGiniTerms PGiniComponents(const SampleCounts& counts);

// A split routes x to the left child when x_attr <= threshold (continuous) or
// when the value's rank in the attribute ordering is < cut (discrete).
struct SplitRule {
  int attribute = -1;
  bool continuous = false;
  double threshold = 0.0;
  int cut = 0;
  // Index of the candidate within its attribute (distinct-value gap or cut
  // position), used for deterministic tie-breaking.
  int position = 0;
};

struct SplitCandidate {
  SplitRule rule;
  double score = 0.0;  // weighted child PGini
  std::size_t left_size = 0;
  std::size_t right_size = 0;
};

// Value orderings per schema attribute (empty for continuous attributes).
// rank[a][v-1] is the position of value v.
struct Orderings {
  std::vector<std::vector<int>> order;
  std::vector<std::vector<int>> rank;

  bool GoesLeft(const SplitRule& rule, double value) const;
};

Orderings NaturalOrderings(const Schema& schema);

// Scores within this distance are ties.
constexpr double kScoreTolerance = 1e-12;

// Best admissible split of `rows`, or nullopt when fewer than
// 2*min_samples_leaf rows or no split strictly improves PGini.
std::optional<SplitCandidate> BestSplit(const DatasetView& view,
                                        std::span<const std::size_t> rows,
                                        const PatConfig& config,
                                        const Orderings& orderings);

// Restricted to one attribute; ignores the improvement requirement.
std::optional<SplitCandidate> BestSplitOn(const DatasetView& view,
                                          std::span<const std::size_t> rows,
                                          int attribute,
                                          const PatConfig& config,
                                          const Orderings& orderings);

// Picks, per discrete feature, the configured ordering with the best root
// split on that feature.
Orderings ChooseOrderings(const DatasetView& view,
                          std::span<const std::size_t> rows,
                          const PatConfig& config);

std::vector<int> OrderValues(const DatasetView& view,
                             std::span<const std::size_t> rows, int attribute,
                             CategoricalOrdering ordering);

struct PatNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  std::optional<SplitRule> split;
  std::size_t size = 0;
  int label = 0;
  double pgini = 0.0;
  std::vector<double> label_counts;

  bool is_leaf() const { return !split.has_value(); }
};

class PatTree {
 public:
  PatTree(Schema schema, Orderings orderings, std::vector<PatNode> nodes)
      : schema_(std::move(schema)),
        orderings_(std::move(orderings)),
        nodes_(std::move(nodes)) {}

  const Schema& schema() const { return schema_; }
  const Orderings& orderings() const { return orderings_; }
  const std::vector<PatNode>& nodes() const { return nodes_; }
  const PatNode& root() const { return nodes_.front(); }

  int num_leaves() const;
  // Leaf node index reached by a full-granularity record.
  int Route(std::span<const double> record) const;
  int Predict(std::span<const double> record) const {
    return nodes_[Route(record)].label;
  }
  // Leaf index of every row.
  std::vector<int> LeafAssignment(const DatasetView& view) const;

  nlohmann::json ToJson() const;

 private:
  Schema schema_;
  Orderings orderings_;
  std::vector<PatNode> nodes_;
};

// Best-first growth: the leaf whose best split gives the largest decrease of
// total weighted PGini, (|S_L|/|S|) * (PGini(L) - split score), is expanded
// until max_leaves leaves exist or no leaf can improve. Uses every row of
// `train`.
absl::StatusOr<PatTree> Fit(const DatasetView& train, const PatConfig& config);

// Per continuous attribute, the sorted union of its thresholds; per discrete
// attribute, the maximal runs of its ordering not separated by a used cut.
// Unsplit attributes are suppressed.
Generalization ExtractGeneralization(const PatTree& tree);

// Fit followed by extraction.
absl::StatusOr<Generalization> Minimize(const DatasetView& train,
                                        const PatConfig& config);

std::string OrderingName(CategoricalOrdering ordering);

}  // namespace vdm::pat

#endif  // VDM_PAT_H_

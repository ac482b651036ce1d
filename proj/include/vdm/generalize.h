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

#ifndef VDM_GENERALIZE_H_
#define VDM_GENERALIZE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "vdm/dataset.h"

namespace vdm {

// Per-attribute bucket map g_i. Buckets are 1-based.
//
// Continuous: `thresholds` t_1 < ... < t_{k-1} split [0,1] into right-closed
// intervals [0,t_1], (t_1,t_2], ..., (t_{k-1},1], so x <= t_1 is bucket 1 and
// a tree split "x <= t" never straddles a bucket. A passthrough map keeps the
// value at full granularity (the identity generalization of a continuous
// attribute).
//
// Discrete: `value_map[v-1]` is the bucket of value v. Buckets are numbered by
// the smallest value they contain.
struct AttributeMap {
  AttributeKind kind = AttributeKind::kDiscrete;
  bool passthrough = false;
  std::vector<double> thresholds;
  std::vector<int> value_map;
  int k = 1;

  static AttributeMap Identity(const AttributeSchema& attribute);
  static AttributeMap Suppressed(const AttributeSchema& attribute);
  static AttributeMap FromThresholds(std::vector<double> thresholds);
  // Relabels buckets canonically and drops empty ones.
  static AttributeMap FromValueMap(std::vector<int> value_map);

  bool is_discrete() const { return kind == AttributeKind::kDiscrete; }
  bool suppressed() const { return !passthrough && k == 1; }

  // Bucket of a value (1-based index for discrete, normalized value for
  // continuous). Passthrough maps return 0.
  int Bucket(double value) const;

  // (lo, hi] of a continuous bucket; the first bucket also contains 0.
  std::pair<double, double> Interval(int bucket) const;
  // Sorted values of a discrete bucket.
  std::vector<int> Values(int bucket) const;

  friend bool operator==(const AttributeMap&, const AttributeMap&) = default;
};

// Strict, global, single-dimensional generalization over a schema. Holds one
// map per schema attribute; the target's map is the identity and is never
// applied.
class Generalization {
 public:
  Generalization() = default;

  static absl::StatusOr<Generalization> Create(const Schema& schema,
                                               std::vector<AttributeMap> maps);
  static Generalization Identity(const Schema& schema);
  static Generalization Full(const Schema& schema);

  const Schema& schema() const { return schema_; }
  const AttributeMap& map(std::size_t attribute) const { return maps_[attribute]; }
  const std::vector<AttributeMap>& maps() const { return maps_; }
  int k(std::size_t attribute) const { return maps_[attribute].k; }

  // Sum of k_i over features; passthrough attributes count one.
  int TotalBuckets() const;

  // Schema of generalized records: each generalized feature becomes discrete
  // with cardinality k_i; passthrough and target attributes are unchanged.
  Schema GeneralizedSchema() const;

  // Generalizes one full-granularity record in schema order.
  std::vector<double> ApplyRecord(std::span<const double> record) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<Generalization> FromJson(const nlohmann::json& doc,
                                                 const Schema& schema);
  absl::Status WriteFile(const std::string& path) const;
  static absl::StatusOr<Generalization> FromFile(const std::string& path,
                                                 const Schema& schema);

  // Content hash; equal generalizations hash equal.
  std::uint64_t Fingerprint() const;

  friend bool operator==(const Generalization& a, const Generalization& b) {
    return a.schema_ == b.schema_ && a.maps_ == b.maps_;
  }

 private:
  Generalization(Schema schema, std::vector<AttributeMap> maps)
      : schema_(std::move(schema)), maps_(std::move(maps)) {}

  Schema schema_;
  std::vector<AttributeMap> maps_;
};

absl::StatusOr<DatasetView> Apply(const Generalization& g,
                                  const DatasetView& view);

// Pre-images g_i^{-1}(j) of every bucket.
class PreimageMask {
 public:
  // `observed`, when given, supplies the values seen in each continuous
  // interval (typically the train split).
  explicit PreimageMask(const Generalization& g,
                        const DatasetView* observed = nullptr);

  const std::vector<int>& Values(std::size_t attribute, int bucket) const {
    return discrete_[attribute][bucket - 1];
  }
  std::pair<double, double> Interval(std::size_t attribute, int bucket) const {
    return intervals_[attribute][bucket - 1];
  }
  const std::vector<double>& Observed(std::size_t attribute, int bucket) const {
    return observed_[attribute][bucket - 1];
  }
  int num_buckets(std::size_t attribute) const {
    return static_cast<int>(discrete_[attribute].size());
  }

 private:
  std::vector<std::vector<std::vector<int>>> discrete_;
  std::vector<std::vector<std::pair<double, double>>> intervals_;
  std::vector<std::vector<std::vector<double>>> observed_;
};

// Uniform weights over the features (one entry per schema feature, in
// schema order).
std::vector<double> UniformNcpWeights(const Schema& schema);

// NCP of one generalized record (bucket indices in schema order).
absl::StatusOr<double> Ncp(const Generalization& g,
                           std::span<const double> generalized_record,
                           std::span<const double> weights);

// Mean NCP over all rows of a generalized view.
absl::StatusOr<double> Gcp(const Generalization& g,
                           const DatasetView& generalized,
                           std::span<const double> weights);

}  // namespace vdm

#endif  // VDM_GENERALIZE_H_

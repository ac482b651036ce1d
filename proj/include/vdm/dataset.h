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

#ifndef VDM_DATASET_H_
#define VDM_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace vdm {

enum class AttributeKind { kContinuous, kDiscrete };
enum class AttributeRole { kFeature, kTarget };
enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

std::string_view SplitName(Split split);
std::optional<Split> ParseSplit(std::string_view name);

// One column of a tabular dataset. Discrete values are stored as 1-based
// indices in {1..cardinality}; `labels[i]` (when present) is the source
// token for index i+1.
struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::kDiscrete;
  int cardinality = 0;
  bool personal = false;
  AttributeRole role = AttributeRole::kFeature;
  std::vector<std::string> labels;

  bool is_discrete() const { return kind == AttributeKind::kDiscrete; }
  bool is_target() const { return role == AttributeRole::kTarget; }
};

// Validated list of attributes: exactly one discrete target, personal flags
// only on features.
class Schema {
 public:
  Schema() = default;

  static absl::StatusOr<Schema> Create(std::vector<AttributeSchema> attributes);
  static absl::StatusOr<Schema> FromJson(const nlohmann::json& doc);
  static absl::StatusOr<Schema> FromFile(const std::string& path);
  nlohmann::json ToJson() const;
  absl::Status WriteFile(const std::string& path) const;

  std::size_t size() const { return attributes_.size(); }
  const AttributeSchema& operator[](std::size_t i) const { return attributes_[i]; }
  const std::vector<AttributeSchema>& attributes() const { return attributes_; }

  int target_index() const { return target_; }
  const AttributeSchema& target() const { return attributes_[target_]; }
  int num_classes() const { return target().cardinality; }

  // Schema indices of features, of personal features (P) and of non-personal
  // features (N), each in schema order.
  const std::vector<int>& features() const { return features_; }
  const std::vector<int>& personal() const { return personal_; }
  const std::vector<int>& non_personal() const { return non_personal_; }

  // -1 when absent.
  int Find(std::string_view name) const;

  // Stable hash over names, kinds, cardinalities, personal flags and roles.
  std::uint64_t Fingerprint() const;
  std::string FingerprintHex() const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.Fingerprint() == b.Fingerprint();
  }

 private:
  std::vector<AttributeSchema> attributes_;
  int target_ = -1;
  std::vector<int> features_;
  std::vector<int> personal_;
  std::vector<int> non_personal_;
};

// Min-max scaling constants of a continuous attribute, taken from the train
// split.
struct Normalization {
  double min = 0.0;
  double max = 1.0;

  double Apply(double raw) const;
  double Invert(double normalized) const;
};

// Immutable table of n rows over a schema. Continuous values are normalized
// to [0,1]; discrete values are 1-based indices.
class DatasetView {
 public:
  DatasetView() = default;
  DatasetView(Schema schema, std::vector<double> values,
              std::vector<Split> splits, std::uint64_t seed = 0,
              std::vector<Normalization> normalization = {});

  const Schema& schema() const { return schema_; }
  std::size_t num_rows() const { return splits_.size(); }
  std::size_t num_attributes() const { return schema_.size(); }
  std::uint64_t seed() const { return seed_; }

  double value(std::size_t row, std::size_t attribute) const {
    return values_[row * schema_.size() + attribute];
  }
  // Discrete value as a 1-based index.
  int index(std::size_t row, std::size_t attribute) const {
    return static_cast<int>(value(row, attribute));
  }
  // 0-based class of the target.
  int label(std::size_t row) const {
    return index(row, static_cast<std::size_t>(schema_.target_index())) - 1;
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * schema_.size(), schema_.size()};
  }
  Split split(std::size_t row) const { return splits_[row]; }
  const std::vector<Split>& splits() const { return splits_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Normalization>& normalization() const {
    return normalization_;
  }

  std::vector<std::size_t> RowsIn(Split split) const;
  // Rows of one split as a standalone view (split tags preserved).
  DatasetView Part(Split split) const;
  DatasetView Subset(std::span<const std::size_t> rows) const;
  DatasetView WithSplits(std::vector<Split> splits, std::uint64_t seed) const;

 private:
  Schema schema_;
  std::vector<double> values_;
  std::vector<Split> splits_;
  std::uint64_t seed_ = 0;
  std::vector<Normalization> normalization_;
};

struct SplitFractions {
  double train = 0.6;
  double val = 0.1;
  double test = 0.3;
};

struct LoadOptions {
  SplitFractions fractions;
  std::uint64_t seed = 0;
  // Reuse constants from an earlier load instead of fitting on this train
  // split; one entry per schema attribute.
  std::optional<std::vector<Normalization>> normalization;
};

// Reads an RFC-4180 CSV whose header names the schema attributes. An extra
// column named "split" (train|val|test) pins the split assignment; otherwise
// rows are split with `options`.
absl::StatusOr<DatasetView> LoadCsv(const std::string& path,
                                    const Schema& schema,
                                    const LoadOptions& options = {});
absl::StatusOr<DatasetView> LoadCsv(const std::string& path,
                                    const std::string& schema_path,
                                    const LoadOptions& options = {});
absl::StatusOr<DatasetView> ParseCsv(std::string_view text,
                                     const Schema& schema,
                                     const LoadOptions& options = {});

// Writes raw-scale values plus a "split" column.
absl::Status WriteCsv(const DatasetView& view, const std::string& path);
std::string ToCsv(const DatasetView& view);

// Assigns split tags. Rows that first cover a discrete value of some
// attribute go to train; the remainder is shuffled with `seed`.
absl::StatusOr<DatasetView> SplitView(const DatasetView& view,
                                      const SplitFractions& fractions,
                                      std::uint64_t seed);

// One-hot width: sum of discrete cardinalities of the given attributes plus
// one column per continuous attribute.
std::size_t OneHotWidth(const Schema& schema, std::span<const int> attributes);

// Dense row-major encoding of `rows` over `attributes`.
std::vector<double> EncodeOneHot(const DatasetView& view,
                                 std::span<const std::size_t> rows,
                                 std::span<const int> attributes);
// Encodes all features of all rows.
std::vector<double> EncodeOneHot(const DatasetView& view);

std::vector<std::size_t> AllRows(const DatasetView& view);

// Class space used when a personal attribute is a prediction target: discrete
// attributes use their values, continuous ones a fixed grid over [0,1].
constexpr int kContinuousReferenceBins = 10;
int ReferenceCardinality(const AttributeSchema& attribute);
// 0-based class of a value.
int ReferenceClass(const AttributeSchema& attribute, double value);

// Stable 64-bit FNV-1a hash, identical across runs and platforms.
std::uint64_t StableHash(std::string_view bytes);

// RFC-4180 quoting, applied only when needed.
std::string QuoteCsvField(const std::string& field);

}  // namespace vdm

#endif  // VDM_DATASET_H_

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

#include "vdm/generalize.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "absl/strings/str_cat.h"

namespace vdm {
namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void Mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

std::uint64_t Bits(double v) {
  std::uint64_t out;
  static_assert(sizeof(out) == sizeof(v));
  std::memcpy(&out, &v, sizeof(v));
  return out;
}

absl::Status ValidateMap(const AttributeSchema& attr, const AttributeMap& m) {
  if (attr.is_discrete() != m.is_discrete()) {
    return absl::InvalidArgumentError(
        absl::StrCat("attribute ", attr.name, ": map kind does not match schema"));
  }
  if (m.is_discrete()) {
    if (m.passthrough) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute ", attr.name, ": discrete maps cannot pass through"));
    }
    if (m.value_map.size() != static_cast<std::size_t>(attr.cardinality)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute ", attr.name, ": value map covers ", m.value_map.size(),
          " of ", attr.cardinality, " values"));
    }
    std::vector<bool> used(m.k + 1, false);
    for (int b : m.value_map) {
      if (b < 1 || b > m.k) {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", attr.name, ": bucket out of range"));
      }
      used[b] = true;
    }
    for (int b = 1; b <= m.k; ++b) {
      if (!used[b]) {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", attr.name, ": bucket ", b, " is empty"));
      }
    }
    return absl::OkStatus();
  }
  if (m.passthrough) {
    if (!m.thresholds.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute ", attr.name, ": passthrough map cannot have thresholds"));
    }
    return absl::OkStatus();
  }
  if (m.k != static_cast<int>(m.thresholds.size()) + 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("attribute ", attr.name, ": k does not match thresholds"));
  }
  for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
    const double t = m.thresholds[i];
    if (!std::isfinite(t) || t < 0.0 || t >= 1.0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute ", attr.name, ": threshold ", t, " outside [0,1)"));
    }
    if (i > 0 && t <= m.thresholds[i - 1]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "attribute ", attr.name, ": thresholds must be strictly increasing"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

AttributeMap AttributeMap::Identity(const AttributeSchema& attribute) {
  AttributeMap m;
  m.kind = attribute.kind;
  if (attribute.is_discrete()) {
    m.value_map.resize(attribute.cardinality);
    for (int v = 1; v <= attribute.cardinality; ++v) m.value_map[v - 1] = v;
    m.k = attribute.cardinality;
  } else {
    m.passthrough = true;
    m.k = 1;
  }
  return m;
}

AttributeMap AttributeMap::Suppressed(const AttributeSchema& attribute) {
  AttributeMap m;
  m.kind = attribute.kind;
  if (attribute.is_discrete()) m.value_map.assign(attribute.cardinality, 1);
  m.k = 1;
  return m;
}

AttributeMap AttributeMap::FromThresholds(std::vector<double> thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  std::erase_if(thresholds, [](double t) { return t < 0.0 || t >= 1.0; });
  AttributeMap m;
  m.kind = AttributeKind::kContinuous;
  m.k = static_cast<int>(thresholds.size()) + 1;
  m.thresholds = std::move(thresholds);
  return m;
}

AttributeMap AttributeMap::FromValueMap(std::vector<int> value_map) {
  // Canonical order: by smallest member value, which is first-occurrence order.
  int next = 0;
  std::map<int, int> first_seen;
  for (int b : value_map) {
    if (first_seen.emplace(b, next + 1).second) ++next;
  }
  AttributeMap m;
  m.kind = AttributeKind::kDiscrete;
  m.value_map.reserve(value_map.size());
  for (int b : value_map) m.value_map.push_back(first_seen[b]);
  m.k = std::max(next, 1);
  return m;
}

int AttributeMap::Bucket(double value) const {
  if (passthrough) return 0;
  if (is_discrete()) return value_map[static_cast<int>(value) - 1];
  // Number of thresholds strictly below value.
  return static_cast<int>(std::lower_bound(thresholds.begin(), thresholds.end(),
                                           value) -
                          thresholds.begin()) +
         1;
}

std::pair<double, double> AttributeMap::Interval(int bucket) const {
  const double lo = bucket == 1 ? 0.0 : thresholds[bucket - 2];
  const double hi = bucket == k ? 1.0 : thresholds[bucket - 1];
  return {lo, hi};
}

std::vector<int> AttributeMap::Values(int bucket) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < value_map.size(); ++v) {
    if (value_map[v] == bucket) out.push_back(static_cast<int>(v) + 1);
  }
  return out;
}

absl::StatusOr<Generalization> Generalization::Create(
    const Schema& schema, std::vector<AttributeMap> maps) {
  if (maps.size() != schema.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "generalization has ", maps.size(), " maps for ", schema.size(),
        " attributes"));
  }
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].is_target()) {
      maps[a] = AttributeMap::Identity(schema[a]);
      continue;
    }
    if (maps[a].is_discrete() && !maps[a].value_map.empty()) {
      // Canonicalize while preserving any invalid labels for validation.
      const AttributeMap canonical = AttributeMap::FromValueMap(maps[a].value_map);
      if (absl::Status s = ValidateMap(schema[a], maps[a]); !s.ok()) return s;
      maps[a] = canonical;
    }
    if (absl::Status s = ValidateMap(schema[a], maps[a]); !s.ok()) return s;
  }
  return Generalization(schema, std::move(maps));
}

Generalization Generalization::Identity(const Schema& schema) {
  std::vector<AttributeMap> maps;
  for (const AttributeSchema& a : schema.attributes()) {
    maps.push_back(AttributeMap::Identity(a));
  }
  return Generalization(schema, std::move(maps));
}

Generalization Generalization::Full(const Schema& schema) {
  std::vector<AttributeMap> maps;
  for (const AttributeSchema& a : schema.attributes()) {
    maps.push_back(a.is_target() ? AttributeMap::Identity(a)
                                 : AttributeMap::Suppressed(a));
  }
  return Generalization(schema, std::move(maps));
}

int Generalization::TotalBuckets() const {
  int total = 0;
  for (int a : schema_.features()) total += maps_[a].k;
  return total;
}

Schema Generalization::GeneralizedSchema() const {
  std::vector<AttributeSchema> attributes = schema_.attributes();
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (attributes[a].is_target() || maps_[a].passthrough) continue;
    attributes[a].kind = AttributeKind::kDiscrete;
    attributes[a].cardinality = maps_[a].k;
    attributes[a].labels.clear();
  }
  absl::StatusOr<Schema> out = Schema::Create(std::move(attributes));
  return *std::move(out);
}

std::vector<double> Generalization::ApplyRecord(
    std::span<const double> record) const {
  std::vector<double> out(record.begin(), record.end());
  for (int a : schema_.features()) {
    if (!maps_[a].passthrough) out[a] = maps_[a].Bucket(record[a]);
  }
  return out;
}

json Generalization::ToJson() const {
  json attributes = json::array();
  for (int a : schema_.features()) {
    const AttributeMap& m = maps_[a];
    json item = {{"name", schema_[a].name},
                 {"kind", m.is_discrete() ? "discrete" : "continuous"},
                 {"k", m.k}};
    if (m.is_discrete()) {
      json buckets = json::array();
      for (int b = 1; b <= m.k; ++b) buckets.push_back(m.Values(b));
      item["value_map"] = std::move(buckets);
    } else if (m.passthrough) {
      item["identity"] = true;
    } else {
      item["thresholds"] = m.thresholds;
    }
    attributes.push_back(std::move(item));
  }
  return {{"schema_fingerprint", schema_.FingerprintHex()},
          {"attributes", std::move(attributes)}};
}

absl::StatusOr<Generalization> Generalization::FromJson(const json& doc,
                                                        const Schema& schema) {
  if (!doc.is_object() || !doc.contains("schema_fingerprint") ||
      !doc.contains("attributes") || !doc["attributes"].is_array()) {
    return absl::InvalidArgumentError("malformed generalization document");
  }
  if (!doc["schema_fingerprint"].is_string() ||
      doc["schema_fingerprint"].get<std::string>() != schema.FingerprintHex()) {
    return absl::FailedPreconditionError(
        "generalization schema fingerprint does not match the data schema");
  }
  std::vector<AttributeMap> maps;
  for (const AttributeSchema& a : schema.attributes()) {
    maps.push_back(AttributeMap::Identity(a));
  }
  std::vector<bool> seen(schema.size(), false);
  try {
    for (const json& item : doc["attributes"]) {
      const std::string name = item.at("name").get<std::string>();
      const int a = schema.Find(name);
      if (a < 0 || schema[a].is_target()) {
        return absl::InvalidArgumentError(
            absl::StrCat("generalization names unknown feature ", name));
      }
      if (seen[a]) {
        return absl::InvalidArgumentError(absl::StrCat("duplicate map for ", name));
      }
      seen[a] = true;
      AttributeMap m;
      m.kind = schema[a].kind;
      m.k = item.at("k").get<int>();
      if (schema[a].is_discrete()) {
        const json& buckets = item.at("value_map");
        if (!buckets.is_array() || buckets.size() != static_cast<std::size_t>(m.k)) {
          return absl::InvalidArgumentError(
              absl::StrCat(name, ": value_map must list k buckets"));
        }
        m.value_map.assign(schema[a].cardinality, 0);
        for (std::size_t b = 0; b < buckets.size(); ++b) {
          for (const json& v : buckets[b]) {
            const int value = v.get<int>();
            if (value < 1 || value > schema[a].cardinality) {
              return absl::InvalidArgumentError(
                  absl::StrCat(name, ": value ", value, " out of range"));
            }
            if (m.value_map[value - 1] != 0) {
              return absl::InvalidArgumentError(absl::StrCat(
                  name, ": value ", value,
                  " appears in two buckets (generalization must be strict)"));
            }
            m.value_map[value - 1] = static_cast<int>(b) + 1;
          }
        }
        for (int v = 1; v <= schema[a].cardinality; ++v) {
          if (m.value_map[v - 1] == 0) {
            return absl::InvalidArgumentError(absl::StrCat(
                name, ": value ", v,
                " has no bucket (generalization must be strict)"));
          }
        }
      } else if (item.value("identity", false)) {
        m.passthrough = true;
        m.k = 1;
      } else {
        m.thresholds = item.at("thresholds").get<std::vector<double>>();
      }
      maps[a] = std::move(m);
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed generalization document: ", e.what()));
  }
  for (int a : schema.features()) {
    if (!seen[a]) {
      return absl::InvalidArgumentError(
          absl::StrCat("generalization lacks a map for ", schema[a].name));
    }
  }
  return Create(schema, std::move(maps));
}

absl::Status Generalization::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << ToJson().dump(2) << "\n";
  return absl::OkStatus();
}

absl::StatusOr<Generalization> Generalization::FromFile(const std::string& path,
                                                        const Schema& schema) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return FromJson(doc, schema);
}

std::uint64_t Generalization::Fingerprint() const {
  std::uint64_t h = schema_.Fingerprint();
  for (int a : schema_.features()) {
    const AttributeMap& m = maps_[a];
    Mix(h, static_cast<std::uint64_t>(a));
    Mix(h, m.passthrough ? 1 : 0);
    Mix(h, static_cast<std::uint64_t>(m.k));
    for (double t : m.thresholds) Mix(h, Bits(t));
    for (int b : m.value_map) Mix(h, static_cast<std::uint64_t>(b));
  }
  return h;
}

absl::StatusOr<DatasetView> Apply(const Generalization& g,
                                  const DatasetView& view) {
  if (!(g.schema() == view.schema())) {
    return absl::FailedPreconditionError(
        "generalization schema does not match the data schema");
  }
  const Schema generalized = g.GeneralizedSchema();
  const std::size_t d = view.num_attributes();
  std::vector<double> values = view.values();
  for (std::size_t r = 0; r < view.num_rows(); ++r) {
    for (int a : g.schema().features()) {
      const AttributeMap& m = g.map(a);
      if (!m.passthrough) values[r * d + a] = m.Bucket(view.value(r, a));
    }
  }
  std::vector<Normalization> norm = view.normalization();
  for (int a : g.schema().features()) {
    if (!g.map(a).passthrough) norm[a] = Normalization{};
  }
  return DatasetView(generalized, std::move(values), view.splits(), view.seed(),
                     std::move(norm));
}

PreimageMask::PreimageMask(const Generalization& g, const DatasetView* observed) {
  const Schema& schema = g.schema();
  discrete_.resize(schema.size());
  intervals_.resize(schema.size());
  observed_.resize(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const AttributeMap& m = g.map(a);
    if (m.passthrough) continue;
    const int k = m.k;
    discrete_[a].resize(k);
    intervals_[a].resize(k);
    observed_[a].resize(k);
    for (int b = 1; b <= k; ++b) {
      if (m.is_discrete()) {
        discrete_[a][b - 1] = m.Values(b);
      } else {
        intervals_[a][b - 1] = m.Interval(b);
      }
    }
    if (!m.is_discrete() && observed != nullptr) {
      std::vector<double> seen;
      for (std::size_t r : observed->RowsIn(Split::kTrain)) {
        seen.push_back(observed->value(r, a));
      }
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (double v : seen) observed_[a][m.Bucket(v) - 1].push_back(v);
    }
  }
}

std::vector<double> UniformNcpWeights(const Schema& schema) {
  const std::size_t d = schema.features().size();
  return std::vector<double>(d, d == 0 ? 0.0 : 1.0 / static_cast<double>(d));
}

absl::StatusOr<double> Ncp(const Generalization& g,
                           std::span<const double> generalized_record,
                           std::span<const double> weights) {
  const std::vector<int>& features = g.schema().features();
  if (weights.size() != features.size()) {
    return absl::InvalidArgumentError("one NCP weight per feature required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) return absl::InvalidArgumentError("NCP weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("NCP weights must sum to 1");
  }
  if (generalized_record.size() != g.schema().size()) {
    return absl::InvalidArgumentError("record width does not match schema");
  }
  double ncp = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const AttributeMap& m = g.map(features[i]);
    if (m.passthrough) continue;
    const int bucket = static_cast<int>(generalized_record[features[i]]);
    if (bucket < 1 || bucket > m.k) {
      return absl::InvalidArgumentError("record is not consistent with g");
    }
    double term = 0.0;
    if (m.is_discrete()) {
      const std::size_t size = m.Values(bucket).size();
      term = size <= 1 ? 0.0
                       : static_cast<double>(size) /
                             static_cast<double>(m.value_map.size());
    } else {
      const auto [lo, hi] = m.Interval(bucket);
      term = hi - lo;
    }
    ncp += weights[i] * term;
  }
  return ncp;
}

absl::StatusOr<double> Gcp(const Generalization& g,
                           const DatasetView& generalized,
                           std::span<const double> weights) {
  if (generalized.num_rows() == 0) {
    return absl::InvalidArgumentError("GCP of an empty view is undefined");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < generalized.num_rows(); ++r) {
    absl::StatusOr<double> ncp = Ncp(g, generalized.row(r), weights);
    if (!ncp.ok()) return ncp.status();
    total += *ncp;
  }
  return total / static_cast<double>(generalized.num_rows());
}

}  // namespace vdm

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
#include <set>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "vdm/random.h"

namespace vdm {
namespace {

using ::testing::HasSubstr;
using testing::Continuous;
using testing::Discrete;
using testing::MakeSchema;
using testing::MakeView;
using testing::Target;

Schema MixedSchema() {
  return MakeSchema({Discrete("a", 4), Continuous("x"), Target("y")});
}

DatasetView RandomView(const Schema& schema, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    for (const AttributeSchema& a : schema.attributes()) {
      row.push_back(a.is_discrete() ? 1.0 + rng.Index(a.cardinality)
                                    : rng.Uniform());
    }
    rows.push_back(row);
  }
  return MakeView(schema, rows);
}

Generalization Make(const Schema& schema, std::vector<AttributeMap> maps) {
  absl::StatusOr<Generalization> g = Generalization::Create(schema, std::move(maps));
  EXPECT_TRUE(g.ok()) << g.status();
  return *g;
}

TEST(ApplyTest, IdentityLeavesDataUnchanged) {
  const Schema schema = MixedSchema();
  const DatasetView view = RandomView(schema, 50, 1);
  absl::StatusOr<DatasetView> out = Apply(Generalization::Identity(schema), view);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->values(), view.values());
}

TEST(ApplyTest, FullGeneralizationMapsEveryFeatureToOne) {
  const Schema schema = MixedSchema();
  const DatasetView view = RandomView(schema, 50, 2);
  absl::StatusOr<DatasetView> out = Apply(Generalization::Full(schema), view);
  ASSERT_TRUE(out.ok());
  for (std::size_t r = 0; r < view.num_rows(); ++r) {
    EXPECT_EQ(out->value(r, 0), 1.0);
    EXPECT_EQ(out->value(r, 1), 1.0);
    EXPECT_EQ(out->label(r), view.label(r));
  }
  EXPECT_EQ(out->schema()[1].kind, AttributeKind::kDiscrete);
  EXPECT_EQ(out->schema()[1].cardinality, 1);
}

TEST(ApplyTest, ContinuousBoundaryAgainstIntervalOracle) {
  const AttributeMap m = AttributeMap::FromThresholds({0.5});
  EXPECT_EQ(m.Bucket(0.5), 1);
  EXPECT_EQ(m.Bucket(0.51), 2);
  // Oracle: enumerate a grid and test interval membership directly.
  const AttributeMap three = AttributeMap::FromThresholds({0.25, 0.6});
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    int expected = 0;
    for (int b = 1; b <= three.k; ++b) {
      const auto [lo, hi] = three.Interval(b);
      const bool inside = (b == 1 ? x >= lo : x > lo) && x <= hi;
      if (inside) {
        EXPECT_EQ(expected, 0) << "overlap at " << x;
        expected = b;
      }
    }
    EXPECT_EQ(three.Bucket(x), expected) << x;
  }
}

TEST(ApplyTest, RejectsSchemaMismatch) {
  const Schema other = MakeSchema({Discrete("a", 5), Continuous("x"), Target("y")});
  const DatasetView view = RandomView(other, 5, 3);
  EXPECT_FALSE(Apply(Generalization::Identity(MixedSchema()), view).ok());
}

TEST(ApplyTest, IdentityOfGeneralizedSchemaIsNoOp) {
  const Schema schema = MixedSchema();
  const DatasetView view = RandomView(schema, 80, 4);
  const Generalization g =
      Make(schema, {AttributeMap::FromValueMap({2, 1, 2, 3}),
                    AttributeMap::FromThresholds({0.3, 0.7}), AttributeMap{}});
  absl::StatusOr<DatasetView> once = Apply(g, view);
  ASSERT_TRUE(once.ok());
  absl::StatusOr<DatasetView> twice =
      Apply(Generalization::Identity(once->schema()), *once);
  ASSERT_TRUE(twice.ok());
  EXPECT_EQ(twice->values(), once->values());
}

TEST(AttributeMapTest, CanonicalBucketOrderByMinimumValue) {
  const AttributeMap m = AttributeMap::FromValueMap({7, 3, 7, 9});
  EXPECT_EQ(m.value_map, (std::vector<int>{1, 2, 1, 3}));
  EXPECT_EQ(m.k, 3);
  EXPECT_EQ(AttributeMap::FromValueMap({2, 2, 1}),
            AttributeMap::FromValueMap({5, 5, 4}));
}

TEST(AttributeMapTest, PartitionPropertyAndMonotonicity) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = 1 + static_cast<int>(rng.Index(9));
    std::vector<int> labels(c);
    for (int& l : labels) l = 1 + static_cast<int>(rng.Index(4));
    const AttributeMap m = AttributeMap::FromValueMap(labels);
    std::size_t total = 0;
    std::set<int> seen;
    for (int b = 1; b <= m.k; ++b) {
      const std::vector<int> values = m.Values(b);
      EXPECT_FALSE(values.empty());
      for (int v : values) EXPECT_TRUE(seen.insert(v).second);
      total += values.size();
    }
    EXPECT_EQ(total, static_cast<std::size_t>(c));

    std::vector<double> thresholds;
    const int cuts = static_cast<int>(rng.Index(5));
    for (int i = 0; i < cuts; ++i) thresholds.push_back(rng.Uniform());
    const AttributeMap cont = AttributeMap::FromThresholds(thresholds);
    double covered = 0.0;
    for (int b = 1; b <= cont.k; ++b) {
      const auto [lo, hi] = cont.Interval(b);
      EXPECT_LE(lo, hi);
      covered += hi - lo;
    }
    EXPECT_NEAR(covered, 1.0, 1e-12);
    int previous = 1;
    for (int i = 0; i <= 200; ++i) {
      const int b = cont.Bucket(i / 200.0);
      EXPECT_GE(b, previous);
      previous = b;
    }
  }
}

TEST(NcpTest, IdentityIsZero) {
  const Schema schema = MixedSchema();
  const Generalization g = Generalization::Identity(schema);
  const DatasetView view = RandomView(schema, 30, 6);
  const std::vector<double> w = UniformNcpWeights(schema);
  for (std::size_t r = 0; r < view.num_rows(); ++r) {
    absl::StatusOr<double> ncp = Ncp(g, view.row(r), w);
    ASSERT_TRUE(ncp.ok());
    EXPECT_EQ(*ncp, 0.0);
  }
  absl::StatusOr<double> gcp = Gcp(g, view, w);
  ASSERT_TRUE(gcp.ok());
  EXPECT_EQ(*gcp, 0.0);
}

// Gen. 1 groups {a1,a2},{a3,a4}; Gen. 2 groups {a1,a4},{a2,a3}.
TEST(NcpTest, PairingsAreIndistinguishable) {
  const Schema schema = MakeSchema({Discrete("a", 4), Target("y")});
  const Generalization gen1 =
      Make(schema, {AttributeMap::FromValueMap({1, 1, 2, 2}), AttributeMap{}});
  const Generalization gen2 =
      Make(schema, {AttributeMap::FromValueMap({1, 2, 2, 1}), AttributeMap{}});
  const std::vector<double> w = {1.0};
  const DatasetView view = RandomView(schema, 101, 7);
  for (const Generalization* g : {&gen1, &gen2}) {
    absl::StatusOr<DatasetView> z = Apply(*g, view);
    ASSERT_TRUE(z.ok());
    for (std::size_t r = 0; r < z->num_rows(); ++r) {
      EXPECT_EQ(*Ncp(*g, z->row(r), w), 0.5);
    }
    EXPECT_EQ(*Gcp(*g, *z, w), 0.5);
  }
}

TEST(NcpTest, FullGeneralizationIsOneAndMeanIsExact) {
  const Schema schema = MakeSchema({Discrete("a", 5), Target("y")});
  const Generalization full = Generalization::Full(schema);
  const DatasetView view = RandomView(schema, 20, 8);
  absl::StatusOr<DatasetView> z = Apply(full, view);
  EXPECT_EQ(*Gcp(full, *z, std::vector<double>{1.0}), 1.0);

  const Schema mixed = MixedSchema();
  const Generalization g =
      Make(mixed, {AttributeMap::FromValueMap({1, 1, 2, 3}),
                   AttributeMap::FromThresholds({0.2}), AttributeMap{}});
  const DatasetView data = RandomView(mixed, 64, 9);
  absl::StatusOr<DatasetView> gz = Apply(g, data);
  const std::vector<double> w = {0.25, 0.75};
  double sum = 0.0;
  for (std::size_t r = 0; r < gz->num_rows(); ++r) {
    const double ncp = *Ncp(g, gz->row(r), w);
    EXPECT_GE(ncp, 0.0);
    EXPECT_LE(ncp, 1.0);
    sum += ncp;
  }
  EXPECT_DOUBLE_EQ(*Gcp(g, *gz, w), sum / 64.0);
}

TEST(NcpTest, RejectsInvalidWeightsAndEmptyViews) {
  const Schema schema = MixedSchema();
  const Generalization g = Generalization::Identity(schema);
  const DatasetView view = RandomView(schema, 3, 10);
  EXPECT_FALSE(Ncp(g, view.row(0), std::vector<double>{0.5}).ok());
  EXPECT_FALSE(Ncp(g, view.row(0), std::vector<double>{0.7, 0.7}).ok());
  EXPECT_FALSE(Ncp(g, view.row(0), std::vector<double>{-0.5, 1.5}).ok());
  EXPECT_FALSE(Gcp(g, MakeView(schema, {}), UniformNcpWeights(schema)).ok());
}

TEST(PreimageMaskTest, DiscreteAndObservedContinuousValues) {
  const Schema schema = MakeSchema({Discrete("a", 3), Continuous("x"), Target("y")});
  const Generalization g =
      Make(schema, {AttributeMap::FromValueMap({1, 1, 2}),
                    AttributeMap::FromThresholds({0.5}), AttributeMap{}});
  const DatasetView observed =
      MakeView(schema, {{1, 0.2, 1}, {2, 0.4, 2}, {3, 0.6, 1}});
  const PreimageMask mask(g, &observed);
  EXPECT_EQ(mask.Values(0, 1), (std::vector<int>{1, 2}));
  EXPECT_EQ(mask.Values(0, 2), (std::vector<int>{3}));
  EXPECT_EQ(mask.Observed(1, 1), (std::vector<double>{0.2, 0.4}));
  EXPECT_EQ(mask.Observed(1, 2), (std::vector<double>{0.6}));

  const PreimageMask identity(Generalization::Identity(schema));
  for (int v = 1; v <= 3; ++v) EXPECT_EQ(identity.Values(0, v), std::vector<int>{v});
}

TEST(SerializeTest, RoundTripAndErrors) {
  const Schema schema = MixedSchema();
  const Generalization g =
      Make(schema, {AttributeMap::FromValueMap({1, 2, 1, 2}),
                    AttributeMap::FromThresholds({0.1, 0.123456789012345678}),
                    AttributeMap{}});
  const std::string path = testing::TempPath("g.json");
  ASSERT_TRUE(g.WriteFile(path).ok());
  absl::StatusOr<Generalization> back = Generalization::FromFile(path, schema);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(*back == g);
  EXPECT_EQ(back->ToJson().dump(), g.ToJson().dump());

  const Schema other = MakeSchema({Discrete("a", 4), Continuous("z"), Target("y")});
  EXPECT_THAT(std::string(Generalization::FromJson(g.ToJson(), other)
                              .status()
                              .message()),
              HasSubstr("fingerprint"));

  nlohmann::json overlapping = g.ToJson();
  overlapping["attributes"][0]["value_map"] = {{1, 2}, {2, 3, 4}};
  EXPECT_THAT(std::string(Generalization::FromJson(overlapping, schema)
                              .status()
                              .message()),
              HasSubstr("strict"));
  nlohmann::json unsorted = g.ToJson();
  unsorted["attributes"][1]["thresholds"] = {0.5, 0.2};
  unsorted["attributes"][1]["k"] = 3;
  EXPECT_FALSE(Generalization::FromJson(unsorted, schema).ok());
  EXPECT_FALSE(Generalization::FromJson(nlohmann::json::array(), schema).ok());
}

TEST(SerializeTest, IdentityContinuousRoundTrips) {
  const Schema schema = MixedSchema();
  const Generalization g = Generalization::Identity(schema);
  absl::StatusOr<Generalization> back = Generalization::FromJson(g.ToJson(), schema);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(back->map(1).passthrough);
  EXPECT_EQ(back->Fingerprint(), g.Fingerprint());
}

}  // namespace
}  // namespace vdm

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

#include "vdm/synth.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm {
namespace {

constexpr int kDriverCardinality = 4;

bool ProxyIsDiscrete(int i) { return i % 2 == 0; }

AttributeSchema Attr(std::string name, bool discrete, int cardinality, bool personal) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = discrete ? AttributeKind::kDiscrete : AttributeKind::kContinuous;
  a.cardinality = discrete ? cardinality : 0;
  a.personal = personal;
  return a;
}

}  // namespace

absl::Status ValidateSynthOptions(const SynthOptions& o) {
  if (o.rows == 0) return absl::InvalidArgumentError("rows must be positive");
  if (o.personal < 0) return absl::InvalidArgumentError("personal must be nonnegative");
  if (o.attributes < 2 + 2 * o.personal) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need at least ", 2 + 2 * o.personal, " attributes for ", o.personal,
        " personal attributes and their proxies"));
  }
  if (o.cardinality < 2) return absl::InvalidArgumentError("cardinality must be at least 2");
  if (!(o.correlation >= 0.0 && o.correlation <= 1.0) ||
      !(o.label_noise >= 0.0 && o.label_noise <= 0.5)) {
    return absl::InvalidArgumentError("correlation must lie in [0,1], label_noise in [0,0.5]");
  }
  return absl::OkStatus();
}

absl::StatusOr<Schema> SynthSchema(const SynthOptions& o) {
  if (absl::Status st = ValidateSynthOptions(o); !st.ok()) return st;
  std::vector<AttributeSchema> attrs;
  attrs.push_back(Attr("x0", false, 0, false));
  attrs.push_back(Attr("d1", true, kDriverCardinality, false));
  for (int i = 0; i < o.personal; ++i) {
    attrs.push_back(Attr(absl::StrCat("proxy", i), ProxyIsDiscrete(i), o.cardinality, false));
  }
  const int noise = o.attributes - 2 - 2 * o.personal;
  for (int i = 0; i < noise; ++i) {
    attrs.push_back(Attr(absl::StrCat("noise", i), i % 2 == 1, o.cardinality, false));
  }
  for (int i = 0; i < o.personal; ++i) {
    attrs.push_back(Attr(absl::StrCat("personal", i), ProxyIsDiscrete(i), o.cardinality, true));
  }
  AttributeSchema y = Attr("y", true, 2, false);
  y.role = AttributeRole::kTarget;
  attrs.push_back(std::move(y));
  return Schema::Create(std::move(attrs));
}

absl::StatusOr<DatasetView> Synthesize(const SynthOptions& o) {
  absl::StatusOr<Schema> schema = SynthSchema(o);
  if (!schema.ok()) return schema.status();
  Rng rng(MixSeed(o.seed, 0x5e));
  auto draw = [&](bool discrete) {
    return discrete ? static_cast<double>(1 + rng.Index(o.cardinality)) : rng.Uniform();
  };
  const int noise = o.attributes - 2 - 2 * o.personal;
  std::vector<double> values;
  values.reserve(o.rows * schema->size());
  std::vector<double> proxies(o.personal);
  for (std::size_t r = 0; r < o.rows; ++r) {
    const double x0 = rng.Uniform();
    const int d1 = 1 + static_cast<int>(rng.Index(kDriverCardinality));
    values.push_back(x0);
    values.push_back(d1);
    for (int i = 0; i < o.personal; ++i) {
      proxies[i] = draw(ProxyIsDiscrete(i));
      values.push_back(proxies[i]);
    }
    for (int i = 0; i < noise; ++i) values.push_back(draw(i % 2 == 1));
    for (int i = 0; i < o.personal; ++i) {
      values.push_back(rng.Bernoulli(o.correlation) ? proxies[i] : draw(ProxyIsDiscrete(i)));
    }
    bool y = (x0 > 0.5) != (d1 >= 3);
    if (rng.Bernoulli(o.label_noise)) y = !y;
    values.push_back(y ? 2.0 : 1.0);
  }
  const DatasetView raw(*schema, std::move(values),
                        std::vector<Split>(o.rows, Split::kTrain), o.seed);
  return SplitView(raw, o.fractions, MixSeed(o.seed, 0x5f));
}

}  // namespace vdm

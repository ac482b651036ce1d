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

#ifndef VDM_SYNTH_H_
#define VDM_SYNTH_H_

#include <cstddef>
#include <cstdint>

#include "absl/status/statusor.h"
#include "vdm/dataset.h"

namespace vdm {

// Synthetic binary task. Two non-personal drivers decide the label:
//   y = [x0 > 0.5] xor [d1 >= 3]  (flipped with probability label_noise)
// with x0 continuous and d1 discrete over 4 values. Each personal attribute
// copies a dedicated non-personal proxy with probability `correlation` and is
// uniform otherwise; remaining attributes are independent noise. Personal
// and proxy attributes alternate between discrete and continuous.
struct SynthOptions {
  std::size_t rows = 10000;
  int attributes = 10;  // features, target excluded
  int personal = 4;
  int cardinality = 5;
  double correlation = 0.8;
  double label_noise = 0.05;
  std::uint64_t seed = 0;
  SplitFractions fractions;
};

absl::Status ValidateSynthOptions(const SynthOptions& options);

// Schema of the generated data: x0, d1, proxies, noise, personal attributes,
// then the target y.
absl::StatusOr<Schema> SynthSchema(const SynthOptions& options);

absl::StatusOr<DatasetView> Synthesize(const SynthOptions& options);

}  // namespace vdm

#endif  // VDM_SYNTH_H_

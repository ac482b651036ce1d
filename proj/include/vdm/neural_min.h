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

#ifndef VDM_NEURAL_MIN_H_
#define VDM_NEURAL_MIN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "vdm/dataset.h"
#include "vdm/generalize.h"
#include "vdm/nn.h"

namespace vdm::neural {

using nn::Matrix;

enum class Objective { kAdvTrain, kMutualInf };

struct NeuralOptions {
  double lambda = 0.5;
  // Bucket budget per attribute; training may leave some unused.
  int buckets = 5;
  double tau_start = 2.0;
  double tau_end = 0.5;
  // Adversary steps per minimizer step (AdvTrain only).
  int inner_steps = 1;
  int generalizer_width = 50;
  nn::TrainSchedule schedule = DefaultSchedule();

  static nn::TrainSchedule DefaultSchedule() {
    nn::TrainSchedule s;
    s.lr_decay_every = 5;
    s.l2_grid = {0.0};
    return s;
  }
  // Temperature during `epoch`, decaying geometrically from tau_start to
  // tau_end over the schedule.
  double Temperature(int epoch) const;
};

absl::Status ValidateOptions(const NeuralOptions& options);

// Per-feature inputs of a batch: one-hot rows (discrete) or the value
// (continuous). Indexed like Schema::features().
std::vector<Matrix> AttributeInputs(const DatasetView& view,
                                    std::span<const std::size_t> rows);

// Output of the soft generalizer for one feature.
struct SoftBuckets {
  Matrix scores;     // pre-temperature: logits or -(m - c_j)^2
  Matrix log_probs;  // log softmax(scores / tau)
  Matrix probs;
  Matrix monotone;   // continuous only: m(x), batch x 1
};

// Scores -(m - c_j)^2 of monotone outputs m (batch x 1) against k centers.
Matrix CenterScores(const Matrix& m, int buckets);
// Probabilities and log probabilities of scores at temperature tau.
SoftBuckets MakeSoftBuckets(Matrix scores, double tau);

// One network per feature mapping x_i to a distribution over k buckets.
class SoftGeneralizer {
 public:
  SoftGeneralizer(const Schema& schema, int buckets, int width,
                  std::uint64_t seed);

  const Schema& schema() const { return schema_; }
  int buckets() const { return buckets_; }
  // Center (2j+1)/(2k) of continuous bucket j (0-based).
  double center(int j) const { return (2.0 * j + 1.0) / (2.0 * buckets_); }

  std::vector<SoftBuckets> Forward(const std::vector<Matrix>& inputs, double tau,
                                   bool training);
  // Backpropagates gradients w.r.t. every feature's scores into `grads`
  // (aligned with Parameters()).
  void Backward(const std::vector<Matrix>& grad_scores, std::vector<Matrix>* grads);

  std::vector<nn::ParamRef> Parameters();
  std::vector<Matrix> ZeroGradients() const;
  bool AllFinite() const;

  // Argmax buckets at the current parameters, empty buckets dropped.
  Generalization Harden() const;

  nn::Mlp& net(std::size_t feature) { return nets_[feature]; }

 private:
  Schema schema_;
  int buckets_;
  std::vector<nn::Mlp> nets_;
  // m(x) of continuous features from the last Forward.
  std::vector<Matrix> monotone_;
};

// Gradient w.r.t. scores of a loss given its gradient w.r.t. probabilities.
std::vector<Matrix> ScoresGradient(const std::vector<SoftBuckets>& z,
                                   const std::vector<Matrix>& grad_probs,
                                   double tau);

// Mutual-information objective on a batch: the Jensen upper bound on H(z),
// E_{x,x'} sum_i CE(p(x'_i), p(x_i)) with x' = x[perm], minus
// H(z|x) = E_x sum_i H(p(x_i)). Expectations over z are taken exactly.
struct InfoTerms {
  double value = 0.0;
  double marginal_bound = 0.0;   // H(z) bound
  double conditional = 0.0;      // H(z|x)
  std::vector<double> per_sample;
};
InfoTerms MutualInfoLoss(const std::vector<SoftBuckets>& z,
                         std::span<const std::size_t> perm, double tau,
                         std::vector<Matrix>* grad_scores);

struct NeuralResult {
  Generalization generalization;
  // AdvTrain with lambda = 1 and no personal attribute to attack.
  bool no_adversary_signal = false;
  std::vector<double> epoch_loss;
  // MutualInf diagnostics per epoch.
  std::vector<double> epoch_marginal_bound;
  std::vector<double> epoch_conditional;
};

// Joint training state; exposed so tests can drive single steps.
class Trainer {
 public:
  Trainer(const Schema& schema, Objective objective, const NeuralOptions& options);
  // Optimizers hold pointers into the networks.
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // Mean adversary cross-entropy over personal attributes and its gradient
  // per adversary head.
  double AdversaryLoss(const std::vector<Matrix>& inputs,
                       const std::vector<std::vector<int>>& personal, double tau,
                       std::vector<std::vector<Matrix>>* grads);
  // (1-lambda) L_clf - lambda L_adv (AdvTrain) or (1-lambda) L_clf +
  // lambda L_inf (MutualInf) with gradients for generalizer and classifier.
  double MinimizerLoss(const std::vector<Matrix>& inputs, std::span<const int> labels,
                       const std::vector<std::vector<int>>& personal, double tau,
                       std::uint64_t perm_seed, std::vector<Matrix>* generalizer_grads,
                       std::vector<Matrix>* classifier_grads, InfoTerms* info);

  // One adversary update on a batch; touches only adversary parameters.
  double AdversaryStep(const std::vector<Matrix>& inputs,
                       const std::vector<std::vector<int>>& personal,
                       double tau, double lr);
  // One update of generalizer and classifier; touches neither adversary.
  double MinimizerStep(const std::vector<Matrix>& inputs, std::span<const int> labels,
                       const std::vector<std::vector<int>>& personal,
                       double tau, double lr, std::uint64_t perm_seed,
                       InfoTerms* info = nullptr);

  absl::StatusOr<NeuralResult> Fit(const DatasetView& train);

  SoftGeneralizer& generalizer() { return generalizer_; }
  nn::Mlp& classifier() { return classifier_; }
  std::vector<nn::Mlp>& adversaries() { return adversaries_; }

  bool AllFinite() const;

 private:
  Matrix Concat(const std::vector<SoftBuckets>& z) const;
  std::vector<Matrix> Split(const Matrix& grad) const;

  Schema schema_;
  Objective objective_;
  NeuralOptions options_;
  SoftGeneralizer generalizer_;
  nn::Mlp classifier_;
  std::vector<nn::Mlp> adversaries_;
  nn::Optimizer generalizer_opt_;
  nn::Optimizer classifier_opt_;
  std::vector<nn::Optimizer> adversary_opts_;
};

// Reference classes of every personal attribute for `rows`.
std::vector<std::vector<int>> PersonalTargets(const DatasetView& view,
                                              std::span<const std::size_t> rows);

absl::StatusOr<NeuralResult> AdvTrainFit(const DatasetView& train,
                                         const NeuralOptions& options);
absl::StatusOr<NeuralResult> MutualInfFit(const DatasetView& train,
                                          const NeuralOptions& options);

}  // namespace vdm::neural

#endif  // VDM_NEURAL_MIN_H_

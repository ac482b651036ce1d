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

#ifndef VDM_NN_H_
#define VDM_NN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "vdm/dataset.h"

namespace vdm::nn {

// Rows are samples.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { kNone, kRelu, kTanh, kSigmoid };

struct MlpOptions {
  // Layer widths including input and output, e.g. {in, 50, out}.
  std::vector<int> sizes;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kNone;
  // Batch norm after every hidden linear layer.
  bool batch_norm = false;
  // Effective weights (and batch-norm scales) are the elementwise squares of
  // the stored parameters, which makes every layer non-decreasing.
  bool square_weights = false;
  std::uint64_t seed = 0;
};

struct ParamRef {
  Matrix* value;
  bool decay;  // subject to L2
};

constexpr double kBatchNormEps = 1e-5;
constexpr double kBatchNormMomentum = 0.9;

// Dense feed-forward network with manual backpropagation. Each layer computes
// act(BN(x W^T + b)).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(const MlpOptions& options);

  int input_width() const { return options_.sizes.front(); }
  int output_width() const { return options_.sizes.back(); }
  const MlpOptions& options() const { return options_; }
  std::size_t num_layers() const { return layers_.size(); }

  // Training mode uses batch statistics and caches activations for Backward.
  Matrix Forward(const Matrix& x, bool training);
  // Inference mode; no caching.
  Matrix Predict(const Matrix& x) const;

  // Gradient w.r.t. the last Forward(training or not) input. `grads` receives
  // one entry per Parameters() element, overwritten (not accumulated).
  Matrix Backward(const Matrix& grad_output, std::vector<Matrix>* grads);

  std::vector<ParamRef> Parameters();
  std::vector<Matrix> ZeroGradients() const;

  // Running statistics of batch-norm layer `layer` (for tests and restore).
  Vector& running_mean(std::size_t layer) { return layers_[layer].running_mean; }
  Vector& running_var(std::size_t layer) { return layers_[layer].running_var; }
  bool has_batch_norm(std::size_t layer) const { return layers_[layer].batch_norm; }

  bool AllFinite() const;

 private:
  struct Layer {
    Matrix weight;  // out x in
    Matrix bias;    // 1 x out
    Activation activation = Activation::kNone;
    bool batch_norm = false;
    Matrix gamma;   // 1 x out
    Matrix beta;    // 1 x out
    Vector running_mean;
    Vector running_var;
    // Forward cache.
    Matrix input;
    Matrix normalized;
    Vector inv_std;
    Matrix output;
  };

  Matrix EffectiveWeight(const Layer& layer) const;
  Matrix EffectiveGamma(const Layer& layer) const;
  Matrix LayerForward(Layer& layer, const Matrix& x, bool training,
                      bool cache) const;

  MlpOptions options_;
  std::vector<Layer> layers_;
  bool last_training_ = false;
};

// Scalar input, scalar output in [0,1], non-decreasing for any parameters:
// squared weights, tanh hidden units, batch norm, sigmoid output.
MlpOptions MonotoneNetOptions(int hidden_width, int hidden_layers,
                              std::uint64_t seed);

// Row-wise softmax of logits / tau, log-sum-exp stabilized.
Matrix TemperatureSoftmax(const Matrix& logits, double tau);
// Backward of TemperatureSoftmax given its output `probs`.
Matrix TemperatureSoftmaxBackward(const Matrix& probs, const Matrix& grad_probs,
                                  double tau);

// Mean cross-entropy of softmax(logits) against labels; writes dL/dlogits.
double SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels,
                           Matrix* grad_logits);

enum class OptimizerKind { kSgd, kAdam };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::vector<ParamRef> params);
  void Step(std::span<const Matrix> grads, double learning_rate, double l2);

 private:
  OptimizerKind kind_;
  std::vector<ParamRef> params_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  long step_ = 0;
};

struct TrainSchedule {
  int epochs = 20;
  int batch_size = 256;
  double learning_rate = 0.01;
  // Learning rate is multiplied by `lr_decay` every `lr_decay_every` epochs.
  int lr_decay_every = 10;
  double lr_decay = 0.1;
  std::vector<double> l2_grid = {0.0, 1e-5, 1e-4, 1e-3};
  int hidden_width = 50;
  int hidden_layers = 1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;

  double LearningRate(int epoch) const;
};

struct FitResult {
  Mlp net;
  double l2 = 0.0;
  double val_error = 0.0;
  double train_loss = 0.0;
};

Matrix ToMatrix(std::span<const double> row_major, std::size_t rows,
                std::size_t cols);
std::vector<int> Argmax(const Matrix& scores);
double ErrorRate(std::span<const int> predicted, std::span<const int> truth);

// Trains one softmax classifier for a fixed L2 coefficient.
absl::StatusOr<Mlp> TrainSoftmax(const Matrix& x, std::span<const int> y,
                                 int num_classes, const TrainSchedule& schedule,
                                 double l2, double* final_loss = nullptr);

using ValidationError = std::function<double(const Mlp&)>;

// Trains one net per L2 grid value and keeps the lowest validation error
// (ties go to the larger L2). With no validation data the first grid value is
// used.
absl::StatusOr<FitResult> FitSoftmax(const Matrix& x, std::span<const int> y,
                                     int num_classes,
                                     const TrainSchedule& schedule,
                                     const ValidationError& validation_error);
absl::StatusOr<FitResult> FitSoftmax(const Matrix& x, std::span<const int> y,
                                     int num_classes, const Matrix& x_val,
                                     std::span<const int> y_val,
                                     const TrainSchedule& schedule);

// Reference downstream classifier on one-hot features of `train`, L2 tuned
// on `val`.
absl::StatusOr<FitResult> TrainClassifier(const DatasetView& train,
                                          const DatasetView& val,
                                          const TrainSchedule& schedule);

std::vector<int> Labels(const DatasetView& view);
Matrix FeatureMatrix(const DatasetView& view);

}  // namespace vdm::nn

#endif  // VDM_NN_H_

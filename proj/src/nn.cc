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

#include "vdm/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm::nn {
namespace {

Matrix Activate(const Matrix& y, Activation act) {
  switch (act) {
    case Activation::kNone:
      return y;
    case Activation::kRelu:
      return y.cwiseMax(0.0);
    case Activation::kTanh:
      return y.array().tanh().matrix();
    case Activation::kSigmoid:
      return (1.0 / (1.0 + (-y.array()).exp())).matrix();
  }
  return y;
}

// d act / d y expressed through the activation output.
Matrix ActivationGrad(const Matrix& out, Activation act) {
  switch (act) {
    case Activation::kNone:
      return Matrix::Ones(out.rows(), out.cols());
    case Activation::kRelu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - out.array().square()).matrix();
    case Activation::kSigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
  }
  return Matrix::Ones(out.rows(), out.cols());
}

}  // namespace

Mlp::Mlp(const MlpOptions& options) : options_(options) {
  Rng rng(options.seed);
  const std::size_t n_layers = options.sizes.size() - 1;
  layers_.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Layer& layer = layers_[l];
    const int in = options.sizes[l];
    const int out = options.sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    layer.weight.resize(out, in);
    layer.bias.resize(1, out);
    for (int i = 0; i < out; ++i) {
      for (int j = 0; j < in; ++j) {
        // Squared weights are initialized so that v^2 lies in [0, bound].
        layer.weight(i, j) = options.square_weights
                                 ? std::sqrt(rng.Uniform(0.0, bound))
                                 : rng.Uniform(-bound, bound);
      }
    }
    for (int i = 0; i < out; ++i) layer.bias(0, i) = rng.Uniform(-bound, bound);
    const bool last = l + 1 == n_layers;
    layer.activation = last ? options.output : options.hidden;
    layer.batch_norm = options.batch_norm && !last;
    if (layer.batch_norm) {
      layer.gamma = Matrix::Ones(1, out);
      layer.beta = Matrix::Zero(1, out);
      layer.running_mean = Vector::Zero(out);
      layer.running_var = Vector::Ones(out);
    }
  }
}

Matrix Mlp::EffectiveWeight(const Layer& layer) const {
  return options_.square_weights ? Matrix(layer.weight.array().square())
                                 : layer.weight;
}

Matrix Mlp::EffectiveGamma(const Layer& layer) const {
  return options_.square_weights ? Matrix(layer.gamma.array().square())
                                 : layer.gamma;
}

Matrix Mlp::LayerForward(Layer& layer, const Matrix& x, bool training,
                         bool cache) const {
  Matrix z = x * EffectiveWeight(layer).transpose();
  z.rowwise() += layer.bias.row(0);
  if (layer.batch_norm) {
    Vector mean;
    Vector var;
    if (training) {
      mean = z.colwise().mean().transpose();
      var = (z.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
    } else {
      mean = layer.running_mean;
      var = layer.running_var;
    }
    const Vector inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
    Matrix normalized = (z.rowwise() - mean.transpose()).array().rowwise() *
                        inv_std.transpose().array();
    z = normalized.array().rowwise() * EffectiveGamma(layer).row(0).array();
    z.rowwise() += layer.beta.row(0);
    if (cache) {
      layer.normalized = std::move(normalized);
      layer.inv_std = inv_std;
    }
    if (training && cache) {
      layer.running_mean = kBatchNormMomentum * layer.running_mean +
                           (1.0 - kBatchNormMomentum) * mean;
      layer.running_var = kBatchNormMomentum * layer.running_var +
                          (1.0 - kBatchNormMomentum) * var;
    }
  }
  Matrix out = Activate(z, layer.activation);
  if (cache) {
    layer.input = x;
    layer.output = out;
  }
  return out;
}

Matrix Mlp::Forward(const Matrix& x, bool training) {
  last_training_ = training;
  Matrix h = x;
  for (Layer& layer : layers_) h = LayerForward(layer, h, training, true);
  return h;
}

Matrix Mlp::Predict(const Matrix& x) const {
  Matrix h = x;
  for (const Layer& layer : layers_) {
    h = LayerForward(const_cast<Layer&>(layer), h, false, false);
  }
  return h;
}

Matrix Mlp::Backward(const Matrix& grad_output, std::vector<Matrix>* grads) {
  std::vector<Matrix>& g = *grads;
  if (g.size() != Parameters().size()) g = ZeroGradients();
  std::size_t slot = g.size();
  Matrix grad = grad_output;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Layer& layer = layers_[l];
    const std::size_t n_params = layer.batch_norm ? 4 : 2;
    slot -= n_params;
    Matrix dz = grad.cwiseProduct(ActivationGrad(layer.output, layer.activation));
    if (layer.batch_norm) {
      const Matrix gamma = EffectiveGamma(layer);
      Matrix dgamma = dz.cwiseProduct(layer.normalized).colwise().sum();
      Matrix dbeta = dz.colwise().sum();
      const Matrix dnorm = dz.array().rowwise() * gamma.row(0).array();
      if (last_training_) {
        const double n = static_cast<double>(dz.rows());
        const Eigen::RowVectorXd sum_dnorm = dnorm.colwise().sum();
        const Eigen::RowVectorXd sum_dnorm_norm =
            dnorm.cwiseProduct(layer.normalized).colwise().sum();
        Matrix centered = (n * dnorm).rowwise() - sum_dnorm;
        centered -= Matrix(layer.normalized.array().rowwise() *
                           sum_dnorm_norm.array());
        dz = (centered.array().rowwise() *
              (layer.inv_std.transpose().array() / n))
                 .matrix();
      } else {
        dz = dnorm.array().rowwise() * layer.inv_std.transpose().array();
      }
      if (options_.square_weights) {
        dgamma = 2.0 * layer.gamma.cwiseProduct(dgamma);
      }
      g[slot + 2] = std::move(dgamma);
      g[slot + 3] = std::move(dbeta);
    }
    Matrix dweight = dz.transpose() * layer.input;
    if (options_.square_weights) dweight = 2.0 * layer.weight.cwiseProduct(dweight);
    g[slot] = std::move(dweight);
    g[slot + 1] = dz.colwise().sum();
    grad = dz * EffectiveWeight(layer);
  }
  return grad;
}

std::vector<ParamRef> Mlp::Parameters() {
  std::vector<ParamRef> params;
  for (Layer& layer : layers_) {
    params.push_back({&layer.weight, true});
    params.push_back({&layer.bias, false});
    if (layer.batch_norm) {
      params.push_back({&layer.gamma, false});
      params.push_back({&layer.beta, false});
    }
  }
  return params;
}

std::vector<Matrix> Mlp::ZeroGradients() const {
  std::vector<Matrix> grads;
  for (const Layer& layer : layers_) {
    grads.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    grads.push_back(Matrix::Zero(1, layer.bias.cols()));
    if (layer.batch_norm) {
      grads.push_back(Matrix::Zero(1, layer.gamma.cols()));
      grads.push_back(Matrix::Zero(1, layer.beta.cols()));
    }
  }
  return grads;
}

bool Mlp::AllFinite() const {
  for (const Layer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    if (layer.batch_norm && (!layer.gamma.allFinite() || !layer.beta.allFinite())) {
      return false;
    }
  }
  return true;
}

MlpOptions MonotoneNetOptions(int hidden_width, int hidden_layers,
                              std::uint64_t seed) {
  MlpOptions options;
  options.sizes.push_back(1);
  for (int i = 0; i < hidden_layers; ++i) options.sizes.push_back(hidden_width);
  options.sizes.push_back(1);
  options.hidden = Activation::kTanh;
  options.output = Activation::kSigmoid;
  options.batch_norm = true;
  options.square_weights = true;
  options.seed = seed;
  return options;
}

Matrix TemperatureSoftmax(const Matrix& logits, double tau) {
  Matrix scaled = logits / tau;
  const Eigen::VectorXd row_max = scaled.rowwise().maxCoeff();
  scaled.colwise() -= row_max;
  Matrix e = scaled.array().exp();
  const Eigen::VectorXd sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

Matrix TemperatureSoftmaxBackward(const Matrix& probs, const Matrix& grad_probs,
                                  double tau) {
  const Eigen::VectorXd dot = probs.cwiseProduct(grad_probs).rowwise().sum();
  Matrix centered = grad_probs.colwise() - dot;
  return probs.cwiseProduct(centered) / tau;
}

double SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels,
                           Matrix* grad_logits) {
  const Matrix probs = TemperatureSoftmax(logits, 1.0);
  const double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    loss -= std::log(std::max(probs(r, labels[r]), 1e-300));
  }
  if (grad_logits != nullptr) {
    *grad_logits = probs;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      (*grad_logits)(r, labels[r]) -= 1.0;
    }
    *grad_logits /= n;
  }
  return loss / n;
}

Optimizer::Optimizer(OptimizerKind kind, std::vector<ParamRef> params)
    : kind_(kind), params_(std::move(params)) {
  if (kind_ == OptimizerKind::kAdam) {
    for (const ParamRef& p : params_) {
      first_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      second_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
}

void Optimizer::Step(std::span<const Matrix> grads, double learning_rate,
                     double l2) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++step_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Matrix& w = *params_[i].value;
    Matrix g = grads[i];
    if (params_[i].decay && l2 > 0.0) g += l2 * w;
    if (kind_ == OptimizerKind::kSgd) {
      w -= learning_rate * g;
      continue;
    }
    first_[i] = kBeta1 * first_[i] + (1.0 - kBeta1) * g;
    second_[i] = kBeta2 * second_[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
    w.array() -= learning_rate * (first_[i].array() / c1) /
                 ((second_[i].array() / c2).sqrt() + kEps);
  }
}

double TrainSchedule::LearningRate(int epoch) const {
  if (lr_decay_every <= 0) return learning_rate;
  return learning_rate * std::pow(lr_decay, epoch / lr_decay_every);
}

Matrix ToMatrix(std::span<const double> row_major, std::size_t rows,
                std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(row_major.begin(), row_major.begin() + rows * cols, m.data());
  return m;
}

std::vector<int> Argmax(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

double ErrorRate(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

absl::StatusOr<Mlp> TrainSoftmax(const Matrix& x, std::span<const int> y,
                                 int num_classes, const TrainSchedule& schedule,
                                 double l2, double* final_loss) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    return absl::InvalidArgumentError("feature/label row count mismatch");
  }
  MlpOptions options;
  options.sizes.push_back(static_cast<int>(x.cols()));
  for (int i = 0; i < schedule.hidden_layers; ++i) {
    options.sizes.push_back(schedule.hidden_width);
  }
  options.sizes.push_back(num_classes);
  options.seed = schedule.seed;
  Mlp net(options);
  if (x.rows() == 0) return net;

  Optimizer optimizer(schedule.optimizer, net.Parameters());
  std::vector<Matrix> grads = net.ZeroGradients();
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  const std::size_t batch = static_cast<std::size_t>(std::max(1, schedule.batch_size));
  Matrix xb;
  std::vector<int> yb;
  Matrix grad_logits;
  double loss = 0.0;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(MixSeed(schedule.seed, static_cast<std::uint64_t>(epoch) + 1));
    rng.Shuffle(std::span<std::size_t>(order));
    const double lr = schedule.LearningRate(epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t size = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(size), x.cols());
      yb.resize(size);
      for (std::size_t i = 0; i < size; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = x.row(order[start + i]);
        yb[i] = y[order[start + i]];
      }
      const Matrix logits = net.Forward(xb, /*training=*/true);
      const double batch_loss = SoftmaxCrossEntropy(logits, yb, &grad_logits);
      if (!std::isfinite(batch_loss)) {
        return absl::InternalError(absl::StrCat(
            "training diverged: non-finite loss in epoch ", epoch));
      }
      epoch_loss += batch_loss * static_cast<double>(size);
      net.Backward(grad_logits, &grads);
      optimizer.Step(grads, lr, l2);
    }
    loss = epoch_loss / static_cast<double>(n);
  }
  if (!net.AllFinite()) {
    return absl::InternalError("training diverged: non-finite parameters");
  }
  if (final_loss != nullptr) *final_loss = loss;
  return net;
}

absl::StatusOr<FitResult> FitSoftmax(const Matrix& x, std::span<const int> y,
                                     int num_classes,
                                     const TrainSchedule& schedule,
                                     const ValidationError& validation_error) {
  std::vector<double> grid = schedule.l2_grid;
  if (grid.empty()) grid = {0.0};
  if (!validation_error) grid.resize(1);
  std::optional<FitResult> best;
  for (double l2 : grid) {
    double loss = 0.0;
    absl::StatusOr<Mlp> net = TrainSoftmax(x, y, num_classes, schedule, l2, &loss);
    if (!net.ok()) return net.status();
    const double err = validation_error ? validation_error(*net) : 0.0;
    if (!best || err < best->val_error ||
        (err == best->val_error && l2 > best->l2)) {
      best = FitResult{*std::move(net), l2, err, loss};
    }
  }
  return *std::move(best);
}

absl::StatusOr<FitResult> FitSoftmax(const Matrix& x, std::span<const int> y,
                                     int num_classes, const Matrix& x_val,
                                     std::span<const int> y_val,
                                     const TrainSchedule& schedule) {
  ValidationError validate;
  if (x_val.rows() > 0) {
    validate = [&](const Mlp& net) {
      return ErrorRate(Argmax(net.Predict(x_val)), y_val);
    };
  }
  return FitSoftmax(x, y, num_classes, schedule, validate);
}

std::vector<int> Labels(const DatasetView& view) {
  std::vector<int> labels(view.num_rows());
  for (std::size_t r = 0; r < view.num_rows(); ++r) labels[r] = view.label(r);
  return labels;
}

Matrix FeatureMatrix(const DatasetView& view) {
  const std::vector<double> encoded = EncodeOneHot(view);
  return ToMatrix(encoded, view.num_rows(),
                  OneHotWidth(view.schema(), view.schema().features()));
}

absl::StatusOr<FitResult> TrainClassifier(const DatasetView& train,
                                          const DatasetView& val,
                                          const TrainSchedule& schedule) {
  const Matrix x = FeatureMatrix(train);
  const std::vector<int> y = Labels(train);
  const Matrix x_val = FeatureMatrix(val);
  const std::vector<int> y_val = Labels(val);
  return FitSoftmax(x, y, train.schema().num_classes(), x_val, y_val, schedule);
}

}  // namespace vdm::nn

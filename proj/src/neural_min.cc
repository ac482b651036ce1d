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

#include "vdm/neural_min.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm::neural {
namespace {

// Row-wise log softmax of scores / tau.
Matrix LogSoftmax(const Matrix& scores, double tau) {
  Matrix u = scores / tau;
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    const double m = u.row(r).maxCoeff();
    const double lse = m + std::log((u.row(r).array() - m).exp().sum());
    u.row(r).array() -= lse;
  }
  return u;
}

// Value m of a monotone net at a scalar input, inference mode.
double MonotoneAt(const nn::Mlp& net, double x) {
  Matrix in(1, 1);
  in(0, 0) = x;
  return net.Predict(in)(0, 0);
}

std::vector<nn::ParamRef> Concat(std::vector<nn::Mlp>& nets) {
  std::vector<nn::ParamRef> out;
  for (nn::Mlp& net : nets) {
    for (const nn::ParamRef& p : net.Parameters()) out.push_back(p);
  }
  return out;
}

std::vector<nn::Mlp> MakeAdversaries(const Schema& schema, int input,
                                     const nn::TrainSchedule& s) {
  std::vector<nn::Mlp> out;
  for (int p : schema.personal()) {
    nn::MlpOptions o;
    o.sizes = {input, s.hidden_width, ReferenceCardinality(schema[p])};
    o.seed = MixSeed(s.seed, 0xad00 + p);
    out.emplace_back(o);
  }
  return out;
}

nn::Mlp MakeClassifier(const Schema& schema, int input, const nn::TrainSchedule& s) {
  nn::MlpOptions o;
  o.sizes = {input, s.hidden_width, schema.num_classes()};
  o.seed = MixSeed(s.seed, 0xc1f);
  return nn::Mlp(o);
}

std::vector<nn::Optimizer> MakeOptimizers(std::vector<nn::Mlp>& nets,
                                          nn::OptimizerKind kind) {
  std::vector<nn::Optimizer> out;
  for (nn::Mlp& net : nets) out.emplace_back(kind, net.Parameters());
  return out;
}

}  // namespace

double NeuralOptions::Temperature(int epoch) const {
  const int epochs = schedule.epochs;
  if (epochs <= 1) return tau_start;
  const double t = static_cast<double>(epoch) / (epochs - 1);
  return tau_start * std::pow(tau_end / tau_start, t);
}

absl::Status ValidateOptions(const NeuralOptions& o) {
  if (!(o.lambda >= 0.0 && o.lambda <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("lambda must lie in [0,1], got ", o.lambda));
  }
  if (o.buckets < 1) return absl::InvalidArgumentError("buckets must be at least 1");
  if (!(o.tau_start > 0.0 && o.tau_end > 0.0)) {
    return absl::InvalidArgumentError("temperatures must be positive");
  }
  if (o.inner_steps < 0) {
    return absl::InvalidArgumentError("inner_steps must be non-negative");
  }
  if (o.schedule.epochs < 1 || o.schedule.batch_size < 1 ||
      !(o.schedule.learning_rate > 0.0) || o.generalizer_width < 1) {
    return absl::InvalidArgumentError("schedule values must be positive");
  }
  return absl::OkStatus();
}

std::vector<Matrix> AttributeInputs(const DatasetView& view,
                                    std::span<const std::size_t> rows) {
  const Schema& schema = view.schema();
  std::vector<Matrix> out;
  for (int a : schema.features()) {
    if (schema[a].is_discrete()) {
      Matrix m = Matrix::Zero(rows.size(), schema[a].cardinality);
      for (std::size_t i = 0; i < rows.size(); ++i) m(i, view.index(rows[i], a) - 1) = 1.0;
      out.push_back(std::move(m));
    } else {
      Matrix m(rows.size(), 1);
      for (std::size_t i = 0; i < rows.size(); ++i) m(i, 0) = view.value(rows[i], a);
      out.push_back(std::move(m));
    }
  }
  return out;
}

Matrix CenterScores(const Matrix& m, int buckets) {
  Matrix scores(m.rows(), buckets);
  for (int j = 0; j < buckets; ++j) {
    const double center = (2.0 * j + 1.0) / (2.0 * buckets);
    scores.col(j) = -(m.col(0).array() - center).square().matrix();
  }
  return scores;
}

SoftBuckets MakeSoftBuckets(Matrix scores, double tau) {
  SoftBuckets z;
  z.log_probs = LogSoftmax(scores, tau);
  z.probs = z.log_probs.array().exp().matrix();
  z.scores = std::move(scores);
  return z;
}

SoftGeneralizer::SoftGeneralizer(const Schema& schema, int buckets, int width,
                                 std::uint64_t seed)
    : schema_(schema), buckets_(buckets), monotone_(schema.features().size()) {
  for (int a : schema.features()) {
    if (schema[a].is_discrete()) {
      nn::MlpOptions o;
      o.sizes = {schema[a].cardinality, width, buckets};
      o.seed = MixSeed(seed, 0x9e00 + a);
      nets_.emplace_back(o);
    } else {
      nets_.emplace_back(nn::MonotoneNetOptions(width, 1, MixSeed(seed, 0x9e00 + a)));
    }
  }
}

std::vector<SoftBuckets> SoftGeneralizer::Forward(const std::vector<Matrix>& inputs,
                                                  double tau, bool training) {
  const std::vector<int>& features = schema_.features();
  std::vector<SoftBuckets> out(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (schema_[features[f]].is_discrete()) {
      out[f] = MakeSoftBuckets(nets_[f].Forward(inputs[f], training), tau);
    } else {
      monotone_[f] = nets_[f].Forward(inputs[f], training);
      out[f] = MakeSoftBuckets(CenterScores(monotone_[f], buckets_), tau);
      out[f].monotone = monotone_[f];
    }
  }
  return out;
}

void SoftGeneralizer::Backward(const std::vector<Matrix>& grad_scores,
                               std::vector<Matrix>* grads) {
  const std::vector<int>& features = schema_.features();
  grads->clear();
  std::vector<Matrix> local;
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (schema_[features[f]].is_discrete()) {
      nets_[f].Backward(grad_scores[f], &local);
    } else {
      // d(-(m - c_j)^2)/dm = -2 (m - c_j).
      const Matrix& m = monotone_[f];
      Matrix grad_m = Matrix::Zero(m.rows(), 1);
      for (int j = 0; j < buckets_; ++j) {
        grad_m.col(0).array() +=
            grad_scores[f].col(j).array() * -2.0 * (m.col(0).array() - center(j));
      }
      nets_[f].Backward(grad_m, &local);
    }
    grads->insert(grads->end(), local.begin(), local.end());
  }
}

std::vector<nn::ParamRef> SoftGeneralizer::Parameters() { return Concat(nets_); }

std::vector<Matrix> SoftGeneralizer::ZeroGradients() const {
  std::vector<Matrix> out;
  for (const nn::Mlp& net : nets_) {
    for (Matrix& g : net.ZeroGradients()) out.push_back(std::move(g));
  }
  return out;
}

bool SoftGeneralizer::AllFinite() const {
  return std::all_of(nets_.begin(), nets_.end(),
                     [](const nn::Mlp& n) { return n.AllFinite(); });
}

Generalization SoftGeneralizer::Harden() const {
  const std::vector<int>& features = schema_.features();
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    maps.push_back(AttributeMap::Identity(schema_[a]));
  }
  for (std::size_t f = 0; f < features.size(); ++f) {
    const int a = features[f];
    if (schema_[a].is_discrete()) {
      const int c = schema_[a].cardinality;
      const Matrix logits = nets_[f].Predict(Matrix::Identity(c, c));
      std::vector<int> value_map(c);
      for (int v = 0; v < c; ++v) {
        Eigen::Index best;
        logits.row(v).maxCoeff(&best);
        value_map[v] = static_cast<int>(best) + 1;
      }
      maps[a] = AttributeMap::FromValueMap(std::move(value_map));
      continue;
    }
    // m is non-decreasing, so bucket j ends where m crosses the boundary j/k
    // between centers j and j+1.
    std::vector<double> thresholds;
    const double at_zero = MonotoneAt(nets_[f], 0.0);
    const double at_one = MonotoneAt(nets_[f], 1.0);
    for (int j = 1; j < buckets_; ++j) {
      const double boundary = static_cast<double>(j) / buckets_;
      if (at_one <= boundary || at_zero > boundary) continue;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 64; ++it) {
        const double mid = lo + (hi - lo) / 2.0;
        (MonotoneAt(nets_[f], mid) <= boundary ? lo : hi) = mid;
      }
      thresholds.push_back(lo);
    }
    maps[a] = AttributeMap::FromThresholds(std::move(thresholds));
  }
  return *Generalization::Create(schema_, std::move(maps));
}

std::vector<Matrix> ScoresGradient(const std::vector<SoftBuckets>& z,
                                   const std::vector<Matrix>& grad_probs,
                                   double tau) {
  std::vector<Matrix> out;
  for (std::size_t f = 0; f < z.size(); ++f) {
    out.push_back(nn::TemperatureSoftmaxBackward(z[f].probs, grad_probs[f], tau));
  }
  return out;
}

InfoTerms MutualInfoLoss(const std::vector<SoftBuckets>& z,
                         std::span<const std::size_t> perm, double tau,
                         std::vector<Matrix>* grad_scores) {
  InfoTerms terms;
  if (z.empty()) return terms;
  const Eigen::Index batch = z.front().probs.rows();
  terms.per_sample.assign(batch, 0.0);
  if (grad_scores != nullptr) grad_scores->clear();
  const double scale = 1.0 / (static_cast<double>(batch) * tau);
  for (const SoftBuckets& s : z) {
    const Matrix& p = s.probs;
    const Matrix& l = s.log_probs;
    Matrix grad = Matrix::Zero(p.rows(), p.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      const Eigen::Index r = static_cast<Eigen::Index>(perm[b]);
      const double cross = -(p.row(r).array() * l.row(b).array()).sum();
      const double entropy = -(p.row(b).array() * l.row(b).array()).sum();
      terms.per_sample[b] += cross - entropy;
      terms.marginal_bound += cross / batch;
      terms.conditional += entropy / batch;
      if (grad_scores == nullptr) continue;
      // Cross term through log p(x_b) and through p(x_r).
      grad.row(b) += p.row(b) - p.row(r);
      grad.row(r).array() +=
          p.row(r).array() * (-cross - l.row(b).array());
      // Negative entropy term through p(x_b).
      grad.row(b).array() += p.row(b).array() * (l.row(b).array() + entropy);
    }
    if (grad_scores != nullptr) grad_scores->push_back(grad * scale);
  }
  terms.value = terms.marginal_bound - terms.conditional;
  return terms;
}

std::vector<std::vector<int>> PersonalTargets(const DatasetView& view,
                                              std::span<const std::size_t> rows) {
  const Schema& schema = view.schema();
  std::vector<std::vector<int>> out;
  for (int p : schema.personal()) {
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[i] = ReferenceClass(schema[p], view.value(rows[i], p));
    }
    out.push_back(std::move(y));
  }
  return out;
}

Trainer::Trainer(const Schema& schema, Objective objective,
                 const NeuralOptions& options)
    : schema_(schema),
      objective_(objective),
      options_(options),
      generalizer_(schema, options.buckets, options.generalizer_width,
                   options.schedule.seed),
      classifier_(MakeClassifier(
          schema, options.buckets * static_cast<int>(schema.features().size()),
          options.schedule)),
      adversaries_(objective == Objective::kAdvTrain
                       ? MakeAdversaries(schema,
                                         options.buckets *
                                             static_cast<int>(schema.features().size()),
                                         options.schedule)
                       : std::vector<nn::Mlp>()),
      generalizer_opt_(options.schedule.optimizer, generalizer_.Parameters()),
      classifier_opt_(options.schedule.optimizer, classifier_.Parameters()),
      adversary_opts_(MakeOptimizers(adversaries_, options.schedule.optimizer)) {}

Matrix Trainer::Concat(const std::vector<SoftBuckets>& z) const {
  const Eigen::Index rows = z.empty() ? 0 : z.front().probs.rows();
  Matrix x(rows, options_.buckets * static_cast<Eigen::Index>(z.size()));
  for (std::size_t f = 0; f < z.size(); ++f) {
    x.middleCols(f * options_.buckets, options_.buckets) = z[f].probs;
  }
  return x;
}

std::vector<Matrix> Trainer::Split(const Matrix& grad) const {
  std::vector<Matrix> out;
  const std::size_t n = schema_.features().size();
  for (std::size_t f = 0; f < n; ++f) {
    out.push_back(grad.middleCols(f * options_.buckets, options_.buckets));
  }
  return out;
}

double Trainer::AdversaryLoss(const std::vector<Matrix>& inputs,
                              const std::vector<std::vector<int>>& personal,
                              double tau, std::vector<std::vector<Matrix>>* grads) {
  grads->assign(adversaries_.size(), {});
  if (adversaries_.empty()) return 0.0;
  const Matrix x = Concat(generalizer_.Forward(inputs, tau, true));
  const double weight = 1.0 / adversaries_.size();
  double loss = 0.0;
  for (std::size_t p = 0; p < adversaries_.size(); ++p) {
    Matrix g;
    loss += weight * nn::SoftmaxCrossEntropy(adversaries_[p].Forward(x, true),
                                             personal[p], &g);
    adversaries_[p].Backward(g * weight, &(*grads)[p]);
  }
  return loss;
}

double Trainer::MinimizerLoss(const std::vector<Matrix>& inputs,
                              std::span<const int> labels,
                              const std::vector<std::vector<int>>& personal,
                              double tau, std::uint64_t perm_seed,
                              std::vector<Matrix>* generalizer_grads,
                              std::vector<Matrix>* classifier_grads,
                              InfoTerms* info) {
  const double lambda = options_.lambda;
  const std::vector<SoftBuckets> z = generalizer_.Forward(inputs, tau, true);
  const Matrix x = Concat(z);

  Matrix g_logits;
  const double clf = nn::SoftmaxCrossEntropy(classifier_.Forward(x, true), labels,
                                             &g_logits);
  Matrix grad_x = classifier_.Backward(g_logits * (1.0 - lambda), classifier_grads);
  double loss = (1.0 - lambda) * clf;

  if (objective_ == Objective::kAdvTrain && !adversaries_.empty()) {
    // The adversary's own gradients are discarded here.
    const double weight = lambda / adversaries_.size();
    std::vector<Matrix> unused;
    for (std::size_t p = 0; p < adversaries_.size(); ++p) {
      Matrix g;
      loss -= weight * nn::SoftmaxCrossEntropy(adversaries_[p].Forward(x, true),
                                               personal[p], &g);
      grad_x += adversaries_[p].Backward(g * -weight, &unused);
    }
  }

  std::vector<Matrix> grad_scores = ScoresGradient(z, Split(grad_x), tau);
  if (objective_ == Objective::kMutualInf) {
    std::vector<std::size_t> perm(x.rows());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(perm_seed);
    rng.Shuffle(std::span<std::size_t>(perm));
    std::vector<Matrix> g_inf;
    InfoTerms terms = MutualInfoLoss(z, perm, tau, &g_inf);
    loss += lambda * terms.value;
    for (std::size_t f = 0; f < grad_scores.size(); ++f) {
      grad_scores[f] += lambda * g_inf[f];
    }
    if (info != nullptr) *info = std::move(terms);
  }
  generalizer_.Backward(grad_scores, generalizer_grads);
  return loss;
}

double Trainer::AdversaryStep(const std::vector<Matrix>& inputs,
                              const std::vector<std::vector<int>>& personal,
                              double tau, double lr) {
  std::vector<std::vector<Matrix>> grads;
  const double loss = AdversaryLoss(inputs, personal, tau, &grads);
  for (std::size_t p = 0; p < adversaries_.size(); ++p) {
    adversary_opts_[p].Step(grads[p], lr, 0.0);
  }
  return loss;
}

double Trainer::MinimizerStep(const std::vector<Matrix>& inputs,
                              std::span<const int> labels,
                              const std::vector<std::vector<int>>& personal,
                              double tau, double lr, std::uint64_t perm_seed,
                              InfoTerms* info) {
  std::vector<Matrix> gen_grads, clf_grads;
  const double loss = MinimizerLoss(inputs, labels, personal, tau, perm_seed,
                                    &gen_grads, &clf_grads, info);
  classifier_opt_.Step(clf_grads, lr, 0.0);
  generalizer_opt_.Step(gen_grads, lr, 0.0);
  return loss;
}

bool Trainer::AllFinite() const {
  return generalizer_.AllFinite() && classifier_.AllFinite() &&
         std::all_of(adversaries_.begin(), adversaries_.end(),
                     [](const nn::Mlp& n) { return n.AllFinite(); });
}

absl::StatusOr<NeuralResult> Trainer::Fit(const DatasetView& train) {
  if (absl::Status s = ValidateOptions(options_); !s.ok()) return s;
  if (train.num_rows() == 0) return absl::InvalidArgumentError("empty training set");
  const nn::TrainSchedule& schedule = options_.schedule;
  NeuralResult result;
  result.no_adversary_signal = objective_ == Objective::kAdvTrain &&
                               options_.lambda == 1.0 && schema_.personal().empty();
  std::vector<std::size_t> order = AllRows(train);
  const std::size_t batch = static_cast<std::size_t>(schedule.batch_size);
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const double tau = options_.Temperature(epoch);
    const double lr = schedule.LearningRate(epoch);
    Rng rng(MixSeed(schedule.seed, epoch + 1));
    rng.Shuffle(std::span<std::size_t>(order));
    double total = 0.0, marginal = 0.0, conditional = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::span<const std::size_t> rows(
          order.data() + start, std::min(batch, order.size() - start));
      const std::vector<Matrix> inputs = AttributeInputs(train, rows);
      std::vector<int> labels(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train.label(rows[i]);
      const std::vector<std::vector<int>> personal = PersonalTargets(train, rows);
      if (objective_ == Objective::kAdvTrain) {
        for (int k = 0; k < options_.inner_steps; ++k) {
          AdversaryStep(inputs, personal, tau, lr);
        }
      }
      InfoTerms info;
      total += MinimizerStep(inputs, labels, personal, tau, lr,
                             MixSeed(schedule.seed ^ 0x5eed, ++step), &info);
      marginal += info.marginal_bound;
      conditional += info.conditional;
      ++batches;
    }
    if (!std::isfinite(total) || !AllFinite()) {
      return absl::InternalError(
          absl::StrCat("neural minimizer diverged in epoch ", epoch));
    }
    result.epoch_loss.push_back(total / batches);
    if (objective_ == Objective::kMutualInf) {
      result.epoch_marginal_bound.push_back(marginal / batches);
      result.epoch_conditional.push_back(conditional / batches);
    }
  }
  result.generalization = generalizer_.Harden();
  return result;
}

absl::StatusOr<NeuralResult> AdvTrainFit(const DatasetView& train,
                                         const NeuralOptions& options) {
  if (absl::Status s = ValidateOptions(options); !s.ok()) return s;
  Trainer trainer(train.schema(), Objective::kAdvTrain, options);
  return trainer.Fit(train);
}

absl::StatusOr<NeuralResult> MutualInfFit(const DatasetView& train,
                                          const NeuralOptions& options) {
  if (absl::Status s = ValidateOptions(options); !s.ok()) return s;
  Trainer trainer(train.schema(), Objective::kMutualInf, options);
  return trainer.Fit(train);
}

}  // namespace vdm::neural

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

#include "vdm/adversaries.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm::adversaries {
namespace {

using nlohmann::json;
using nn::Matrix;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> Targets(const DatasetView& view, int p) {
  std::vector<int> y(view.num_rows());
  for (std::size_t r = 0; r < y.size(); ++r) {
    y[r] = ReferenceClass(view.schema()[p], view.value(r, p));
  }
  return y;
}

int Majority(std::span<const int> y, int classes) {
  std::vector<int> count(classes, 0);
  for (int c : y) ++count[c];
  return static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
}

Matrix Encode(const DatasetView& view, std::span<const int> attributes) {
  const std::vector<std::size_t> rows = AllRows(view);
  return nn::ToMatrix(EncodeOneHot(view, rows, attributes), rows.size(),
                      OneHotWidth(view.schema(), attributes));
}

Matrix HStack(const std::vector<Matrix>& parts) {
  Eigen::Index cols = 0;
  for (const Matrix& m : parts) cols += m.cols();
  Matrix out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const Matrix& m : parts) {
    out.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  return out;
}

// Inputs of one attack for the prior, its validation part and the breach.
struct Inputs {
  Matrix prior;
  std::optional<Matrix> val;
  Matrix breach;
  // Generalized breach, for masks.
  DatasetView breach_z;
};

// One-hot(g(.)) followed by raw `extra` attributes.
absl::StatusOr<Inputs> BuildInputs(const BreachScenario& s,
                                   std::span<const int> extra) {
  auto encode = [&](const DatasetView& view) -> absl::StatusOr<std::pair<Matrix, DatasetView>> {
    absl::StatusOr<DatasetView> z = Apply(s.g, view);
    if (!z.ok()) return z.status();
    Matrix x = nn::FeatureMatrix(*z);
    if (!extra.empty()) x = HStack({x, Encode(view, extra)});
    return std::make_pair(std::move(x), *std::move(z));
  };
  Inputs in;
  auto prior = encode(s.prior);
  if (!prior.ok()) return prior.status();
  in.prior = std::move(prior->first);
  if (s.prior_val.has_value()) {
    auto val = encode(*s.prior_val);
    if (!val.ok()) return val.status();
    in.val = std::move(val->first);
  }
  auto breach = encode(s.breach);
  if (!breach.ok()) return breach.status();
  in.breach = std::move(breach->first);
  in.breach_z = std::move(breach->second);
  return in;
}

absl::StatusOr<nn::Mlp> TrainHead(const BreachScenario& s, const Inputs& in, int p,
                                  const nn::TrainSchedule& schedule) {
  const int classes = ReferenceCardinality(s.prior.schema()[p]);
  const std::vector<int> y = Targets(s.prior, p);
  nn::TrainSchedule sched = schedule;
  sched.seed = MixSeed(schedule.seed, 0xa100 + p);
  absl::StatusOr<nn::FitResult> fit;
  if (in.val.has_value()) {
    fit = nn::FitSoftmax(in.prior, y, classes, *in.val, Targets(*s.prior_val, p), sched);
  } else {
    fit = nn::FitSoftmax(in.prior, y, classes, sched, nn::ValidationError());
  }
  if (!fit.ok()) return fit.status();
  return std::move(fit->net);
}

AttributeReport NewReport(const BreachScenario& s, int p) {
  AttributeReport r;
  r.attribute = p;
  r.name = s.prior.schema()[p].name;
  const std::vector<int> prior_y = Targets(s.prior, p);
  const std::vector<int> truth = Targets(s.breach, p);
  const int majority = Majority(prior_y, ReferenceCardinality(s.prior.schema()[p]));
  std::size_t wrong = 0;
  for (int t : truth) wrong += t != majority;
  r.baseline_error = truth.empty() ? 0.0 : static_cast<double>(wrong) / truth.size();
  return r;
}

// Masked predictions from logits; fills predictions, confidence, error.
void ScoreMasked(const BreachScenario& s, const Matrix& logits,
                 const DatasetView& breach_z, int p, AttributeReport& r) {
  const std::vector<int> truth = Targets(s.breach, p);
  const std::size_t n = truth.size();
  r.predictions.assign(n, -1);
  r.confidence.assign(n, kNegInf);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<bool> mask = ClassMask(s.g, p, breach_z.value(i, p));
    std::span<const double> row(logits.data() + i * logits.cols(), logits.cols());
    const int pred = MaskedArgmax(row, mask);
    r.predictions[i] = pred;
    r.confidence[i] = pred >= 0 ? row[pred] : kNegInf;
    if (pred < 0 || !mask[pred]) ++r.mask_violations;
    wrong += pred != truth[i];
  }
  r.evaluated = n;
  r.error = n == 0 ? 0.0 : static_cast<double>(wrong) / n;
}

void Summarize(ReconstructionReport& report) {
  if (report.attributes.empty()) return;
  double err = 0.0, base = 0.0;
  for (const AttributeReport& a : report.attributes) {
    err += a.error;
    base += a.baseline_error;
  }
  report.mean_error = err / report.attributes.size();
  report.mean_baseline = base / report.attributes.size();
}

absl::StatusOr<AttributeReport> Attack(const BreachScenario& s, int target,
                                       std::span<const int> extra,
                                       const AdversaryOptions& options) {
  absl::StatusOr<Inputs> in = BuildInputs(s, extra);
  if (!in.ok()) return in.status();
  absl::StatusOr<nn::Mlp> head = TrainHead(s, *in, target, options.schedule);
  if (!head.ok()) return head.status();
  AttributeReport r = NewReport(s, target);
  ScoreMasked(s, head->Predict(in->breach), in->breach_z, target, r);
  return r;
}

absl::Status CheckPersonal(const Schema& schema, int p) {
  if (p < 0 || static_cast<std::size_t>(p) >= schema.size() || !schema[p].personal) {
    return absl::InvalidArgumentError(
        absl::StrCat("attribute ", p, " is not a personal attribute"));
  }
  return absl::OkStatus();
}

Matrix Softmax(const Matrix& logits) { return nn::TemperatureSoftmax(logits, 1.0); }

}  // namespace

absl::Status BreachScenario::Validate() const {
  if (!(g.schema() == prior.schema()) || !(g.schema() == breach.schema())) {
    return absl::InvalidArgumentError("scenario views do not match the generalization");
  }
  if (prior_val.has_value() && !(prior_val->schema() == g.schema())) {
    return absl::InvalidArgumentError("validation view does not match the generalization");
  }
  if (prior.num_rows() == 0) return absl::InvalidArgumentError("empty adversary prior");
  if (g.schema().personal().empty()) {
    return absl::FailedPreconditionError("schema has no personal attributes");
  }
  return absl::OkStatus();
}

BreachScenario ScenarioFromSplits(const Generalization& g, const DatasetView& data) {
  BreachScenario s;
  s.g = g;
  s.prior = data.Part(Split::kTrain);
  DatasetView val = data.Part(Split::kVal);
  if (val.num_rows() > 0) s.prior_val = std::move(val);
  s.breach = data.Part(Split::kTest);
  return s;
}

std::vector<bool> ClassMask(const Generalization& g, int p, double z) {
  const AttributeSchema& attr = g.schema()[p];
  const AttributeMap& m = g.map(p);
  std::vector<bool> mask(ReferenceCardinality(attr), false);
  if (attr.is_discrete()) {
    for (int v : m.Values(static_cast<int>(z))) mask[v - 1] = true;
  } else if (m.passthrough) {
    mask[ReferenceClass(attr, z)] = true;
  } else {
    const auto [lo, hi] = m.Interval(static_cast<int>(z));
    for (int c = ReferenceClass(attr, lo); c <= ReferenceClass(attr, hi); ++c) {
      mask[c] = true;
    }
  }
  return mask;
}

int MaskedArgmax(std::span<const double> scores, const std::vector<bool>& mask) {
  int best = -1;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (mask[c] && (best < 0 || scores[c] > scores[best])) best = static_cast<int>(c);
  }
  return best;
}

json ReconstructionReport::ToJson() const {
  json attrs = json::array();
  for (const AttributeReport& a : attributes) {
    attrs.push_back({{"attribute", a.name},
                     {"error", a.error},
                     {"baseline_error", a.baseline_error},
                     {"evaluated", a.evaluated},
                     {"mask_violations", a.mask_violations},
                     {"inconsistent", a.inconsistent}});
  }
  return {{"attributes", std::move(attrs)},
          {"mean_error", mean_error},
          {"mean_baseline", mean_baseline}};
}

absl::StatusOr<ReconstructionReport> A1Reconstruct(const BreachScenario& s,
                                                   const AdversaryOptions& options) {
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  absl::StatusOr<Inputs> in = BuildInputs(s, {});
  if (!in.ok()) return in.status();
  ReconstructionReport report;
  for (int p : s.g.schema().personal()) {
    absl::StatusOr<nn::Mlp> head = TrainHead(s, *in, p, options.schedule);
    if (!head.ok()) return head.status();
    AttributeReport r = NewReport(s, p);
    ScoreMasked(s, head->Predict(in->breach), in->breach_z, p, r);
    report.attributes.push_back(std::move(r));
  }
  Summarize(report);
  return report;
}

absl::StatusOr<ReconstructionReport> A2HighCertainty(const BreachScenario& s,
                                                     double k_percent,
                                                     const AdversaryOptions& options) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("k_percent must lie in (0, 100], got ", k_percent));
  }
  absl::StatusOr<ReconstructionReport> a1 = A1Reconstruct(s, options);
  if (!a1.ok()) return a1.status();
  ReconstructionReport report;
  for (AttributeReport r : a1->attributes) {
    const std::size_t n = r.predictions.size();
    const std::size_t keep = static_cast<std::size_t>(
        std::ceil(k_percent * static_cast<double>(n) / 100.0 - 1e-9));
    if (keep == 0) {
      return absl::FailedPreconditionError(
          absl::StrCat("no prediction survives the ", k_percent, "% cut"));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r.confidence[a] > r.confidence[b];
    });
    const std::vector<int> truth = Targets(s.breach, r.attribute);
    std::vector<int> kept(n, -1);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < keep; ++i) {
      kept[order[i]] = r.predictions[order[i]];
      wrong += r.predictions[order[i]] != truth[order[i]];
    }
    r.predictions = std::move(kept);
    r.evaluated = keep;
    r.error = static_cast<double>(wrong) / keep;
    report.attributes.push_back(std::move(r));
  }
  Summarize(report);
  return report;
}

absl::StatusOr<AttributeReport> SideInfoAttack(const BreachScenario& s, int target,
                                               std::span<const int> known,
                                               const AdversaryOptions& options) {
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  const Schema& schema = s.g.schema();
  if (absl::Status st = CheckPersonal(schema, target); !st.ok()) return st;
  std::vector<int> extra = schema.non_personal();
  for (int k : known) {
    if (absl::Status st = CheckPersonal(schema, k); !st.ok()) return st;
    if (k == target) return absl::InvalidArgumentError("target cannot be known");
    extra.push_back(k);
  }
  return Attack(s, target, extra, options);
}

absl::StatusOr<ReconstructionReport> A3NonPersonal(const BreachScenario& s,
                                                   const AdversaryOptions& options) {
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  ReconstructionReport report;
  for (int p : s.g.schema().personal()) {
    absl::StatusOr<AttributeReport> r = SideInfoAttack(s, p, {}, options);
    if (!r.ok()) return r.status();
    report.attributes.push_back(*std::move(r));
  }
  Summarize(report);
  return report;
}

absl::StatusOr<ReconstructionReport> A4LeaveOneOut(const BreachScenario& s,
                                                   const AdversaryOptions& options) {
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  const std::vector<int>& personal = s.g.schema().personal();
  ReconstructionReport report;
  for (int p : personal) {
    std::vector<int> known;
    for (int q : personal) {
      if (q != p) known.push_back(q);
    }
    absl::StatusOr<AttributeReport> r = SideInfoAttack(s, p, known, options);
    if (!r.ok()) return r.status();
    report.attributes.push_back(*std::move(r));
  }
  Summarize(report);
  return report;
}

absl::StatusOr<ReconstructionReport> A5Prefix(const BreachScenario& s,
                                              std::vector<int> ordering,
                                              const AdversaryOptions& options) {
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  const std::vector<int>& personal = s.g.schema().personal();
  if (ordering.empty()) ordering = personal;
  std::vector<int> sorted = ordering;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != personal) {
    return absl::InvalidArgumentError("ordering must be a permutation of the personal attributes");
  }
  ReconstructionReport report;
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    const std::vector<int> known(ordering.begin(), ordering.begin() + k);
    absl::StatusOr<AttributeReport> r = SideInfoAttack(s, ordering[k], known, options);
    if (!r.ok()) return r.status();
    report.attributes.push_back(*std::move(r));
  }
  Summarize(report);
  return report;
}

absl::StatusOr<ReconstructionReport> A6MultiBreach(const BreachScenario& first,
                                                   const BreachScenario& second,
                                                   const AdversaryOptions& options) {
  if (absl::Status st = first.Validate(); !st.ok()) return st;
  if (absl::Status st = second.Validate(); !st.ok()) return st;
  if (first.breach.num_rows() != second.breach.num_rows() ||
      first.breach.values() != second.breach.values()) {
    return absl::InvalidArgumentError("breaches must cover the same rows");
  }
  absl::StatusOr<Inputs> in1 = BuildInputs(first, {});
  if (!in1.ok()) return in1.status();
  absl::StatusOr<Inputs> in2 = BuildInputs(second, {});
  if (!in2.ok()) return in2.status();
  AdversaryOptions other = options;
  other.schedule.seed = MixSeed(options.schedule.seed, 0xa6);

  ReconstructionReport report;
  for (int p : first.g.schema().personal()) {
    absl::StatusOr<nn::Mlp> h1 = TrainHead(first, *in1, p, options.schedule);
    if (!h1.ok()) return h1.status();
    absl::StatusOr<nn::Mlp> h2 = TrainHead(second, *in2, p, other.schedule);
    if (!h2.ok()) return h2.status();
    const Matrix probs = (Softmax(h1->Predict(in1->breach)) +
                          Softmax(h2->Predict(in2->breach))) / 2.0;
    AttributeReport r = NewReport(first, p);
    const std::vector<int> truth = Targets(first.breach, p);
    const std::size_t n = truth.size();
    r.predictions.assign(n, -1);
    r.confidence.assign(n, kNegInf);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<bool> m1 = ClassMask(first.g, p, in1->breach_z.value(i, p));
      const std::vector<bool> m2 = ClassMask(second.g, p, in2->breach_z.value(i, p));
      std::vector<bool> mask(m1.size());
      bool any = false;
      for (std::size_t c = 0; c < mask.size(); ++c) {
        mask[c] = m1[c] && m2[c];
        any = any || mask[c];
      }
      if (!any) {
        ++r.inconsistent;
        mask = m1;
      }
      std::span<const double> row(probs.data() + i * probs.cols(), probs.cols());
      const int pred = MaskedArgmax(row, mask);
      r.predictions[i] = pred;
      r.confidence[i] = pred >= 0 ? row[pred] : kNegInf;
      if (pred < 0 || !mask[pred]) ++r.mask_violations;
      wrong += pred != truth[i];
    }
    r.evaluated = n;
    r.error = n == 0 ? 0.0 : static_cast<double>(wrong) / n;
    if (r.inconsistent > 0) {
      std::cerr << "warning: " << r.inconsistent << " breached rows of " << r.name
                << " have disjoint pre-images\n";
    }
    report.attributes.push_back(std::move(r));
  }
  Summarize(report);
  return report;
}

LinkEstimator::LinkEstimator(const Generalization& g, const DatasetView& generalized,
                             std::vector<int> attrs_a, std::vector<int> attrs_b)
    : g_(g), attrs_a_(std::move(attrs_a)), attrs_b_(std::move(attrs_b)) {
  joint_attrs_ = attrs_a_;
  joint_attrs_.insert(joint_attrs_.end(), attrs_b_.begin(), attrs_b_.end());
  std::sort(joint_attrs_.begin(), joint_attrs_.end());
  joint_attrs_.erase(std::unique(joint_attrs_.begin(), joint_attrs_.end()),
                     joint_attrs_.end());
  for (std::size_t r = 0; r < generalized.num_rows(); ++r) {
    std::vector<int> joint, marginal;
    for (int a : joint_attrs_) joint.push_back(static_cast<int>(generalized.value(r, a)));
    for (int b : attrs_b_) marginal.push_back(static_cast<int>(generalized.value(r, b)));
    ++joint_[joint];
    ++marginal_[marginal];
  }
}

std::vector<int> LinkEstimator::Key(std::span<const int> attrs,
                                    std::span<const double> values) const {
  std::vector<int> key;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    key.push_back(g_.map(attrs[i]).Bucket(values[i]));
  }
  return key;
}

int LinkEstimator::MarginalCount(std::span<const double> b) const {
  auto it = marginal_.find(Key(attrs_b_, b));
  return it == marginal_.end() ? 0 : it->second;
}

int LinkEstimator::JointCount(std::span<const double> a,
                              std::span<const double> b) const {
  const std::vector<int> ka = Key(attrs_a_, a), kb = Key(attrs_b_, b);
  std::vector<int> key;
  for (int attr : joint_attrs_) {
    std::optional<int> bucket;
    for (std::size_t i = 0; i < attrs_a_.size(); ++i) {
      if (attrs_a_[i] == attr) bucket = ka[i];
    }
    for (std::size_t i = 0; i < attrs_b_.size(); ++i) {
      if (attrs_b_[i] != attr) continue;
      // Shared attribute observed differently on the two sides.
      if (bucket.has_value() && *bucket != kb[i]) return 0;
      bucket = kb[i];
    }
    key.push_back(*bucket);
  }
  auto it = joint_.find(key);
  return it == joint_.end() ? 0 : it->second;
}

std::optional<double> LinkEstimator::Conditional(std::span<const double> a,
                                                 std::span<const double> b) const {
  const int denominator = MarginalCount(b);
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(JointCount(a, b)) / denominator;
}

json LinkageReport::ToJson() const {
  return {{"match_rate", match_rate},
          {"random_baseline", random_baseline},
          {"records", records},
          {"skipped", skipped}};
}

absl::StatusOr<LinkageReport> A7Linkability(
    const Generalization& g, const DatasetView& generalized,
    const std::vector<int>& attrs_a, const std::vector<int>& attrs_b,
    const std::vector<std::vector<double>>& a_side,
    const std::vector<std::vector<double>>& b_side, std::uint64_t seed) {
  if (attrs_a.empty() || attrs_b.empty()) {
    return absl::InvalidArgumentError("attribute sets must be nonempty");
  }
  for (int a : attrs_a) {
    if (a < 0 || static_cast<std::size_t>(a) >= g.schema().size() ||
        g.schema()[a].is_target()) {
      return absl::InvalidArgumentError(absl::StrCat("attribute ", a, " is not a feature"));
    }
  }
  for (int b : attrs_b) {
    if (b < 0 || static_cast<std::size_t>(b) >= g.schema().size() ||
        g.schema()[b].is_target()) {
      return absl::InvalidArgumentError(absl::StrCat("attribute ", b, " is not a feature"));
    }
  }
  if (a_side.size() != b_side.size()) {
    return absl::InvalidArgumentError("A-side and B-side record counts differ");
  }
  // Passthrough continuous maps have no bucket index to count on.
  for (int a : attrs_a) {
    if (g.map(a).passthrough) return absl::UnimplementedError("linkage on identity continuous attribute");
  }
  for (int b : attrs_b) {
    if (g.map(b).passthrough) return absl::UnimplementedError("linkage on identity continuous attribute");
  }
  const LinkEstimator estimator(g, generalized, attrs_a, attrs_b);
  LinkageReport report;
  report.records = a_side.size();
  report.links.assign(a_side.size(), -1);
  Rng rng(MixSeed(seed, 0xa7));
  Rng baseline_rng(MixSeed(seed, 0xa70));
  std::size_t correct = 0, baseline_correct = 0;
  for (std::size_t i = 0; i < a_side.size(); ++i) {
    double best = -1.0;
    std::vector<int> ties;
    for (std::size_t j = 0; j < b_side.size(); ++j) {
      const std::optional<double> p = estimator.Conditional(a_side[i], b_side[j]);
      if (!p.has_value()) continue;
      if (*p > best) {
        best = *p;
        ties.assign(1, static_cast<int>(j));
      } else if (*p == best) {
        ties.push_back(static_cast<int>(j));
      }
    }
    if (ties.empty()) {
      ++report.skipped;
    } else {
      report.links[i] = ties[rng.Index(ties.size())];
      correct += report.links[i] == static_cast<int>(i);
    }
    if (!b_side.empty()) {
      baseline_correct += baseline_rng.Index(b_side.size()) == i;
    }
  }
  if (report.skipped > 0) {
    std::cerr << "warning: " << report.skipped
              << " A-side records had no B-side candidate with observed support\n";
  }
  if (report.records > 0) {
    report.match_rate = static_cast<double>(correct) / report.records;
    report.random_baseline = static_cast<double>(baseline_correct) / report.records;
  }
  return report;
}

bool Predicate::Matches(std::span<const double> record) const {
  for (const Clause& c : clauses) {
    const double x = record[c.attribute];
    if (c.discrete) {
      if (std::find(c.values.begin(), c.values.end(), static_cast<int>(x)) ==
          c.values.end()) {
        return false;
      }
    } else if (c.lo == c.hi) {
      if (x != c.lo) return false;
    } else if (x > c.hi || (c.lo > 0.0 ? x <= c.lo : x < 0.0)) {
      return false;
    }
  }
  return true;
}

std::string Predicate::ToString(const Schema& schema) const {
  std::string out;
  for (const Clause& c : clauses) {
    if (!out.empty()) out += " AND ";
    out += schema[c.attribute].name;
    if (c.discrete) {
      out += " in {";
      for (std::size_t i = 0; i < c.values.size(); ++i) {
        out += absl::StrCat(i ? "," : "", c.values[i]);
      }
      out += "}";
    } else if (c.lo == c.hi) {
      out += absl::StrCat(" = ", c.lo);
    } else {
      out += absl::StrCat(" in ", c.lo > 0.0 ? "(" : "[", c.lo, ", ", c.hi, "]");
    }
  }
  return out;
}

json SinglingOutReport::ToJson(const Schema& schema) const {
  json preds = json::array();
  for (const Predicate& p : predicates) preds.push_back(p.ToString(schema));
  return {{"distinct_records", utilization.size()},
          {"min_utilization", min_utilization},
          {"num_at_min", num_at_min},
          {"predicates", std::move(preds)}};
}

SinglingOutReport A8SinglingOut(const Generalization& g,
                                const DatasetView& generalized) {
  const Schema& schema = g.schema();
  const std::vector<int>& features = schema.features();
  SinglingOutReport report;
  for (std::size_t r = 0; r < generalized.num_rows(); ++r) {
    std::vector<double> key;
    for (int a : features) key.push_back(generalized.value(r, a));
    ++report.utilization[key];
  }
  if (report.utilization.empty()) return report;
  report.min_utilization = std::numeric_limits<int>::max();
  for (const auto& [z, count] : report.utilization) {
    report.min_utilization = std::min(report.min_utilization, count);
  }
  for (const auto& [z, count] : report.utilization) {
    if (count != report.min_utilization) continue;
    ++report.num_at_min;
    if (count != 1) continue;
    Predicate pred;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const int a = features[i];
      const AttributeMap& m = g.map(a);
      Predicate::Clause c;
      c.attribute = a;
      c.discrete = m.is_discrete();
      if (m.is_discrete()) {
        c.values = m.Values(static_cast<int>(z[i]));
      } else if (m.passthrough) {
        c.lo = c.hi = z[i];
      } else {
        std::tie(c.lo, c.hi) = m.Interval(static_cast<int>(z[i]));
      }
      pred.clauses.push_back(std::move(c));
    }
    report.predicates.push_back(std::move(pred));
  }
  return report;
}

}  // namespace vdm::adversaries

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

#include "vdm/pat.h"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <numeric>
#include <queue>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace vdm::pat {
namespace {

using nlohmann::json;

// Gini of a histogram scaled by V/(V-1). Returns nullopt when V == 1.
std::optional<double> NormalizedGini(const std::vector<double>& counts,
                                     double n) {
  const std::size_t v = counts.size();
  if (v < 2) return std::nullopt;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += c * c;
  const double gini = 1.0 - sum_sq / (n * n);
  return std::max(0.0, gini * static_cast<double>(v) / (v - 1.0));
}

void WarnSingleValued() {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true)) {
    std::cerr << "warning: personal attribute with a single value contributes "
                 "no privacy term\n";
  }
}

double Combine(const PGiniTerms& t, double alpha) {
  return (1.0 - alpha) * t.utility + alpha * t.privacy;
}

double SplitScore(const SampleCounts& left, const SampleCounts& right,
                  double alpha) {
  const double n = left.n + right.n;
  return (left.n * PGini(left, alpha) + right.n * PGini(right, alpha)) / n;
}

SampleCounts Subtract(const SampleCounts& total, const SampleCounts& part) {
  SampleCounts out = total;
  out.n -= part.n;
  for (std::size_t i = 0; i < out.label.size(); ++i) out.label[i] -= part.label[i];
  for (std::size_t p = 0; p < out.personal.size(); ++p) {
    for (std::size_t v = 0; v < out.personal[p].size(); ++v) {
      out.personal[p][v] -= part.personal[p][v];
    }
  }
  return out;
}

void Accumulate(SampleCounts& into, const SampleCounts& part) {
  into.n += part.n;
  for (std::size_t i = 0; i < into.label.size(); ++i) into.label[i] += part.label[i];
  for (std::size_t p = 0; p < into.personal.size(); ++p) {
    for (std::size_t v = 0; v < into.personal[p].size(); ++v) {
      into.personal[p][v] += part.personal[p][v];
    }
  }
}

SampleCounts CountRows(const DatasetView& view,
                       std::span<const std::size_t> rows) {
  SampleCounts counts = SampleCounts::Empty(view.schema());
  for (std::size_t r : rows) counts.Add(view, r);
  return counts;
}

// True when `a` should replace the incumbent `b`. Candidates are enumerated in
// (attribute, position) order, so only a strictly better score wins.
bool Better(const SplitCandidate& a, const std::optional<SplitCandidate>& b) {
  return !b.has_value() || a.score < b->score - kScoreTolerance;
}

std::optional<SplitCandidate> BestContinuous(const DatasetView& view,
                                             std::span<const std::size_t> rows,
                                             int attribute,
                                             const SampleCounts& total,
                                             const PatConfig& config) {
  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    return view.value(a, attribute) < view.value(b, attribute);
  });
  const std::size_t n = sorted.size();
  const std::size_t min_leaf = config.min_samples_leaf;
  SampleCounts left = SampleCounts::Empty(view.schema());
  std::optional<SplitCandidate> best;
  int gap = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left.Add(view, sorted[i]);
    const double here = view.value(sorted[i], attribute);
    const double next = view.value(sorted[i + 1], attribute);
    if (here == next) continue;
    const int position = gap++;
    const std::size_t left_size = i + 1;
    if (left_size < min_leaf || n - left_size < min_leaf) continue;
    SplitCandidate c;
    c.rule.attribute = attribute;
    c.rule.continuous = true;
    c.rule.threshold = here + (next - here) / 2.0;
    c.rule.position = position;
    c.score = SplitScore(left, Subtract(total, left), config.alpha);
    c.left_size = left_size;
    c.right_size = n - left_size;
    if (Better(c, best)) best = c;
  }
  return best;
}

std::vector<SampleCounts> CountsPerValue(const DatasetView& view,
                                         std::span<const std::size_t> rows,
                                         int attribute) {
  const int c = view.schema()[attribute].cardinality;
  std::vector<SampleCounts> per_value(c, SampleCounts::Empty(view.schema()));
  for (std::size_t r : rows) per_value[view.index(r, attribute) - 1].Add(view, r);
  return per_value;
}

std::optional<SplitCandidate> BestDiscrete(const DatasetView& view,
                                           std::span<const std::size_t> rows,
                                           int attribute,
                                           const SampleCounts& total,
                                           const PatConfig& config,
                                           const std::vector<int>& order) {
  const std::vector<SampleCounts> per_value = CountsPerValue(view, rows, attribute);
  const double n = total.n;
  const double min_leaf = config.min_samples_leaf;
  SampleCounts left = SampleCounts::Empty(view.schema());
  std::optional<SplitCandidate> best;
  for (std::size_t p = 1; p < order.size(); ++p) {
    Accumulate(left, per_value[order[p - 1] - 1]);
    if (left.n < min_leaf || n - left.n < min_leaf) continue;
    SplitCandidate c;
    c.rule.attribute = attribute;
    c.rule.continuous = false;
    c.rule.cut = static_cast<int>(p);
    c.rule.position = static_cast<int>(p);
    c.score = SplitScore(left, Subtract(total, left), config.alpha);
    c.left_size = static_cast<std::size_t>(left.n);
    c.right_size = static_cast<std::size_t>(n - left.n);
    if (Better(c, best)) best = c;
  }
  return best;
}

std::optional<SplitCandidate> BestOn(const DatasetView& view,
                                     std::span<const std::size_t> rows,
                                     int attribute, const SampleCounts& total,
                                     const PatConfig& config,
                                     const Orderings& orderings) {
  if (view.schema()[attribute].is_discrete()) {
    return BestDiscrete(view, rows, attribute, total, config,
                        orderings.order[attribute]);
  }
  return BestContinuous(view, rows, attribute, total, config);
}

int Majority(const std::vector<double>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                          counts.begin());
}

json RuleToJson(const Schema& schema, const Orderings& orderings,
                const SplitRule& rule) {
  json out = {{"attribute", schema[rule.attribute].name}};
  if (rule.continuous) {
    out["threshold"] = rule.threshold;
  } else {
    const std::vector<int>& order = orderings.order[rule.attribute];
    out["left_values"] = std::vector<int>(order.begin(), order.begin() + rule.cut);
  }
  return out;
}

}  // namespace

absl::Status ValidateConfig(const PatConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must lie in [0,1], got ", config.alpha));
  }
  if (config.max_leaves < 1) {
    return absl::InvalidArgumentError("max_leaves must be at least 1");
  }
  if (config.min_samples_leaf < 1) {
    return absl::InvalidArgumentError("min_samples_leaf must be at least 1");
  }
  if (config.categorical_orderings.empty()) {
    return absl::InvalidArgumentError("at least one categorical ordering needed");
  }
  return absl::OkStatus();
}

SampleCounts SampleCounts::Empty(const Schema& schema) {
  SampleCounts counts;
  counts.label.assign(schema.num_classes(), 0.0);
  for (int p : schema.personal()) {
    counts.personal.emplace_back(ReferenceCardinality(schema[p]), 0.0);
  }
  return counts;
}

void SampleCounts::Add(const DatasetView& view, std::size_t row, double weight) {
  const Schema& schema = view.schema();
  n += weight;
  label[view.label(row)] += weight;
  const std::vector<int>& personal_attrs = schema.personal();
  for (std::size_t p = 0; p < personal_attrs.size(); ++p) {
    const int a = personal_attrs[p];
    personal[p][ReferenceClass(schema[a], view.value(row, a))] += weight;
  }
}

PGiniTerms PGiniComponents(const SampleCounts& counts) {
  PGiniTerms terms;
  if (counts.n <= 0.0) return terms;
  terms.utility = NormalizedGini(counts.label, counts.n).value_or(0.0);
  double mean = 0.0;
  for (const std::vector<double>& hist : counts.personal) {
    std::optional<double> g = NormalizedGini(hist, counts.n);
    if (!g.has_value()) {
      WarnSingleValued();
      continue;
    }
    mean += *g;
  }
  if (!counts.personal.empty()) mean /= counts.personal.size();
  terms.privacy = 1.0 - mean;
  return terms;
}

double PGini(const SampleCounts& counts, double alpha) {
  return Combine(PGiniComponents(counts), alpha);
}

bool Orderings::GoesLeft(const SplitRule& rule, double value) const {
  if (rule.continuous) return value <= rule.threshold;
  return rank[rule.attribute][static_cast<int>(value) - 1] < rule.cut;
}

Orderings NaturalOrderings(const Schema& schema) {
  Orderings o;
  o.order.resize(schema.size());
  o.rank.resize(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (!schema[a].is_discrete()) continue;
    o.order[a].resize(schema[a].cardinality);
    std::iota(o.order[a].begin(), o.order[a].end(), 1);
    o.rank[a].resize(schema[a].cardinality);
    std::iota(o.rank[a].begin(), o.rank[a].end(), 0);
  }
  return o;
}

std::vector<int> OrderValues(const DatasetView& view,
                             std::span<const std::size_t> rows, int attribute,
                             CategoricalOrdering ordering) {
  const int c = view.schema()[attribute].cardinality;
  const int positive = view.schema().num_classes() - 1;
  std::vector<double> count(c, 0.0), hits(c, 0.0);
  for (std::size_t r : rows) {
    const int v = view.index(r, attribute) - 1;
    count[v] += 1.0;
    if (view.label(r) == positive) hits[v] += 1.0;
  }
  std::vector<double> key(c, 0.0);
  for (int v = 0; v < c; ++v) {
    switch (ordering) {
      case CategoricalOrdering::kPositiveRate:
        key[v] = count[v] > 0.0 ? hits[v] / count[v] : 0.0;
        break;
      case CategoricalOrdering::kFrequency:
        key[v] = count[v];
        break;
      case CategoricalOrdering::kNatural:
        key[v] = v;
        break;
    }
  }
  std::vector<int> order(c);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key[a - 1] < key[b - 1]; });
  return order;
}

std::optional<SplitCandidate> BestSplitOn(const DatasetView& view,
                                          std::span<const std::size_t> rows,
                                          int attribute,
                                          const PatConfig& config,
                                          const Orderings& orderings) {
  return BestOn(view, rows, attribute, CountRows(view, rows), config, orderings);
}

Orderings ChooseOrderings(const DatasetView& view,
                          std::span<const std::size_t> rows,
                          const PatConfig& config) {
  const Schema& schema = view.schema();
  Orderings orderings = NaturalOrderings(schema);
  const SampleCounts total = CountRows(view, rows);
  for (int a : schema.features()) {
    if (!schema[a].is_discrete()) continue;
    std::optional<double> best_score;
    std::vector<int> chosen;
    for (CategoricalOrdering kind : config.categorical_orderings) {
      std::vector<int> order = OrderValues(view, rows, a, kind);
      if (chosen.empty()) chosen = order;
      std::optional<SplitCandidate> c =
          BestDiscrete(view, rows, a, total, config, order);
      if (c.has_value() &&
          (!best_score.has_value() || c->score < *best_score - kScoreTolerance)) {
        best_score = c->score;
        chosen = std::move(order);
      }
    }
    orderings.order[a] = chosen;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      orderings.rank[a][chosen[i] - 1] = static_cast<int>(i);
    }
  }
  return orderings;
}

std::optional<SplitCandidate> BestSplit(const DatasetView& view,
                                        std::span<const std::size_t> rows,
                                        const PatConfig& config,
                                        const Orderings& orderings) {
  if (rows.size() < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
    return std::nullopt;
  }
  const SampleCounts total = CountRows(view, rows);
  std::optional<SplitCandidate> best;
  for (int a : view.schema().features()) {
    std::optional<SplitCandidate> c = BestOn(view, rows, a, total, config, orderings);
    if (c.has_value() && Better(*c, best)) best = c;
  }
  if (best.has_value() && best->score < PGini(total, config.alpha) - kScoreTolerance) {
    return best;
  }
  return std::nullopt;
}

int PatTree::num_leaves() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const PatNode& n) { return n.is_leaf(); }));
}

int PatTree::Route(std::span<const double> record) const {
  int node = 0;
  while (!nodes_[node].is_leaf()) {
    const SplitRule& rule = *nodes_[node].split;
    node = orderings_.GoesLeft(rule, record[rule.attribute]) ? nodes_[node].left
                                                             : nodes_[node].right;
  }
  return node;
}

std::vector<int> PatTree::LeafAssignment(const DatasetView& view) const {
  std::vector<int> out(view.num_rows());
  for (std::size_t r = 0; r < view.num_rows(); ++r) out[r] = Route(view.row(r));
  return out;
}

json PatTree::ToJson() const {
  json nodes = json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const PatNode& n = nodes_[i];
    json item = {{"id", i}, {"size", n.size}, {"label", n.label},
                 {"pgini", n.pgini}, {"label_counts", n.label_counts}};
    if (!n.is_leaf()) {
      item["split"] = RuleToJson(schema_, orderings_, *n.split);
      item["left"] = n.left;
      item["right"] = n.right;
    }
    nodes.push_back(std::move(item));
  }
  json orderings = json::object();
  for (int a : schema_.features()) {
    if (schema_[a].is_discrete()) orderings[schema_[a].name] = orderings_.order[a];
  }
  return {{"schema_fingerprint", schema_.FingerprintHex()},
          {"orderings", std::move(orderings)},
          {"nodes", std::move(nodes)}};
}

absl::StatusOr<PatTree> Fit(const DatasetView& train, const PatConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  if (train.num_rows() == 0) {
    return absl::InvalidArgumentError("empty training set");
  }
  const std::vector<std::size_t> all = AllRows(train);
  Orderings orderings = ChooseOrderings(train, all, config);
  const double n_root = static_cast<double>(all.size());

  std::vector<PatNode> nodes;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::optional<SplitCandidate>> pending;

  auto add_node = [&](int parent, std::vector<std::size_t> rows) {
    const SampleCounts counts = CountRows(train, rows);
    PatNode node;
    node.parent = parent;
    node.size = rows.size();
    node.label_counts = counts.label;
    node.label = Majority(counts.label);
    node.pgini = PGini(counts, config.alpha);
    nodes.push_back(std::move(node));
    pending.push_back(BestSplit(train, rows, config, orderings));
    members.push_back(std::move(rows));
    return static_cast<int>(nodes.size()) - 1;
  };

  // Max-heap on decrease; among equal keys the earlier node wins.
  using Entry = std::pair<double, int>;
  auto cmp = [](const Entry& a, const Entry& b) {
    if (std::abs(a.first - b.first) > kScoreTolerance) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);
  auto enqueue = [&](int id) {
    if (!pending[id].has_value()) return;
    const double decrease = (members[id].size() / n_root) *
                            (nodes[id].pgini - pending[id]->score);
    queue.emplace(decrease, id);
  };

  enqueue(add_node(-1, all));
  int leaves = 1;
  while (leaves < config.max_leaves && !queue.empty()) {
    const int id = queue.top().second;
    queue.pop();
    const SplitRule rule = pending[id]->rule;
    std::vector<std::size_t> left, right;
    for (std::size_t r : members[id]) {
      (orderings.GoesLeft(rule, train.value(r, rule.attribute)) ? left : right)
          .push_back(r);
    }
    nodes[id].split = rule;
    members[id].clear();
    members[id].shrink_to_fit();
    const int l = add_node(id, std::move(left));
    const int r = add_node(id, std::move(right));
    nodes[id].left = l;
    nodes[id].right = r;
    enqueue(l);
    enqueue(r);
    ++leaves;
  }
  return PatTree(train.schema(), std::move(orderings), std::move(nodes));
}

Generalization ExtractGeneralization(const PatTree& tree) {
  const Schema& schema = tree.schema();
  std::vector<std::vector<double>> thresholds(schema.size());
  std::vector<std::vector<int>> cuts(schema.size());
  for (const PatNode& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    const SplitRule& rule = *node.split;
    if (rule.continuous) {
      thresholds[rule.attribute].push_back(rule.threshold);
    } else {
      cuts[rule.attribute].push_back(rule.cut);
    }
  }
  std::vector<AttributeMap> maps;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].is_target()) {
      maps.push_back(AttributeMap::Identity(schema[a]));
    } else if (!schema[a].is_discrete()) {
      maps.push_back(AttributeMap::FromThresholds(thresholds[a]));
    } else {
      const std::vector<int>& order = tree.orderings().order[a];
      std::vector<bool> boundary(order.size(), false);
      for (int cut : cuts[a]) boundary[cut] = true;
      std::vector<int> value_map(schema[a].cardinality);
      int bucket = 1;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (boundary[i]) ++bucket;
        value_map[order[i] - 1] = bucket;
      }
      maps.push_back(AttributeMap::FromValueMap(std::move(value_map)));
    }
  }
  absl::StatusOr<Generalization> g = Generalization::Create(schema, std::move(maps));
  // Maps built above are valid by construction.
  return *std::move(g);
}

absl::StatusOr<Generalization> Minimize(const DatasetView& train,
                                        const PatConfig& config) {
  absl::StatusOr<PatTree> tree = Fit(train, config);
  if (!tree.ok()) return tree.status();
  return ExtractGeneralization(*tree);
}

std::string OrderingName(CategoricalOrdering ordering) {
  switch (ordering) {
    case CategoricalOrdering::kPositiveRate:
      return "positive_rate";
    case CategoricalOrdering::kFrequency:
      return "frequency";
    case CategoricalOrdering::kNatural:
      return "natural";
  }
  return "natural";
}

}  // namespace vdm::pat

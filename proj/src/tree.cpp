#include <algorithm>
#include <cmath>
#include <numeric>

#include "slasel/learn.hpp"
#include "models_internal.hpp"

namespace slasel {

namespace {

int majority_label(std::span<const double> labels, std::span<const std::size_t> idx) {
  std::vector<std::size_t> counts;
  for (std::size_t i : idx) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= counts.size()) counts.resize(c + 1, 0);
    ++counts[c];
  }
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

void Cart::fit(const Matrix& x, std::span<const double> y, Task task, Rng& rng,
               std::span<const std::size_t> sample) {
  task_ = task;
  nodes_.clear();
  classes_ = 0;
  if (task == Task::Classify) {
    for (double v : y) classes_ = std::max(classes_, static_cast<std::size_t>(v) + 1);
  }
  std::vector<std::size_t> idx(sample.begin(), sample.end());
  if (idx.empty()) {
    idx.resize(x.rows);
    std::iota(idx.begin(), idx.end(), 0);
  }
  if (idx.empty()) throw InvalidArgument("tree: no training rows");
  build(x, y, idx, 0, rng);
}

double Cart::leaf_value(std::span<const double> y, std::span<const std::size_t> idx) const {
  if (task_ == Task::Classify) return majority_label(y, idx);
  double s = 0.0;
  for (std::size_t i : idx) s += y[i];
  return s / static_cast<double>(idx.size());
}

// Impurity score of a partition, lower is better: total SSE for regression,
// size-weighted Gini for classification.
namespace {

struct SideStats {
  std::size_t n = 0;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> counts;

  void add(double v, Task task) {
    ++n;
    if (task == Task::Regress) {
      sum += v;
      sum_sq += v * v;
    } else {
      counts[static_cast<std::size_t>(v)] += 1.0;
    }
  }
  void remove(double v, Task task) {
    --n;
    if (task == Task::Regress) {
      sum -= v;
      sum_sq -= v * v;
    } else {
      counts[static_cast<std::size_t>(v)] -= 1.0;
    }
  }
  double impurity(Task task) const {
    if (n == 0) return 0.0;
    const auto dn = static_cast<double>(n);
    if (task == Task::Regress) return std::max(0.0, sum_sq - sum * sum / dn);
    double g = 1.0;
    for (double c : counts) g -= (c / dn) * (c / dn);
    return g * dn;
  }
};

}  // namespace

std::int32_t Cart::build(const Matrix& x, std::span<const double> y, std::vector<std::size_t>& idx,
                         std::size_t depth, Rng& rng) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({-1, 0.0, -1, -1, leaf_value(y, idx)});

  const std::size_t n = idx.size();
  bool pure = true;
  for (std::size_t i = 1; i < n && pure; ++i) pure = y[idx[i]] == y[idx[0]];
  if (pure || n < params_.min_samples_split || n < 2 ||
      (params_.max_depth > 0 && depth >= params_.max_depth)) {
    return id;
  }

  std::vector<std::size_t> features(x.cols);
  std::iota(features.begin(), features.end(), 0);
  if (params_.max_features > 0 && params_.max_features < x.cols) {
    shuffle(features, rng);
    features.resize(params_.max_features);
    std::sort(features.begin(), features.end());
  }

  SideStats all;
  all.counts.assign(classes_, 0.0);
  for (std::size_t i : idx) all.add(y[i], task_);
  const double parent = all.impurity(task_);

  double best_score = parent - 1e-12 * std::max(1.0, std::abs(parent));
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<std::size_t> order(idx);
  for (std::size_t f : features) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = x(a, f), xb = x(b, f);
      return xa != xb ? xa < xb : a < b;
    });
    SideStats left, right = all;
    left.counts.assign(classes_, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double v = y[order[k]];
      left.add(v, task_);
      right.remove(v, task_);
      const double xa = x(order[k], f), xb = x(order[k + 1], f);
      if (xa == xb) continue;
      const double score = left.impurity(task_) + right.impurity(task_);
      if (score < best_score) {
        best_score = score;
        best_feature = static_cast<int>(f);
        best_threshold = xa + (xb - xa) / 2.0;
      }
    }
  }
  if (best_feature < 0) return id;

  std::vector<std::size_t> left_idx, right_idx;
  for (std::size_t i : idx) {
    (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_idx : right_idx)
        .push_back(i);
  }
  idx.clear();
  idx.shrink_to_fit();
  const std::int32_t l = build(x, y, left_idx, depth + 1, rng);
  const std::int32_t r = build(x, y, right_idx, depth + 1, rng);
  nodes_[static_cast<std::size_t>(id)].feature = best_feature;
  nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
  nodes_[static_cast<std::size_t>(id)].left = l;
  nodes_[static_cast<std::size_t>(id)].right = r;
  return id;
}

double Cart::predict(std::span<const double> row) const {
  if (nodes_.empty()) throw Error("tree: not fitted");
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& nd = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                                     ? nd.left
                                     : nd.right);
  }
  return nodes_[i].value;
}

std::size_t Cart::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

Json Cart::to_json() const {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(),
       right = Json::array(), value = Json::array();
  for (const auto& nd : nodes_) {
    feature.push_back(nd.feature);
    threshold.push_back(nd.threshold);
    left.push_back(nd.left);
    right.push_back(nd.right);
    value.push_back(nd.value);
  }
  return {{"task", to_string(task_)}, {"classes", classes_},   {"feature", feature},
          {"threshold", threshold},   {"left", left},          {"right", right},
          {"value", value}};
}

void Cart::from_json(const Json& j) {
  task_ = parse_task(j.at("task").get<std::string>());
  classes_ = j.at("classes").get<std::size_t>();
  const auto& f = j.at("feature");
  nodes_.assign(f.size(), Node{});
  for (std::size_t i = 0; i < f.size(); ++i) {
    nodes_[i] = {f[i].get<std::int32_t>(), j.at("threshold")[i].get<double>(),
                 j.at("left")[i].get<std::int32_t>(), j.at("right")[i].get<std::int32_t>(),
                 j.at("value")[i].get<double>()};
    const auto n = static_cast<std::int32_t>(f.size());
    if (nodes_[i].feature >= 0 && (nodes_[i].left <= static_cast<std::int32_t>(i) ||
                                   nodes_[i].right <= static_cast<std::int32_t>(i) ||
                                   nodes_[i].left >= n || nodes_[i].right >= n)) {
      throw Error("tree: malformed node links");
    }
  }
}

// ---------------------------------------------------------------------------

void DecisionTreeModel::fit(const Matrix& x, std::span<const double> y, Task task,
                            std::uint64_t seed) {
  Rng rng(seed);
  tree_.fit(x, y, task, rng);
}

Json DecisionTreeModel::to_json() const { return tree_.to_json(); }
void DecisionTreeModel::from_json(const Json& j) { tree_.from_json(j); }

void RandomForestModel::fit(const Matrix& x, std::span<const double> y, Task task,
                            std::uint64_t seed) {
  task_ = task;
  trees_.clear();
  if (x.rows == 0) throw InvalidArgument("forest: no training rows");
  CartParams tp = params_;
  if (tp.max_features == 0) {
    const double f = task == Task::Classify ? std::sqrt(static_cast<double>(x.cols))
                                            : static_cast<double>(x.cols) / 3.0;
    tp.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f)));
  }
  std::vector<std::size_t> sample(x.rows);
  for (std::size_t t = 0; t < n_estimators_; ++t) {
    Rng rng(mix_seed(seed, t));
    for (auto& s : sample) s = uniform_int(rng, 0, x.rows - 1);
    Cart tree(tp);
    tree.fit(x, y, task, rng, sample);
    trees_.push_back(std::move(tree));
  }
}

double RandomForestModel::predict(std::span<const double> row) const {
  if (trees_.empty()) throw Error("forest: not fitted");
  if (task_ == Task::Regress) {
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(row);
    return s / static_cast<double>(trees_.size());
  }
  std::vector<int> votes;
  votes.reserve(trees_.size());
  for (const auto& t : trees_) votes.push_back(static_cast<int>(t.predict(row)));
  return majority_vote(votes);
}

Json RandomForestModel::to_json() const {
  Json trees = Json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"task", to_string(task_)}, {"trees", trees}};
}

void RandomForestModel::from_json(const Json& j) {
  task_ = parse_task(j.at("task").get<std::string>());
  trees_.clear();
  for (const auto& t : j.at("trees")) {
    Cart c(params_);
    c.from_json(t);
    trees_.push_back(std::move(c));
  }
}

}  // namespace slasel

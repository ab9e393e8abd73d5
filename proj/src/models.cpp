#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "models_internal.hpp"
#include "slasel/rl.hpp"

namespace slasel {

namespace {

std::size_t class_count(std::span<const double> y) {
  std::size_t k = 0;
  for (double v : y) k = std::max(k, static_cast<std::size_t>(v) + 1);
  return k;
}

Json vec_json(const std::vector<double>& v) { return Json(v); }

std::vector<double> json_vec(const Json& j, const char* key) {
  return j.at(key).get<std::vector<double>>();
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void softmax(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : z) v /= s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear / logistic

void LinearModel::fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t) {
  if (x.rows == 0) throw InvalidArgument("linear: no training rows");
  task_ = task;
  cols_ = x.cols;
  const std::size_t d = cols_ + 1;
  const auto n = static_cast<Eigen::Index>(x.rows);

  if (task == Task::Regress) {
    Eigen::MatrixXd a(n, static_cast<Eigen::Index>(d));
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = x.row(static_cast<std::size_t>(i));
      for (std::size_t c = 0; c < cols_; ++c) a(i, static_cast<Eigen::Index>(c)) = r[c];
      a(i, static_cast<Eigen::Index>(cols_)) = 1.0;
      b(i) = y[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd normal = a.transpose() * a;
    for (std::size_t c = 0; c < cols_; ++c) {
      normal(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) += ridge_;
    }
    const Eigen::VectorXd w = normal.completeOrthogonalDecomposition().solve(a.transpose() * b);
    w_.assign(w.data(), w.data() + w.size());
    return;
  }

  // Multinomial logistic regression, full-batch gradient descent.
  const std::size_t k = class_count(y);
  w_.assign(k * d, 0.0);
  constexpr int kIterations = 300;
  constexpr double kRate = 0.5;
  const double l2 = ridge_ / static_cast<double>(x.rows);
  std::vector<double> grad(k * d), p(k);
  for (int it = 0; it < kIterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto r = x.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        const double* wc = &w_[c * d];
        double z = wc[cols_];
        for (std::size_t f = 0; f < cols_; ++f) z += wc[f] * r[f];
        p[c] = z;
      }
      softmax(p);
      const auto label = static_cast<std::size_t>(y[i]);
      for (std::size_t c = 0; c < k; ++c) {
        const double e = p[c] - (c == label ? 1.0 : 0.0);
        double* gc = &grad[c * d];
        for (std::size_t f = 0; f < cols_; ++f) gc[f] += e * r[f];
        gc[cols_] += e;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t f = 0; f < d; ++f) {
        double g = grad[c * d + f] * inv_n;
        if (f < cols_) g += l2 * w_[c * d + f];
        w_[c * d + f] -= kRate * g;
      }
    }
  }
}

double LinearModel::predict(std::span<const double> row) const {
  if (w_.empty()) throw Error("linear: not fitted");
  const std::size_t d = cols_ + 1;
  auto score = [&](std::size_t c) {
    const double* wc = &w_[c * d];
    double z = wc[cols_];
    for (std::size_t f = 0; f < cols_; ++f) z += wc[f] * row[f];
    return z;
  };
  if (task_ == Task::Regress) return score(0);
  std::vector<double> z(w_.size() / d);
  for (std::size_t c = 0; c < z.size(); ++c) z[c] = score(c);
  return static_cast<double>(argmax(z));
}

Json LinearModel::to_json() const {
  return {{"task", to_string(task_)}, {"cols", cols_}, {"weights", vec_json(w_)}};
}

void LinearModel::from_json(const Json& j) {
  task_ = parse_task(j.at("task").get<std::string>());
  cols_ = j.at("cols").get<std::size_t>();
  w_ = json_vec(j, "weights");
  if (w_.empty() || w_.size() % (cols_ + 1) != 0) throw Error("linear: malformed weights");
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

void KNearestModel::fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t) {
  if (x.rows == 0) throw InvalidArgument("knn: no training rows");
  if (k_ == 0) throw InvalidArgument("knn: k must be positive");
  task_ = task;
  x_ = x;
  y_.assign(y.begin(), y.end());
}

double KNearestModel::predict(std::span<const double> row) const {
  if (x_.rows == 0) throw Error("knn: not fitted");
  std::vector<std::pair<double, std::size_t>> dist(x_.rows);
  for (std::size_t i = 0; i < x_.rows; ++i) {
    const auto r = x_.row(i);
    double s = 0.0;
    for (std::size_t c = 0; c < x_.cols; ++c) s += (r[c] - row[c]) * (r[c] - row[c]);
    dist[i] = {s, i};
  }
  const std::size_t k = std::min(k_, x_.rows);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  if (task_ == Task::Regress) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += y_[dist[i].second];
    return s / static_cast<double>(k);
  }
  std::vector<int> votes(k);
  for (std::size_t i = 0; i < k; ++i) votes[i] = static_cast<int>(y_[dist[i].second]);
  return majority_vote(votes);
}

Json KNearestModel::to_json() const {
  return {{"task", to_string(task_)}, {"k", k_},          {"rows", x_.rows},
          {"cols", x_.cols},          {"x", x_.data},     {"y", y_}};
}

void KNearestModel::from_json(const Json& j) {
  task_ = parse_task(j.at("task").get<std::string>());
  k_ = j.at("k").get<std::size_t>();
  x_.rows = j.at("rows").get<std::size_t>();
  x_.cols = j.at("cols").get<std::size_t>();
  x_.data = json_vec(j, "x");
  y_ = json_vec(j, "y");
  if (x_.data.size() != x_.rows * x_.cols || y_.size() != x_.rows) {
    throw Error("knn: malformed training set");
  }
}

// ---------------------------------------------------------------------------
// One-hidden-layer perceptron (tanh), per-sample SGD

std::vector<double> MlpModel::forward(std::span<const double> row, std::vector<double>& h) const {
  h.assign(hidden_, 0.0);
  for (std::size_t u = 0; u < hidden_; ++u) {
    double z = b1_[u];
    const double* w = &w1_[u * in_];
    for (std::size_t f = 0; f < in_; ++f) z += w[f] * row[f];
    h[u] = std::tanh(z);
  }
  std::vector<double> o(out_);
  for (std::size_t c = 0; c < out_; ++c) {
    double z = b2_[c];
    const double* w = &w2_[c * hidden_];
    for (std::size_t u = 0; u < hidden_; ++u) z += w[u] * h[u];
    o[c] = z;
  }
  return o;
}

void MlpModel::fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) {
  if (x.rows == 0) throw InvalidArgument("mlp: no training rows");
  if (hidden_ == 0) throw InvalidArgument("mlp: hidden layer must be non-empty");
  task_ = task;
  in_ = x.cols;
  out_ = task == Task::Classify ? class_count(y) : 1;
  Rng rng(seed);
  w1_.resize(hidden_ * in_);
  b1_.assign(hidden_, 0.0);
  w2_.resize(out_ * hidden_);
  b2_.assign(out_, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in_, 1)));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (auto& w : w1_) w = s1 * standard_normal(rng);
  for (auto& w : w2_) w = s2 * standard_normal(rng);

  std::vector<double> target(y.begin(), y.end());
  y_mean_ = 0.0;
  y_scale_ = 1.0;
  if (task == Task::Regress) {
    y_mean_ = mean(target);
    const double sd = stddev(target);
    y_scale_ = sd > 1e-12 ? sd : 1.0;
    for (auto& t : target) t = (t - y_mean_) / y_scale_;
  }

  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> h, delta_out(out_), delta_h(hidden_);
  for (std::size_t epoch = 0; epoch < epochs_; ++epoch) {
    shuffle(order, rng);
    for (std::size_t i : order) {
      const auto r = x.row(i);
      std::vector<double> o = forward(r, h);
      if (task == Task::Regress) {
        delta_out[0] = o[0] - target[i];
      } else {
        softmax(o);
        for (std::size_t c = 0; c < out_; ++c) {
          delta_out[c] = o[c] - (c == static_cast<std::size_t>(target[i]) ? 1.0 : 0.0);
        }
      }
      for (std::size_t u = 0; u < hidden_; ++u) {
        double g = 0.0;
        for (std::size_t c = 0; c < out_; ++c) g += delta_out[c] * w2_[c * hidden_ + u];
        delta_h[u] = g * (1.0 - h[u] * h[u]);
      }
      for (std::size_t c = 0; c < out_; ++c) {
        for (std::size_t u = 0; u < hidden_; ++u) w2_[c * hidden_ + u] -= lr_ * delta_out[c] * h[u];
        b2_[c] -= lr_ * delta_out[c];
      }
      for (std::size_t u = 0; u < hidden_; ++u) {
        for (std::size_t f = 0; f < in_; ++f) w1_[u * in_ + f] -= lr_ * delta_h[u] * r[f];
        b1_[u] -= lr_ * delta_h[u];
      }
    }
  }
}

double MlpModel::predict(std::span<const double> row) const {
  if (w1_.empty()) throw Error("mlp: not fitted");
  std::vector<double> h;
  const std::vector<double> o = forward(row, h);
  if (task_ == Task::Regress) return o[0] * y_scale_ + y_mean_;
  return static_cast<double>(argmax(o));
}

Json MlpModel::to_json() const {
  return {{"task", to_string(task_)}, {"in", in_},   {"hidden", hidden_}, {"out", out_},
          {"w1", w1_},                {"b1", b1_},   {"w2", w2_},         {"b2", b2_},
          {"y_mean", y_mean_},        {"y_scale", y_scale_}};
}

void MlpModel::from_json(const Json& j) {
  task_ = parse_task(j.at("task").get<std::string>());
  in_ = j.at("in").get<std::size_t>();
  hidden_ = j.at("hidden").get<std::size_t>();
  out_ = j.at("out").get<std::size_t>();
  w1_ = json_vec(j, "w1");
  b1_ = json_vec(j, "b1");
  w2_ = json_vec(j, "w2");
  b2_ = json_vec(j, "b2");
  y_mean_ = j.at("y_mean").get<double>();
  y_scale_ = j.at("y_scale").get<double>();
  if (w1_.size() != hidden_ * in_ || b1_.size() != hidden_ || w2_.size() != out_ * hidden_ ||
      b2_.size() != out_) {
    throw Error("mlp: malformed weights");
  }
}

// ---------------------------------------------------------------------------
// Factory and grids

namespace {

double param(const Params& p, const char* key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::size_t count_param(const Params& p, const char* key, std::size_t fallback) {
  const double v = param(p, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw InvalidArgument(std::string("hyperparameter '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

CartParams cart_params(const Params& p) {
  return {count_param(p, "max_depth", 0), count_param(p, "min_samples_split", 2),
          count_param(p, "max_features", 0)};
}

std::vector<Params> product(const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
  std::vector<Params> out{{}};
  for (const auto& [key, values] : axes) {
    std::vector<Params> next;
    for (const auto& base : out) {
      for (double v : values) {
        Params p = base;
        p[key] = v;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::unique_ptr<Model> make_model(Family family, const Params& p) {
  switch (family) {
    case Family::LinearOrLogistic: {
      const double ridge = param(p, "ridge", 0.0);
      if (!(ridge >= 0.0)) throw InvalidArgument("ridge strength must be non-negative");
      return std::make_unique<LinearModel>(ridge);
    }
    case Family::DecisionTree:
      return std::make_unique<DecisionTreeModel>(cart_params(p));
    case Family::RandomForest:
      return std::make_unique<RandomForestModel>(count_param(p, "n_estimators", 100),
                                                 cart_params(p));
    case Family::KNearest:
      return std::make_unique<KNearestModel>(count_param(p, "k", 5));
    case Family::MLP:
      return std::make_unique<MlpModel>(count_param(p, "hidden", 16), count_param(p, "epochs", 100),
                                        param(p, "learning_rate", 0.01));
    case Family::QLearning:
      return make_td_model(TdFlavor::QLearning, p);
    case Family::Sarsa:
      return make_td_model(TdFlavor::Sarsa, p);
  }
  throw InvalidArgument("unknown model family");
}

std::unique_ptr<Model> load_model(Family family, const Json& j) {
  auto m = make_model(family, {});
  m->from_json(j);
  return m;
}

std::vector<Params> default_grid(Family family) {
  switch (family) {
    case Family::LinearOrLogistic:
      return product({{"ridge", {0.0, 0.1, 1.0}}});
    case Family::DecisionTree:
      return product({{"max_depth", {4, 8, 16, 0}}, {"min_samples_split", {2, 5, 10}}});
    case Family::RandomForest:
      return product({{"n_estimators", {50, 100, 200}}, {"min_samples_split", {2, 5, 10}}});
    case Family::KNearest:
      return product({{"k", {3, 5, 9}}});
    case Family::MLP:
      return product({{"epochs", {50, 100}}, {"hidden", {8, 16}}});
    case Family::QLearning:
    case Family::Sarsa:
      return product({{"alpha", {0.1, 0.5}}, {"epsilon", {0.1}}, {"gamma", {0.0}},
                      {"episodes", {100}}});
  }
  return {};
}

bool uses_standardization(Family family) {
  return family == Family::LinearOrLogistic || family == Family::KNearest ||
         family == Family::MLP;
}

}  // namespace slasel

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slasel/learn.hpp"

namespace slasel {

struct CartParams {
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  std::size_t min_samples_split = 2;
  /// Features tried per node; 0 means all.
  std::size_t max_features = 0;
};

/// CART: SSE splits for regression, Gini for classification; `x <= t` goes
/// left. Ties between candidate splits keep the first found.
class Cart {
 public:
  Cart() = default;
  explicit Cart(CartParams p) : params_(p) {}

  /// `sample` lists row indices (repeats allowed); empty means all rows.
  void fit(const Matrix& x, std::span<const double> y, Task task, Rng& rng,
           std::span<const std::size_t> sample = {});
  double predict(std::span<const double> row) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t depth() const;

  Json to_json() const;
  void from_json(const Json& j);

 private:
  struct Node {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;
    double value = 0.0;
  };

  std::int32_t build(const Matrix& x, std::span<const double> y, std::vector<std::size_t>& idx,
                     std::size_t depth, Rng& rng);
  double leaf_value(std::span<const double> y, std::span<const std::size_t> idx) const;

  CartParams params_;
  Task task_ = Task::Regress;
  std::size_t classes_ = 0;
  std::vector<Node> nodes_;
};

class LinearModel final : public Model {
 public:
  explicit LinearModel(double ridge) : ridge_(ridge) {}
  Family family() const override { return Family::LinearOrLogistic; }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override;
  double predict(std::span<const double> row) const override;
  Json to_json() const override;
  void from_json(const Json& j) override;

 private:
  double ridge_;
  Task task_ = Task::Regress;
  std::size_t cols_ = 0;
  /// Regression: cols_+1 weights (intercept last). Classification: one such
  /// block per class.
  std::vector<double> w_;
};

class DecisionTreeModel final : public Model {
 public:
  explicit DecisionTreeModel(CartParams p) : tree_(p) {}
  Family family() const override { return Family::DecisionTree; }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override;
  double predict(std::span<const double> row) const override { return tree_.predict(row); }
  Json to_json() const override;
  void from_json(const Json& j) override;
  const Cart& tree() const { return tree_; }

 private:
  Cart tree_;
};

class RandomForestModel final : public Model {
 public:
  RandomForestModel(std::size_t n_estimators, CartParams p)
      : n_estimators_(n_estimators), params_(p) {}
  Family family() const override { return Family::RandomForest; }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override;
  double predict(std::span<const double> row) const override;
  Json to_json() const override;
  void from_json(const Json& j) override;

 private:
  std::size_t n_estimators_;
  CartParams params_;
  Task task_ = Task::Regress;
  std::vector<Cart> trees_;
};

class KNearestModel final : public Model {
 public:
  explicit KNearestModel(std::size_t k) : k_(k) {}
  Family family() const override { return Family::KNearest; }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override;
  double predict(std::span<const double> row) const override;
  Json to_json() const override;
  void from_json(const Json& j) override;

 private:
  std::size_t k_;
  Task task_ = Task::Regress;
  Matrix x_;
  std::vector<double> y_;
};

class MlpModel final : public Model {
 public:
  MlpModel(std::size_t hidden, std::size_t epochs, double learning_rate)
      : hidden_(hidden), epochs_(epochs), lr_(learning_rate) {}
  Family family() const override { return Family::MLP; }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override;
  double predict(std::span<const double> row) const override;
  Json to_json() const override;
  void from_json(const Json& j) override;

 private:
  std::vector<double> forward(std::span<const double> row, std::vector<double>& h) const;

  std::size_t hidden_, epochs_;
  double lr_;
  Task task_ = Task::Regress;
  std::size_t in_ = 0, out_ = 1;
  std::vector<double> w1_, b1_, w2_, b2_;
  double y_mean_ = 0.0, y_scale_ = 1.0;
};

}  // namespace slasel

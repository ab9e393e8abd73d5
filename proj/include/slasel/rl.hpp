#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "slasel/learn.hpp"

namespace slasel {

enum class TdFlavor { QLearning, Sarsa };

struct TdParams {
  double alpha = 0.1;
  double gamma = 0.0;
  double epsilon = 0.1;
  std::uint32_t episodes = 100;
  std::uint64_t seed = 1;
  std::size_t state_features = 5;
  std::size_t state_bins = 4;
  /// Upper bound on regression action bins (equal-frequency).
  std::size_t action_bins = 10;
};

void validate(const TdParams& p);

/// Per-feature quantile bins over the highest-variance columns.
class StateEncoder {
 public:
  StateEncoder() = default;
  StateEncoder(std::vector<std::size_t> columns, std::vector<std::vector<double>> edges,
               std::size_t bins);

  static StateEncoder fit(const Matrix& x, std::size_t features, std::size_t bins);

  /// Mixed-radix code of the per-feature bins, in [0, num_states()).
  std::size_t state(std::span<const double> row) const;
  std::size_t num_states() const;

  const std::vector<std::size_t>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& edges() const { return edges_; }
  std::size_t bins() const { return bins_; }

 private:
  std::vector<std::size_t> columns_;
  std::vector<std::vector<double>> edges_;
  std::size_t bins_ = 1;
};

struct QTable {
  TdFlavor flavor = TdFlavor::QLearning;
  TdParams params;
  StateEncoder encoder;
  /// Predicted value of each action.
  std::vector<double> midpoints;
  /// Row-major, num_states x num_actions.
  std::vector<double> q;
  double reward_scale = 1.0;
  double max_abs_reward = 0.0;
  /// Largest |Q| seen at any point during training.
  double max_abs_q = 0.0;
  std::uint64_t updates = 0;

  std::size_t num_actions() const { return midpoints.size(); }
  std::size_t num_states() const { return encoder.num_states(); }
  double value(std::size_t state, std::size_t action) const {
    return q[state * num_actions() + action];
  }
  /// Highest-valued action; ties go to the lowest index.
  std::size_t best_action(std::size_t state) const;
};

/// One temporal-difference step: q + alpha * (reward + gamma * bootstrap - q).
double td_update(double q, double reward, double bootstrap, double alpha, double gamma);

/// Action midpoints: class labels for classification, else the midpoints of
/// equal-frequency target bins.
std::vector<double> action_midpoints(std::span<const double> y, Task task, std::size_t max_bins);

QTable train_td(const Matrix& x, std::span<const double> y, TdFlavor flavor, const TdParams& params,
                Task task = Task::Regress);
QTable train_td(const LearningData& data, TdFlavor flavor, const TdParams& params,
                Task task = Task::Regress);

double td_predict(const QTable& table, std::span<const double> row);

Json to_json(const QTable& t);
QTable qtable_from_json(const Json& j);

/// Model adapter so TD predictors can join grid search and ensembles.
std::unique_ptr<Model> make_td_model(TdFlavor flavor, const Params& params);

}  // namespace slasel

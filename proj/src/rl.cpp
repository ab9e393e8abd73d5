#include "slasel/rl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

namespace slasel {

void validate(const TdParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw InvalidArgument("td: alpha must be in (0, 1]");
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw InvalidArgument("td: gamma must be in [0, 1]");
  if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) {
    throw InvalidArgument("td: epsilon must be in [0, 1]");
  }
  if (p.episodes == 0) throw InvalidArgument("td: episodes must be positive");
  if (p.state_features == 0 || p.state_bins == 0 || p.action_bins == 0) {
    throw InvalidArgument("td: state features, state bins and action bins must be positive");
  }
  if (std::pow(static_cast<double>(p.state_bins), static_cast<double>(p.state_features)) > 1e7) {
    throw InvalidArgument("td: state space too large");
  }
}

StateEncoder::StateEncoder(std::vector<std::size_t> columns, std::vector<std::vector<double>> edges,
                           std::size_t bins)
    : columns_(std::move(columns)), edges_(std::move(edges)), bins_(bins) {
  if (columns_.size() != edges_.size()) throw InvalidArgument("state encoder: size mismatch");
  if (bins_ == 0) throw InvalidArgument("state encoder: bins must be positive");
}

StateEncoder StateEncoder::fit(const Matrix& x, std::size_t features, std::size_t bins) {
  if (x.rows == 0) throw InvalidArgument("state encoder: no rows");
  std::vector<double> variance(x.cols);
  std::vector<std::vector<double>> columns(x.cols, std::vector<double>(x.rows));
  for (std::size_t c = 0; c < x.cols; ++c) {
    for (std::size_t r = 0; r < x.rows; ++r) columns[c][r] = x(r, c);
    const double sd = stddev(columns[c]);
    variance[c] = sd * sd;
  }
  std::vector<std::size_t> order(x.cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
  order.resize(std::min(features, x.cols));

  std::vector<std::vector<double>> edges;
  for (std::size_t c : order) {
    std::vector<double> e;
    for (std::size_t k = 1; k < bins; ++k) {
      e.push_back(quantile(columns[c], static_cast<double>(k) / static_cast<double>(bins)));
    }
    edges.push_back(std::move(e));
  }
  return StateEncoder(std::move(order), std::move(edges), bins);
}

std::size_t StateEncoder::state(std::span<const double> row) const {
  std::size_t code = 0;
  for (std::size_t i = columns_.size(); i-- > 0;) {
    const auto& e = edges_[i];
    const auto b = static_cast<std::size_t>(
        std::upper_bound(e.begin(), e.end(), row[columns_[i]]) - e.begin());
    code = code * bins_ + b;
  }
  return code;
}

std::size_t StateEncoder::num_states() const {
  std::size_t s = 1;
  for (std::size_t i = 0; i < columns_.size(); ++i) s *= bins_;
  return s;
}

std::size_t QTable::best_action(std::size_t state) const {
  const double* row = &q[state * num_actions()];
  return static_cast<std::size_t>(std::max_element(row, row + num_actions()) - row);
}

double td_update(double q, double reward, double bootstrap, double alpha, double gamma) {
  return q + alpha * (reward + gamma * bootstrap - q);
}

std::vector<double> action_midpoints(std::span<const double> y, Task task, std::size_t max_bins) {
  if (y.empty()) throw InvalidArgument("td: no targets");
  std::vector<double> v(y.begin(), y.end());
  if (task == Task::Classify) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }
  std::vector<double> bounds;
  for (std::size_t k = 0; k <= max_bins; ++k) {
    const double b = quantile(v, static_cast<double>(k) / static_cast<double>(max_bins));
    if (bounds.empty() || b > bounds.back()) bounds.push_back(b);
  }
  if (bounds.size() == 1) return bounds;
  std::vector<double> mids;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    mids.push_back(bounds[k] + (bounds[k + 1] - bounds[k]) / 2.0);
  }
  return mids;
}

QTable train_td(const Matrix& x, std::span<const double> y, TdFlavor flavor, const TdParams& params,
                Task task) {
  validate(params);
  if (x.rows == 0 || x.rows != y.size()) throw InvalidArgument("td: empty or mismatched training fold");

  QTable t;
  t.flavor = flavor;
  t.params = params;
  t.encoder = StateEncoder::fit(x, params.state_features, params.state_bins);
  t.midpoints = action_midpoints(y, task, params.action_bins);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  t.reward_scale = *hi - *lo > 0.0 ? *hi - *lo : 1.0;
  const std::size_t a_count = t.num_actions();
  t.q.assign(t.num_states() * a_count, 0.0);

  std::vector<std::size_t> states(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) states[i] = t.encoder.state(x.row(i));

  Rng rng(params.seed);
  auto choose = [&](std::size_t s) {
    const double u = uniform01(rng);
    if (u < params.epsilon) return static_cast<std::size_t>(uniform_int(rng, 0, a_count - 1));
    return t.best_action(s);
  };

  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  for (std::uint32_t ep = 0; ep < params.episodes; ++ep) {
    shuffle(order, rng);
    std::size_t a = choose(states[order[0]]);
    for (std::size_t step = 0; step < order.size(); ++step) {
      const std::size_t i = order[step];
      const std::size_t s = states[i];
      const double reward = -std::abs(t.midpoints[a] - y[i]) / t.reward_scale;
      t.max_abs_reward = std::max(t.max_abs_reward, std::abs(reward));

      double bootstrap = 0.0;
      std::size_t next_a = 0;
      if (step + 1 < order.size()) {
        const std::size_t s2 = states[order[step + 1]];
        next_a = choose(s2);
        bootstrap = flavor == TdFlavor::QLearning ? t.value(s2, t.best_action(s2))
                                                  : t.value(s2, next_a);
      }
      double& qv = t.q[s * a_count + a];
      qv = td_update(qv, reward, bootstrap, params.alpha, params.gamma);
      t.max_abs_q = std::max(t.max_abs_q, std::abs(qv));
      ++t.updates;
      a = next_a;
    }
  }
  spdlog::debug("td {}: {} updates, max |Q| {}", flavor == TdFlavor::QLearning ? "qlearning" : "sarsa",
                t.updates, t.max_abs_q);
  return t;
}

QTable train_td(const LearningData& data, TdFlavor flavor, const TdParams& params, Task task) {
  Matrix x(data.size(), kNumInputs);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data.x[i].begin(), data.x[i].end(), x.row(i).begin());
  }
  return train_td(x, data.y, flavor, params, task);
}

double td_predict(const QTable& table, std::span<const double> row) {
  if (table.midpoints.empty()) throw Error("td: table not fitted");
  return table.midpoints[table.best_action(table.encoder.state(row))];
}

Json to_json(const QTable& t) {
  return {{"flavor", t.flavor == TdFlavor::QLearning ? "qlearning" : "sarsa"},
          {"alpha", t.params.alpha},
          {"gamma", t.params.gamma},
          {"epsilon", t.params.epsilon},
          {"episodes", t.params.episodes},
          {"seed", t.params.seed},
          {"state_features", t.params.state_features},
          {"state_bins", t.params.state_bins},
          {"action_bins", t.params.action_bins},
          {"columns", t.encoder.columns()},
          {"edges", t.encoder.edges()},
          {"midpoints", t.midpoints},
          {"q", t.q},
          {"reward_scale", t.reward_scale},
          {"max_abs_reward", t.max_abs_reward},
          {"max_abs_q", t.max_abs_q},
          {"updates", t.updates}};
}

QTable qtable_from_json(const Json& j) {
  QTable t;
  const auto flavor = j.at("flavor").get<std::string>();
  if (flavor != "qlearning" && flavor != "sarsa") throw Error("td: unknown flavor '" + flavor + "'");
  t.flavor = flavor == "qlearning" ? TdFlavor::QLearning : TdFlavor::Sarsa;
  t.params.alpha = j.at("alpha").get<double>();
  t.params.gamma = j.at("gamma").get<double>();
  t.params.epsilon = j.at("epsilon").get<double>();
  t.params.episodes = j.at("episodes").get<std::uint32_t>();
  t.params.seed = j.at("seed").get<std::uint64_t>();
  t.params.state_features = j.at("state_features").get<std::size_t>();
  t.params.state_bins = j.at("state_bins").get<std::size_t>();
  t.params.action_bins = j.at("action_bins").get<std::size_t>();
  t.encoder = StateEncoder(j.at("columns").get<std::vector<std::size_t>>(),
                           j.at("edges").get<std::vector<std::vector<double>>>(),
                           t.params.state_bins);
  t.midpoints = j.at("midpoints").get<std::vector<double>>();
  t.q = j.at("q").get<std::vector<double>>();
  t.reward_scale = j.at("reward_scale").get<double>();
  t.max_abs_reward = j.at("max_abs_reward").get<double>();
  t.max_abs_q = j.at("max_abs_q").get<double>();
  t.updates = j.at("updates").get<std::uint64_t>();
  for (std::size_t c : t.encoder.columns()) {
    if (c >= kNumInputs) throw Error("td: state column out of range");
  }
  if (t.midpoints.empty() || t.q.size() != t.num_states() * t.num_actions()) {
    throw Error("td: malformed table");
  }
  return t;
}

namespace {

class TdModel final : public Model {
 public:
  TdModel(TdFlavor flavor, TdParams params) : flavor_(flavor), params_(params) {}

  Family family() const override {
    return flavor_ == TdFlavor::QLearning ? Family::QLearning : Family::Sarsa;
  }
  void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) override {
    TdParams p = params_;
    p.seed = seed;
    table_ = train_td(x, y, flavor_, p, task);
  }
  double predict(std::span<const double> row) const override { return td_predict(table_, row); }
  Json to_json() const override { return slasel::to_json(table_); }
  void from_json(const Json& j) override {
    table_ = qtable_from_json(j);
    flavor_ = table_.flavor;
    params_ = table_.params;
  }

 private:
  TdFlavor flavor_;
  TdParams params_;
  QTable table_;
};

}  // namespace

std::unique_ptr<Model> make_td_model(TdFlavor flavor, const Params& params) {
  TdParams p;
  auto get = [&](const char* key, auto& field) {
    auto it = params.find(key);
    if (it != params.end()) field = static_cast<std::remove_reference_t<decltype(field)>>(it->second);
  };
  get("alpha", p.alpha);
  get("gamma", p.gamma);
  get("epsilon", p.epsilon);
  get("episodes", p.episodes);
  get("state_features", p.state_features);
  get("state_bins", p.state_bins);
  get("action_bins", p.action_bins);
  validate(p);
  return std::make_unique<TdModel>(flavor, p);
}

}  // namespace slasel

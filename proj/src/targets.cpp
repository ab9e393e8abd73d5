#include <algorithm>
#include <cmath>
#include <set>

#include "slasel/learn.hpp"

namespace slasel {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Time: return "time";
    case Metric::Gap: return "gap";
    case Metric::Memory: return "mem";
  }
  return "?";
}

Metric parse_metric(std::string_view s) {
  if (s == "time") return Metric::Time;
  if (s == "gap") return Metric::Gap;
  if (s == "mem" || s == "memory") return Metric::Memory;
  throw InvalidArgument("unknown metric '" + std::string(s) + "' (expected time|gap|mem)");
}

std::string_view to_string(Task t) {
  return t == Task::Classify ? "classify" : "regress";
}

Task parse_task(std::string_view s) {
  if (s == "classify") return Task::Classify;
  if (s == "regress") return Task::Regress;
  throw InvalidArgument("unknown task '" + std::string(s) + "' (expected classify|regress)");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::LinearOrLogistic: return "linear";
    case Family::DecisionTree: return "tree";
    case Family::RandomForest: return "forest";
    case Family::KNearest: return "knn";
    case Family::MLP: return "mlp";
    case Family::QLearning: return "qlearning";
    case Family::Sarsa: return "sarsa";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw InvalidArgument("unknown model family '" + std::string(s) +
                        "' (expected linear|tree|forest|knn|mlp|qlearning|sarsa)");
}

int BinScheme::bin(double v) const {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

void validate(const BinScheme& scheme) {
  for (std::size_t i = 0; i < scheme.edges.size(); ++i) {
    if (!std::isfinite(scheme.edges[i])) throw InvalidArgument("bin edges must be finite");
    if (i > 0 && !(scheme.edges[i] > scheme.edges[i - 1])) {
      throw InvalidArgument("bin edges must be strictly ascending");
    }
  }
}

BinScheme time_scheme() { return {Metric::Time, {1.0, 10.0, 100.0}}; }
BinScheme gap_scheme() { return {Metric::Gap, {0.0, 1.0, 5.0}}; }

BinScheme memory_scheme(std::span<const double> train_values) {
  if (train_values.empty()) throw InvalidArgument("memory_scheme: no training values");
  std::vector<double> v(train_values.begin(), train_values.end());
  BinScheme s{Metric::Memory, {}};
  for (double q : {0.25, 0.5, 0.75}) {
    const double e = quantile(v, q);
    if (s.edges.empty() || e > s.edges.back()) s.edges.push_back(e);
  }
  return s;
}

std::vector<int> bin_targets(std::span<const double> values, const BinScheme& scheme) {
  if (values.empty()) throw InvalidArgument("bin_targets: no values");
  validate(scheme);
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(scheme.bin(v));
  return out;
}

namespace {

bool censored(SolveStatus s) { return s == SolveStatus::Timeout || s == SolveStatus::OOM; }

}  // namespace

std::optional<double> regression_target(const PerformanceRecord& r, Metric m) {
  switch (m) {
    case Metric::Time:
      if (censored(r.status)) return std::nullopt;
      return r.t_s;
    case Metric::Memory:
      if (r.status == SolveStatus::OOM) return std::nullopt;
      return static_cast<double>(r.m_kb);
    case Metric::Gap:
      return r.o_pct;
  }
  return std::nullopt;
}

std::optional<int> class_target(const PerformanceRecord& r, const BinScheme& scheme) {
  if (censored(r.status)) return static_cast<int>(scheme.edges.size());
  switch (scheme.metric) {
    case Metric::Time: return scheme.bin(r.t_s);
    case Metric::Memory: return scheme.bin(static_cast<double>(r.m_kb));
    case Metric::Gap:
      if (!r.o_pct) return std::nullopt;
      return scheme.bin(*r.o_pct);
  }
  return std::nullopt;
}

BinScheme fit_scheme(Metric m, const Dataset& train) {
  switch (m) {
    case Metric::Time: return time_scheme();
    case Metric::Gap: return gap_scheme();
    case Metric::Memory: {
      std::vector<double> values;
      for (const auto& row : train.rows) {
        if (auto v = regression_target(row.record, Metric::Memory)) values.push_back(*v);
      }
      if (values.empty()) return {Metric::Memory, {}};
      return memory_scheme(values);
    }
  }
  return time_scheme();
}

LearningData make_learning_data(const Dataset& ds, Algorithm alg, Metric metric, Task task,
                                const BinScheme* scheme) {
  if (task == Task::Classify && scheme == nullptr) {
    throw InvalidArgument("make_learning_data: classification needs a bin scheme");
  }
  if (scheme != nullptr && scheme->metric != metric) {
    throw InvalidArgument("make_learning_data: bin scheme is for a different metric");
  }
  LearningData out;
  for (const auto& row : ds.rows) {
    if (row.record.algorithm != alg) continue;
    std::optional<double> y;
    if (task == Task::Regress) {
      y = regression_target(row.record, metric);
    } else if (auto c = class_target(row.record, *scheme)) {
      y = static_cast<double>(*c);
    }
    if (!y) continue;
    out.x.push_back(row.input);
    out.y.push_back(*y);
    out.instance_ids.push_back(row.record.instance_id);
  }
  return out;
}

ClassificationMetrics evaluate_classification(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("evaluate_classification: length mismatch");
  if (pred.empty()) throw InvalidArgument("evaluate_classification: no samples");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(pred.begin(), pred.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  double f1_sum = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      else if (pred[i] == c) ++fp;
      else if (truth[i] == c) ++fn;
    }
    f1_sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return {static_cast<double>(correct) / static_cast<double>(pred.size()),
          f1_sum / static_cast<double>(classes.size())};
}

RegressionMetrics evaluate_regression(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("evaluate_regression: length mismatch");
  if (pred.empty()) throw InvalidArgument("evaluate_regression: no samples");
  double ss_res = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    ss_res += d * d;
  }
  RegressionMetrics m;
  m.rmse = std::sqrt(ss_res / static_cast<double>(pred.size()));
  if (truth.size() >= 2) {
    const double mu = mean(truth);
    double ss_tot = 0.0;
    for (double t : truth) ss_tot += (t - mu) * (t - mu);
    if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
  }
  return m;
}

}  // namespace slasel

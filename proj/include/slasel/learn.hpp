#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slasel/features.hpp"
#include "slasel/harness.hpp"

namespace slasel {

using Json = nlohmann::json;

enum class Metric { Time, Gap, Memory };
enum class Task { Classify, Regress };
enum class Family { LinearOrLogistic, DecisionTree, RandomForest, KNearest, MLP, QLearning, Sarsa };

inline constexpr Family kNativeFamilies[] = {Family::LinearOrLogistic, Family::DecisionTree,
                                             Family::RandomForest, Family::KNearest, Family::MLP};
inline constexpr Family kAllFamilies[] = {Family::LinearOrLogistic, Family::DecisionTree,
                                          Family::RandomForest,     Family::KNearest,
                                          Family::MLP,              Family::QLearning,
                                          Family::Sarsa};

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);  // "time" | "gap" | "mem"
std::string_view to_string(Task t);
Task parse_task(std::string_view s);  // "classify" | "regress"
std::string_view to_string(Family f);
Family parse_family(std::string_view s);

// ---------------------------------------------------------------------------
// Targets

struct BinScheme {
  Metric metric = Metric::Time;
  std::vector<double> edges;

  std::size_t num_classes() const { return edges.size() + 1; }
  /// Number of edges strictly below `v`.
  int bin(double v) const;
};

void validate(const BinScheme& scheme);
BinScheme time_scheme();
BinScheme gap_scheme();
/// Quartile edges of the values, duplicates removed.
BinScheme memory_scheme(std::span<const double> train_values);

std::vector<int> bin_targets(std::span<const double> values, const BinScheme& scheme);

/// Raw target of one record, or nothing if the run produced no usable
/// measurement: time and memory are censored by Timeout/OOM, memory by OOM,
/// gap is absent when the run returned no value.
std::optional<double> regression_target(const PerformanceRecord& r, Metric m);
/// Class of one record; Timeout/OOM map to the last class.
std::optional<int> class_target(const PerformanceRecord& r, const BinScheme& scheme);

/// Scheme for (metric) fitted on the training rows (memory quartiles use
/// only uncensored training values).
BinScheme fit_scheme(Metric m, const Dataset& train);

struct LearningData {
  std::vector<ModelInput> x;
  std::vector<double> y;
  std::vector<std::string> instance_ids;

  std::size_t size() const { return x.size(); }
};

/// Rows of `ds` for `alg` with a defined target. `scheme` is required for
/// classification.
LearningData make_learning_data(const Dataset& ds, Algorithm alg, Metric metric, Task task,
                                const BinScheme* scheme = nullptr);

// ---------------------------------------------------------------------------
// Metrics

struct ClassificationMetrics {
  double accuracy = 0.0;
  double f1_macro = 0.0;
};

struct RegressionMetrics {
  double rmse = 0.0;
  /// Absent when the truth has zero variance.
  std::optional<double> r2;
};

ClassificationMetrics evaluate_classification(std::span<const int> pred, std::span<const int> truth);
RegressionMetrics evaluate_regression(std::span<const double> pred, std::span<const double> truth);

// ---------------------------------------------------------------------------
// Models

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

using Params = std::map<std::string, double>;

class Model {
 public:
  virtual ~Model() = default;
  virtual Family family() const = 0;
  /// For classification `y` holds labels 0..K-1.
  virtual void fit(const Matrix& x, std::span<const double> y, Task task, std::uint64_t seed) = 0;
  /// Class label (as a double) for classification.
  virtual double predict(std::span<const double> row) const = 0;
  virtual Json to_json() const = 0;
  virtual void from_json(const Json& j) = 0;
};

std::unique_ptr<Model> make_model(Family family, const Params& params);
std::unique_ptr<Model> load_model(Family family, const Json& j);

/// The hyperparameter grid tuned for a family.
std::vector<Params> default_grid(Family family);

/// Whether the family sees z-scored inputs.
bool uses_standardization(Family family);

struct GridRecord {
  Params params;
  double val_score = 0.0;
};

struct TrainedPredictor {
  Family family = Family::LinearOrLogistic;
  Task task = Task::Regress;
  Params hyperparameters;
  std::optional<Standardizer> standardizer;
  std::shared_ptr<const Model> model;
  /// Set when the training target had a single class; predict returns it.
  std::optional<double> constant;
  /// Macro-F1 (classification, higher is better) or RMSE (regression, lower
  /// is better) on the validation fold.
  double val_score = 0.0;
  std::vector<GridRecord> search_log;

  double predict(const ModelInput& x) const;
};

/// True if score `a` ranks ahead of score `b` for the task.
bool better_score(double a, double b, Task task);

double validation_score(const TrainedPredictor& p, const LearningData& val);

/// Exhaustive grid search; one fit-evaluate cycle per grid point, selection
/// on `val`. Throws InvalidArgument on empty folds or an empty grid.
TrainedPredictor train_model(Family family, Task task, const LearningData& train,
                             const LearningData& val, const std::vector<Params>& grid,
                             std::uint64_t seed);

Json to_json(const TrainedPredictor& p);
TrainedPredictor predictor_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Ensembles

struct Ensemble {
  Task task = Task::Regress;
  /// Best validation score first.
  std::vector<std::shared_ptr<const TrainedPredictor>> members;

  double predict(const ModelInput& x) const;
};

/// Candidates ranked by validation score; ties keep the input order.
std::vector<std::shared_ptr<const TrainedPredictor>> rank_by_validation(
    std::vector<std::shared_ptr<const TrainedPredictor>> candidates, Task task);

/// Top-k of the ranked candidates. Throws InvalidArgument if fewer than k or
/// if any candidate has a different task.
Ensemble build_ensemble(std::vector<std::shared_ptr<const TrainedPredictor>> candidates,
                        std::size_t k, Task task);

/// Majority vote over labels listed best member first; ties go to the
/// best-ranked member whose label is among the tied.
int majority_vote(std::span<const int> votes_best_first);

// ---------------------------------------------------------------------------
// Importance

struct FeatureImportance {
  std::string feature;
  double score = 0.0;
  std::size_t shuffles = 0;
};

std::vector<FeatureImportance> permutation_importance_impl(
    const std::function<double(const ModelInput&)>& predict, Task task, const LearningData& data,
    std::size_t repeats, std::uint64_t seed);

/// Mean degradation (RMSE increase or accuracy drop) over `repeats` seeded
/// shuffles of each input column, best first. Requires >= 10 rows.
template <typename Predictor>
std::vector<FeatureImportance> permutation_importance(const Predictor& p, Task task,
                                                      const LearningData& data,
                                                      std::size_t repeats, std::uint64_t seed) {
  return permutation_importance_impl([&p](const ModelInput& x) { return p.predict(x); }, task,
                                     data, repeats, seed);
}

// ---------------------------------------------------------------------------
// Artifacts

struct ModelArtifact {
  Algorithm algorithm = Algorithm::Greedy;
  Metric metric = Metric::Time;
  Task task = Task::Regress;
  std::optional<BinScheme> scheme;
  /// Split parameters, so evaluation can rebuild the same folds.
  std::uint64_t seed = 1;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  Ensemble ensemble;
  Json metadata = Json::object();

  double predict(const ModelInput& x) const { return ensemble.predict(x); }
};

Json to_json(const ModelArtifact& a);
ModelArtifact artifact_from_json(const Json& j);
void save_artifact(const ModelArtifact& a, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

struct TrainOptions {
  Algorithm algorithm = Algorithm::Greedy;
  Metric metric = Metric::Time;
  Task task = Task::Regress;
  /// Empty means every family in kAllFamilies.
  std::vector<Family> families;
  std::size_t top_k = 3;
  std::uint64_t seed = 1;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
};

struct TrainResult {
  ModelArtifact artifact;
  /// All tuned candidates, ranked.
  std::vector<std::shared_ptr<const TrainedPredictor>> ranked;
  DatasetSplit split;
  LearningData train, val, test;
};

/// Grouped split; classification on time or gap is stratified by each
/// instance's most frequent class.
DatasetSplit split_for_training(const Dataset& ds, Algorithm alg, Metric metric, Task task,
                                std::array<double, 3> ratios, std::uint64_t seed);

/// Split, bin, tune every family, and assemble the top-k artifact.
TrainResult train_pipeline(const Dataset& ds, const TrainOptions& options);

enum class Fold { Train, Val, Test, All };
Fold parse_fold(std::string_view s);

/// Metric block of the artifact on one fold of `ds`.
Json evaluate_artifact(const ModelArtifact& a, const Dataset& ds, Fold fold = Fold::Test);

}  // namespace slasel

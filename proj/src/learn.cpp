#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <spdlog/spdlog.h>

#include "slasel/learn.hpp"

namespace slasel {

namespace {

Matrix to_matrix(const LearningData& d, const std::optional<Standardizer>& z) {
  Matrix m(d.size(), kNumInputs);
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto row = m.row(i);
    std::copy(d.x[i].begin(), d.x[i].end(), row.begin());
    if (z) z->apply(row);
  }
  return m;
}

std::vector<int> as_labels(std::span<const double> v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(static_cast<int>(std::llround(x)));
  return out;
}

double score_predictions(std::span<const double> pred, std::span<const double> truth, Task task) {
  if (task == Task::Classify) {
    const auto p = as_labels(pred), t = as_labels(truth);
    return evaluate_classification(p, t).f1_macro;
  }
  return evaluate_regression(pred, truth).rmse;
}

Json params_json(const Params& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Params params_from_json(const Json& j) {
  Params p;
  for (const auto& [k, v] : j.items()) p[k] = v.get<double>();
  return p;
}

}  // namespace

double TrainedPredictor::predict(const ModelInput& x) const {
  if (constant) return *constant;
  if (!model) throw Error("predictor has no fitted model");
  if (standardizer) return model->predict(standardizer->transform(x));
  return model->predict(x);
}

bool better_score(double a, double b, Task task) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return task == Task::Classify ? a > b : a < b;
}

double validation_score(const TrainedPredictor& p, const LearningData& val) {
  if (val.size() == 0) throw InvalidArgument("validation fold is empty");
  std::vector<double> pred;
  pred.reserve(val.size());
  for (const auto& x : val.x) pred.push_back(p.predict(x));
  return score_predictions(pred, val.y, p.task);
}

TrainedPredictor train_model(Family family, Task task, const LearningData& train,
                             const LearningData& val, const std::vector<Params>& grid,
                             std::uint64_t seed) {
  if (train.size() == 0) throw InvalidArgument("train_model: empty training fold");
  if (val.size() == 0) throw InvalidArgument("train_model: empty validation fold");
  if (grid.empty()) throw InvalidArgument("train_model: empty hyperparameter grid");

  TrainedPredictor best;
  best.family = family;
  best.task = task;

  if (task == Task::Classify) {
    const double first = train.y.front();
    const bool single = std::all_of(train.y.begin(), train.y.end(),
                                    [&](double v) { return v == first; });
    if (single) {
      best.constant = first;
      best.val_score = validation_score(best, val);
      spdlog::info("{}: single-class training target, constant predictor {}", to_string(family),
                   first);
      return best;
    }
  }

  if (uses_standardization(family)) {
    std::vector<double> flat;
    flat.reserve(train.size() * kNumInputs);
    for (const auto& x : train.x) flat.insert(flat.end(), x.begin(), x.end());
    best.standardizer = Standardizer::fit(flat, kNumInputs);
  }
  const Matrix x = to_matrix(train, best.standardizer);

  bool have = false;
  for (const auto& params : grid) {
    std::shared_ptr<Model> model = make_model(family, params);
    model->fit(x, train.y, task, seed);
    TrainedPredictor cand = best;
    cand.model = model;
    cand.hyperparameters = params;
    const double score = validation_score(cand, val);
    best.search_log.push_back({params, score});
    spdlog::debug("grid {} {}: val {}", to_string(family), params_json(params).dump(), score);
    if (!have || better_score(score, best.val_score, task)) {
      best.model = model;
      best.hyperparameters = params;
      best.val_score = score;
      have = true;
    }
  }
  return best;
}

Json to_json(const TrainedPredictor& p) {
  Json j;
  j["family"] = to_string(p.family);
  j["task"] = to_string(p.task);
  j["hyperparameters"] = params_json(p.hyperparameters);
  j["val_score"] = p.val_score;
  j["constant"] = p.constant ? Json(*p.constant) : Json(nullptr);
  if (p.standardizer) {
    j["standardizer"] = {{"mean", p.standardizer->mean()}, {"scale", p.standardizer->scale()}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["model"] = p.model ? p.model->to_json() : Json(nullptr);
  Json log = Json::array();
  for (const auto& r : p.search_log) {
    log.push_back({{"params", params_json(r.params)}, {"val_score", r.val_score}});
  }
  j["search_log"] = log;
  return j;
}

TrainedPredictor predictor_from_json(const Json& j) {
  TrainedPredictor p;
  p.family = parse_family(j.at("family").get<std::string>());
  p.task = parse_task(j.at("task").get<std::string>());
  p.hyperparameters = params_from_json(j.at("hyperparameters"));
  p.val_score = j.at("val_score").get<double>();
  if (!j.at("constant").is_null()) p.constant = j.at("constant").get<double>();
  if (const auto& z = j.at("standardizer"); !z.is_null()) {
    p.standardizer = Standardizer(z.at("mean").get<std::vector<double>>(),
                                  z.at("scale").get<std::vector<double>>());
    if (p.standardizer->cols() != kNumInputs) throw Error("standardizer width mismatch");
  }
  if (const auto& m = j.at("model"); !m.is_null()) {
    auto model = make_model(p.family, p.hyperparameters);
    model->from_json(m);
    p.model = std::move(model);
  }
  if (!p.constant && !p.model) throw Error("predictor has neither a model nor a constant");
  for (const auto& r : j.at("search_log")) {
    p.search_log.push_back({params_from_json(r.at("params")), r.at("val_score").get<double>()});
  }
  return p;
}

// ---------------------------------------------------------------------------

int majority_vote(std::span<const int> votes) {
  if (votes.empty()) throw InvalidArgument("majority_vote: no votes");
  std::map<int, std::size_t> counts;
  std::size_t top = 0;
  for (int v : votes) top = std::max(top, ++counts[v]);
  for (int v : votes) {
    if (counts[v] == top) return v;
  }
  return votes.front();
}

double Ensemble::predict(const ModelInput& x) const {
  if (members.empty()) throw Error("ensemble has no members");
  if (task == Task::Regress) {
    double s = 0.0;
    for (const auto& m : members) s += m->predict(x);
    return s / static_cast<double>(members.size());
  }
  std::vector<int> votes;
  votes.reserve(members.size());
  for (const auto& m : members) votes.push_back(static_cast<int>(std::llround(m->predict(x))));
  return majority_vote(votes);
}

std::vector<std::shared_ptr<const TrainedPredictor>> rank_by_validation(
    std::vector<std::shared_ptr<const TrainedPredictor>> candidates, Task task) {
  std::stable_sort(candidates.begin(), candidates.end(), [task](const auto& a, const auto& b) {
    return better_score(a->val_score, b->val_score, task);
  });
  return candidates;
}

Ensemble build_ensemble(std::vector<std::shared_ptr<const TrainedPredictor>> candidates,
                        std::size_t k, Task task) {
  if (k == 0) throw InvalidArgument("build_ensemble: k must be positive");
  if (candidates.size() < k) {
    throw InvalidArgument("build_ensemble: need " + std::to_string(k) + " candidates, have " +
                          std::to_string(candidates.size()));
  }
  for (const auto& c : candidates) {
    if (!c || c->task != task) throw InvalidArgument("build_ensemble: candidate task mismatch");
  }
  Ensemble e;
  e.task = task;
  auto ranked = rank_by_validation(std::move(candidates), task);
  e.members.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  return e;
}

// ---------------------------------------------------------------------------

std::vector<FeatureImportance> permutation_importance_impl(
    const std::function<double(const ModelInput&)>& predict, Task task, const LearningData& data,
    std::size_t repeats, std::uint64_t seed) {
  if (data.size() < 10) throw InvalidArgument("permutation_importance: need at least 10 rows");
  if (repeats == 0) throw InvalidArgument("permutation_importance: repeats must be positive");

  auto score = [&](const std::vector<ModelInput>& xs) {
    std::vector<double> pred;
    pred.reserve(xs.size());
    for (const auto& x : xs) pred.push_back(predict(x));
    if (task == Task::Classify) {
      const auto p = as_labels(pred), t = as_labels(data.y);
      return evaluate_classification(p, t).accuracy;
    }
    return evaluate_regression(pred, data.y).rmse;
  };
  const double base = score(data.x);

  std::vector<FeatureImportance> out;
  std::vector<ModelInput> xs = data.x;
  std::vector<double> column(data.size());
  for (std::size_t c = 0; c < kNumInputs; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      for (std::size_t i = 0; i < data.size(); ++i) column[i] = data.x[i][c];
      Rng rng(mix_seed(seed, c * repeats + r));
      shuffle(column, rng);
      for (std::size_t i = 0; i < data.size(); ++i) xs[i][c] = column[i];
      const double s = score(xs);
      total += task == Task::Classify ? base - s : s - base;
      spdlog::debug("importance {} repeat {}: {}", input_names()[c], r, s);
    }
    for (std::size_t i = 0; i < data.size(); ++i) xs[i][c] = data.x[i][c];
    out.push_back({std::string(input_names()[c]), total / static_cast<double>(repeats), repeats});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

// ---------------------------------------------------------------------------

Json to_json(const ModelArtifact& a) {
  Json j;
  j["format"] = "slasel-model";
  j["version"] = std::string(kVersion);
  j["algorithm"] = to_string(a.algorithm);
  j["metric"] = to_string(a.metric);
  j["task"] = to_string(a.task);
  j["scheme"] = a.scheme ? Json{{"metric", to_string(a.scheme->metric)}, {"edges", a.scheme->edges}}
                         : Json(nullptr);
  j["split"] = {{"seed", a.seed}, {"ratios", a.ratios}};
  Json members = Json::array();
  for (const auto& m : a.ensemble.members) members.push_back(to_json(*m));
  j["members"] = members;
  j["metadata"] = a.metadata;
  return j;
}

ModelArtifact artifact_from_json(const Json& j) {
  if (j.value("format", "") != "slasel-model") throw Error("not a model artifact");
  ModelArtifact a;
  a.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  a.metric = parse_metric(j.at("metric").get<std::string>());
  a.task = parse_task(j.at("task").get<std::string>());
  if (const auto& s = j.at("scheme"); !s.is_null()) {
    a.scheme = BinScheme{parse_metric(s.at("metric").get<std::string>()),
                         s.at("edges").get<std::vector<double>>()};
    validate(*a.scheme);
  }
  a.seed = j.at("split").at("seed").get<std::uint64_t>();
  a.ratios = j.at("split").at("ratios").get<std::array<double, 3>>();
  a.ensemble.task = a.task;
  for (const auto& m : j.at("members")) {
    auto p = std::make_shared<TrainedPredictor>(predictor_from_json(m));
    if (p->task != a.task) throw Error("artifact member task mismatch");
    a.ensemble.members.push_back(std::move(p));
  }
  if (a.ensemble.members.empty()) throw Error("artifact has no members");
  a.metadata = j.value("metadata", Json::object());
  return a;
}

void save_artifact(const ModelArtifact& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << to_json(a).dump(1) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path + "'");
  try {
    return artifact_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw Error(path + ": malformed model artifact: " + e.what());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

DatasetSplit split_for_training(const Dataset& ds, Algorithm alg, Metric metric, Task task,
                                std::array<double, 3> ratios, std::uint64_t seed) {
  const Dataset rows = ds.filter(alg);
  if (rows.rows.empty()) {
    throw InvalidArgument("dataset has no rows for algorithm " + std::string(to_string(alg)));
  }
  if (task == Task::Classify && metric != Metric::Memory) {
    const BinScheme scheme = fit_scheme(metric, rows);
    std::map<std::string, std::map<int, std::size_t>> counts;
    for (const auto& row : rows.rows) {
      auto& c = counts[row.record.instance_id];
      if (auto label = class_target(row.record, scheme)) ++c[*label];
    }
    std::map<std::string, int> strata;
    for (const auto& [id, c] : counts) {
      int label = 0;
      std::size_t top = 0;
      for (const auto& [l, n] : c) {
        if (n > top) {
          top = n;
          label = l;
        }
      }
      strata[id] = label;
    }
    return split_dataset(rows, ratios, seed, &strata);
  }
  return split_dataset(rows, ratios, seed);
}

TrainResult train_pipeline(const Dataset& ds, const TrainOptions& o) {
  TrainResult res;
  res.split = split_for_training(ds, o.algorithm, o.metric, o.task, o.ratios, o.seed);
  std::optional<BinScheme> scheme;
  if (o.task == Task::Classify) scheme = fit_scheme(o.metric, res.split.train);
  const BinScheme* sp = scheme ? &*scheme : nullptr;
  res.train = make_learning_data(res.split.train, o.algorithm, o.metric, o.task, sp);
  res.val = make_learning_data(res.split.val, o.algorithm, o.metric, o.task, sp);
  res.test = make_learning_data(res.split.test, o.algorithm, o.metric, o.task, sp);
  const std::string what = std::string(to_string(o.algorithm)) + "/" +
                           std::string(to_string(o.metric));
  if (res.train.size() == 0 || res.val.size() == 0) {
    throw Error(what + ": no uncensored targets in the training or validation fold");
  }

  std::vector<Family> families = o.families;
  if (families.empty()) families.assign(std::begin(kAllFamilies), std::end(kAllFamilies));
  std::vector<std::shared_ptr<const TrainedPredictor>> candidates;
  for (Family f : families) {
    spdlog::info("{} {}: tuning {}", what, to_string(o.task), to_string(f));
    candidates.push_back(std::make_shared<TrainedPredictor>(
        train_model(f, o.task, res.train, res.val, default_grid(f), o.seed)));
  }
  res.ranked = rank_by_validation(candidates, o.task);

  ModelArtifact& a = res.artifact;
  a.algorithm = o.algorithm;
  a.metric = o.metric;
  a.task = o.task;
  a.scheme = scheme;
  a.seed = o.seed;
  a.ratios = o.ratios;
  a.ensemble = build_ensemble(res.ranked, o.top_k, o.task);
  return res;
}

Fold parse_fold(std::string_view s) {
  if (s == "train") return Fold::Train;
  if (s == "val") return Fold::Val;
  if (s == "test") return Fold::Test;
  if (s == "all") return Fold::All;
  throw InvalidArgument("unknown fold '" + std::string(s) + "' (expected train|val|test|all)");
}

Json evaluate_artifact(const ModelArtifact& a, const Dataset& ds, Fold fold) {
  Dataset part;
  if (fold == Fold::All) {
    part = ds.filter(a.algorithm);
  } else {
    DatasetSplit split = split_for_training(ds, a.algorithm, a.metric, a.task, a.ratios, a.seed);
    part = fold == Fold::Train ? split.train : fold == Fold::Val ? split.val : split.test;
  }
  const BinScheme* sp = a.scheme ? &*a.scheme : nullptr;
  const LearningData d = make_learning_data(part, a.algorithm, a.metric, a.task, sp);
  if (d.size() == 0) throw Error("no uncensored targets in the selected fold");

  std::vector<double> pred;
  pred.reserve(d.size());
  for (const auto& x : d.x) pred.push_back(a.predict(x));

  Json out;
  out["algorithm"] = to_string(a.algorithm);
  out["metric"] = to_string(a.metric);
  out["task"] = to_string(a.task);
  out["rows"] = d.size();
  out["members"] = Json::array();
  for (const auto& m : a.ensemble.members) out["members"].push_back(to_string(m->family));
  if (a.task == Task::Classify) {
    const auto m = evaluate_classification(as_labels(pred), as_labels(d.y));
    out["accuracy"] = m.accuracy;
    out["f1_macro"] = m.f1_macro;
  } else {
    const auto m = evaluate_regression(pred, d.y);
    out["rmse"] = m.rmse;
    out["r2"] = m.r2 ? Json(*m.r2) : Json(nullptr);
  }
  return out;
}

}  // namespace slasel

#include "slasel/decider.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include <spdlog/spdlog.h>

#include "slasel/learn.hpp"

namespace slasel {

std::string_view to_string(SlaMode m) { return m == SlaMode::Strict ? "strict" : "lenient"; }

void validate(const SlaThresholds& t) {
  auto check = [](double v, const char* field) {
    if (!std::isfinite(v) || v <= 0.0) throw RequestError(field, "threshold must be positive");
  };
  check(t.t_max_s, "sla.t_max_s");
  check(t.o_max_pct, "sla.o_max_pct");
  check(t.m_max_kb, "sla.m_max_kb");
}

void validate(const RankWeights& w) {
  auto check = [](double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0) throw RequestError(field, "weight must be non-negative");
  };
  check(w.time, "weights.time");
  check(w.gap, "weights.gap");
  check(w.memory, "weights.memory");
  if (w.time == 0.0 && w.gap == 0.0 && w.memory == 0.0) {
    throw RequestError("weights", "at least one weight must be positive");
  }
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw RequestError(path + key, "missing required field");
  return *it;
}

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw RequestError(path.empty() ? "$" : path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw RequestError((path.empty() ? "" : path + ".") + k, "unknown field");
  }
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw RequestError(field, "expected a string");
  return j.get<std::string>();
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw RequestError(field, "expected a number");
  return j.get<double>();
}

int get_positive_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() <= 0 || j.get<long long>() > 1 << 20) {
    throw RequestError(field, "expected a positive integer");
  }
  return j.get<int>();
}

Instance parse_inline_instance(const json& j, Variant variant) {
  expect_object(j, "instance", {"capacity", "items"});
  Instance inst;
  inst.id = "inline";
  inst.variant = variant;
  const json& cap = require(j, "capacity", "instance.");
  if (!cap.is_number_integer()) throw RequestError("instance.capacity", "expected an integer");
  inst.capacity = cap.get<std::int64_t>();
  const json& items = require(j, "items", "instance.");
  if (!items.is_array()) throw RequestError("instance.items", "expected an array");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string field = "instance.items[" + std::to_string(i) + "]";
    const json& it = items[i];
    if (!it.is_array() || it.size() != 2 || !it[0].is_number_integer() ||
        !it[1].is_number_integer()) {
      throw RequestError(field, "expected [weight, profit]");
    }
    inst.items.push_back({it[0].get<std::int64_t>(), it[1].get<std::int64_t>()});
  }
  try {
    validate(inst);
  } catch (const InvalidArgument& e) {
    throw RequestError("instance", e.what());
  }
  return inst;
}

}  // namespace

SlaRequest parse_request(const json& doc) {
  expect_object(doc, "",
                {"problem_type", "variant", "instance_path", "instance", "hardware", "sla",
                 "weights", "mode", "metadata"});
  SlaRequest req;
  req.problem_type = get_string(require(doc, "problem_type", ""), "problem_type");
  if (req.problem_type != kSupportedProblem) {
    throw UnsupportedProblem("problem_type: unsupported problem '" + req.problem_type +
                             "' (supported: knapsack01)");
  }
  try {
    req.variant = parse_variant(get_string(require(doc, "variant", ""), "variant"));
  } catch (const RequestError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw RequestError("variant", e.what());
  }
  if (doc.contains("instance_path") && doc.contains("instance")) {
    throw RequestError("instance", "give either instance_path or instance, not both");
  }
  if (doc.contains("instance_path")) {
    req.instance_path = get_string(doc["instance_path"], "instance_path");
  }
  if (doc.contains("instance")) req.instance = parse_inline_instance(doc["instance"], req.variant);

  const json& hw = require(doc, "hardware", "");
  expect_object(hw, "hardware", {"ram_gb", "cpu_cores"});
  req.hardware.ram_gb = get_positive_int(require(hw, "ram_gb", "hardware."), "hardware.ram_gb");
  req.hardware.cpu_cores =
      get_positive_int(require(hw, "cpu_cores", "hardware."), "hardware.cpu_cores");

  const json& sla = require(doc, "sla", "");
  expect_object(sla, "sla", {"t_max_s", "o_max_pct", "m_max_kb"});
  req.sla.t_max_s = get_number(require(sla, "t_max_s", "sla."), "sla.t_max_s");
  req.sla.o_max_pct = get_number(require(sla, "o_max_pct", "sla."), "sla.o_max_pct");
  req.sla.m_max_kb = get_number(require(sla, "m_max_kb", "sla."), "sla.m_max_kb");
  validate(req.sla);

  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    expect_object(w, "weights", {"time", "gap", "memory"});
    if (w.contains("time")) req.weights.time = get_number(w["time"], "weights.time");
    if (w.contains("gap")) req.weights.gap = get_number(w["gap"], "weights.gap");
    if (w.contains("memory")) req.weights.memory = get_number(w["memory"], "weights.memory");
  }
  validate(req.weights);

  if (doc.contains("mode")) {
    const std::string m = get_string(doc["mode"], "mode");
    if (m == "strict") {
      req.mode = SlaMode::Strict;
    } else if (m == "lenient") {
      req.mode = SlaMode::Lenient;
    } else {
      throw RequestError("mode", "expected strict|lenient");
    }
  }
  return req;
}

SlaRequest parse_request_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw RequestError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_request(doc);
}

// ---------------------------------------------------------------------------

namespace {

std::optional<bool> metric_ok(const std::optional<double>& pred, double threshold, SlaMode mode) {
  if (!pred) return mode == SlaMode::Strict ? std::optional<bool>(false) : std::nullopt;
  return *pred <= threshold;
}

}  // namespace

DecisionReport check_compliance(const PredictionTable& predictions, const SlaThresholds& thresholds,
                                SlaMode mode) {
  if (predictions.empty()) throw InvalidArgument("check_compliance: no predictions");
  validate(thresholds);
  DecisionReport r;
  r.thresholds = thresholds;
  r.mode = mode;
  for (const auto& [name, p] : predictions) {
    Verdict v;
    v.algorithm = name;
    v.predicted = p;
    v.time_ok = metric_ok(p.t_s, thresholds.t_max_s, mode);
    v.gap_ok = metric_ok(p.o_pct, thresholds.o_max_pct, mode);
    v.memory_ok = metric_ok(p.m_kb, thresholds.m_max_kb, mode);
    v.compliant = v.time_ok.value_or(true) && v.gap_ok.value_or(true) && v.memory_ok.value_or(true);
    if (v.compliant) r.feasible.push_back(name);
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

std::vector<RankedCandidate> rank_candidates(const DecisionReport& report,
                                             const RankWeights& weights) {
  validate(weights);
  std::vector<RankedCandidate> out;
  for (const auto& v : report.verdicts) {
    if (!v.compliant) continue;
    double s = 0.0;
    if (v.predicted.t_s) s += weights.time * *v.predicted.t_s / report.thresholds.t_max_s;
    if (v.predicted.o_pct) s += weights.gap * *v.predicted.o_pct / report.thresholds.o_max_pct;
    if (v.predicted.m_kb) s += weights.memory * *v.predicted.m_kb / report.thresholds.m_max_kb;
    out.push_back({v.algorithm, s});
  }
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    return a.score != b.score ? a.score < b.score : a.algorithm < b.algorithm;
  });
  return out;
}

void negotiation_hints(DecisionReport& report) {
  report.hints.clear();
  report.global_hint.reset();
  const auto& th = report.thresholds;

  struct Relax {
    std::string algorithm;
    double t = 1.0, o = 1.0, m = 1.0;
  };
  std::vector<Relax> relaxable;
  for (const auto& v : report.verdicts) {
    if (v.compliant) continue;
    AlgorithmHint h{v.algorithm, {}};
    Relax rx{v.algorithm};
    bool can_relax = true;
    auto visit = [&](const char* metric, const std::optional<bool>& ok,
                     const std::optional<double>& pred, double thr, double& factor) {
      if (!pred) {
        if (ok == false) {
          h.violations.push_back({metric, std::nullopt});
          can_relax = false;
        }
        return;
      }
      factor = std::max(1.0, *pred / thr);
      if (ok == false) h.violations.push_back({metric, *pred / thr});
    };
    visit("time", v.time_ok, v.predicted.t_s, th.t_max_s, rx.t);
    visit("gap", v.gap_ok, v.predicted.o_pct, th.o_max_pct, rx.o);
    visit("memory", v.memory_ok, v.predicted.m_kb, th.m_max_kb, rx.m);
    report.hints.push_back(std::move(h));
    if (can_relax) relaxable.push_back(rx);
  }
  if (!report.feasible.empty() || relaxable.empty()) return;

  auto key = [](const Relax& r) {
    return std::make_tuple(std::max({r.t, r.o, r.m}), r.t + r.o + r.m, r.algorithm);
  };
  const auto best = std::min_element(relaxable.begin(), relaxable.end(),
                                     [&](const Relax& a, const Relax& b) { return key(a) < key(b); });
  report.global_hint = GlobalHint{best->algorithm, best->t, best->o, best->m};
}

DecisionReport decide(const PredictionTable& predictions, const SlaThresholds& thresholds,
                      const RankWeights& weights, SlaMode mode) {
  DecisionReport r = check_compliance(predictions, thresholds, mode);
  r.ranking = rank_candidates(r, weights);
  negotiation_hints(r);
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const DecisionReport& r) {
  json out;
  out["mode"] = to_string(r.mode);
  out["thresholds"] = {{"t_max_s", r.thresholds.t_max_s},
                       {"o_max_pct", r.thresholds.o_max_pct},
                       {"m_max_kb", r.thresholds.m_max_kb}};
  json algs = json::array();
  for (const auto& v : r.verdicts) {
    algs.push_back({{"algorithm", v.algorithm},
                    {"predicted",
                     {{"t_s", opt(v.predicted.t_s)},
                      {"o_pct", opt(v.predicted.o_pct)},
                      {"m_kb", opt(v.predicted.m_kb)}}},
                    {"compliance",
                     {{"time", opt(v.time_ok)}, {"gap", opt(v.gap_ok)}, {"memory", opt(v.memory_ok)}}},
                    {"compliant", v.compliant}});
  }
  out["algorithms"] = algs;
  out["feasible"] = r.feasible;
  json ranking = json::array();
  for (const auto& c : r.ranking) ranking.push_back({{"algorithm", c.algorithm}, {"score", c.score}});
  out["ranking"] = ranking;
  json hints = json::array();
  for (const auto& h : r.hints) {
    json vs = json::array();
    for (const auto& m : h.violations) vs.push_back({{"metric", m.metric}, {"factor", opt(m.factor)}});
    hints.push_back({{"algorithm", h.algorithm}, {"violations", vs}});
  }
  out["hints"] = hints;
  if (r.global_hint) {
    out["global_hint"] = {{"algorithm", r.global_hint->algorithm},
                          {"time_factor", r.global_hint->time_factor},
                          {"gap_factor", r.global_hint->gap_factor},
                          {"memory_factor", r.global_hint->memory_factor}};
  } else {
    out["global_hint"] = nullptr;
  }
  return out;
}

PredictionTable parse_predictions(const json& doc) {
  if (!doc.is_object() || !doc.contains("algorithms") || !doc["algorithms"].is_object()) {
    throw RequestError("algorithms", "expected an object of per-algorithm predictions");
  }
  PredictionTable table;
  for (const auto& [name, p] : doc["algorithms"].items()) {
    const std::string path = "algorithms." + name;
    expect_object(p, path, {"t_s", "o_pct", "m_kb"});
    auto read = [&](const char* key) -> std::optional<double> {
      if (!p.contains(key) || p[key].is_null()) return std::nullopt;
      const double v = get_number(p[key], path + "." + key);
      if (!std::isfinite(v) || v < 0.0) {
        throw RequestError(path + "." + key, "prediction must be non-negative");
      }
      return v;
    };
    table[name] = {read("t_s"), read("o_pct"), read("m_kb")};
  }
  if (table.empty()) throw RequestError("algorithms", "no predictions");
  return table;
}

PredictionTable predict_from_models(const std::string& dir, const Instance& inst,
                                    const HardwareConfig& hw) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("model directory '" + dir + "' does not exist");
  const ModelInput x = model_input(extract_features(inst), hw);
  PredictionTable table;
  std::size_t loaded = 0;
  for (Algorithm alg : kAllAlgorithms) {
    Prediction p;
    for (Metric m : {Metric::Time, Metric::Gap, Metric::Memory}) {
      const fs::path path =
          fs::path(dir) / (std::string(to_string(alg)) + "_" + std::string(to_string(m)) + ".json");
      if (!fs::exists(path)) continue;
      const ModelArtifact a = load_artifact(path.string());
      if (a.algorithm != alg || a.metric != m) {
        throw Error(path.string() + ": artifact is for " + std::string(to_string(a.algorithm)) +
                    "/" + std::string(to_string(a.metric)));
      }
      if (a.task != Task::Regress) {
        spdlog::warn("{}: classification artifact skipped; the decider needs regressors",
                     path.string());
        continue;
      }
      const double v = std::max(0.0, a.predict(x));
      (m == Metric::Time ? p.t_s : m == Metric::Gap ? p.o_pct : p.m_kb) = v;
      ++loaded;
    }
    table[std::string(to_string(alg))] = p;
  }
  if (loaded == 0) throw Error("no regression artifacts found in '" + dir + "'");
  return table;
}

}  // namespace slasel

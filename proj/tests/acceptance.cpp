// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failures. Criterion numbers given as arguments restrict the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <spdlog/spdlog.h>

#include "e2e.hpp"
#include "learn_fixtures.hpp"
#include "oracle.hpp"
#include "slasel/decider.hpp"
#include "slasel/harness.hpp"
#include "slasel/learn.hpp"
#include "slasel/rl.hpp"
#include "slasel/solvers.hpp"

using namespace slasel;

namespace {

using Clock = std::chrono::steady_clock;

/// Allowed overrun of a reported solve time past its budget.
constexpr double kTimeSlackS = 0.1;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++count;
  }
  std::size_t count = 0;
};

int failed = 0;
std::set<int> selected;

void report(int id, const std::string& title, const std::function<std::string(Check&)>& body) {
  if (!selected.empty() && !selected.count(id)) return;
  Check c;
  std::string detail;
  const auto t0 = Clock::now();
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const bool ok = c.count == 0;
  if (!ok) ++failed;
  std::printf("%s criterion %d: %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              detail.c_str(), seconds_since(t0));
  for (const auto& f : c.failures) std::printf("    - %s\n", f.c_str());
  std::fflush(stdout);
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<Instance> oracle_instances(Variant v) {
  Rng rng(v == Variant::Maximize ? 501 : 502);
  std::vector<Instance> out;
  for (int i = 0; i < 500; ++i) {
    out.push_back(testing::random_small(rng, 20, v, "o" + std::to_string(i)));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string dataset_shape(Check& c) {
  const auto t0 = Clock::now();
  SuiteSpec suite;
  suite.count = 200;
  const auto instances = generate_suite(suite);
  std::size_t max_n = 0;
  for (const auto& inst : instances) max_n = std::max(max_n, inst.size());
  ProfileConfig cfg;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto ds = build_dataset(instances, default_hardware_grid(),
                                {Algorithm::Greedy, Algorithm::DP, Algorithm::BnB}, cfg);
  for (auto alg : {Algorithm::Greedy, Algorithm::DP, Algorithm::BnB}) {
    c.expect(ds.count(alg) == 2800, std::string(to_string(alg)) + " rows = " +
                                        std::to_string(ds.count(alg)));
  }
  std::map<SolveStatus, std::size_t> status;
  double max_t = 0.0;
  for (const auto& row : ds.rows) {
    ++status[row.record.status];
    max_t = std::max(max_t, row.record.t_s);
  }
  c.expect(max_t <= cfg.budget.time_limit_s + kTimeSlackS, "max t_s " + fmt_num(max_t));
  const double elapsed = seconds_since(t0);
  c.expect(max_n <= 1000, "instance larger than 1000 items");
  c.expect(elapsed < 1800.0, "runtime " + fmt_num(elapsed) + " s");
  std::string mix;
  for (const auto& [s, n] : status) mix += std::string(to_string(s)) + "=" + std::to_string(n) + " ";
  return "200 instances x 14 configs, 5 s budget, " + mix + "max t_s " + fmt_num(max_t) + ", wall " + fmt_num(elapsed) + " s";
}

std::string replay(Check& c) {
  const std::string dir = SLASEL_FIXTURE_DIR;
  const auto preds = parse_predictions(nlohmann::json::parse(testing::slurp(dir + "/replay_predictions.json")));
  const auto req = parse_request_text(testing::slurp(dir + "/replay_request.json"));
  const auto r = decide(preds, req.sla, req.weights, req.mode);
  struct Row {
    const char* name;
    bool t, o, m;
  };
  const Row expect[] = {{"Greedy", true, true, false},   {"DP", false, true, false},
                        {"BnB", true, true, true},       {"Gurobi", true, true, false},
                        {"OR-Tools", true, true, false}, {"GA", true, true, true}};
  int matched = 0;
  for (const auto& e : expect) {
    const Verdict* v = nullptr;
    for (const auto& x : r.verdicts) {
      if (x.algorithm == e.name) v = &x;
    }
    if (!v) {
      c.expect(false, std::string("missing ") + e.name);
      continue;
    }
    for (auto [got, want, metric] : {std::tuple{v->time_ok, e.t, "time"},
                                      std::tuple{v->gap_ok, e.o, "gap"},
                                      std::tuple{v->memory_ok, e.m, "memory"}}) {
      const bool ok = got == want;
      matched += ok;
      c.expect(ok, std::string(e.name) + " " + metric);
    }
  }
  const std::set<std::string> feasible(r.feasible.begin(), r.feasible.end());
  c.expect(feasible == std::set<std::string>{"BnB", "GA"}, "feasible set");
  return std::to_string(matched) + "/18 flags, feasible {" +
         (r.feasible.empty() ? "" : r.feasible.front() + "," + r.feasible.back()) + "}";
}

std::string oracle_equivalence(Check& c) {
  const auto t0 = Clock::now();
  const Budget b{60.0, 64ULL << 20, ClockMode::Work};
  std::size_t agree = 0, total = 0;
  for (auto v : {Variant::Maximize, Variant::Minimize}) {
    for (const auto& inst : oracle_instances(v)) {
      const auto opt = testing::brute_force(inst);
      const auto dp = solve_dp(inst, b);
      const auto bnb = solve_bnb(inst, b);
      const bool ok = opt && dp.status == SolveStatus::Optimal && bnb.status == SolveStatus::Optimal &&
                      dp.value == opt && bnb.value == opt;
      agree += ok;
      ++total;
      c.expect(ok, inst.id + " (" + std::string(to_string(v)) + ")");
    }
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 60.0, "runtime " + fmt_num(elapsed) + " s");
  return std::to_string(agree) + "/" + std::to_string(total) + " agree";
}

std::string greedy_bound(Check& c) {
  const Budget b{60.0, 64ULL << 20, ClockMode::Work};
  std::size_t ok_count = 0;
  double worst = 1.0;
  for (const auto& inst : oracle_instances(Variant::Maximize)) {
    const auto opt = *testing::brute_force(inst);
    const auto g = solve_greedy(inst, b);
    const bool ok = g.value && 2 * *g.value >= opt;
    ok_count += ok;
    if (opt > 0 && g.value) worst = std::min(worst, static_cast<double>(*g.value) / static_cast<double>(opt));
    c.expect(ok, inst.id);
  }
  return std::to_string(ok_count) + "/500, worst ratio " + fmt_num(worst);
}

std::string gap_identities(Check& c) {
  for (auto v : {Variant::Maximize, Variant::Minimize}) {
    for (std::int64_t ref = 1; ref <= 60; ++ref) {
      for (std::int64_t val = 0; val <= 120; ++val) {
        const bool beats = v == Variant::Maximize ? val > ref : val < ref;
        if (beats) continue;
        const double g = optimality_gap(val, ref, v);
        c.expect(g >= 0.0 && ((g == 0.0) == (val == ref)), "gap identity");
      }
    }
  }
  const double a = optimality_gap(5, 6, Variant::Maximize);
  const double b = optimality_gap(8, 6, Variant::Minimize);
  c.expect(close(a, 16.6667, 1e-4), "5 vs 6 max = " + fmt_num(a));
  c.expect(close(b, 33.3333, 1e-4), "8 vs 6 min = " + fmt_num(b));
  return "5/6 max " + fmt_num(a) + ", 8/6 min " + fmt_num(b);
}

std::string metric_units(Check& c) {
  const auto r = evaluate_regression(std::vector<double>{1, 2, 4}, std::vector<double>{1, 2, 3});
  c.expect(close(r.rmse, 0.5774, 1e-4), "rmse");
  c.expect(r.r2 && close(*r.r2, 0.5, 1e-4), "r2");
  const auto k = evaluate_classification(std::vector<int>{0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1});
  c.expect(close(k.accuracy, 0.75, 1e-4), "accuracy");
  c.expect(close(k.f1_macro, 0.7333, 1e-4), "f1_macro");
  const auto p = evaluate_regression(std::vector<double>{3, 1, 2}, std::vector<double>{3, 1, 2});
  c.expect(p.rmse == 0.0 && p.r2 == 1.0, "perfect regression");
  return "rmse " + fmt_num(r.rmse) + ", r2 " + fmt_num(r.r2.value_or(NAN)) + ", acc " +
         fmt_num(k.accuracy) + ", f1 " + fmt_num(k.f1_macro);
}

Dataset learning_dataset() {
  std::vector<Instance> suite;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec g;
    g.n = static_cast<std::uint32_t>(20 + 12 * i);
    g.correlation = i % 3 == 0 ? 0.0 : 0.9;
    g.noise_sigma = 10;
    g.weight_max = i % 2 ? 1000 : 50000;
    g.capacity_fraction = i % 4 ? 0.5 : 0.25;
    g.seed = 900 + static_cast<std::uint64_t>(i);
    g.id = "e" + std::to_string(100 + i);
    suite.push_back(generate_instance(g));
  }
  ProfileConfig cfg;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  return build_dataset(suite, {{4, 8}, {16, 8}, {64, 32}, {256, 32}},
                       {std::begin(kAllAlgorithms), std::end(kAllAlgorithms)}, cfg);
}

std::string ensemble_algebra(Check& c) {
  // Mean identity over five fitted regressors.
  auto tr = testing::synthetic_data(150, 1, [](const ModelInput& x) { return 3 * x[0] - x[7]; });
  auto va = testing::synthetic_data(50, 2, [](const ModelInput& x) { return 3 * x[0] - x[7]; });
  std::vector<std::shared_ptr<const TrainedPredictor>> cands;
  for (Family f : kAllFamilies) {
    auto grid = default_grid(f);
    grid.resize(1);
    cands.push_back(std::make_shared<const TrainedPredictor>(train_model(f, Task::Regress, tr, va, grid, 3)));
  }
  const auto e = build_ensemble(cands, 5, Task::Regress);
  const auto probe = testing::synthetic_data(1000, 77, [](const ModelInput&) { return 0.0; });
  double worst = 0.0;
  for (const auto& x : probe.x) {
    double s = 0.0;
    for (const auto& m : e.members) s += m->predict(x);
    worst = std::max(worst, std::abs(e.predict(x) - s / static_cast<double>(e.members.size())));
  }
  c.expect(worst <= 1e-12, "mean deviation " + fmt_num(worst));

  // Every 3-member vote pattern over 3 labels.
  int patterns = 0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int d = 0; d < 3; ++d) {
        int expect = a;
        if (b == d) expect = b;
        if (a == b || a == d) expect = a;
        const std::vector<int> votes{a, b, d};
        c.expect(majority_vote(votes) == expect, "vote pattern");
        ++patterns;
      }
    }
  }

  // Nested top-k on every trained target.
  const auto ds = learning_dataset();
  int targets = 0;
  for (Algorithm alg : kAllAlgorithms) {
    for (Metric m : {Metric::Time, Metric::Gap, Metric::Memory}) {
      for (Task task : {Task::Regress, Task::Classify}) {
        TrainOptions o;
        o.algorithm = alg;
        o.metric = m;
        o.task = task;
        o.seed = 4;
        TrainResult r;
        try {
          r = train_pipeline(ds, o);
        } catch (const Error& ex) {
          spdlog::warn("skipping {}/{}/{}: {}", to_string(alg), to_string(m), to_string(task), ex.what());
          continue;
        }
        auto members = [&](std::size_t k) {
          std::set<const TrainedPredictor*> s;
          for (const auto& p : build_ensemble(r.ranked, k, task).members) s.insert(p.get());
          return s;
        };
        const auto t3 = members(3), t5 = members(5), t7 = members(7);
        const bool nested = std::includes(t5.begin(), t5.end(), t3.begin(), t3.end()) &&
                            std::includes(t7.begin(), t7.end(), t5.begin(), t5.end());
        c.expect(nested, std::string(to_string(alg)) + "/" + std::string(to_string(m)));
        ++targets;
      }
    }
  }
  c.expect(targets > 0, "no trainable targets");
  return "max mean deviation " + fmt_num(worst) + ", " + std::to_string(patterns) +
         " vote patterns, " + std::to_string(targets) + " targets nested";
}

std::string learning_sanity(Check& c) {
  auto f = [](const ModelInput& x) { return 2.0 * x[0] + 1.0; };
  auto tr = testing::synthetic_data(200, 10, f);
  auto va = testing::synthetic_data(60, 11, f);
  const auto lin = train_model(Family::LinearOrLogistic, Task::Regress, tr, va,
                               default_grid(Family::LinearOrLogistic), 1);
  std::vector<double> pred;
  for (const auto& x : va.x) pred.push_back(lin.predict(x));
  const auto r2 = evaluate_regression(pred, va.y).r2.value_or(0.0);
  c.expect(r2 >= 0.99, "linear r2 " + fmt_num(r2));

  auto sep = testing::synthetic_data(300, 12, [](const ModelInput& x) {
    return x[3] + x[8] > 1.0 ? 1.0 : 0.0;
  });
  auto tree = make_model(Family::DecisionTree, {});
  const auto m = testing::to_matrix(sep);
  tree->fit(m, sep.y, Task::Classify, 1);
  std::vector<int> p, t;
  for (std::size_t i = 0; i < sep.size(); ++i) {
    p.push_back(static_cast<int>(tree->predict(m.row(i))));
    t.push_back(static_cast<int>(sep.y[i]));
  }
  const double acc = evaluate_classification(p, t).accuracy;
  c.expect(acc == 1.0, "tree training accuracy " + fmt_num(acc));

  Dataset ds;
  for (int i = 0; i < 53; ++i) {
    for (int k = 0; k < 14; ++k) {
      DatasetRow row;
      row.record.instance_id = "g" + std::to_string(i);
      row.record.hardware = default_hardware_grid()[static_cast<std::size_t>(k)];
      ds.rows.push_back(row);
    }
  }
  int clean = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = split_dataset(ds, {0.6, 0.2, 0.2}, seed);
    std::map<std::string, int> fold_of;
    bool ok = true;
    int fold = 0;
    for (const Dataset* d : {&s.train, &s.val, &s.test}) {
      for (const auto& row : d->rows) {
        auto [it, inserted] = fold_of.emplace(row.record.instance_id, fold);
        if (!inserted && it->second != fold) ok = false;
      }
      ++fold;
    }
    ok = ok && fold_of.size() == 53;
    clean += ok;
    c.expect(ok, "seed " + std::to_string(seed));
  }
  return "linear r2 " + fmt_num(r2) + ", tree accuracy " + fmt_num(acc) + ", " +
         std::to_string(clean) + "/100 grouped splits";
}

std::string rl_properties(Check& c) {
  auto target = [](const ModelInput& x) { return 5 * x[0] + x[2] * x[9]; };
  int identical = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto d = testing::synthetic_data(200, seed, target);
    TdParams p;
    p.seed = seed;
    p.gamma = 0.0;
    p.alpha = 0.3;
    p.epsilon = 0.2;
    const auto q = train_td(d, TdFlavor::QLearning, p);
    const auto s = train_td(d, TdFlavor::Sarsa, p);
    const bool same = q.q == s.q;
    identical += same;
    c.expect(same, "gamma 0 tables differ, seed " + std::to_string(seed));
  }
  auto d = testing::synthetic_data(250, 9, target);
  double ratio = 0.0;
  for (auto flavor : {TdFlavor::QLearning, TdFlavor::Sarsa}) {
    TdParams p;
    p.gamma = 0.9;
    p.alpha = 0.5;
    p.episodes = 400;
    const auto t = train_td(d, flavor, p);
    c.expect(t.updates >= 100000, "only " + std::to_string(t.updates) + " updates");
    const double bound = t.max_abs_reward / (1.0 - p.gamma);
    c.expect(t.max_abs_q <= bound + 1e-12, "max |Q| " + fmt_num(t.max_abs_q) + " > " + fmt_num(bound));
    ratio = std::max(ratio, t.max_abs_q / bound);
  }
  return std::to_string(identical) + "/5 identical at gamma 0, max |Q| / bound " + fmt_num(ratio);
}

std::string end_to_end(Check& c) {
  std::string log;
  const auto a = testing::run_pipeline(testing::scratch("acceptance-e2e-a"), &log);
  const auto b = testing::run_pipeline(testing::scratch("acceptance-e2e-b"));
  c.expect(!a.empty(), "first run failed: " + log.substr(0, 300));
  c.expect(!b.empty(), "second run failed");
  std::size_t same = 0;
  for (const auto& [name, bytes] : a) {
    const bool ok = b.count(name) && b.at(name) == bytes;
    same += ok;
    c.expect(ok, name + " differs");
  }
  c.expect(a.size() == b.size(), "file sets differ");
  std::size_t csv = 0, models = 0;
  for (const auto& [name, bytes] : a) {
    csv += name == "dataset.csv";
    models += name.rfind("models/", 0) == 0;
  }
  c.expect(csv == 1 && models == 12 && a.count("report.json"), "missing outputs");
  return std::to_string(same) + "/" + std::to_string(a.size()) + " files byte-identical (" +
         std::to_string(models) + " artifacts, CSV, report)";
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  report(1, "dataset shape 2800 rows per algorithm", dataset_shape);
  report(2, "SLA replay fixture", replay);
  report(3, "DP, BnB and exhaustive search agree on n <= 20", oracle_equivalence);
  report(4, "greedy half-approximation", greedy_bound);
  report(5, "optimality gap identities", gap_identities);
  report(6, "metric unit values", metric_units);
  report(7, "ensemble algebra", ensemble_algebra);
  report(8, "learning sanity", learning_sanity);
  report(9, "RL properties", rl_properties);
  report(10, "end-to-end determinism", end_to_end);
  std::printf("%d criteria failed\n", failed);
  return failed;
}

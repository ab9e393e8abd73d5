#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "slasel/decider.hpp"

using namespace slasel;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(SLASEL_FIXTURE_DIR) + "/" + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PredictionTable replay() { return parse_predictions(nlohmann::json::parse(fixture("replay_predictions.json"))); }

const SlaThresholds kReplay{100.0, 3.5, 20000.0};

const Verdict& verdict(const DecisionReport& r, const std::string& name) {
  for (const auto& v : r.verdicts) {
    if (v.algorithm == name) return v;
  }
  throw std::runtime_error("no verdict for " + name);
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

PredictionTable random_table(Rng& rng) {
  PredictionTable t;
  for (const char* name : {"a", "b", "c", "d", "e"}) {
    auto draw = [&](double scale) -> std::optional<double> {
      if (uniform01(rng) < 0.15) return std::nullopt;
      return scale * uniform01(rng);
    };
    t[name] = Prediction{draw(200), draw(7), draw(40000)};
  }
  return t;
}

}  // namespace

TEST_CASE("request parsing") {
  auto req = parse_request_text(fixture("replay_request.json"));
  CHECK(req.problem_type == "knapsack01");
  CHECK(req.hardware.ram_gb == 128);
  CHECK(req.hardware.cpu_cores == 8);
  CHECK(req.sla.o_max_pct == 3.5);
  CHECK(req.mode == SlaMode::Strict);
  CHECK(req.weights.time == 1.0);

  auto doc = nlohmann::json::parse(fixture("replay_request.json"));
  auto with = [&](auto edit) {
    auto d = doc;
    edit(d);
    return d;
  };
  CHECK_THROWS_AS(parse_request(with([](auto& d) { d["problem_type"] = "tsp"; })), UnsupportedProblem);
  try {
    parse_request(with([](auto& d) { d["sla"]["t_max_s"] = 0; }));
    FAIL("expected a request error");
  } catch (const RequestError& e) {
    CHECK(e.field() == "sla.t_max_s");
  }
  CHECK_THROWS_AS(parse_request(with([](auto& d) { d["colour"] = 1; })), RequestError);
  CHECK_THROWS_AS(parse_request(with([](auto& d) { d.erase("hardware"); })), RequestError);
  CHECK_THROWS_AS(parse_request(with([](auto& d) { d["mode"] = "loose"; })), RequestError);
  CHECK_THROWS_AS(parse_request(with([](auto& d) { d["weights"] = {{"time", 0}, {"gap", 0}, {"memory", 0}}; })),
                  RequestError);
  auto inline_req = parse_request(with([](auto& d) {
    d["instance"] = {{"capacity", 4}, {"items", {{3, 5}, {2, 3}, {2, 3}}}};
  }));
  REQUIRE(inline_req.instance.has_value());
  CHECK(inline_req.instance->size() == 3);
  CHECK_THROWS_AS(parse_request(with([](auto& d) {
                    d["instance"] = {{"capacity", 4}, {"items", {{0, 5}}}};
                  })),
                  RequestError);
  CHECK_THROWS_AS(parse_request_text("{"), RequestError);
}

TEST_CASE("replay flags") {
  auto r = check_compliance(replay(), kReplay, SlaMode::Strict);
  struct Row {
    const char* name;
    bool t, o, m;
  };
  const Row expect[] = {{"Greedy", true, true, false}, {"DP", false, true, false},
                        {"BnB", true, true, true},     {"Gurobi", true, true, false},
                        {"OR-Tools", true, true, false}, {"GA", true, true, true}};
  CHECK(r.verdicts.size() == 6);
  for (const auto& e : expect) {
    const auto& v = verdict(r, e.name);
    CAPTURE(e.name);
    CHECK(v.time_ok == e.t);
    CHECK(v.gap_ok == e.o);
    CHECK(v.memory_ok == e.m);
  }
  CHECK(as_set(r.feasible) == std::set<std::string>{"BnB", "GA"});
}

TEST_CASE("replay ranking and hints") {
  auto r = decide(replay(), kReplay, {}, SlaMode::Strict);
  REQUIRE(r.ranking.size() == 2);
  CHECK(r.ranking[0].algorithm == "BnB");
  CHECK(r.ranking[0].score == doctest::Approx(29.46 / 100 + 1.13 / 3.5 + 11424.0 / 20000));
  CHECK(r.ranking[1].algorithm == "GA");
  CHECK(r.ranking[1].score == doctest::Approx(1.513).epsilon(1e-3));
  CHECK_FALSE(r.global_hint.has_value());

  const AlgorithmHint* dp = nullptr;
  for (const auto& h : r.hints) {
    if (h.algorithm == "DP") dp = &h;
    CHECK(h.algorithm != "BnB");
    CHECK(h.algorithm != "GA");
  }
  REQUIRE(dp != nullptr);
  REQUIRE(dp->violations.size() == 2);
  CHECK(dp->violations[0].metric == "time");
  CHECK(*dp->violations[0].factor == doctest::Approx(3.7338).epsilon(1e-6));
  CHECK(dp->violations[1].metric == "memory");
  CHECK(*dp->violations[1].factor == doctest::Approx(68.75136).epsilon(1e-6));
}

TEST_CASE("absent predictions by mode") {
  PredictionTable t{{"Greedy", {0.23, 1.6, std::nullopt}}};
  auto strict = check_compliance(t, kReplay, SlaMode::Strict);
  CHECK(strict.verdicts[0].memory_ok == false);
  CHECK(strict.feasible.empty());
  auto lenient = check_compliance(t, kReplay, SlaMode::Lenient);
  CHECK_FALSE(lenient.verdicts[0].memory_ok.has_value());
  CHECK(lenient.feasible == std::vector<std::string>{"Greedy"});
}

TEST_CASE("single compliant algorithm and no violations") {
  PredictionTable one{{"GA", {1.0, 1.0, 1.0}}, {"DP", {900.0, 0.0, 1.0}}};
  auto r = decide(one, kReplay, {}, SlaMode::Strict);
  CHECK(r.ranking.size() == 1);
  PredictionTable all{{"GA", {1.0, 1.0, 1.0}}, {"BnB", {2.0, 0.0, 5.0}}};
  CHECK(decide(all, kReplay, {}, SlaMode::Strict).hints.empty());
}

TEST_CASE("unreachable thresholds give a global hint") {
  SlaThresholds tight{0.01, 0.001, 1.0};
  auto r = decide(replay(), tight, {}, SlaMode::Strict);
  CHECK(r.feasible.empty());
  CHECK(r.ranking.empty());
  CHECK(r.hints.size() == 6);
  REQUIRE(r.global_hint.has_value());
  const auto& g = *r.global_hint;
  CHECK(g.time_factor >= 1.0);
  CHECK(g.gap_factor >= 1.0);
  CHECK(g.memory_factor >= 1.0);
  SlaThresholds relaxed{tight.t_max_s * g.time_factor, tight.o_max_pct * g.gap_factor,
                        tight.m_max_kb * g.memory_factor};
  auto after = check_compliance(replay(), relaxed, SlaMode::Strict);
  CHECK(std::count(after.feasible.begin(), after.feasible.end(), g.algorithm) == 1);
}

TEST_CASE("decider properties on random tables") {
  Rng rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    auto t = random_table(rng);
    SlaThresholds th{1 + 150 * uniform01(rng), 0.1 + 5 * uniform01(rng), 1 + 30000 * uniform01(rng)};
    auto base = check_compliance(t, th, SlaMode::Strict);
    auto lenient = check_compliance(t, th, SlaMode::Lenient);
    auto bs = as_set(base.feasible), ls = as_set(lenient.feasible);
    CHECK(std::includes(ls.begin(), ls.end(), bs.begin(), bs.end()));

    SlaThresholds raised = th;
    raised.t_max_s *= 1 + uniform01(rng);
    raised.m_max_kb *= 1 + uniform01(rng);
    auto rs = as_set(check_compliance(t, raised, SlaMode::Strict).feasible);
    CHECK(std::includes(rs.begin(), rs.end(), bs.begin(), bs.end()));

    RankWeights w{uniform01(rng) + 0.1, uniform01(rng), uniform01(rng)};
    RankWeights scaled{w.time * 7.5, w.gap * 7.5, w.memory * 7.5};
    auto a = rank_candidates(base, w), b = rank_candidates(base, scaled);
    REQUIRE(a.size() == b.size());
    CHECK(a.size() == base.feasible.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].algorithm == b[i].algorithm);
  }
}

TEST_CASE("report JSON") {
  auto j = to_json(decide(replay(), kReplay, {}, SlaMode::Strict));
  CHECK(j["feasible"] == nlohmann::json({"BnB", "GA"}));
  CHECK(j["ranking"][0]["algorithm"] == "BnB");
  CHECK(j["algorithms"].size() == 6);
  CHECK(j["global_hint"].is_null());
}

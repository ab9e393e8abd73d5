#include <doctest.h>

#include <cmath>

#include "learn_fixtures.hpp"
#include "slasel/rl.hpp"

using namespace slasel;
using testing::synthetic_data;

namespace {

double noisy_target(const ModelInput& x) { return 10.0 * x[0] + 3.0 * x[4] * x[4]; }

}  // namespace

TEST_CASE("state encoder") {
  auto d = synthetic_data(200, 1, noisy_target);
  for (auto& x : d.x) x[6] *= 50.0;
  auto m = testing::to_matrix(d);
  auto enc = StateEncoder::fit(m, 5, 4);
  CHECK(enc.num_states() == 1024);
  CHECK(enc.columns().size() == 5);
  CHECK(enc.columns().front() == 6);

  std::vector<double> low(kNumInputs, -1.0);
  CHECK(enc.state(low) == 0);
  std::vector<double> high(kNumInputs, 1e9);
  CHECK(enc.state(high) == 1023);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(enc.state(m.row(i)) == enc.state(m.row(i)));
    CHECK(enc.state(m.row(i)) < 1024);
  }
}

TEST_CASE("hand TD step") {
  CHECK(td_update(0.0, -2.0, 0.0, 1.0, 0.0) == -2.0);
  CHECK(td_update(-1.0, -2.0, -4.0, 0.5, 0.5) == doctest::Approx(-2.5));
}

TEST_CASE("parameter validation") {
  TdParams p;
  CHECK_NOTHROW(validate(p));
  p.alpha = 0.0;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
  p = {};
  p.gamma = 1.5;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
  p = {};
  p.epsilon = -0.1;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
}

TEST_CASE("zero table picks action 0") {
  QTable t;
  t.encoder = StateEncoder({0}, {{0.5}}, 2);
  t.midpoints = {3.0, 7.0};
  t.q.assign(4, 0.0);
  std::vector<double> row(kNumInputs, 0.9);
  CHECK(t.best_action(1) == 0);
  CHECK(td_predict(t, row) == 3.0);
  t.q[1 * 2 + 1] = 0.5;
  CHECK(td_predict(t, row) == 7.0);
  row[0] = 0.1;
  CHECK(td_predict(t, row) == 3.0);
}

TEST_CASE("constant target is recovered") {
  auto d = synthetic_data(50, 3, [](const ModelInput&) { return 4.25; });
  TdParams p;
  p.episodes = 100;
  auto t = train_td(d, TdFlavor::Sarsa, p);
  CHECK(t.num_actions() == 1);
  for (const auto& x : d.x) CHECK(td_predict(t, x) == 4.25);
}

TEST_CASE("gamma zero makes q-learning and sarsa identical") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto d = synthetic_data(150, seed, noisy_target);
    TdParams p;
    p.seed = seed;
    p.alpha = 0.5;
    p.epsilon = 0.3;
    auto q = train_td(d, TdFlavor::QLearning, p);
    auto s = train_td(d, TdFlavor::Sarsa, p);
    CHECK(q.q == s.q);
    CHECK(q.midpoints == s.midpoints);
  }
}

TEST_CASE("q values stay within the discounted reward bound") {
  auto d = synthetic_data(200, 4, noisy_target);
  for (auto flavor : {TdFlavor::QLearning, TdFlavor::Sarsa}) {
    TdParams p;
    p.gamma = 0.9;
    p.alpha = 0.5;
    p.episodes = 500;
    auto t = train_td(d, flavor, p);
    CHECK(t.updates == 100000);
    CHECK(t.max_abs_reward > 0.0);
    CHECK(t.max_abs_q <= t.max_abs_reward / (1.0 - p.gamma) + 1e-12);
    for (double v : t.q) CHECK(std::isfinite(v));
  }
}

TEST_CASE("training is deterministic and serializes") {
  auto d = synthetic_data(80, 5, noisy_target);
  TdParams p;
  p.gamma = 0.5;
  auto a = train_td(d, TdFlavor::Sarsa, p);
  auto b = train_td(d, TdFlavor::Sarsa, p);
  CHECK(a.q == b.q);
  auto back = qtable_from_json(to_json(a));
  CHECK(back.q == a.q);
  CHECK(to_json(back).dump() == to_json(a).dump());
  for (const auto& x : d.x) CHECK(td_predict(back, x) == td_predict(a, x));
}

TEST_CASE("classification actions are class labels") {
  auto d = synthetic_data(100, 6, [](const ModelInput& x) { return x[1] > 0.5 ? 2.0 : 0.0; });
  auto t = train_td(d, TdFlavor::QLearning, TdParams{}, Task::Classify);
  CHECK(t.midpoints == std::vector<double>{0.0, 2.0});
  CHECK(action_midpoints(std::vector<double>{1, 2, 3, 4}, Task::Regress, 2) ==
        std::vector<double>{1.75, 3.25});
}

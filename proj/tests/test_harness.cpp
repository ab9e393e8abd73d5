#include <doctest.h>

#include <set>
#include <sstream>

#include "oracle.hpp"
#include "slasel/harness.hpp"

using namespace slasel;

namespace {

std::vector<Instance> small_suite(std::size_t count, std::uint32_t n, std::uint64_t seed = 1) {
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    GeneratorSpec g;
    g.n = n;
    g.weight_max = 100;
    g.correlation = 0.5;
    g.seed = seed + i;
    g.id = "s" + std::to_string(i);
    out.push_back(generate_instance(g));
  }
  return out;
}

std::string csv(const Dataset& ds) {
  std::ostringstream os;
  write_dataset_csv(ds, os, "meta");
  return os.str();
}

Dataset synthetic(std::size_t instances, std::size_t per_instance) {
  Dataset ds;
  for (std::size_t i = 0; i < instances; ++i) {
    for (std::size_t k = 0; k < per_instance; ++k) {
      DatasetRow row;
      row.record.instance_id = "i" + std::to_string(i);
      row.record.hardware = {static_cast<int>(4 << k), 8};
      row.record.status = SolveStatus::Optimal;
      ds.rows.push_back(row);
    }
  }
  return ds;
}

std::set<std::string> ids(const Dataset& ds) {
  auto v = ds.instance_ids();
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("single runs") {
  ReferenceResolver ref(Budget{5.0, 4ULL << 20, ClockMode::Work});
  Budget b{5.0, 4ULL << 20, ClockMode::Work};
  auto inst = small_suite(1, 40)[0];
  auto g = profile_run(Algorithm::Greedy, inst, {4, 8}, b, 1, ref);
  CHECK(g.status == SolveStatus::Feasible);
  CHECK(g.t_s < 5.0);
  REQUIRE(g.o_pct.has_value());
  CHECK(*g.o_pct >= 0.0);

  auto huge = testing::make_instance({{5, 9}, {7, 3}, {4, 4}}, 1000000000, Variant::Maximize, "huge");
  auto dp = profile_run(Algorithm::DP, huge, {4, 8}, b, 1, ref);
  CHECK(dp.status == SolveStatus::OOM);
  CHECK_FALSE(dp.o_pct.has_value());

  auto fifteen = small_suite(1, 15, 99)[0];
  fifteen.id = "fifteen";
  auto bnb = profile_run(Algorithm::BnB, fifteen, {8, 8}, b, 1, ref);
  CHECK(bnb.status == SolveStatus::Optimal);
  CHECK(bnb.o_pct == 0.0);
}

TEST_CASE("dataset is the full cross product") {
  ProfileConfig cfg;
  auto ds = build_dataset(small_suite(2, 20), {{4, 8}, {8, 32}},
                          {Algorithm::Greedy, Algorithm::DP, Algorithm::BnB}, cfg);
  CHECK(ds.rows.size() == 12);
  CHECK(ds.count(Algorithm::DP) == 4);
  CHECK(ds.count(Algorithm::GA) == 0);
  for (const auto& row : ds.rows) {
    CHECK(row.record.t_s <= cfg.budget.time_limit_s);
    if (row.record.o_pct) CHECK(*row.record.o_pct >= 0.0);
    CHECK(row.input[22] == row.record.hardware.ram_gb);
  }
}

TEST_CASE("duplicate ids are rejected before any run") {
  auto suite = small_suite(2, 10);
  suite[1].id = suite[0].id;
  CHECK_THROWS_AS(build_dataset(suite, default_hardware_grid(), {Algorithm::Greedy}, {}),
                  InvalidArgument);
  CHECK_THROWS_AS(build_dataset({}, default_hardware_grid(), {Algorithm::Greedy}, {}),
                  InvalidArgument);
}

TEST_CASE("reruns and thread counts give identical CSV bytes") {
  auto suite = small_suite(4, 30);
  ProfileConfig cfg;
  auto grid = default_hardware_grid();
  std::vector<Algorithm> algs(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  const auto first = csv(build_dataset(suite, grid, algs, cfg));
  CHECK(csv(build_dataset(suite, grid, algs, cfg)) == first);
  cfg.jobs = 3;
  CHECK(csv(build_dataset(suite, grid, algs, cfg)) == first);
}

TEST_CASE("hardware reuse matches independent runs") {
  auto suite = small_suite(3, 25);
  ProfileConfig cfg;
  std::vector<HardwareConfig> grid = {{4, 8}, {64, 8}};
  auto ds = build_dataset(suite, grid, {Algorithm::DP, Algorithm::GA}, cfg);
  for (const auto& row : ds.rows) {
    const Instance* inst = nullptr;
    for (const auto& s : suite) {
      if (s.id == row.record.instance_id) inst = &s;
    }
    ReferenceResolver ref(cfg.budget, cfg.ref_mem_kb, cfg.ref_time_factor);
    Budget b = cfg.budget;
    b.mem_limit_kb = mem_limit_kb(row.record.hardware);
    CHECK(profile_run(row.record.algorithm, *inst, row.record.hardware, b,
                      run_seed(cfg.seed, inst->id), ref) == row.record);
  }
}

TEST_CASE("CSV round-trip") {
  ProfileConfig cfg;
  auto ds = build_dataset(small_suite(3, 20), {{4, 8}, {8, 8}},
                          {Algorithm::Greedy, Algorithm::GA}, cfg);
  ds.rows[0].record.o_pct.reset();
  std::istringstream in(csv(ds));
  auto back = read_dataset_csv(in);
  REQUIRE(back.rows.size() == ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) CHECK(back.rows[i] == ds.rows[i]);

  const auto cols = dataset_columns();
  CHECK(cols.size() == 30);
  CHECK(cols.back() == "o_pct");
  std::istringstream bad("not,a,header\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), ParseError);
}

TEST_CASE("grouped split sizes and guards") {
  auto ds = synthetic(100, 3);
  auto s = split_dataset(ds, {0.6, 0.2, 0.2}, 5);
  CHECK(ids(s.train).size() == 60);
  CHECK(ids(s.val).size() == 20);
  CHECK(ids(s.test).size() == 20);
  CHECK(s.train.rows.size() + s.val.rows.size() + s.test.rows.size() == ds.rows.size());
  CHECK_THROWS_AS(split_dataset(ds, {1.0, 0.0, 0.0}, 5), InvalidArgument);
  CHECK_THROWS_AS(split_dataset(ds, {0.5, 0.2, 0.2}, 5), InvalidArgument);
  auto again = split_dataset(ds, {0.6, 0.2, 0.2}, 5);
  CHECK(again.test.instance_ids() == s.test.instance_ids());
  CHECK(again.train.instance_ids() == s.train.instance_ids());
}

TEST_CASE("no instance spans folds") {
  auto ds = synthetic(37, 4);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = split_dataset(ds, {0.6, 0.2, 0.2}, seed);
    auto a = ids(s.train), b = ids(s.val), c = ids(s.test);
    for (const auto& id : a) CHECK((b.count(id) == 0 && c.count(id) == 0));
    for (const auto& id : b) CHECK(c.count(id) == 0);
    CHECK(a.size() + b.size() + c.size() == 37);
  }
}

TEST_CASE("stratified split mirrors the label mix") {
  auto ds = synthetic(100, 2);
  std::map<std::string, int> strata;
  for (int i = 0; i < 100; ++i) strata["i" + std::to_string(i)] = i < 30 ? 1 : 0;
  auto s = split_dataset(ds, {0.6, 0.2, 0.2}, 9, &strata);
  auto count = [&](const Dataset& d) {
    int ones = 0;
    for (const auto& id : ids(d)) ones += strata[id];
    return ones;
  };
  CHECK(count(s.train) == 18);
  CHECK(count(s.val) == 6);
  CHECK(count(s.test) == 6);
}

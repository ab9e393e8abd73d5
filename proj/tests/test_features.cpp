#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracle.hpp"
#include "slasel/features.hpp"

using namespace slasel;
using testing::make_instance;

namespace {

double f(const FeatureVector& v, std::string_view name) { return v[feature_index(name)]; }

}  // namespace

TEST_CASE("feature names are unique and indexed") {
  CHECK(input_names().size() == 24);
  for (std::size_t i = 0; i < kNumInputs; ++i) CHECK(feature_index(input_names()[i]) == i);
  CHECK(feature_index("ram_gb") == 22);
  CHECK_THROWS_AS(feature_index("colour"), InvalidArgument);
}

TEST_CASE("degenerate identical items") {
  auto v = extract_features(make_instance({{2, 3}, {2, 3}, {2, 3}, {2, 3}}, 5));
  CHECK(f(v, "w_std") == 0.0);
  CHECK(f(v, "corr_wp") == 0.0);
  CHECK(f(v, "e_mean") == doctest::Approx(1.5));
  CHECK(f(v, "frac_oversized") == 0.0);
  CHECK(f(v, "cv_efficiency") == 0.0);
}

TEST_CASE("hand-computed features") {
  auto lin = extract_features(make_instance({{1, 2}, {2, 4}, {3, 6}}, 4));
  CHECK(f(lin, "corr_wp") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f(lin, "renting_ratio") == doctest::Approx(2.0));

  auto v = extract_features(testing::small3());
  CHECK(f(v, "capacity_ratio") == doctest::Approx(4.0 / 7.0));
  CHECK(f(v, "frac_oversized") == 0.0);
  CHECK(f(v, "n_items") == 3);
  CHECK(f(v, "capacity") == 4);
  CHECK(f(v, "w_min") == 2);
  CHECK(f(v, "w_max") == 3);
  CHECK(f(v, "w_mean") == doctest::Approx(7.0 / 3.0));
  CHECK(f(v, "w_median") == 2);
  CHECK(f(v, "p_median") == 3);
  CHECK(f(v, "e_max") == doctest::Approx(5.0 / 3.0));

  auto over = extract_features(make_instance({{1, 1}, {5, 1}, {9, 1}, {2, 1}}, 4));
  CHECK(f(over, "frac_oversized") == doctest::Approx(0.5));
}

TEST_CASE("features are finite and bounded on random instances") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    auto inst = testing::random_small(rng, 60, i % 2 ? Variant::Minimize : Variant::Maximize, "x");
    auto v = extract_features(inst);
    CHECK(v.size() == 22);
    for (double x : v) CHECK(std::isfinite(x));
    CHECK(f(v, "frac_oversized") >= 0.0);
    CHECK(f(v, "frac_oversized") <= 1.0);
    CHECK(f(v, "corr_wp") >= -1.0);
    CHECK(f(v, "corr_wp") <= 1.0);
  }
}

TEST_CASE("permutation invariance and profit scaling") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    auto inst = testing::random_small(rng, 40, Variant::Maximize, "x");
    auto base = extract_features(inst);

    auto permuted = inst;
    shuffle(permuted.items, rng);
    auto pv = extract_features(permuted);
    for (std::size_t j = 0; j < kNumFeatures; ++j) CHECK(pv[j] == doctest::Approx(base[j]).epsilon(1e-12));

    const std::int64_t k = 3;
    auto scaled = inst;
    for (auto& it : scaled.items) it.profit *= k;
    auto sv = extract_features(scaled);
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const auto name = kFeatureNames[j];
      CAPTURE(name);
      const bool profit_scaled = name.starts_with("p_") || name.starts_with("e_") ||
                                 name == "renting_ratio";
      const double expect = profit_scaled ? base[j] * k : base[j];
      if (profit_scaled || name == "corr_wp" || name == "cv_efficiency" ||
          name == "capacity_ratio" || name == "frac_oversized") {
        CHECK(sv[j] == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("model input appends hardware") {
  auto v = extract_features(testing::small3());
  auto a = model_input(v, {4, 8});
  auto b = model_input(v, {16, 8});
  CHECK(a[22] == 4);
  CHECK(a[23] == 8);
  CHECK(std::equal(v.begin(), v.end(), a.begin()));
  for (std::size_t j = 0; j < kNumInputs; ++j) CHECK((a[j] != b[j]) == (j == 22));
}

TEST_CASE("hardware grid") {
  auto grid = default_hardware_grid();
  CHECK(grid.size() == 14);
  for (const auto& hw : grid) CHECK_NOTHROW(validate(hw));
  CHECK_THROWS_AS(validate(HardwareConfig{5, 8}), InvalidArgument);
  CHECK_THROWS_AS(validate(HardwareConfig{4, 7}), InvalidArgument);
  CHECK(mem_limit_kb({4, 8}) == 4ULL << 20);
}

TEST_CASE("standardizer yields zero mean and unit deviation") {
  Rng rng(3);
  const std::size_t rows = 57, cols = 5;
  std::vector<double> m(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m[i * cols + j] = j == 4 ? 7.0 : 100.0 * uniform01(rng) * (j + 1);
  }
  auto s = Standardizer::fit(m, cols);
  CHECK(s.scale()[4] == 1.0);
  for (std::size_t i = 0; i < rows; ++i) s.apply(std::span<double>(m.data() + i * cols, cols));
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<double> col;
    for (std::size_t i = 0; i < rows; ++i) col.push_back(m[i * cols + j]);
    CHECK(std::abs(mean(col)) < 1e-9);
    if (j != 4) CHECK(std::abs(stddev(col) - 1.0) < 1e-9);
    else CHECK(stddev(col) == 0.0);
  }
}

#include "slasel/features.hpp"

#include <algorithm>
#include <cmath>

namespace slasel {

const std::array<std::string_view, kNumInputs>& input_names() {
  static const auto names = [] {
    std::array<std::string_view, kNumInputs> out{};
    std::copy(kFeatureNames.begin(), kFeatureNames.end(), out.begin());
    out[kNumFeatures] = "ram_gb";
    out[kNumFeatures + 1] = "cpu_cores";
    return out;
  }();
  return names;
}

std::size_t feature_index(std::string_view name) {
  const auto& names = input_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw InvalidArgument("unknown feature '" + std::string(name) + "'");
}

namespace {

struct Summary {
  double min, max, mean, std, median;
};

Summary summarize(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return {*lo, *hi, slasel::mean(xs), stddev(xs), slasel::median(xs)};
}

}  // namespace

FeatureVector extract_features(const Instance& inst) {
  validate(inst);
  const std::size_t n = inst.size();
  std::vector<double> w(n), p(n), e(n);
  double sum_w = 0.0, sum_p = 0.0;
  std::size_t oversized = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = static_cast<double>(inst.items[i].weight);
    p[i] = static_cast<double>(inst.items[i].profit);
    e[i] = p[i] / w[i];
    sum_w += w[i];
    sum_p += p[i];
    if (inst.items[i].weight > inst.capacity) ++oversized;
  }
  const Summary sw = summarize(w), sp = summarize(p), se = summarize(e);
  const auto cap = static_cast<double>(inst.capacity);

  return FeatureVector{
      static_cast<double>(n),
      cap,
      cap / sum_w,
      sw.min, sw.max, sw.mean, sw.std, sw.median,
      sp.min, sp.max, sp.mean, sp.std, sp.median,
      se.min, se.max, se.mean, se.std, se.median,
      pearson(w, p),
      sum_p / sum_w,
      static_cast<double>(oversized) / static_cast<double>(n),
      se.mean == 0.0 ? 0.0 : se.std / se.mean,
  };
}

std::vector<HardwareConfig> default_hardware_grid() {
  std::vector<HardwareConfig> grid;
  for (int ram : kRamGridGb) {
    for (int cores : kCoreGrid) grid.push_back({ram, cores});
  }
  return grid;
}

void validate(const HardwareConfig& hw, std::span<const int> ram_grid,
              std::span<const int> core_grid) {
  if (std::find(ram_grid.begin(), ram_grid.end(), hw.ram_gb) == ram_grid.end()) {
    throw InvalidArgument("ram_gb " + std::to_string(hw.ram_gb) + " is not in the hardware grid");
  }
  if (std::find(core_grid.begin(), core_grid.end(), hw.cpu_cores) == core_grid.end()) {
    throw InvalidArgument("cpu_cores " + std::to_string(hw.cpu_cores) +
                          " is not in the hardware grid");
  }
}

ModelInput model_input(const FeatureVector& features, const HardwareConfig& hw) {
  ModelInput out{};
  std::copy(features.begin(), features.end(), out.begin());
  out[kNumFeatures] = hw.ram_gb;
  out[kNumFeatures + 1] = hw.cpu_cores;
  return out;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw InvalidArgument("standardizer size mismatch");
}

Standardizer Standardizer::fit(std::span<const double> rows, std::size_t cols) {
  if (cols == 0 || rows.empty() || rows.size() % cols != 0) {
    throw InvalidArgument("standardizer: malformed training matrix");
  }
  const std::size_t n = rows.size() / cols;
  std::vector<double> mu(cols, 0.0), sd(cols, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols; ++c) mu[c] += rows[r * cols + c];
  }
  for (auto& m : mu) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = rows[r * cols + c] - mu[c];
      sd[c] += d * d;
    }
  }
  for (auto& s : sd) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }
  return Standardizer(std::move(mu), std::move(sd));
}

void Standardizer::apply(std::span<double> row) const {
  if (row.size() != mean_.size()) throw InvalidArgument("standardizer: width mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean_[c]) / scale_[c];
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
  std::vector<double> out(row.begin(), row.end());
  apply(out);
  return out;
}

}  // namespace slasel

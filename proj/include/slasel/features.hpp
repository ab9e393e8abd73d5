#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "slasel/instance.hpp"

namespace slasel {

inline constexpr std::size_t kNumFeatures = 22;
inline constexpr std::size_t kNumInputs = kNumFeatures + 2;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "n_items",   "capacity", "capacity_ratio", "w_min",     "w_max",         "w_mean",
    "w_std",     "w_median", "p_min",          "p_max",     "p_mean",        "p_std",
    "p_median",  "e_min",    "e_max",          "e_mean",    "e_std",         "e_median",
    "corr_wp",   "renting_ratio", "frac_oversized", "cv_efficiency"};

/// Names of the model input columns: the 22 features, then ram_gb, cpu_cores.
const std::array<std::string_view, kNumInputs>& input_names();

using FeatureVector = std::array<double, kNumFeatures>;
using ModelInput = std::array<double, kNumInputs>;

/// Index of a named feature; throws InvalidArgument if unknown.
std::size_t feature_index(std::string_view name);

FeatureVector extract_features(const Instance& inst);

struct HardwareConfig {
  int ram_gb = 4;
  int cpu_cores = 8;
  friend auto operator<=>(const HardwareConfig&, const HardwareConfig&) = default;
};

inline constexpr std::array<int, 7> kRamGridGb = {4, 8, 16, 32, 64, 128, 256};
inline constexpr std::array<int, 2> kCoreGrid = {8, 32};

/// The 7 x 2 grid, RAM-major.
std::vector<HardwareConfig> default_hardware_grid();

/// Throws InvalidArgument unless ram/cores belong to the given grids.
void validate(const HardwareConfig& hw, std::span<const int> ram_grid = kRamGridGb,
              std::span<const int> core_grid = kCoreGrid);

inline constexpr std::uint64_t kKbPerGb = 1048576;
inline std::uint64_t mem_limit_kb(const HardwareConfig& hw) {
  return static_cast<std::uint64_t>(hw.ram_gb) * kKbPerGb;
}

ModelInput model_input(const FeatureVector& features, const HardwareConfig& hw);

/// Per-column z-score parameters. Zero-variance columns get scale 1.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale);

  /// Rows are contiguous, `cols` wide.
  static Standardizer fit(std::span<const double> rows, std::size_t cols);

  void apply(std::span<double> row) const;
  std::vector<double> transform(std::span<const double> row) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  std::size_t cols() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace slasel

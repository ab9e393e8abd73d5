#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slasel/common.hpp"

namespace slasel {

struct Item {
  std::int64_t weight = 1;
  std::int64_t profit = 1;
  friend bool operator==(const Item&, const Item&) = default;
};

/// A 0-1 knapsack instance. For the Maximize variant `capacity` is the weight
/// budget; for Minimize it is the weight demand that must be covered.
struct Instance {
  std::string id;
  std::vector<Item> items;
  std::int64_t capacity = 1;
  Variant variant = Variant::Maximize;

  std::size_t size() const noexcept { return items.size(); }
  std::int64_t total_weight() const;
  std::int64_t total_profit() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Throws InvalidArgument if the instance breaks an invariant.
void validate(const Instance& inst);

struct GeneratorSpec {
  std::uint32_t n = 100;
  double capacity_fraction = 0.5;
  double correlation = 0.0;
  double noise_sigma = 0.0;
  std::int64_t weight_max = 1000;
  std::uint64_t seed = 0;
  Variant variant = Variant::Maximize;
  std::string id = "instance";
};

// Weights are uniform on [1, weight_max]. Profits mix an affine-in-weight
// component (slope +1, or -1 mirrored into range) with an independent uniform
// component. |correlation| is the mixing weight, its sign the slope sign, and
// Gaussian noise of scale noise_sigma is added before rounding and clipping
// at 1.
Instance generate_instance(const GeneratorSpec& spec);

/// Parameters for a batch of instances spanning sizes, correlations and
/// capacity tightness.
struct SuiteSpec {
  std::uint32_t count = 200;
  std::uint64_t seed = 1;
  Variant variant = Variant::Maximize;
  std::vector<std::uint32_t> sizes = {50, 100, 200, 500, 1000};
  std::vector<double> correlations = {-0.5, 0.0, 0.5, 0.9, 0.99};
  std::vector<double> noise_levels = {0.0, 10.0, 50.0};
  std::vector<double> capacity_fractions = {0.1, 0.25, 0.5, 0.75};
  std::vector<std::int64_t> weight_maxima = {100, 1000, 10000};
};

std::vector<GeneratorSpec> suite_specs(const SuiteSpec& suite);
std::vector<Instance> generate_suite(const SuiteSpec& suite);

// Canonical text format:
//   <n> <capacity> <max|min>   (variant may be omitted on read; defaults to max)
//   <weight> <profit>        (n lines)
void write_instance(const Instance& inst, std::ostream& out);
void write_instance(const Instance& inst, const std::filesystem::path& path);
Instance read_instance(std::istream& in, std::string id);
/// The instance id is the file stem.
Instance load_instance(const std::filesystem::path& path);

/// Loads every `*.kp` file in a directory, ordered by file name.
std::vector<Instance> load_instance_dir(const std::filesystem::path& dir);

}  // namespace slasel

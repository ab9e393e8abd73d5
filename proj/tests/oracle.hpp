#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slasel/common.hpp"
#include "slasel/instance.hpp"

namespace slasel::testing {

/// Exhaustive optimum over all 2^n subsets; nullopt if no subset is feasible
/// (only possible for Minimize).
inline std::optional<std::int64_t> brute_force(const Instance& inst) {
  const std::size_t n = inst.size();
  std::optional<std::int64_t> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::int64_t w = 0, p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        w += inst.items[i].weight;
        p += inst.items[i].profit;
      }
    }
    if (inst.variant == Variant::Maximize) {
      if (w <= inst.capacity && (!best || p > *best)) best = p;
    } else {
      if (w >= inst.capacity && (!best || p < *best)) best = p;
    }
  }
  return best;
}

inline Instance make_instance(std::vector<Item> items, std::int64_t capacity,
                              Variant variant = Variant::Maximize, std::string id = "t") {
  Instance inst;
  inst.id = std::move(id);
  inst.items = std::move(items);
  inst.capacity = capacity;
  inst.variant = variant;
  return inst;
}

/// The three-item instance used throughout the examples.
inline Instance small3(Variant variant = Variant::Maximize) {
  return make_instance({{3, 5}, {2, 3}, {2, 3}}, 4, variant, "small3");
}

/// Random instance with 2..max_n items and a random weight range.
inline Instance random_small(Rng& rng, std::uint32_t max_n, Variant variant, std::string id) {
  GeneratorSpec g;
  g.n = static_cast<std::uint32_t>(uniform_int(rng, 2, max_n));
  g.capacity_fraction = 0.1 + 0.8 * uniform01(rng);
  g.correlation = -1.0 + 2.0 * uniform01(rng);
  g.noise_sigma = 20.0 * uniform01(rng);
  g.weight_max = static_cast<std::int64_t>(uniform_int(rng, 2, 200));
  g.seed = rng();
  g.variant = variant;
  g.id = std::move(id);
  return generate_instance(g);
}

}  // namespace slasel::testing

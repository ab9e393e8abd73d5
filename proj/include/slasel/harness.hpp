#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slasel/features.hpp"
#include "slasel/instance.hpp"
#include "slasel/solvers.hpp"

namespace slasel {

struct PerformanceRecord {
  std::string instance_id;
  Algorithm algorithm = Algorithm::Greedy;
  HardwareConfig hardware;
  SolveStatus status = SolveStatus::Infeasible;
  double t_s = 0.0;
  std::uint64_t m_kb = 0;
  std::optional<double> o_pct;

  friend bool operator==(const PerformanceRecord&, const PerformanceRecord&) = default;
};

struct DatasetRow {
  ModelInput input{};
  PerformanceRecord record;
  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct Dataset {
  std::vector<DatasetRow> rows;

  std::size_t count(Algorithm alg) const;
  Dataset filter(Algorithm alg) const;
  /// Distinct instance ids in first-appearance order.
  std::vector<std::string> instance_ids() const;
};

struct ProfileConfig {
  /// Desk-scale default; the memory limit is overridden per hardware config.
  Budget budget{5.0, 4ULL << 20, ClockMode::Work};
  std::uint64_t seed = 1;
  std::uint64_t ref_mem_kb = 256ULL << 20;
  double ref_time_factor = 10.0;
  unsigned jobs = 1;
};

/// Seed handed to randomized solvers for one instance.
std::uint64_t run_seed(std::uint64_t base, const std::string& instance_id);

PerformanceRecord profile_run(Algorithm alg, const Instance& inst, const HardwareConfig& hw,
                              const Budget& budget, std::uint64_t seed,
                              ReferenceResolver& reference);

/// Full cross product, sorted by (algorithm name, instance id, ram, cores).
/// Throws InvalidArgument on empty inputs or duplicate instance ids.
Dataset build_dataset(const std::vector<Instance>& instances,
                      const std::vector<HardwareConfig>& grid,
                      const std::vector<Algorithm>& algorithms, const ProfileConfig& config);

std::vector<std::string> dataset_columns();
/// `metadata`, if non-empty, is written as a leading `# ` comment line.
void write_dataset_csv(const Dataset& ds, std::ostream& out, const std::string& metadata = {});
Dataset read_dataset_csv(std::istream& in);
void save_dataset_csv(const Dataset& ds, const std::string& path, const std::string& metadata = {});
Dataset load_dataset_csv(const std::string& path);

struct DatasetSplit {
  Dataset train, val, test;
};

/// Grouped by instance id: a seeded shuffle of the distinct ids, then a
/// contiguous split. With `strata` (instance id -> label) fold quotas are
/// allocated per label so each fold mirrors the label mix.
DatasetSplit split_dataset(const Dataset& ds, std::array<double, 3> ratios, std::uint64_t seed,
                           const std::map<std::string, int>* strata = nullptr);

}  // namespace slasel

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slasel/common.hpp"
#include "slasel/instance.hpp"

namespace slasel {

enum class Algorithm { Greedy, DP, BnB, GA };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::Greedy, Algorithm::DP, Algorithm::BnB,
                                               Algorithm::GA};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

enum class SolveStatus { Optimal, Feasible, Timeout, OOM, Infeasible };

std::string_view to_string(SolveStatus s);
SolveStatus parse_status(std::string_view s);

/// How elapsed time is measured.
///  - Wall: real steady-clock time.
///  - Work: deterministic work-unit count scaled by kSecondsPerWorkUnit, so
///    timings and timeouts are identical across runs and machines.
enum class ClockMode { Wall, Work };

std::string_view to_string(ClockMode m);
ClockMode parse_clock_mode(std::string_view s);

inline constexpr double kSecondsPerWorkUnit = 1e-8;
/// Fixed per-solve charge in work mode (input setup, allocation).
inline constexpr std::uint64_t kSolveOverheadUnits = 1000;

struct Budget {
  double time_limit_s = 300.0;
  std::uint64_t mem_limit_kb = 4ULL << 20;
  ClockMode clock = ClockMode::Work;
};

void validate(const Budget& budget);

class BudgetClock {
 public:
  explicit BudgetClock(const Budget& budget);

  void charge(std::uint64_t units) noexcept { work_ += units; }
  std::uint64_t work() const noexcept { return work_; }
  double elapsed_s() const;
  /// In wall mode only every 256th call reads the clock; use for fine-grained
  /// loops.
  bool expired();
  /// Always reads the clock; use for coarse loops.
  bool expired_now();

 private:
  ClockMode mode_;
  double limit_s_;
  std::uint64_t work_ = 0;
  std::uint32_t polls_ = 0;
  bool expired_ = false;
  std::chrono::steady_clock::time_point start_;
};

struct SolveOutcome {
  std::optional<std::int64_t> value;
  std::vector<bool> selection;
  SolveStatus status = SolveStatus::Infeasible;
  double elapsed_s = 0.0;
  std::uint64_t peak_mem_kb = 0;
  std::uint64_t work_units = 0;
};

struct GaParams {
  std::uint32_t population = 100;
  std::uint32_t tournament = 3;
  double crossover_p = 0.9;
  /// Per-gene flip probability; <= 0 means 1/n.
  double mutation_p = 0.0;
  std::uint32_t elitism = 1;
  /// Stop after this many generations without incumbent improvement
  /// (0 = run until the time budget is spent).
  std::uint32_t max_stall_generations = 200;
};

SolveOutcome solve_greedy(const Instance& inst, const Budget& budget);
SolveOutcome solve_dp(const Instance& inst, const Budget& budget);
SolveOutcome solve_bnb(const Instance& inst, const Budget& budget);
SolveOutcome solve_ga(const Instance& inst, const Budget& budget, std::uint64_t seed,
                      const GaParams& params = {});

SolveOutcome solve(Algorithm alg, const Instance& inst, const Budget& budget, std::uint64_t seed);

/// Item indices ordered by profit/weight (descending for Maximize, ascending
/// for Minimize); ties go to lower weight, then lower index.
std::vector<std::size_t> ratio_order(const Instance& inst);

/// LP-relaxation bound at the root: Dantzig upper bound (Maximize) or
/// fractional covering lower bound (Minimize; +inf if uncoverable).
double root_bound(const Instance& inst);

std::int64_t selection_weight(const Instance& inst, const std::vector<bool>& sel);
std::int64_t selection_value(const Instance& inst, const std::vector<bool>& sel);
bool is_feasible(const Instance& inst, const std::vector<bool>& sel);

/// Accounted peak memory of a DP run, in KB.
std::uint64_t dp_table_kb(const Instance& inst);

/// Percent deviation of `value` from the exact `reference`. Throws
/// InvalidArgument for reference <= 0. Negative gaps are clamped to 0 with a
/// logged warning.
double optimality_gap(std::int64_t value, std::int64_t reference, Variant variant);

/// Plug point for a third-party exact solver. No implementation ships.
class ExternalSolver {
 public:
  virtual ~ExternalSolver() = default;
  virtual std::string name() const = 0;
  virtual SolveOutcome solve(const Instance& inst, const Budget& budget) = 0;
};

class ReferenceUnavailable : public Error {
 public:
  using Error::Error;
};

/// Exact optimum per instance id, memoised. Tries the external solver (if
/// any), then DP within `ref_mem_kb`, then BnB; both with
/// `time_factor` x the configured time limit.
class ReferenceResolver {
 public:
  explicit ReferenceResolver(Budget budget, std::uint64_t ref_mem_kb = 256ULL << 20,
                             double time_factor = 10.0, ExternalSolver* external = nullptr);

  std::int64_t optimum(const Instance& inst);
  std::size_t cache_size() const;

 private:
  Budget budget_;
  std::uint64_t ref_mem_kb_;
  double time_factor_;
  ExternalSolver* external_;
  mutable std::mutex mu_;
  std::map<std::string, std::optional<std::int64_t>> cache_;
};

/// One-shot convenience wrapper around ReferenceResolver.
std::int64_t reference_optimum(const Instance& inst, const Budget& budget);

}  // namespace slasel

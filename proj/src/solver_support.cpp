#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "slasel/solvers.hpp"

namespace slasel {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Greedy: return "greedy";
    case Algorithm::DP: return "dp";
    case Algorithm::BnB: return "bnb";
    case Algorithm::GA: return "ga";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == s) return a;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "' (expected greedy|dp|bnb|ga)");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::OOM: return "oom";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

SolveStatus parse_status(std::string_view s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Feasible, SolveStatus::Timeout,
                  SolveStatus::OOM, SolveStatus::Infeasible}) {
    if (to_string(st) == s) return st;
  }
  throw InvalidArgument("unknown status '" + std::string(s) + "'");
}

std::string_view to_string(ClockMode m) { return m == ClockMode::Wall ? "wall" : "work"; }

ClockMode parse_clock_mode(std::string_view s) {
  if (s == "wall") return ClockMode::Wall;
  if (s == "work") return ClockMode::Work;
  throw InvalidArgument("unknown clock mode '" + std::string(s) + "' (expected wall|work)");
}

void validate(const Budget& budget) {
  if (!(budget.time_limit_s > 0.0)) throw InvalidArgument("time limit must be > 0");
  if (budget.mem_limit_kb == 0) throw InvalidArgument("memory limit must be > 0");
}

BudgetClock::BudgetClock(const Budget& budget)
    : mode_(budget.clock), limit_s_(budget.time_limit_s), start_(std::chrono::steady_clock::now()) {
  if (mode_ == ClockMode::Work) work_ = kSolveOverheadUnits;
}

double BudgetClock::elapsed_s() const {
  if (mode_ == ClockMode::Work) return static_cast<double>(work_) * kSecondsPerWorkUnit;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool BudgetClock::expired() {
  if (expired_) return true;
  if (mode_ == ClockMode::Wall && (polls_++ & 0xff) != 0) return false;
  expired_ = elapsed_s() > limit_s_;
  return expired_;
}

bool BudgetClock::expired_now() {
  if (!expired_) expired_ = elapsed_s() > limit_s_;
  return expired_;
}

std::vector<std::size_t> ratio_order(const Instance& inst) {
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool descending = inst.variant == Variant::Maximize;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ia = inst.items[a];
    const auto& ib = inst.items[b];
    const __int128 lhs = static_cast<__int128>(ia.profit) * ib.weight;
    const __int128 rhs = static_cast<__int128>(ib.profit) * ia.weight;
    if (lhs != rhs) return descending ? lhs > rhs : lhs < rhs;
    if (ia.weight != ib.weight) return ia.weight < ib.weight;
    return a < b;
  });
  return order;
}

double root_bound(const Instance& inst) {
  const auto order = ratio_order(inst);
  if (inst.variant == Variant::Maximize) {
    double bound = 0.0;
    std::int64_t room = inst.capacity;
    for (std::size_t idx : order) {
      const auto& it = inst.items[idx];
      if (it.weight <= room) {
        bound += static_cast<double>(it.profit);
        room -= it.weight;
      } else {
        bound += static_cast<double>(it.profit) * static_cast<double>(room) /
                 static_cast<double>(it.weight);
        break;
      }
    }
    return bound;
  }
  double bound = 0.0;
  std::int64_t need = inst.capacity;
  for (std::size_t idx : order) {
    const auto& it = inst.items[idx];
    if (it.weight < need) {
      bound += static_cast<double>(it.profit);
      need -= it.weight;
    } else {
      return bound + static_cast<double>(it.profit) * static_cast<double>(need) /
                         static_cast<double>(it.weight);
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::int64_t selection_weight(const Instance& inst, const std::vector<bool>& sel) {
  std::int64_t w = 0;
  for (std::size_t i = 0; i < inst.size() && i < sel.size(); ++i) {
    if (sel[i]) w += inst.items[i].weight;
  }
  return w;
}

std::int64_t selection_value(const Instance& inst, const std::vector<bool>& sel) {
  std::int64_t p = 0;
  for (std::size_t i = 0; i < inst.size() && i < sel.size(); ++i) {
    if (sel[i]) p += inst.items[i].profit;
  }
  return p;
}

bool is_feasible(const Instance& inst, const std::vector<bool>& sel) {
  if (sel.size() != inst.size()) return false;
  const std::int64_t w = selection_weight(inst, sel);
  return inst.variant == Variant::Maximize ? w <= inst.capacity : w >= inst.capacity;
}

std::uint64_t dp_table_kb(const Instance& inst) {
  // (n+1) x (capacity+1) cells of 8 bytes, saturating.
  const auto rows = static_cast<unsigned __int128>(inst.size() + 1);
  const auto cols = static_cast<unsigned __int128>(inst.capacity) + 1;
  const unsigned __int128 bytes = rows * cols * 8;
  const unsigned __int128 kb = (bytes + 1023) / 1024;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  return kb > kMax ? kMax : static_cast<std::uint64_t>(kb);
}

double optimality_gap(std::int64_t value, std::int64_t reference, Variant variant) {
  if (reference <= 0) throw InvalidArgument("optimality gap undefined for reference <= 0");
  const double diff = variant == Variant::Maximize ? static_cast<double>(reference - value)
                                                   : static_cast<double>(value - reference);
  const double gap = diff / static_cast<double>(reference) * 100.0;
  if (gap < 0.0) {
    spdlog::warn("solver value {} beats reference {} ({} variant); clamping gap to 0", value,
                 reference, to_string(variant));
    return 0.0;
  }
  return gap;
}

SolveOutcome solve(Algorithm alg, const Instance& inst, const Budget& budget, std::uint64_t seed) {
  switch (alg) {
    case Algorithm::Greedy: return solve_greedy(inst, budget);
    case Algorithm::DP: return solve_dp(inst, budget);
    case Algorithm::BnB: return solve_bnb(inst, budget);
    case Algorithm::GA: return solve_ga(inst, budget, seed);
  }
  throw InvalidArgument("unknown algorithm");
}

ReferenceResolver::ReferenceResolver(Budget budget, std::uint64_t ref_mem_kb, double time_factor,
                                     ExternalSolver* external)
    : budget_(budget), ref_mem_kb_(ref_mem_kb), time_factor_(time_factor), external_(external) {
  validate(budget_);
  if (!(time_factor_ > 0.0)) throw InvalidArgument("reference time factor must be > 0");
}

std::int64_t ReferenceResolver::optimum(const Instance& inst) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(inst.id); it != cache_.end()) {
      if (!it->second) throw ReferenceUnavailable("no exact reference for '" + inst.id + "'");
      return *it->second;
    }
  }

  Budget extended = budget_;
  extended.time_limit_s = budget_.time_limit_s * time_factor_;
  std::optional<std::int64_t> result;

  if (external_ != nullptr) {
    auto out = external_->solve(inst, extended);
    if (out.status == SolveStatus::Optimal && out.value) result = out.value;
  }
  if (!result) {
    Budget dp_budget = extended;
    dp_budget.mem_limit_kb = ref_mem_kb_;
    if (dp_table_kb(inst) <= ref_mem_kb_) {
      auto out = solve_dp(inst, dp_budget);
      if (out.status == SolveStatus::Optimal) result = out.value;
    }
  }
  if (!result) {
    auto out = solve_bnb(inst, extended);
    if (out.status == SolveStatus::Optimal) result = out.value;
  }

  std::lock_guard lock(mu_);
  cache_.emplace(inst.id, result);
  if (!result) throw ReferenceUnavailable("no exact reference for '" + inst.id + "'");
  return *result;
}

std::size_t ReferenceResolver::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::int64_t reference_optimum(const Instance& inst, const Budget& budget) {
  ReferenceResolver resolver(budget);
  return resolver.optimum(inst);
}

}  // namespace slasel

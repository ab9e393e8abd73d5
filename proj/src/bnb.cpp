#include <limits>

#include "slasel/solvers.hpp"

namespace slasel {

namespace {

// Accounted bytes per DFS frame: level, weight, profit, bound.
constexpr std::uint64_t kNodeBytes = 32;

struct Search {
  const Instance& inst;
  std::vector<std::size_t> order;  // ratio-sorted original indices
  std::vector<std::int64_t> w, p;  // in sorted order
  std::vector<std::int64_t> suffix_w;
  BudgetClock& clock;
  std::uint64_t mem_limit_bytes;

  std::int64_t best = 0;
  bool have_best = false;
  std::vector<bool> current, best_sel;  // in sorted order
  std::size_t max_depth = 0;
  bool timed_out = false;
  bool oom = false;

  Search(const Instance& instance, BudgetClock& c, std::uint64_t mem_kb)
      : inst(instance), order(ratio_order(instance)), clock(c), mem_limit_bytes(mem_kb * 1024) {
    const std::size_t n = inst.size();
    w.resize(n);
    p.resize(n);
    suffix_w.assign(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = inst.items[order[k]].weight;
      p[k] = inst.items[order[k]].profit;
    }
    for (std::size_t k = n; k-- > 0;) suffix_w[k] = suffix_w[k + 1] + w[k];
    current.assign(n, false);
  }

  bool stop() {
    if (timed_out || oom) return true;
    if (clock.expired()) timed_out = true;
    return timed_out;
  }

  bool enter(std::size_t depth) {
    if (depth > max_depth) {
      max_depth = depth;
      if (max_depth * kNodeBytes > mem_limit_bytes) oom = true;
    }
    clock.charge(1);
    return !stop();
  }

  void record() {
    best_sel = current;
    have_best = true;
  }

  // floor of the Dantzig bound for the remaining items from `level`.
  std::int64_t upper_bound(std::size_t level, std::int64_t room) {
    std::int64_t bound = 0;
    std::size_t k = level;
    for (; k < w.size(); ++k) {
      if (w[k] > room) break;
      room -= w[k];
      bound += p[k];
    }
    clock.charge(k - level + 1);
    if (k < w.size() && room > 0) {
      bound += static_cast<std::int64_t>(static_cast<__int128>(p[k]) * room / w[k]);
    }
    return bound;
  }

  // ceil of the fractional covering bound; nullopt if the demand cannot be met.
  std::optional<std::int64_t> lower_bound(std::size_t level, std::int64_t need) {
    if (suffix_w[level] < need) return std::nullopt;
    std::int64_t bound = 0;
    std::size_t k = level;
    for (; k < w.size(); ++k) {
      if (w[k] >= need) break;
      need -= w[k];
      bound += p[k];
    }
    clock.charge(k - level + 1);
    if (need > 0) {
      const __int128 num = static_cast<__int128>(p[k]) * need;
      bound += static_cast<std::int64_t>((num + w[k] - 1) / w[k]);
    }
    return bound;
  }

  void maximize(std::size_t level, std::int64_t weight, std::int64_t profit) {
    if (!enter(level + 1)) return;
    if (profit > best) {
      best = profit;
      record();
    }
    if (level == w.size()) return;
    if (profit + upper_bound(level, inst.capacity - weight) <= best) return;
    if (w[level] <= inst.capacity - weight) {
      current[level] = true;
      maximize(level + 1, weight + w[level], profit + p[level]);
      current[level] = false;
      if (stop()) return;
    }
    maximize(level + 1, weight, profit);
  }

  void minimize(std::size_t level, std::int64_t covered, std::int64_t cost) {
    if (!enter(level + 1)) return;
    if (covered >= inst.capacity) {
      if (!have_best || cost < best) {
        best = cost;
        record();
      }
      return;
    }
    if (level == w.size()) return;
    auto lb = lower_bound(level, inst.capacity - covered);
    if (!lb || (have_best && cost + *lb >= best)) return;
    current[level] = true;
    minimize(level + 1, covered + w[level], cost + p[level]);
    current[level] = false;
    if (stop()) return;
    minimize(level + 1, covered, cost);
  }

  std::vector<bool> selection_in_original_order() const {
    std::vector<bool> sel(inst.size(), false);
    for (std::size_t k = 0; k < best_sel.size(); ++k) {
      if (best_sel[k]) sel[order[k]] = true;
    }
    return sel;
  }
};

}  // namespace

SolveOutcome solve_bnb(const Instance& inst, const Budget& budget) {
  validate(inst);
  validate(budget);
  BudgetClock clock(budget);
  const std::size_t n = inst.size();
  SolveOutcome out;

  Search search(inst, clock, budget.mem_limit_kb);
  clock.charge(n * 4);

  // Seed the incumbent with the greedy solution.
  Budget greedy_budget = budget;
  greedy_budget.clock = ClockMode::Work;
  const SolveOutcome seed = solve_greedy(inst, greedy_budget);
  clock.charge(seed.work_units - kSolveOverheadUnits);
  if (seed.status == SolveStatus::Infeasible) {
    out.status = SolveStatus::Infeasible;
    out.elapsed_s = clock.elapsed_s();
    out.work_units = clock.work();
    return out;
  }
  search.best = *seed.value;
  search.have_best = true;
  search.best_sel.assign(n, false);
  for (std::size_t k = 0; k < n; ++k) search.best_sel[k] = seed.selection[search.order[k]];

  if (!search.stop()) {
    if (inst.variant == Variant::Maximize) {
      search.maximize(0, 0, 0);
    } else {
      search.minimize(0, 0, 0);
    }
  }

  out.peak_mem_kb = (search.max_depth * kNodeBytes + 1023) / 1024;
  if (search.oom) {
    out.status = SolveStatus::OOM;
    out.peak_mem_kb = budget.mem_limit_kb;
  } else {
    out.value = search.best;
    out.selection = search.selection_in_original_order();
    out.status = search.timed_out ? SolveStatus::Timeout : SolveStatus::Optimal;
  }
  out.elapsed_s = clock.elapsed_s();
  out.work_units = clock.work();
  if (out.status == SolveStatus::Optimal && out.elapsed_s > budget.time_limit_s) {
    out.status = SolveStatus::Timeout;
  }
  return out;
}

}  // namespace slasel

#include <bit>

#include "slasel/solvers.hpp"

namespace slasel {

SolveOutcome solve_greedy(const Instance& inst, const Budget& budget) {
  validate(inst);
  validate(budget);
  BudgetClock clock(budget);
  const std::size_t n = inst.size();
  const auto order = ratio_order(inst);
  clock.charge(n * (std::bit_width(n) + 1));

  SolveOutcome out;
  out.selection.assign(n, false);
  out.peak_mem_kb = (n * sizeof(std::size_t) + 1023) / 1024;

  if (inst.variant == Variant::Maximize) {
    std::int64_t room = inst.capacity;
    std::int64_t value = 0;
    for (std::size_t idx : order) {
      const auto& it = inst.items[idx];
      if (it.weight <= room) {
        out.selection[idx] = true;
        room -= it.weight;
        value += it.profit;
      }
    }
    // Best single item that fits on its own; guarantees the 1/2 bound.
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      if (inst.items[i].weight > inst.capacity) continue;
      if (!best || inst.items[i].profit > inst.items[*best].profit) best = i;
    }
    if (best && inst.items[*best].profit > value) {
      out.selection.assign(n, false);
      out.selection[*best] = true;
      value = inst.items[*best].profit;
    }
    out.value = value;
    out.status = SolveStatus::Feasible;
  } else {
    std::int64_t covered = 0;
    std::int64_t cost = 0;
    for (std::size_t idx : order) {
      if (covered >= inst.capacity) break;
      out.selection[idx] = true;
      covered += inst.items[idx].weight;
      cost += inst.items[idx].profit;
    }
    if (covered >= inst.capacity) {
      out.value = cost;
      out.status = SolveStatus::Feasible;
    } else {
      out.selection.assign(n, false);
      out.status = SolveStatus::Infeasible;
    }
  }
  out.elapsed_s = clock.elapsed_s();
  out.work_units = clock.work();
  return out;
}

}  // namespace slasel

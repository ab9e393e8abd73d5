#include <algorithm>
#include <limits>
#include <new>

#include "slasel/solvers.hpp"

namespace slasel {

namespace {

// One bit per (item, state): "taking this item improved that state".
class ChoiceBits {
 public:
  explicit ChoiceBits(std::size_t states) : words_((states + 63) / 64) {}

  void add_row() { rows_.emplace_back(words_, 0); }
  void set(std::size_t row, std::size_t state) {
    rows_[row][state >> 6] |= std::uint64_t{1} << (state & 63);
  }
  bool test(std::size_t row, std::size_t state) const {
    return (rows_[row][state >> 6] >> (state & 63)) & 1;
  }

 private:
  std::size_t words_;
  std::vector<std::vector<std::uint64_t>> rows_;
};

SolveOutcome finish(SolveOutcome out, const BudgetClock& clock) {
  out.elapsed_s = clock.elapsed_s();
  out.work_units = clock.work();
  return out;
}

}  // namespace

SolveOutcome solve_dp(const Instance& inst, const Budget& budget) {
  validate(inst);
  validate(budget);
  BudgetClock clock(budget);
  const std::size_t n = inst.size();
  const auto cap = static_cast<std::size_t>(inst.capacity);
  const bool maximize = inst.variant == Variant::Maximize;

  SolveOutcome out;
  if (!maximize && inst.total_weight() < inst.capacity) {
    out.status = SolveStatus::Infeasible;
    return finish(std::move(out), clock);
  }

  const std::uint64_t table_kb = dp_table_kb(inst);
  if (table_kb > budget.mem_limit_kb) {
    out.status = SolveStatus::OOM;
    out.peak_mem_kb = budget.mem_limit_kb;
    return finish(std::move(out), clock);
  }
  out.peak_mem_kb = table_kb;

  try {
    ChoiceBits choice(cap + 1);
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> best(cap + 1, maximize ? 0 : kInf);
    // Minimize: the saturated state `cap` has many predecessors, so the one
    // that produced the final row value is kept per item.
    std::vector<std::size_t> saturated_from(maximize ? 0 : n, 0);
    if (!maximize) best[0] = 0;

    for (std::size_t i = 0; i < n; ++i) {
      choice.add_row();
      const auto w = static_cast<std::size_t>(inst.items[i].weight);
      const std::int64_t p = inst.items[i].profit;
      if (maximize) {
        for (std::size_t j = cap; j >= w && w <= cap; --j) {
          const std::int64_t cand = best[j - w] + p;
          if (cand > best[j]) {
            best[j] = cand;
            choice.set(i, j);
          }
          if (j == w) break;
        }
      } else {
        for (std::size_t j = cap + 1; j-- > 0;) {
          if (best[j] == kInf) continue;
          const std::size_t k = std::min(cap, j + w);
          const std::int64_t cand = best[j] + p;
          if (cand < best[k]) {
            best[k] = cand;
            choice.set(i, k);
            if (k == cap) saturated_from[i] = j;
          }
        }
      }
      clock.charge(cap + 1);
      if (clock.expired_now()) {
        out.status = SolveStatus::Timeout;
        return finish(std::move(out), clock);
      }
    }

    out.selection.assign(n, false);
    std::size_t state = cap;
    for (std::size_t i = n; i-- > 0;) {
      if (!choice.test(i, state)) continue;
      out.selection[i] = true;
      const auto w = static_cast<std::size_t>(inst.items[i].weight);
      if (maximize) {
        state -= w;
      } else {
        state = state == cap ? saturated_from[i] : state - w;
      }
    }
    out.value = best[cap];
    out.status = SolveStatus::Optimal;
  } catch (const std::bad_alloc&) {
    out = SolveOutcome{};
    out.status = SolveStatus::OOM;
    out.peak_mem_kb = budget.mem_limit_kb;
  }
  return finish(std::move(out), clock);
}

}  // namespace slasel

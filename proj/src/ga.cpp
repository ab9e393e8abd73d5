#include <algorithm>

#include "slasel/solvers.hpp"

namespace slasel {

namespace {

using Genome = std::vector<std::uint8_t>;

struct Individual {
  Genome genes;
  std::int64_t value = 0;  // objective of the repaired genome
  std::int64_t weight = 0;
};

class Population {
 public:
  Population(const Instance& inst, const GaParams& params, Rng& rng)
      : inst_(inst), params_(params), rng_(rng), order_(ratio_order(inst)) {}

  // Max: drop worst-ratio selected items until within capacity.
  // Min: add best-ratio unselected items until the demand is covered.
  void repair(Individual& ind) const {
    ind.weight = 0;
    ind.value = 0;
    for (std::size_t i = 0; i < ind.genes.size(); ++i) {
      if (ind.genes[i]) {
        ind.weight += inst_.items[i].weight;
        ind.value += inst_.items[i].profit;
      }
    }
    if (inst_.variant == Variant::Maximize) {
      for (auto it = order_.rbegin(); it != order_.rend() && ind.weight > inst_.capacity; ++it) {
        if (!ind.genes[*it]) continue;
        ind.genes[*it] = 0;
        ind.weight -= inst_.items[*it].weight;
        ind.value -= inst_.items[*it].profit;
      }
    } else {
      for (auto it = order_.begin(); it != order_.end() && ind.weight < inst_.capacity; ++it) {
        if (ind.genes[*it]) continue;
        ind.genes[*it] = 1;
        ind.weight += inst_.items[*it].weight;
        ind.value += inst_.items[*it].profit;
      }
    }
  }

  bool better(const Individual& a, const Individual& b) const {
    return inst_.variant == Variant::Maximize ? a.value > b.value : a.value < b.value;
  }

  const Individual& tournament(const std::vector<Individual>& pop) const {
    std::size_t best = uniform_int(rng_, 0, pop.size() - 1);
    for (std::uint32_t t = 1; t < params_.tournament; ++t) {
      const std::size_t c = uniform_int(rng_, 0, pop.size() - 1);
      if (better(pop[c], pop[best]) || (!better(pop[best], pop[c]) && c < best)) best = c;
    }
    return pop[best];
  }

  Individual random_individual() const {
    Individual ind;
    ind.genes.resize(inst_.size());
    for (auto& g : ind.genes) g = static_cast<std::uint8_t>(rng_() & 1);
    repair(ind);
    return ind;
  }

  void mutate(Genome& g, double p) const {
    for (auto& bit : g) {
      if (uniform01(rng_) < p) bit ^= 1;
    }
  }

 private:
  const Instance& inst_;
  const GaParams& params_;
  Rng& rng_;
  std::vector<std::size_t> order_;
};

std::size_t best_index(const Population& pop, const std::vector<Individual>& members) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (pop.better(members[i], members[best])) best = i;
  }
  return best;
}

}  // namespace

SolveOutcome solve_ga(const Instance& inst, const Budget& budget, std::uint64_t seed,
                      const GaParams& params) {
  validate(inst);
  validate(budget);
  if (params.population < 2) throw InvalidArgument("GA population must be >= 2");
  if (params.tournament < 1) throw InvalidArgument("GA tournament size must be >= 1");
  if (params.elitism >= params.population) throw InvalidArgument("GA elitism must be < population");

  BudgetClock clock(budget);
  const std::size_t n = inst.size();
  SolveOutcome out;
  out.peak_mem_kb = (2ULL * params.population * n + 1023) / 1024;

  if (inst.variant == Variant::Minimize && inst.total_weight() < inst.capacity) {
    out.status = SolveStatus::Infeasible;
    out.elapsed_s = clock.elapsed_s();
    out.work_units = clock.work();
    return out;
  }

  Rng rng(seed);
  Population ops(inst, params, rng);
  const double mutation_p = params.mutation_p > 0.0 ? params.mutation_p : 1.0 / static_cast<double>(n);
  const std::uint64_t generation_cost = static_cast<std::uint64_t>(params.population) * n;

  std::vector<Individual> pop;
  pop.reserve(params.population);
  for (std::uint32_t i = 0; i < params.population; ++i) pop.push_back(ops.random_individual());
  clock.charge(generation_cost);

  Individual incumbent = pop[best_index(ops, pop)];
  std::uint32_t stall = 0;

  bool timed_out = false;
  while (!(timed_out = clock.expired_now())) {
    if (params.max_stall_generations > 0 && stall >= params.max_stall_generations) break;

    std::vector<Individual> next;
    next.reserve(params.population);
    std::vector<std::size_t> ranked(pop.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return ops.better(pop[a], pop[b]); });
    for (std::uint32_t e = 0; e < params.elitism; ++e) next.push_back(pop[ranked[e]]);

    while (next.size() < params.population) {
      Individual a = ops.tournament(pop);
      Individual b = ops.tournament(pop);
      if (n >= 2 && uniform01(rng) < params.crossover_p) {
        const std::size_t cut = uniform_int(rng, 1, n - 1);
        for (std::size_t i = cut; i < n; ++i) std::swap(a.genes[i], b.genes[i]);
      }
      ops.mutate(a.genes, mutation_p);
      ops.mutate(b.genes, mutation_p);
      ops.repair(a);
      ops.repair(b);
      next.push_back(std::move(a));
      if (next.size() < params.population) next.push_back(std::move(b));
    }
    pop = std::move(next);
    clock.charge(generation_cost);

    const Individual& gen_best = pop[best_index(ops, pop)];
    if (ops.better(gen_best, incumbent)) {
      incumbent = gen_best;
      stall = 0;
    } else {
      ++stall;
    }
  }

  out.value = incumbent.value;
  out.selection.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) out.selection[i] = incumbent.genes[i] != 0;
  out.status = timed_out ? SolveStatus::Timeout : SolveStatus::Feasible;
  out.elapsed_s = clock.elapsed_s();
  out.work_units = clock.work();
  return out;
}

}  // namespace slasel

#include "slasel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

namespace slasel {

std::size_t Dataset::count(Algorithm alg) const {
  return static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(), [&](const DatasetRow& r) { return r.record.algorithm == alg; }));
}

Dataset Dataset::filter(Algorithm alg) const {
  Dataset out;
  for (const auto& r : rows) {
    if (r.record.algorithm == alg) out.rows.push_back(r);
  }
  return out;
}

std::vector<std::string> Dataset::instance_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (seen.insert(r.record.instance_id).second) ids.push_back(r.record.instance_id);
  }
  return ids;
}

std::uint64_t run_seed(std::uint64_t base, const std::string& instance_id) {
  return mix_seed(base, fnv1a(instance_id));
}

namespace {

PerformanceRecord to_record(const SolveOutcome& out, Algorithm alg, const Instance& inst,
                            const HardwareConfig& hw, ReferenceResolver& reference) {
  PerformanceRecord rec;
  rec.instance_id = inst.id;
  rec.algorithm = alg;
  rec.hardware = hw;
  rec.status = out.status;
  rec.t_s = out.elapsed_s;
  rec.m_kb = out.peak_mem_kb;
  if (out.value) {
    try {
      rec.o_pct = optimality_gap(*out.value, reference.optimum(inst), inst.variant);
    } catch (const ReferenceUnavailable& e) {
      spdlog::debug("{}", e.what());
    } catch (const InvalidArgument& e) {
      spdlog::debug("{}: {}", inst.id, e.what());
    }
  }
  return rec;
}

}  // namespace

PerformanceRecord profile_run(Algorithm alg, const Instance& inst, const HardwareConfig& hw,
                              const Budget& budget, std::uint64_t seed,
                              ReferenceResolver& reference) {
  Budget b = budget;
  b.mem_limit_kb = mem_limit_kb(hw);
  const SolveOutcome out = solve(alg, inst, b, seed);
  return to_record(out, alg, inst, hw, reference);
}

Dataset build_dataset(const std::vector<Instance>& instances,
                      const std::vector<HardwareConfig>& grid,
                      const std::vector<Algorithm>& algorithms, const ProfileConfig& config) {
  if (instances.empty()) throw InvalidArgument("build_dataset: no instances");
  if (grid.empty()) throw InvalidArgument("build_dataset: empty hardware grid");
  if (algorithms.empty()) throw InvalidArgument("build_dataset: no algorithms");
  {
    std::set<std::string> ids;
    for (const auto& inst : instances) {
      if (!ids.insert(inst.id).second) {
        throw InvalidArgument("build_dataset: duplicate instance id '" + inst.id + "'");
      }
      validate(inst);
    }
  }
  validate(config.budget);

  std::vector<FeatureVector> features;
  features.reserve(instances.size());
  for (const auto& inst : instances) features.push_back(extract_features(inst));

  // Largest memory first: in work mode a run whose accounted peak fits a
  // smaller limit is identical under that limit, so it is reused.
  std::vector<HardwareConfig> ordered = grid;
  std::sort(ordered.begin(), ordered.end(), [](const HardwareConfig& a, const HardwareConfig& b) {
    return a.ram_gb != b.ram_gb ? a.ram_gb > b.ram_gb : a.cpu_cores < b.cpu_cores;
  });

  ReferenceResolver reference(config.budget, config.ref_mem_kb, config.ref_time_factor);
  const std::size_t tasks = algorithms.size() * instances.size();
  std::vector<std::vector<DatasetRow>> results(tasks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const Algorithm alg = algorithms[t / instances.size()];
      const std::size_t idx = t % instances.size();
      const Instance& inst = instances[idx];
      const std::uint64_t seed = run_seed(config.seed, inst.id);
      std::optional<SolveOutcome> cached;
      for (const auto& hw : ordered) {
        Budget b = config.budget;
        b.mem_limit_kb = mem_limit_kb(hw);
        const bool reusable = config.budget.clock == ClockMode::Work && cached &&
                              cached->status != SolveStatus::OOM &&
                              cached->peak_mem_kb <= b.mem_limit_kb;
        if (!reusable) cached = solve(alg, inst, b, seed);
        results[t].push_back({model_input(features[idx], hw),
                              to_record(*cached, alg, inst, hw, reference)});
      }
      spdlog::debug("profiled {} on {}", to_string(alg), inst.id);
    }
  };

  const unsigned jobs = std::max(1u, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  Dataset ds;
  ds.rows.reserve(tasks * grid.size());
  for (auto& part : results) {
    for (auto& row : part) ds.rows.push_back(std::move(row));
  }
  std::sort(ds.rows.begin(), ds.rows.end(), [](const DatasetRow& a, const DatasetRow& b) {
    const auto an = to_string(a.record.algorithm), bn = to_string(b.record.algorithm);
    if (an != bn) return an < bn;
    if (a.record.instance_id != b.record.instance_id) {
      return a.record.instance_id < b.record.instance_id;
    }
    return a.record.hardware < b.record.hardware;
  });
  return ds;
}

std::vector<std::string> dataset_columns() {
  std::vector<std::string> cols(kFeatureNames.begin(), kFeatureNames.end());
  for (const char* c : {"ram_gb", "cpu_cores", "algorithm", "instance_id", "status", "t_s", "m_kb",
                        "o_pct"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_dataset_csv(const Dataset& ds, std::ostream& out, const std::string& metadata) {
  if (!metadata.empty()) out << "# " << metadata << '\n';
  const auto cols = dataset_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : ds.rows) {
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << format_double(row.input[i]) << ',';
    const auto& r = row.record;
    out << r.hardware.ram_gb << ',' << r.hardware.cpu_cores << ',' << to_string(r.algorithm) << ','
        << r.instance_id << ',' << to_string(r.status) << ',' << format_double(r.t_s) << ','
        << r.m_kb << ',';
    if (r.o_pct) out << format_double(*r.o_pct);
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* column) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("bad value '") + std::string(tok) + "' in column " + column, line);
  }
  return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  Dataset ds;
  const auto cols = dataset_columns();
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (!have_header) {
      if (fields.size() != cols.size() || !std::equal(fields.begin(), fields.end(), cols.begin())) {
        throw ParseError("dataset header does not match the expected columns", lineno);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != cols.size()) {
      throw ParseError("expected " + std::to_string(cols.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    DatasetRow row;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      row.input[i] = parse_number<double>(fields[i], lineno, cols[i].c_str());
    }
    auto& r = row.record;
    r.hardware.ram_gb = parse_number<int>(fields[kNumFeatures], lineno, "ram_gb");
    r.hardware.cpu_cores = parse_number<int>(fields[kNumFeatures + 1], lineno, "cpu_cores");
    row.input[kNumFeatures] = r.hardware.ram_gb;
    row.input[kNumFeatures + 1] = r.hardware.cpu_cores;
    try {
      r.algorithm = parse_algorithm(fields[kNumFeatures + 2]);
      r.status = parse_status(fields[kNumFeatures + 4]);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), lineno);
    }
    r.instance_id = std::string(fields[kNumFeatures + 3]);
    r.t_s = parse_number<double>(fields[kNumFeatures + 5], lineno, "t_s");
    r.m_kb = parse_number<std::uint64_t>(fields[kNumFeatures + 6], lineno, "m_kb");
    if (!fields[kNumFeatures + 7].empty()) {
      r.o_pct = parse_number<double>(fields[kNumFeatures + 7], lineno, "o_pct");
    }
    ds.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing dataset header", lineno + 1);
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path, const std::string& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_dataset_csv(ds, out, metadata);
  if (!out) throw Error("write failed for '" + path + "'");
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  try {
    return read_dataset_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

DatasetSplit split_dataset(const Dataset& ds, std::array<double, 3> ratios, std::uint64_t seed,
                           const std::map<std::string, int>* strata) {
  if (ds.rows.empty()) throw InvalidArgument("split_dataset: empty dataset");
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw InvalidArgument("split_dataset: ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("split_dataset: ratios must sum to 1");

  std::vector<std::string> ids = ds.instance_ids();
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  shuffle(ids, rng);

  const auto n = static_cast<long long>(ids.size());
  std::array<long long, 3> target{std::llround(ratios[0] * static_cast<double>(n)),
                                  std::llround(ratios[1] * static_cast<double>(n)), 0};
  target[2] = n - target[0] - target[1];
  for (long long t : target) {
    if (t <= 0) {
      throw InvalidArgument("split_dataset: " + std::to_string(n) +
                            " instances cannot fill three non-empty folds with these ratios");
    }
  }

  std::map<std::string, int> fold_of;
  if (strata == nullptr) {
    for (long long i = 0; i < n; ++i) {
      fold_of[ids[static_cast<std::size_t>(i)]] = i < target[0] ? 0 : (i < target[0] + target[1] ? 1 : 2);
    }
  } else {
    std::map<int, std::vector<std::string>> groups;
    for (const auto& id : ids) {
      auto it = strata->find(id);
      groups[it == strata->end() ? 0 : it->second].push_back(id);
    }
    struct Cell {
      double remainder;
      int label;
      int fold;
    };
    std::map<int, std::array<long long, 3>> quota;
    std::array<long long, 3> deficit = target;
    std::vector<Cell> cells;
    for (const auto& [label, members] : groups) {
      auto& q = quota[label];
      for (int f = 0; f < 3; ++f) {
        const double want = ratios[static_cast<std::size_t>(f)] * static_cast<double>(members.size());
        q[static_cast<std::size_t>(f)] = static_cast<long long>(std::floor(want));
        deficit[static_cast<std::size_t>(f)] -= q[static_cast<std::size_t>(f)];
        cells.push_back({want - std::floor(want), label, f});
      }
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [](const Cell& a, const Cell& b) { return a.remainder > b.remainder; });
    auto unassigned = [&](int label) {
      const auto& q = quota[label];
      return static_cast<long long>(groups[label].size()) - q[0] - q[1] - q[2];
    };
    for (const auto& c : cells) {
      if (deficit[static_cast<std::size_t>(c.fold)] > 0 && unassigned(c.label) > 0) {
        ++quota[c.label][static_cast<std::size_t>(c.fold)];
        --deficit[static_cast<std::size_t>(c.fold)];
      }
    }
    for (auto& [label, q] : quota) {
      for (std::size_t f = 0; f < 3 && unassigned(label) > 0; ++f) {
        const long long take = std::min(deficit[f], unassigned(label));
        q[f] += take;
        deficit[f] -= take;
      }
    }
    for (const auto& [label, members] : groups) {
      const auto& q = quota[label];
      for (std::size_t i = 0; i < members.size(); ++i) {
        const auto pos = static_cast<long long>(i);
        fold_of[members[i]] = pos < q[0] ? 0 : (pos < q[0] + q[1] ? 1 : 2);
      }
    }
  }

  DatasetSplit split;
  for (const auto& row : ds.rows) {
    switch (fold_of.at(row.record.instance_id)) {
      case 0: split.train.rows.push_back(row); break;
      case 1: split.val.rows.push_back(row); break;
      default: split.test.rows.push_back(row); break;
    }
  }
  return split;
}

}  // namespace slasel

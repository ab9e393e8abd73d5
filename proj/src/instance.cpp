#include "slasel/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace slasel {

std::int64_t Instance::total_weight() const {
  return std::accumulate(items.begin(), items.end(), std::int64_t{0},
                         [](std::int64_t acc, const Item& it) { return acc + it.weight; });
}

std::int64_t Instance::total_profit() const {
  return std::accumulate(items.begin(), items.end(), std::int64_t{0},
                         [](std::int64_t acc, const Item& it) { return acc + it.profit; });
}

void validate(const Instance& inst) {
  if (inst.items.empty()) throw InvalidArgument("instance '" + inst.id + "' has no items");
  if (inst.capacity < 1) throw InvalidArgument("instance '" + inst.id + "' capacity must be >= 1");
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    if (inst.items[i].weight < 1 || inst.items[i].profit < 1) {
      throw InvalidArgument("instance '" + inst.id + "' item " + std::to_string(i) +
                            " has non-positive weight or profit");
    }
  }
}

Instance generate_instance(const GeneratorSpec& spec) {
  if (spec.n < 2) throw InvalidArgument("generator: n must be >= 2");
  if (!(spec.capacity_fraction > 0.0 && spec.capacity_fraction < 1.0)) {
    throw InvalidArgument("generator: capacity_fraction must lie in (0,1)");
  }
  if (spec.weight_max < 2) throw InvalidArgument("generator: weight_max must be >= 2");
  if (!(spec.correlation >= -1.0 && spec.correlation <= 1.0)) {
    throw InvalidArgument("generator: correlation must lie in [-1,1]");
  }
  if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("generator: noise_sigma must be >= 0");

  Rng rng(spec.seed);
  const double mix = std::abs(spec.correlation);
  const auto wmax = static_cast<std::uint64_t>(spec.weight_max);

  Instance inst;
  inst.id = spec.id;
  inst.variant = spec.variant;
  inst.items.reserve(spec.n);
  std::int64_t sum_w = 0;
  for (std::uint32_t i = 0; i < spec.n; ++i) {
    const auto w = static_cast<std::int64_t>(uniform_int(rng, 1, wmax));
    const auto independent = static_cast<double>(uniform_int(rng, 1, wmax));
    const double eps = spec.noise_sigma * standard_normal(rng);
    const double affine = spec.correlation >= 0.0 ? static_cast<double>(w)
                                                  : static_cast<double>(spec.weight_max + 1 - w);
    const double raw = mix * affine + (1.0 - mix) * independent + eps;
    const auto p = std::max<std::int64_t>(1, std::llround(raw));
    inst.items.push_back({w, p});
    sum_w += w;
  }
  inst.capacity = std::max<std::int64_t>(
      1, std::llround(spec.capacity_fraction * static_cast<double>(sum_w)));
  return inst;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& options, Rng& rng) {
  if (options.empty()) throw InvalidArgument("suite: empty parameter list");
  return options[uniform_int(rng, 0, options.size() - 1)];
}

std::string suite_id(std::uint32_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "kp_" + digits;
}

}  // namespace

std::vector<GeneratorSpec> suite_specs(const SuiteSpec& suite) {
  std::vector<GeneratorSpec> specs;
  specs.reserve(suite.count);
  for (std::uint32_t i = 0; i < suite.count; ++i) {
    Rng rng(mix_seed(suite.seed, i));
    GeneratorSpec g;
    g.n = pick(suite.sizes, rng);
    g.correlation = pick(suite.correlations, rng);
    g.noise_sigma = pick(suite.noise_levels, rng);
    g.capacity_fraction = pick(suite.capacity_fractions, rng);
    g.weight_max = pick(suite.weight_maxima, rng);
    g.seed = mix_seed(suite.seed, 0x10000ULL + i);
    g.variant = suite.variant;
    g.id = suite_id(i);
    specs.push_back(std::move(g));
  }
  return specs;
}

std::vector<Instance> generate_suite(const SuiteSpec& suite) {
  std::vector<Instance> out;
  for (const auto& spec : suite_specs(suite)) out.push_back(generate_instance(spec));
  return out;
}

void write_instance(const Instance& inst, std::ostream& out) {
  validate(inst);
  out << inst.items.size() << ' ' << inst.capacity << ' ' << to_string(inst.variant) << '\n';
  for (const auto& it : inst.items) out << it.weight << ' ' << it.profit << '\n';
}

void write_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_instance(inst, out);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::int64_t parse_int(std::string_view tok, std::size_t line, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line);
  }
  return v;
}

}  // namespace

Instance read_instance(std::istream& in, std::string id) {
  Instance inst;
  inst.id = std::move(id);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++lineno;
  auto header = split_ws(line);
  if (header.size() != 2 && header.size() != 3) {
    throw ParseError("header must be '<n> <capacity> [max|min]'", lineno);
  }
  const std::int64_t n = parse_int(header[0], lineno, "item count");
  inst.capacity = parse_int(header[1], lineno, "capacity");
  if (n < 1) throw ParseError("item count must be >= 1", lineno);
  if (inst.capacity < 1) throw ParseError("capacity must be >= 1", lineno);
  try {
    if (header.size() == 3) inst.variant = parse_variant(header[2]);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), lineno);
  }

  inst.items.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("expected " + std::to_string(n) + " item lines, found " + std::to_string(i),
                       lineno + 1);
    }
    ++lineno;
    auto tok = split_ws(line);
    if (tok.size() != 2) throw ParseError("item line must be '<weight> <profit>'", lineno);
    Item it{parse_int(tok[0], lineno, "weight"), parse_int(tok[1], lineno, "profit")};
    if (it.weight < 1) throw ParseError("weight must be >= 1", lineno);
    if (it.profit < 1) throw ParseError("profit must be >= 1", lineno);
    inst.items.push_back(it);
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!split_ws(line).empty()) throw ParseError("trailing data after last item", lineno);
  }
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open instance '" + path.string() + "'");
  try {
    return read_instance(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

std::vector<Instance> load_instance_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".kp") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Instance> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_instance(f));
  return out;
}

}  // namespace slasel

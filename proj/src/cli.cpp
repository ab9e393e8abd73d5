#include "slasel/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "slasel/decider.hpp"
#include "slasel/features.hpp"
#include "slasel/harness.hpp"
#include "slasel/instance.hpp"
#include "slasel/learn.hpp"
#include "slasel/solvers.hpp"

namespace slasel::cli {

namespace {

namespace fs = std::filesystem;

/// Reads TOML (CLI11's native format) or, when the file starts with '{', JSON
/// with one nested object per subcommand.
class TomlOrJsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool defaults, bool descriptions,
                        std::string prefix) const override {
    return toml_.to_config(app, defaults, descriptions, std::move(prefix));
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream s(text);
      return toml_.from_config(s);
    }
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(doc, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const Json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }

  CLI::ConfigTOML toml_;
};

/// Options that name files or only affect scheduling; excluded from the
/// config hash.
bool hash_excluded(const std::string& name) {
  static const char* kExcluded[] = {"--out",    "--out-dir",     "--instances", "--instance",
                                    "--dataset", "--model",      "--models",    "--request",
                                    "--predictions", "--jobs",   "--config",    "--log-level",
                                    "--help"};
  return std::find_if(std::begin(kExcluded), std::end(kExcluded),
                      [&](const char* e) { return name == e; }) != std::end(kExcluded);
}

std::string config_hash(const CLI::App& sub) {
  std::vector<std::string> parts{sub.get_name()};
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name.empty() || hash_excluded(name)) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += r + ";";
    } else {
      value = opt->get_default_str();
    }
    parts.push_back(name + "=" + value);
  }
  std::sort(parts.begin() + 1, parts.end());
  std::string joined;
  for (const auto& p : parts) joined += p + "\n";
  return hex64(fnv1a(joined));
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string command;
  std::string hash;
  std::uint64_t seed = 0;
  bool has_seed = false;

  Json metadata() const {
    Json m{{"tool", "sla-select"}, {"version", std::string(kVersion)}, {"command", command},
           {"config_hash", hash}};
    m["seed"] = has_seed ? Json(seed) : Json(nullptr);
    return m;
  }
  std::string metadata_line() const {
    return "sla-select " + std::string(kVersion) + " command=" + command +
           " seed=" + (has_seed ? std::to_string(seed) : std::string("none")) + " config=" + hash;
  }
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Budget make_budget(double time_limit, std::uint64_t mem_kb, const std::string& clock) {
  Budget b{time_limit, mem_kb, parse_clock_mode(clock)};
  validate(b);
  return b;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int n = 100;
  double cap_frac = 0.5;
  double corr = 0.0;
  double noise = 0.0;
  std::int64_t weight_max = 1000;
  std::string variant = "max";
  std::uint64_t seed = 1;
  std::string id = "kp";
  std::string out;
  std::size_t count = 0;
  std::string out_dir;
};

int cmd_gen(const GenArgs& a, Context& ctx) {
  const Variant variant = parse_variant(a.variant);
  if (a.count > 0) {
    if (a.out_dir.empty()) throw InvalidArgument("--count requires --out-dir");
    SuiteSpec suite;
    suite.count = a.count;
    suite.seed = a.seed;
    suite.variant = variant;
    fs::create_directories(a.out_dir);
    for (const auto& inst : generate_suite(suite)) {
      write_instance(inst, (fs::path(a.out_dir) / (inst.id + ".kp")).string());
    }
    spdlog::info("{}: wrote {} instances to {}", ctx.metadata_line(), a.count, a.out_dir);
    return kExitOk;
  }
  if (a.n <= 0) throw InvalidArgument("--n must be positive");
  GeneratorSpec spec;
  spec.n = static_cast<std::size_t>(a.n);
  spec.capacity_fraction = a.cap_frac;
  spec.correlation = a.corr;
  spec.noise_sigma = a.noise;
  spec.weight_max = a.weight_max;
  spec.seed = a.seed;
  spec.variant = variant;
  spec.id = a.id;
  const Instance inst = generate_instance(spec);
  spdlog::info("{}", ctx.metadata_line());
  if (a.out.empty() || a.out == "-") {
    write_instance(inst, ctx.out);
  } else {
    write_instance(inst, a.out);
  }
  return kExitOk;
}

struct SolveArgs {
  std::string alg;
  std::string instance;
  double time_limit = 300.0;
  std::uint64_t mem_limit_kb = 4ULL << 20;
  std::uint64_t seed = 1;
  std::string clock = "work";
};

int cmd_solve(const SolveArgs& a, Context& ctx) {
  const Algorithm alg = parse_algorithm(a.alg);
  const Instance inst = load_instance(a.instance);
  const Budget budget = make_budget(a.time_limit, a.mem_limit_kb, a.clock);
  const SolveOutcome o = solve(alg, inst, budget, a.seed);
  Json j;
  j["metadata"] = ctx.metadata();
  j["algorithm"] = to_string(alg);
  j["instance_id"] = inst.id;
  j["variant"] = to_string(inst.variant);
  j["status"] = to_string(o.status);
  j["value"] = o.value ? Json(*o.value) : Json(nullptr);
  Json sel = Json::array();
  for (std::size_t i = 0; i < o.selection.size(); ++i) {
    if (o.selection[i]) sel.push_back(i);
  }
  j["selection"] = sel;
  j["elapsed_s"] = o.elapsed_s;
  j["peak_mem_kb"] = o.peak_mem_kb;
  j["work_units"] = o.work_units;
  j["clock"] = to_string(budget.clock);
  ctx.out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_features(const std::string& instance, Context& ctx) {
  const Instance inst = load_instance(instance);
  const FeatureVector f = extract_features(inst);
  ctx.out << "# " << ctx.metadata_line() << '\n';
  for (std::size_t i = 0; i < kNumFeatures; ++i) ctx.out << (i ? "," : "") << kFeatureNames[i];
  ctx.out << '\n';
  for (std::size_t i = 0; i < kNumFeatures; ++i) ctx.out << (i ? "," : "") << format_double(f[i]);
  ctx.out << '\n';
  return kExitOk;
}

struct ProfileArgs {
  std::string instances;
  std::vector<std::string> algs;
  std::string out;
  double time_limit = 5.0;
  std::uint64_t seed = 1;
  std::string clock = "work";
  unsigned jobs = 1;
  std::vector<int> ram_grid{kRamGridGb.begin(), kRamGridGb.end()};
  std::vector<int> core_grid{kCoreGrid.begin(), kCoreGrid.end()};
  std::uint64_t ref_mem_kb = 256ULL << 20;
};

int cmd_profile(const ProfileArgs& a, Context& ctx) {
  const std::vector<Instance> instances = load_instance_dir(a.instances);
  if (instances.empty()) throw InvalidArgument("no .kp instances in '" + a.instances + "'");
  std::vector<Algorithm> algs;
  for (const auto& s : a.algs) algs.push_back(parse_algorithm(s));
  if (algs.empty()) algs.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  std::vector<HardwareConfig> grid;
  for (int ram : a.ram_grid) {
    for (int cores : a.core_grid) {
      if (ram <= 0 || cores <= 0) throw InvalidArgument("hardware grid values must be positive");
      grid.push_back({ram, cores});
    }
  }
  ProfileConfig cfg;
  cfg.budget = make_budget(a.time_limit, cfg.budget.mem_limit_kb, a.clock);
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  cfg.ref_mem_kb = a.ref_mem_kb;
  spdlog::info("profiling {} instances x {} configs x {} algorithms", instances.size(), grid.size(),
               algs.size());
  const Dataset ds = build_dataset(instances, grid, algs, cfg);
  if (a.out.empty() || a.out == "-") {
    write_dataset_csv(ds, ctx.out, ctx.metadata_line());
  } else {
    save_dataset_csv(ds, a.out, ctx.metadata_line());
  }
  return kExitOk;
}

struct TrainArgs {
  std::string dataset;
  std::string alg;
  std::string metric;
  std::string task = "regress";
  std::vector<std::string> families{"all"};
  std::size_t top_k = 3;
  bool top_k_given = false;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_train(const TrainArgs& a, Context& ctx) {
  TrainOptions o;
  o.algorithm = parse_algorithm(a.alg);
  o.metric = parse_metric(a.metric);
  o.task = parse_task(a.task);
  o.seed = a.seed;
  for (const auto& f : a.families) {
    if (f == "all") {
      o.families.assign(std::begin(kAllFamilies), std::end(kAllFamilies));
    } else {
      o.families.push_back(parse_family(f));
    }
  }
  std::sort(o.families.begin(), o.families.end());
  o.families.erase(std::unique(o.families.begin(), o.families.end()), o.families.end());
  o.top_k = a.top_k_given ? a.top_k : std::min(a.top_k, o.families.size());
  if (o.top_k > o.families.size()) {
    throw InvalidArgument("--top-k " + std::to_string(o.top_k) + " exceeds the " +
                          std::to_string(o.families.size()) + " candidate families");
  }

  const Dataset ds = load_dataset_csv(a.dataset);
  TrainResult res = train_pipeline(ds, o);
  res.artifact.metadata = ctx.metadata();
  save_artifact(res.artifact, a.out);

  Json summary;
  summary["metadata"] = ctx.metadata();
  summary["algorithm"] = to_string(o.algorithm);
  summary["metric"] = to_string(o.metric);
  summary["task"] = to_string(o.task);
  summary["rows"] = {{"train", res.train.size()}, {"val", res.val.size()}, {"test", res.test.size()}};
  Json ranking = Json::array();
  for (const auto& p : res.ranked) {
    ranking.push_back({{"family", to_string(p->family)},
                       {"val_score", p->val_score},
                       {"constant", p->constant.has_value()}});
  }
  summary["ranking"] = ranking;
  summary["top_k"] = o.top_k;
  ctx.out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& model, const std::string& dataset, const std::string& fold,
             Context& ctx) {
  const ModelArtifact a = load_artifact(model);
  const Dataset ds = load_dataset_csv(dataset);
  Json j = evaluate_artifact(a, ds, parse_fold(fold));
  j["fold"] = fold;
  j["metadata"] = ctx.metadata();
  ctx.out << j.dump(2) << '\n';
  return kExitOk;
}

struct ImportanceArgs {
  std::string model;
  std::string dataset;
  std::string fold = "test";
  std::size_t repeats = 5;
  std::size_t top = 5;
  std::uint64_t seed = 1;
};

int cmd_importance(const ImportanceArgs& a, Context& ctx) {
  const ModelArtifact art = load_artifact(a.model);
  const Dataset ds = load_dataset_csv(a.dataset);
  const Fold fold = parse_fold(a.fold);
  Dataset part = ds.filter(art.algorithm);
  if (fold != Fold::All) {
    DatasetSplit split =
        split_for_training(ds, art.algorithm, art.metric, art.task, art.ratios, art.seed);
    part = fold == Fold::Train ? split.train : fold == Fold::Val ? split.val : split.test;
  }
  const BinScheme* sp = art.scheme ? &*art.scheme : nullptr;
  const LearningData data = make_learning_data(part, art.algorithm, art.metric, art.task, sp);
  const auto ranked = permutation_importance(art, art.task, data, a.repeats, a.seed);
  Json j;
  j["metadata"] = ctx.metadata();
  j["algorithm"] = to_string(art.algorithm);
  j["metric"] = to_string(art.metric);
  j["task"] = to_string(art.task);
  j["degradation"] = art.task == Task::Classify ? "accuracy_drop" : "rmse_increase";
  j["repeats"] = a.repeats;
  Json list = Json::array();
  for (std::size_t i = 0; i < ranked.size() && i < a.top; ++i) {
    list.push_back({{"feature", ranked[i].feature}, {"score", ranked[i].score}});
  }
  j["top"] = list;
  ctx.out << j.dump(2) << '\n';
  return kExitOk;
}

struct DecideArgs {
  std::string request;
  std::string models;
  std::string predictions;
};

int cmd_decide(const DecideArgs& a, Context& ctx) {
  const SlaRequest req = parse_request_text(read_text(a.request));
  PredictionTable table;
  if (!a.predictions.empty()) {
    try {
      table = parse_predictions(Json::parse(read_text(a.predictions)));
    } catch (const Json::parse_error& e) {
      throw InvalidArgument(a.predictions + ": malformed JSON: " + e.what());
    }
  } else {
    Instance inst;
    if (req.instance) {
      inst = *req.instance;
    } else if (req.instance_path) {
      fs::path p(*req.instance_path);
      if (p.is_relative()) p = fs::path(a.request).parent_path() / p;
      inst = load_instance(p.string());
    } else {
      throw RequestError("instance_path", "an instance is required unless --predictions is given");
    }
    if (inst.variant != req.variant) {
      throw RequestError("variant", "does not match the instance's variant");
    }
    table = predict_from_models(a.models, inst, req.hardware);
  }
  const DecisionReport r = decide(table, req.sla, req.weights, req.mode);
  Json j = to_json(r);
  j["metadata"] = ctx.metadata();
  j["problem_type"] = req.problem_type;
  j["variant"] = to_string(req.variant);
  j["hardware"] = {{"ram_gb", req.hardware.ram_gb}, {"cpu_cores", req.hardware.cpu_cores}};
  ctx.out << j.dump(2) << '\n';
  return r.feasible.empty() ? kExitNoFeasible : kExitOk;
}

void install_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("sla-select", sink);
  logger->set_pattern("[%l] %v");
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    throw InvalidArgument("unknown log level '" + level + "'");
  }
  logger->set_level(lvl);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SLA-driven algorithm selection for 0-1 knapsack", "sla-select"};
  app.config_formatter(std::make_shared<TomlOrJsonConfig>());
  app.set_config("--config", "", "TOML or JSON file of option values; flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a knapsack instance or a suite");
  g->add_option("--n", gen.n, "Number of items")->capture_default_str();
  g->add_option("--cap-frac", gen.cap_frac, "Capacity as a fraction of the total weight")
      ->capture_default_str();
  g->add_option("--corr", gen.corr, "Weight-profit correlation in [-1, 1]")->capture_default_str();
  g->add_option("--noise", gen.noise, "Gaussian profit noise sigma")->capture_default_str();
  g->add_option("--weight-max", gen.weight_max, "Largest item weight")->capture_default_str();
  g->add_option("--variant", gen.variant, "max|min")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--id", gen.id, "Instance id (single instance)")->capture_default_str();
  g->add_option("--out", gen.out, "Output file (default stdout)");
  g->add_option("--count", gen.count, "Generate a suite of this many instances")
      ->capture_default_str();
  g->add_option("--out-dir", gen.out_dir, "Directory for --count");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run one solver on one instance");
  s->add_option("--alg", sol.alg, "greedy|dp|bnb|ga")->required();
  s->add_option("--instance", sol.instance)->required();
  s->add_option("--time-limit", sol.time_limit, "Seconds")->capture_default_str();
  s->add_option("--mem-limit-kb", sol.mem_limit_kb)->capture_default_str();
  s->add_option("--seed", sol.seed)->capture_default_str();
  s->add_option("--clock", sol.clock, "work|wall")->capture_default_str();

  std::string feat_instance;
  auto* f = app.add_subcommand("features", "Print the 22 instance features as CSV");
  f->add_option("--instance", feat_instance)->required();

  ProfileArgs prof;
  auto* p = app.add_subcommand("profile", "Profile algorithms over instances and hardware");
  p->add_option("--instances", prof.instances, "Directory of .kp files")->required();
  p->add_option("--algs", prof.algs, "Algorithms (default all)")->delimiter(',');
  p->add_option("--out", prof.out, "Dataset CSV (default stdout)");
  p->add_option("--time-limit", prof.time_limit, "Seconds per run")->capture_default_str();
  p->add_option("--seed", prof.seed)->capture_default_str();
  p->add_option("--clock", prof.clock, "work|wall")->capture_default_str();
  p->add_option("--jobs", prof.jobs, "Worker threads")->capture_default_str();
  p->add_option("--ram-grid", prof.ram_grid, "RAM values in GB")->delimiter(',')->capture_default_str();
  p->add_option("--core-grid", prof.core_grid, "Core counts")->delimiter(',')->capture_default_str();
  p->add_option("--ref-mem-kb", prof.ref_mem_kb, "Memory budget of the exact reference solve")
      ->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a top-k predictor for one algorithm and metric");
  t->add_option("--dataset", tr.dataset)->required();
  t->add_option("--alg", tr.alg)->required();
  t->add_option("--metric", tr.metric, "time|gap|mem")->required();
  t->add_option("--task", tr.task, "classify|regress")->capture_default_str();
  t->add_option("--family", tr.families,
                "all or linear|tree|forest|knn|mlp|qlearning|sarsa (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  auto* topk = t->add_option("--top-k", tr.top_k, "Ensemble size")->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--out", tr.out, "Model artifact path")->required();

  std::string ev_model, ev_dataset, ev_fold = "test";
  auto* e = app.add_subcommand("eval", "Evaluate a model artifact");
  e->add_option("--model", ev_model)->required();
  e->add_option("--dataset", ev_dataset)->required();
  e->add_option("--fold", ev_fold, "train|val|test|all")->capture_default_str();

  ImportanceArgs imp;
  auto* im = app.add_subcommand("importance", "Permutation feature importance of a model");
  im->add_option("--model", imp.model)->required();
  im->add_option("--dataset", imp.dataset)->required();
  im->add_option("--fold", imp.fold, "train|val|test|all")->capture_default_str();
  im->add_option("--repeats", imp.repeats)->capture_default_str();
  im->add_option("--top", imp.top, "Features reported")->capture_default_str();
  im->add_option("--seed", imp.seed)->capture_default_str();

  DecideArgs dec;
  auto* d = app.add_subcommand("decide", "Check predicted performance against an SLA request");
  d->add_option("--request", dec.request, "Request JSON")->required();
  auto* models = d->add_option("--models", dec.models, "Directory of regression artifacts");
  auto* preds = d->add_option("--predictions", dec.predictions, "Precomputed predictions JSON");
  models->excludes(preds);
  d->require_option(2);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  struct RestoreLogger {
    std::shared_ptr<spdlog::logger> previous = spdlog::default_logger();
    ~RestoreLogger() { spdlog::set_default_logger(previous); }
  } restore;
  try {
    install_logger(err, log_level);
    CLI::App* sub = app.get_subcommands().front();
    Context ctx{out, err, sub->get_name(), config_hash(*sub)};
    auto seeded = [&](std::uint64_t seed) {
      ctx.seed = seed;
      ctx.has_seed = true;
    };
    if (sub == g) {
      seeded(gen.seed);
      return cmd_gen(gen, ctx);
    }
    if (sub == s) {
      seeded(sol.seed);
      return cmd_solve(sol, ctx);
    }
    if (sub == f) return cmd_features(feat_instance, ctx);
    if (sub == p) {
      seeded(prof.seed);
      return cmd_profile(prof, ctx);
    }
    if (sub == t) {
      seeded(tr.seed);
      tr.top_k_given = topk->count() > 0;
      return cmd_train(tr, ctx);
    }
    if (sub == e) return cmd_eval(ev_model, ev_dataset, ev_fold, ctx);
    if (sub == im) {
      seeded(imp.seed);
      return cmd_importance(imp, ctx);
    }
    if (sub == d) return cmd_decide(dec, ctx);
  } catch (const InvalidArgument& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace slasel::cli

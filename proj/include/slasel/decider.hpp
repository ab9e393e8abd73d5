#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slasel/features.hpp"
#include "slasel/instance.hpp"

namespace slasel {

enum class SlaMode { Strict, Lenient };

std::string_view to_string(SlaMode m);

struct SlaThresholds {
  double t_max_s = 0.0;
  double o_max_pct = 0.0;
  double m_max_kb = 0.0;
};

struct RankWeights {
  double time = 1.0;
  double gap = 1.0;
  double memory = 1.0;
};

void validate(const SlaThresholds& t);
void validate(const RankWeights& w);

inline constexpr std::string_view kSupportedProblem = "knapsack01";

struct SlaRequest {
  std::string problem_type{kSupportedProblem};
  Variant variant = Variant::Maximize;
  std::optional<std::string> instance_path;
  std::optional<Instance> instance;
  HardwareConfig hardware;
  SlaThresholds sla;
  RankWeights weights;
  SlaMode mode = SlaMode::Strict;
};

class UnsupportedProblem : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Schema violation; `field()` is a JSON path such as "sla.t_max_s".
class RequestError : public InvalidArgument {
 public:
  RequestError(std::string field, const std::string& what)
      : InvalidArgument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

SlaRequest parse_request(const nlohmann::json& doc);
SlaRequest parse_request_text(std::string_view text);

/// Predicted metrics of one algorithm; absent entries mean no prediction.
struct Prediction {
  std::optional<double> t_s;
  std::optional<double> o_pct;
  std::optional<double> m_kb;
};

/// Keyed by algorithm name.
using PredictionTable = std::map<std::string, Prediction>;

struct Verdict {
  std::string algorithm;
  Prediction predicted;
  /// Per metric; nullopt when the prediction is absent in lenient mode.
  std::optional<bool> time_ok, gap_ok, memory_ok;
  bool compliant = false;
};

struct RankedCandidate {
  std::string algorithm;
  double score = 0.0;
};

struct MetricHint {
  std::string metric;
  /// predicted / threshold; absent when the prediction itself is missing.
  std::optional<double> factor;
};

struct AlgorithmHint {
  std::string algorithm;
  std::vector<MetricHint> violations;
};

/// Smallest relaxation that admits one algorithm: thresholds scaled by
/// `factors` (>= 1 per metric) would make `algorithm` feasible.
struct GlobalHint {
  std::string algorithm;
  double time_factor = 1.0, gap_factor = 1.0, memory_factor = 1.0;
};

struct DecisionReport {
  SlaThresholds thresholds;
  SlaMode mode = SlaMode::Strict;
  /// In algorithm-name order.
  std::vector<Verdict> verdicts;
  std::vector<std::string> feasible;
  std::vector<RankedCandidate> ranking;
  std::vector<AlgorithmHint> hints;
  std::optional<GlobalHint> global_hint;
};

DecisionReport check_compliance(const PredictionTable& predictions, const SlaThresholds& thresholds,
                                SlaMode mode);

/// Feasible algorithms by ascending weighted threshold-normalized score;
/// ties by name.
std::vector<RankedCandidate> rank_candidates(const DecisionReport& report,
                                             const RankWeights& weights);

void negotiation_hints(DecisionReport& report);

/// check_compliance, rank_candidates and negotiation_hints in one call.
DecisionReport decide(const PredictionTable& predictions, const SlaThresholds& thresholds,
                      const RankWeights& weights, SlaMode mode);

nlohmann::json to_json(const DecisionReport& report);

/// Reads {"algorithms": {"<name>": {"t_s": x|null, "o_pct": ..., "m_kb": ...}}}.
PredictionTable parse_predictions(const nlohmann::json& doc);

/// Predictions from the regression artifacts `<alg>_<metric>.json` in `dir`;
/// a missing artifact leaves that metric absent.
PredictionTable predict_from_models(const std::string& dir, const Instance& inst,
                                    const HardwareConfig& hw);

}  // namespace slasel

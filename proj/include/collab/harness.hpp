#pragma once

// Monte-Carlo experiment runner: instance generators, budget formulas,
// seeded trial loops and aggregated reports.

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "collab/algorithms.hpp"
#include "collab/bandit.hpp"
#include "json.hpp"

namespace collab {

// ---------------------------------------------------------------------------
// Instance generators

/// Means form a uniformly random permutation of {1/2 + 1/sqrt(n), 1/2 - 1/sqrt(n), 0 x (n-2)}.
BanditInstance lower_bound_instance(std::size_t n, RngStream& rng,
                                    RewardKind kind = RewardKind::bernoulli);

/// Parses and evaluates "uniform-grid(n, p_max, step)", "one-good(n, p1, rest)"
/// or "lower-bound(n)". Only lower-bound consumes `rng`. Throws ConfigError
/// for malformed specs.
BanditInstance generate(std::string_view spec, RngStream& rng,
                        RewardKind kind = RewardKind::bernoulli);

/// True for specs whose instance depends on the random stream.
bool generator_is_random(std::string_view spec);

// ---------------------------------------------------------------------------
// Budget formulas

enum class BudgetMode { eq3, eq4, hardness };

std::string_view to_string(BudgetMode mode);
BudgetMode parse_budget_mode(std::string_view text);

/// eq3: (24 c / sqrt(k)) sum_{i != best} ln(n / d_i) / d_i^2
/// eq4: (400 c / sqrt(k)) sum_{i != best} ln(24 n / d_i^eps) / (d_i^eps)^2
/// hardness: H_eps.
/// Throws ConfigError when the task needs a unique best arm and there is none.
double budget_calculator(const BanditInstance& instance, std::size_t k, double epsilon,
                         BudgetMode mode, double c_a = 1.0);

// ---------------------------------------------------------------------------
// Experiments

struct InstanceSource {
  /// Exactly one of `fixed` or `generator` is used; `fixed` wins.
  std::optional<BanditInstance> fixed;
  std::string generator;
  RewardKind reward = RewardKind::bernoulli;
  /// Where a fixed instance was loaded from; informational only.
  std::string path;
};

struct AlgorithmParams {
  Algorithm algorithm = Algorithm::one_round_best;
  /// Base strategy for Algorithm::amplified.
  Algorithm amplify_base = Algorithm::one_round_best;
  std::size_t k = 1;
  std::uint64_t budget = 0;
  double epsilon = 0.0;
  double delta = 0.1;
  std::size_t rounds = 1;
  double amplify_constant = 18.0;
};

struct SuccessSpec {
  enum class Kind { best_arm, eps_best } kind = Kind::best_arm;
  double epsilon = 0.0;

  friend bool operator==(const SuccessSpec&, const SuccessSpec&) = default;
};

/// best-arm for epsilon = 0; eps-best(2 eps) for one-round-pac (and its
/// amplification) unless `strict`; eps-best(eps) otherwise.
SuccessSpec default_success(const AlgorithmParams& params, bool strict = false);

bool is_success(const BanditInstance& instance, ArmIndex chosen, const SuccessSpec& success);

struct ExperimentConfig {
  InstanceSource instance;
  AlgorithmParams params;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  /// Unset: default_success(params, strict_eps).
  std::optional<SuccessSpec> success;
  bool strict_eps = false;
  bool keep_records = false;
  bool keep_transcripts = false;
  /// Worker threads; results do not depend on it.
  unsigned jobs = 1;

  SuccessSpec resolved_success() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Accepts either a config object or a full report (uses its "config" member).
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Instance used by trial `trial`: the fixed one, or a fresh generator draw.
BanditInstance trial_instance(const ExperimentConfig& config, std::uint64_t trial);

/// Throws ConfigError naming the violated constraint before any trial runs.
void validate(const ExperimentConfig& config);

/// Dispatches to the selected strategy.
RunOutcome run_algorithm(const BanditInstance& instance, const AlgorithmParams& params,
                         const TrialStreams& streams, const RunOptions& options = {});

struct TrialRecord {
  std::uint64_t trial = 0;
  ArmIndex chosen = 0;
  bool success = false;
  std::uint64_t pulls_max = 0;
  std::size_t rounds = 0;
  std::size_t values_sent = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double mean_pulls_per_player = 0.0;
  std::uint64_t max_pulls_per_player = 0;
  double mean_rounds = 0.0;
  std::size_t max_rounds = 0;
  double mean_values_sent = 0.0;
  std::size_t max_values_per_player = 0;
  std::size_t fallback_events = 0;
  /// Elimination strategies: trials whose final survivors contain no maximal arm.
  std::size_t best_arm_eliminated = 0;
  /// multi-round with eps = 0: trials exceeding 1 + ceil(log2(1/min gap)) rounds.
  std::size_t round_bound_exceedances = 0;
  std::size_t invariant_violations = 0;
  std::vector<std::string> violation_samples;
  std::vector<std::string> warnings;
  std::chrono::milliseconds wall_clock{0};
  std::vector<TrialRecord> records;
  std::vector<std::vector<Broadcast>> transcripts;

  double success_rate() const;
  /// sqrt(p(1-p)/trials).
  double std_error() const;
};

ExperimentReport run_trials(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentReport& report, bool include_timing = false);
/// Columns: trial,chosen,success,pulls_max,rounds,values_sent.
void write_records_csv(const ExperimentReport& report, std::ostream& out);
/// JSON lines {trial, round, player, payload}.
void write_trace(const ExperimentReport& report, std::ostream& out);
std::string summary_line(const ExperimentReport& report);

}  // namespace collab

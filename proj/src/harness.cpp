#include "collab/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "collab/errors.hpp"

namespace collab {

SuccessSpec default_success(const AlgorithmParams& params, bool strict) {
  if (params.epsilon <= 0.0) return {SuccessSpec::Kind::best_arm, 0.0};
  const bool pac = params.algorithm == Algorithm::one_round_pac ||
                   (params.algorithm == Algorithm::amplified &&
                    params.amplify_base == Algorithm::one_round_pac);
  if (pac && !strict) return {SuccessSpec::Kind::eps_best, 2.0 * params.epsilon};
  return {SuccessSpec::Kind::eps_best, params.epsilon};
}

bool is_success(const BanditInstance& instance, ArmIndex chosen, const SuccessSpec& success) {
  const double gap = instance.max_mean() - instance.mean(chosen);
  if (success.kind == SuccessSpec::Kind::best_arm) return gap == 0.0;
  return gap <= success.epsilon + 1e-12;
}

SuccessSpec ExperimentConfig::resolved_success() const {
  return success ? *success : default_success(params, strict_eps);
}

namespace {

nlohmann::json success_json(const SuccessSpec& s) {
  if (s.kind == SuccessSpec::Kind::best_arm) return {{"criterion", "best-arm"}};
  return {{"criterion", "eps-best"}, {"epsilon", s.epsilon}};
}

SuccessSpec success_from_json(const nlohmann::json& j) {
  const auto criterion = j.at("criterion").get<std::string>();
  if (criterion == "best-arm") return {SuccessSpec::Kind::best_arm, 0.0};
  if (criterion == "eps-best") return {SuccessSpec::Kind::eps_best, j.at("epsilon").get<double>()};
  throw ConfigError("unknown success criterion '" + criterion + "'");
}

bool uses_budget(Algorithm a) {
  return a != Algorithm::multi_round && a != Algorithm::r_round;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json instance;
  if (config.instance.fixed) {
    instance = to_json(*config.instance.fixed);
    if (!config.instance.path.empty()) instance["path"] = config.instance.path;
  } else {
    instance = {{"generator", config.instance.generator},
                {"reward", std::string(to_string(config.instance.reward))}};
  }
  const auto& p = config.params;
  nlohmann::json doc{{"instance", std::move(instance)},
                     {"algorithm", std::string(to_string(p.algorithm))},
                     {"k", p.k},
                     {"budget", p.budget},
                     {"epsilon", p.epsilon},
                     {"delta", p.delta},
                     {"rounds", p.rounds},
                     {"trials", config.trials},
                     {"seed", config.seed},
                     {"success", success_json(config.resolved_success())}};
  if (p.algorithm == Algorithm::amplified) {
    doc["amplify_base"] = std::string(to_string(p.amplify_base));
    doc["amplify_constant"] = p.amplify_constant;
  }
  return doc;
}

ExperimentConfig config_from_json(const nlohmann::json& raw) {
  const auto& doc = raw.contains("config") ? raw.at("config") : raw;
  try {
    ExperimentConfig config;
    const auto& inst = doc.at("instance");
    if (inst.contains("means")) {
      config.instance.fixed = instance_from_json(inst);
      config.instance.reward = config.instance.fixed->kind();
      config.instance.path = inst.value("path", std::string());
    } else {
      config.instance.generator = inst.at("generator").get<std::string>();
      config.instance.reward = parse_reward_kind(inst.value("reward", std::string("bernoulli")));
    }
    auto& p = config.params;
    p.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    p.k = doc.value("k", p.k);
    p.budget = doc.value("budget", p.budget);
    p.epsilon = doc.value("epsilon", p.epsilon);
    p.delta = doc.value("delta", p.delta);
    p.rounds = doc.value("rounds", p.rounds);
    if (doc.contains("amplify_base")) {
      p.amplify_base = parse_algorithm(doc.at("amplify_base").get<std::string>());
    }
    p.amplify_constant = doc.value("amplify_constant", p.amplify_constant);
    config.trials = doc.value("trials", config.trials);
    config.seed = doc.value("seed", config.seed);
    if (doc.contains("success")) config.success = success_from_json(doc.at("success"));
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

BanditInstance trial_instance(const ExperimentConfig& config, std::uint64_t trial) {
  if (config.instance.fixed) return *config.instance.fixed;
  if (config.instance.generator.empty()) throw ConfigError("no instance source given");
  RngStream rng(config.seed, trial, kInstanceStream);
  return generate(config.instance.generator, rng, config.instance.reward);
}

void validate(const ExperimentConfig& config) {
  const auto& p = config.params;
  auto fail = [](const std::string& what) { throw ConfigError(what); };

  if (config.trials < 1) fail("trials must be >= 1");
  if (p.k < 1) fail("k must be >= 1");
  const auto instance = trial_instance(config, 0);
  const std::string name(to_string(p.algorithm));

  if (uses_budget(p.algorithm) && p.budget < 2 &&
      !(p.algorithm == Algorithm::no_comm || p.algorithm == Algorithm::majority_vote ||
        p.algorithm == Algorithm::full_comm)) {
    fail(name + " requires a per-player budget T >= 2");
  }
  if (!(p.epsilon >= 0.0)) fail("epsilon must be >= 0");

  switch (p.algorithm) {
    case Algorithm::one_round_best:
      instance.validate_for(0.0);
      break;
    case Algorithm::one_round_pac:
      if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) {
        fail("one-round-pac requires 0 < epsilon < 1 (use one-round-best for epsilon = 0)");
      }
      break;
    case Algorithm::amplified: {
      if (p.amplify_base != Algorithm::one_round_best && p.amplify_base != Algorithm::one_round_pac) {
        fail("amplified requires base one-round-best or one-round-pac");
      }
      if (!(p.delta > 0.0 && p.delta < 1.0 / 3.0)) fail("amplified requires 0 < delta < 1/3");
      const auto copies = amplification_copies(p.delta, p.amplify_constant);
      if (p.budget / copies < 2) {
        fail("amplified requires budget >= 2 * copies = " + std::to_string(2 * copies));
      }
      if (p.amplify_base == Algorithm::one_round_best) {
        instance.validate_for(0.0);
      } else if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) {
        fail("amplified one-round-pac requires 0 < epsilon < 1");
      }
      break;
    }
    case Algorithm::multi_round:
      if (!(p.delta > 0.0 && p.delta < 1.0)) fail("multi-round requires 0 < delta < 1");
      instance.validate_for(p.epsilon);
      break;
    case Algorithm::r_round:
      if (!(p.delta > 0.0 && p.delta < 1.0)) fail("r-round requires 0 < delta < 1");
      if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) fail("r-round requires 0 < epsilon < 1");
      if (p.rounds < 1) fail("r-round requires R >= 1");
      break;
    case Algorithm::no_comm:
    case Algorithm::majority_vote:
    case Algorithm::full_comm:
      instance.validate_for(p.epsilon);
      break;
  }
  const auto success = config.resolved_success();
  if (success.kind == SuccessSpec::Kind::best_arm && !instance.has_unique_best()) {
    fail("best-arm success criterion needs a unique best arm");
  }
}

RunOutcome run_algorithm(const BanditInstance& instance, const AlgorithmParams& p,
                         const TrialStreams& streams, const RunOptions& base_options) {
  RunOptions options = base_options;
  options.amplify_constant = p.amplify_constant;
  switch (p.algorithm) {
    case Algorithm::one_round_best:
      return one_round_best_arm(instance, p.k, p.budget, streams, options);
    case Algorithm::one_round_pac:
      return one_round_pac(instance, p.k, p.budget, p.epsilon, streams, options);
    case Algorithm::amplified:
      return amplify(p.amplify_base, p.delta, instance, p.k, p.budget, p.epsilon, streams,
                     options);
    case Algorithm::multi_round:
      return multi_round(instance, p.k, p.epsilon, p.delta, streams, options);
    case Algorithm::r_round:
      return r_round(instance, p.k, p.epsilon, p.delta, p.rounds, streams, options);
    case Algorithm::no_comm:
      return baseline_no_comm(instance, p.k, p.budget, p.epsilon, streams, options);
    case Algorithm::majority_vote:
      return baseline_majority_vote(instance, p.k, p.budget, p.epsilon, streams, options);
    case Algorithm::full_comm:
      return baseline_full_comm(instance, p.k, p.budget, p.epsilon, streams, options);
  }
  throw ArgumentError("unknown algorithm");
}

namespace {

struct TrialResult {
  TrialRecord record;
  double mean_player_pulls = 0.0;
  std::size_t values_per_player_max = 0;
  std::size_t fallbacks = 0;
  bool best_eliminated = false;
  bool round_bound_exceeded = false;
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  std::vector<Broadcast> transcript;
};

TrialResult run_one_trial(const ExperimentConfig& config, const SuccessSpec& success,
                          std::uint64_t trial) {
  const auto instance = trial_instance(config, trial);
  const TrialStreams streams{config.seed, trial};
  auto outcome = run_algorithm(instance, config.params, streams);

  TrialResult r;
  r.record.trial = trial;
  r.record.chosen = outcome.chosen;
  r.record.success = is_success(instance, outcome.chosen, success);
  r.record.pulls_max = outcome.max_player_pulls();
  r.record.rounds = outcome.comm.rounds;
  r.record.values_sent = outcome.comm.values_sent;
  r.mean_player_pulls =
      static_cast<double>(outcome.total_pulls()) / static_cast<double>(outcome.ledger.players());
  r.values_per_player_max = outcome.comm.values_per_player_max;
  r.fallbacks = outcome.meta.fallback_events;
  r.warnings = outcome.meta.warnings;
  r.violations = check_invariants(outcome);

  if (!outcome.survivors.empty()) {
    bool kept = false;
    for (ArmIndex a : outcome.survivors.back()) kept = kept || instance.mean(a) == instance.max_mean();
    r.best_eliminated = !kept;
    const auto min_gap = gaps(instance).min_gap;
    if (config.params.algorithm == Algorithm::multi_round && config.params.epsilon == 0.0 &&
        min_gap) {
      const double limit = 1.0 + std::ceil(std::log2(1.0 / *min_gap));
      r.round_bound_exceeded = static_cast<double>(outcome.comm.rounds) > limit;
    }
  }
  if (config.keep_transcripts) r.transcript = std::move(outcome.transcript);
  return r;
}

}  // namespace

double ExperimentReport::success_rate() const {
  return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
}

double ExperimentReport::std_error() const {
  if (trials == 0) return 0.0;
  const double p = success_rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

ExperimentReport run_trials(const ExperimentConfig& config) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  const auto success = config.resolved_success();

  std::vector<TrialResult> results(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < config.trials; t = next++) {
      try {
        results[t] = run_one_trial(config, success, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, config.trials));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.config = config;
  report.config.success = success;
  report.trials = config.trials;
  std::set<std::string> warnings;
  double pulls_sum = 0.0;
  double rounds_sum = 0.0;
  double values_sum = 0.0;
  for (auto& r : results) {
    report.successes += r.record.success ? 1 : 0;
    pulls_sum += r.mean_player_pulls;
    report.max_pulls_per_player = std::max(report.max_pulls_per_player, r.record.pulls_max);
    rounds_sum += static_cast<double>(r.record.rounds);
    report.max_rounds = std::max(report.max_rounds, r.record.rounds);
    values_sum += static_cast<double>(r.record.values_sent);
    report.max_values_per_player = std::max(report.max_values_per_player, r.values_per_player_max);
    report.fallback_events += r.fallbacks;
    report.best_arm_eliminated += r.best_eliminated ? 1 : 0;
    report.round_bound_exceedances += r.round_bound_exceeded ? 1 : 0;
    report.invariant_violations += r.violations.size();
    for (auto& v : r.violations) {
      if (report.violation_samples.size() < 10) {
        report.violation_samples.push_back("trial " + std::to_string(r.record.trial) + ": " + v);
      }
    }
    warnings.insert(r.warnings.begin(), r.warnings.end());
    if (config.keep_records || config.trials == 1) report.records.push_back(r.record);
    if (config.keep_transcripts) report.transcripts.push_back(std::move(r.transcript));
  }
  const double n = static_cast<double>(config.trials);
  report.mean_pulls_per_player = pulls_sum / n;
  report.mean_rounds = rounds_sum / n;
  report.mean_values_sent = values_sum / n;
  report.warnings.assign(warnings.begin(), warnings.end());
  report.wall_clock = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  return report;
}

nlohmann::json to_json(const ExperimentReport& report, bool include_timing) {
  nlohmann::json doc{
      {"config", to_json(report.config)},
      {"trials", report.trials},
      {"successes", report.successes},
      {"success_rate", report.success_rate()},
      {"std_error", report.std_error()},
      {"pulls_per_player", {{"mean", report.mean_pulls_per_player},
                            {"max", report.max_pulls_per_player}}},
      {"rounds", {{"mean", report.mean_rounds}, {"max", report.max_rounds}}},
      {"values_sent", {{"mean", report.mean_values_sent},
                       {"per_player_max", report.max_values_per_player}}},
      {"fallback_events", report.fallback_events},
      {"best_arm_eliminated", report.best_arm_eliminated},
      {"round_bound_exceedances", report.round_bound_exceedances},
      {"invariant_violations", report.invariant_violations},
      {"violation_samples", report.violation_samples},
      {"warnings", report.warnings},
  };
  if (!report.records.empty()) {
    auto records = nlohmann::json::array();
    for (const auto& r : report.records) {
      records.push_back({{"trial", r.trial},
                         {"chosen", r.chosen},
                         {"success", r.success},
                         {"pulls_max", r.pulls_max},
                         {"rounds", r.rounds},
                         {"values_sent", r.values_sent}});
    }
    doc["records"] = std::move(records);
  }
  if (include_timing) doc["wall_clock_ms"] = report.wall_clock.count();
  return doc;
}

void write_records_csv(const ExperimentReport& report, std::ostream& out) {
  out << "trial,chosen,success,pulls_max,rounds,values_sent\n";
  for (const auto& r : report.records) {
    out << r.trial << ',' << r.chosen << ',' << (r.success ? 1 : 0) << ',' << r.pulls_max << ','
        << r.rounds << ',' << r.values_sent << '\n';
  }
}

void write_trace(const ExperimentReport& report, std::ostream& out) {
  for (std::size_t t = 0; t < report.transcripts.size(); ++t) {
    for (const auto& b : report.transcripts[t]) {
      auto line = to_json(b);
      line["trial"] = t;
      out << line.dump() << '\n';
    }
  }
}

std::string summary_line(const ExperimentReport& report) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "algo=" << to_string(report.config.params.algorithm) << " trials=" << report.trials
    << " successes=" << report.successes << " rate=" << report.success_rate()
    << " se=" << report.std_error() << " mean_rounds=" << report.mean_rounds
    << " max_rounds=" << report.max_rounds << " mean_pulls=" << report.mean_pulls_per_player
    << " max_pulls=" << report.max_pulls_per_player
    << " mean_values=" << report.mean_values_sent
    << " fallbacks=" << report.fallback_events
    << " violations=" << report.invariant_violations
    << " wall_ms=" << report.wall_clock.count();
  return s.str();
}

}  // namespace collab

#include "collab/cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "collab/errors.hpp"
#include "collab/harness.hpp"

namespace collab::cli {

namespace {

struct RunFlags {
  std::string instance_path;
  std::string gen;
  std::string reward = "bernoulli";
  std::string algo = "one-round-best";
  std::string amplify_base = "one-round-best";
  double amplify_constant = 18.0;
  std::size_t k = 1;
  std::uint64_t budget = 0;
  double epsilon = 0.0;
  double delta = 0.1;
  std::size_t rounds = 1;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  bool strict_eps = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string config_path;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("instance", f.instance_path, "Instance JSON file");
  app->add_option("--gen", f.gen, "Generator spec, e.g. \"one-good(50,0.7,0.5)\"");
  app->add_option("--reward", f.reward, "Reward kind for --gen: bernoulli | deterministic");
  app->add_option("--algo", f.algo, "Strategy selector");
  app->add_option("--amplify-base", f.amplify_base, "Base strategy for --algo amplified");
  app->add_option("--amplify-constant", f.amplify_constant, "Copies = ceil(C ln(1/delta))");
  app->add_option("--k", f.k, "Number of players");
  app->add_option("--budget", f.budget, "Per-player pull budget T");
  app->add_option("--epsilon", f.epsilon, "Accuracy parameter");
  app->add_option("--delta", f.delta, "Confidence parameter");
  app->add_option("--rounds", f.rounds, "R for r-round");
  app->add_option("--trials", f.trials, "Monte-Carlo trials");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_flag("--strict-eps", f.strict_eps,
                "Judge one-round-pac against epsilon instead of 2 epsilon");
  app->add_option("--jobs", f.jobs, "Worker threads");
  app->add_option("--config", f.config_path, "Re-run the config echoed in a report JSON");
}

ExperimentConfig build_config(const RunFlags& f) {
  ExperimentConfig config;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot open config " + f.config_path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config " + f.config_path + " is not valid JSON: " + e.what());
    }
    config = config_from_json(doc);
  } else {
    if (f.instance_path.empty() == f.gen.empty()) {
      throw ConfigError("give exactly one of an instance file or --gen");
    }
    config.instance.reward = parse_reward_kind(f.reward);
    if (!f.instance_path.empty()) {
      config.instance.fixed = load_instance(f.instance_path);
      config.instance.path = f.instance_path;
      config.instance.reward = config.instance.fixed->kind();
    } else if (generator_is_random(f.gen)) {
      config.instance.generator = f.gen;
    } else {
      RngStream unused(f.seed, 0, kInstanceStream);
      config.instance.fixed = generate(f.gen, unused, config.instance.reward);
    }
    auto& p = config.params;
    p.algorithm = parse_algorithm(f.algo);
    p.amplify_base = parse_algorithm(f.amplify_base);
    p.amplify_constant = f.amplify_constant;
    p.k = f.k;
    p.budget = f.budget;
    p.epsilon = f.epsilon;
    p.delta = f.delta;
    p.rounds = f.rounds;
    config.trials = f.trials;
    config.seed = f.seed;
    config.strict_eps = f.strict_eps;
  }
  config.jobs = f.jobs;
  return config;
}

void print_warnings(const ExperimentReport& report, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  for (const auto& v : report.violation_samples) err << "invariant violation: " << v << '\n';
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("write failed for " + path);
}

template <class T>
T parse_value(const std::string& text, const std::string& axis) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value '" + text + "' for sweep axis " + axis);
  }
  return value;
}

void apply_axis(ExperimentConfig& config, const std::string& axis, const std::string& value) {
  auto& p = config.params;
  if (axis == "k") {
    p.k = parse_value<std::size_t>(value, axis);
  } else if (axis == "budget") {
    p.budget = parse_value<std::uint64_t>(value, axis);
  } else if (axis == "epsilon") {
    p.epsilon = parse_value<double>(value, axis);
  } else if (axis == "R") {
    p.rounds = parse_value<std::size_t>(value, axis);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (expected k, budget, epsilon or R)");
  }
}

}  // namespace

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> columns{
      "value",       "trials",           "successes",       "success_rate",
      "std_error",   "mean_rounds",      "max_rounds",      "mean_pulls_per_player",
      "max_pulls_per_player", "mean_values_sent", "fallback_events"};
  return columns;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collaborative best-arm identification simulator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  std::string gen_spec;
  std::string gen_out;
  std::string gen_reward = "bernoulli";
  std::uint64_t gen_seed = 0;
  gen->add_option("spec", gen_spec, "Generator spec")->required();
  gen->add_option("--seed", gen_seed, "Seed for random generators");
  gen->add_option("--out", gen_out, "Output path (default: standard output)");
  gen->add_option("--reward", gen_reward, "bernoulli | deterministic");

  auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  RunFlags run_flags;
  std::string run_out;
  std::string run_csv;
  std::string run_trace;
  bool run_timing = false;
  add_run_flags(run_cmd, run_flags);
  run_cmd->add_option("--out", run_out, "Report JSON path");
  run_cmd->add_option("--csv", run_csv, "Per-trial CSV path");
  run_cmd->add_option("--trace", run_trace, "Broadcast trace (JSON lines) path");
  run_cmd->add_flag("--timing", run_timing, "Include wall-clock time in the JSON report");

  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of an axis");
  RunFlags sweep_flags;
  std::string sweep_axis;
  std::vector<std::string> sweep_values;
  std::string sweep_out;
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--axis", sweep_axis, "k | budget | epsilon | R")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV path (default: standard output)");

  auto* budget = app.add_subcommand("budget", "Evaluate a budget formula");
  std::string budget_path;
  std::string budget_gen;
  std::string budget_mode = "eq3";
  std::size_t budget_k = 1;
  double budget_eps = 0.0;
  double budget_ca = 1.0;
  std::uint64_t budget_seed = 0;
  budget->add_option("instance", budget_path, "Instance JSON file");
  budget->add_option("--gen", budget_gen, "Generator spec");
  budget->add_option("--seed", budget_seed, "Seed for random generators");
  budget->add_option("--k", budget_k, "Number of players");
  budget->add_option("--epsilon", budget_eps, "Accuracy parameter");
  budget->add_option("--mode", budget_mode, "eq3 | eq4 | hardness");
  budget->add_option("--c-a", budget_ca, "Explorer constant");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      RngStream rng(gen_seed, 0, kInstanceStream);
      const auto instance = generate(gen_spec, rng, parse_reward_kind(gen_reward));
      if (gen_out.empty()) {
        out << to_json(instance).dump() << '\n';
      } else {
        save_instance(instance, gen_out);
      }
      return kExitOk;
    }

    if (run_cmd->parsed()) {
      auto config = build_config(run_flags);
      config.keep_records = !run_csv.empty();
      config.keep_transcripts = !run_trace.empty();
      const auto report = run_trials(config);
      print_warnings(report, err);
      if (!run_out.empty()) write_file(run_out, to_json(report, run_timing).dump(2) + "\n");
      if (!run_csv.empty()) {
        std::ostringstream csv;
        write_records_csv(report, csv);
        write_file(run_csv, csv.str());
      }
      if (!run_trace.empty()) {
        std::ostringstream trace;
        write_trace(report, trace);
        write_file(run_trace, trace.str());
      }
      out << summary_line(report) << std::endl;
      return kExitOk;
    }

    if (sweep->parsed()) {
      if (sweep_values.empty()) throw ConfigError("sweep needs at least one value");
      const auto base = build_config(sweep_flags);
      std::vector<ExperimentConfig> configs;
      for (const auto& v : sweep_values) {
        auto c = base;
        apply_axis(c, sweep_axis, v);
        validate(c);
        configs.push_back(std::move(c));
      }
      std::ostringstream csv;
      csv << std::setprecision(10);
      const auto& cols = sweep_columns();
      for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
      csv << '\n';
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto report = run_trials(configs[i]);
        print_warnings(report, err);
        csv << sweep_values[i] << ',' << report.trials << ',' << report.successes << ','
            << report.success_rate() << ',' << report.std_error() << ',' << report.mean_rounds
            << ',' << report.max_rounds << ',' << report.mean_pulls_per_player << ','
            << report.max_pulls_per_player << ',' << report.mean_values_sent << ','
            << report.fallback_events << '\n';
      }
      if (sweep_out.empty()) {
        out << csv.str() << std::flush;
      } else {
        write_file(sweep_out, csv.str());
      }
      return kExitOk;
    }

    if (budget->parsed()) {
      if (budget_path.empty() == budget_gen.empty()) {
        throw ConfigError("give exactly one of an instance file or --gen");
      }
      RngStream rng(budget_seed, 0, kInstanceStream);
      const auto instance =
          budget_path.empty() ? generate(budget_gen, rng) : load_instance(budget_path);
      const double value =
          budget_calculator(instance, budget_k, budget_eps, parse_budget_mode(budget_mode), budget_ca);
      out << std::setprecision(12) << value << std::endl;
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace collab::cli

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

#include "collab/errors.hpp"
#include "collab/harness.hpp"

namespace collab {

namespace {

struct ParsedSpec {
  std::string name;
  std::vector<double> args;
};

double parse_number(const std::string& text, std::string_view spec) {
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError("malformed generator spec '" + std::string(spec) + "': bad number '" +
                      text + "'");
  }
  return value;
}

ParsedSpec parse_spec(std::string_view spec) {
  static const std::regex shape(R"(^\s*([a-z-]+)\s*\(([^()]*)\)\s*$)");
  const std::string text(spec);
  std::smatch m;
  if (!std::regex_match(text, m, shape)) {
    throw ConfigError("malformed generator spec '" + text + "'");
  }
  ParsedSpec parsed{m[1].str(), {}};
  const std::string args = m[2].str();
  if (args.find_first_not_of(' ') != std::string::npos) {
    std::size_t start = 0;
    for (;;) {
      const auto comma = args.find(',', start);
      parsed.args.push_back(parse_number(args.substr(start, comma - start), spec));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return parsed;
}

std::size_t arm_count(double value, std::string_view spec) {
  if (!(value >= 2.0) || std::floor(value) != value || value > 1e7) {
    throw ConfigError("generator spec '" + std::string(spec) + "' needs an integer n >= 2");
  }
  return static_cast<std::size_t>(value);
}

void expect_arity(const ParsedSpec& p, std::size_t arity, std::string_view spec) {
  if (p.args.size() != arity) {
    throw ConfigError("generator '" + p.name + "' takes " + std::to_string(arity) +
                      " arguments: '" + std::string(spec) + "'");
  }
}

BanditInstance checked(std::span<const double> means, RewardKind kind, std::string_view spec) {
  try {
    return BanditInstance::with_kind(means, kind);
  } catch (const ArgumentError& e) {
    throw ConfigError("generator spec '" + std::string(spec) + "': " + e.what());
  }
}

}  // namespace

BanditInstance lower_bound_instance(std::size_t n, RngStream& rng, RewardKind kind) {
  if (n < 2) throw ArgumentError("lower-bound instance needs n >= 2");
  const double gap = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> means(n, 0.0);
  means[0] = 0.5 + gap;
  means[1] = 0.5 - gap;
  std::shuffle(means.begin(), means.end(), rng.engine());
  return BanditInstance::with_kind(means, kind);
}

bool generator_is_random(std::string_view spec) { return parse_spec(spec).name == "lower-bound"; }

BanditInstance generate(std::string_view spec, RngStream& rng, RewardKind kind) {
  const auto p = parse_spec(spec);
  if (p.name == "uniform-grid") {
    expect_arity(p, 3, spec);
    const std::size_t n = arm_count(p.args[0], spec);
    const double top = p.args[1];
    const double step = p.args[2];
    if (!(step >= 0.0)) throw ConfigError("uniform-grid step must be >= 0");
    std::vector<double> means(n);
    for (std::size_t i = 0; i < n; ++i) {
      double m = top - static_cast<double>(i) * step;
      if (m < 0.0 && m > -1e-9) m = 0.0;  // rounding at the bottom of the grid
      means[i] = m;
    }
    return checked(means, kind, spec);
  }
  if (p.name == "one-good") {
    expect_arity(p, 3, spec);
    const std::size_t n = arm_count(p.args[0], spec);
    std::vector<double> means(n, p.args[2]);
    means[0] = p.args[1];
    return checked(means, kind, spec);
  }
  if (p.name == "lower-bound") {
    expect_arity(p, 1, spec);
    return lower_bound_instance(arm_count(p.args[0], spec), rng, kind);
  }
  throw ConfigError("unknown generator '" + p.name + "' in '" + std::string(spec) + "'");
}

std::string_view to_string(BudgetMode mode) {
  switch (mode) {
    case BudgetMode::eq3: return "eq3";
    case BudgetMode::eq4: return "eq4";
    case BudgetMode::hardness: return "hardness";
  }
  return "unknown";
}

BudgetMode parse_budget_mode(std::string_view text) {
  if (text == "eq3") return BudgetMode::eq3;
  if (text == "eq4") return BudgetMode::eq4;
  if (text == "hardness") return BudgetMode::hardness;
  throw ConfigError("unknown budget mode '" + std::string(text) + "'");
}

double budget_calculator(const BanditInstance& instance, std::size_t k, double epsilon,
                         BudgetMode mode, double c_a) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (mode == BudgetMode::hardness) return hardness(instance, epsilon);

  const double eps = mode == BudgetMode::eq3 ? 0.0 : epsilon;
  instance.validate_for(eps);
  const auto profile = gaps(instance);
  const double n = static_cast<double>(instance.size());
  const double constant = mode == BudgetMode::eq3 ? 24.0 : 400.0;
  const double log_scale = mode == BudgetMode::eq3 ? n : 24.0 * n;
  double sum = 0.0;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (i == instance.best_arm()) continue;
    const double d = std::max(profile.deltas[i], eps);
    sum += std::log(log_scale / d) / (d * d);
  }
  return constant * c_a / std::sqrt(static_cast<double>(k)) * sum;
}

}  // namespace collab

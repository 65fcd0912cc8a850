#include "collab/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "collab/errors.hpp"

namespace collab {

std::string_view to_string(RewardKind kind) {
  return kind == RewardKind::bernoulli ? "bernoulli" : "deterministic";
}

RewardKind parse_reward_kind(std::string_view text) {
  if (text == "bernoulli") return RewardKind::bernoulli;
  if (text == "deterministic") return RewardKind::deterministic;
  throw ConfigError("unknown reward kind '" + std::string(text) + "'");
}

BanditInstance::BanditInstance(std::vector<ArmSpec> arms, RewardKind kind)
    : arms_(std::move(arms)), kind_(kind) {
  if (arms_.size() < 2) {
    throw ArgumentError("a bandit instance needs at least 2 arms, got " +
                        std::to_string(arms_.size()));
  }
  max_mean_ = -1.0;
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const double p = arms_[i].mean;
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ArgumentError("arm " + std::to_string(i) + " has mean outside [0, 1]");
    }
    if (p > max_mean_) {
      max_mean_ = p;
      best_arm_ = i;
      best_count_ = 1;
    } else if (p == max_mean_) {
      ++best_count_;
    }
  }
}

BanditInstance BanditInstance::with_kind(std::span<const double> means, RewardKind kind) {
  std::vector<ArmSpec> arms;
  arms.reserve(means.size());
  for (double p : means) arms.push_back({p});
  return BanditInstance(std::move(arms), kind);
}

BanditInstance BanditInstance::bernoulli(std::span<const double> means) {
  return with_kind(means, RewardKind::bernoulli);
}

BanditInstance BanditInstance::deterministic(std::span<const double> means) {
  return with_kind(means, RewardKind::deterministic);
}

double BanditInstance::mean(ArmIndex arm) const {
  if (arm >= arms_.size()) {
    throw ArgumentError("arm index " + std::to_string(arm) + " out of range [0, " +
                        std::to_string(arms_.size()) + ")");
  }
  return arms_[arm].mean;
}

std::vector<double> BanditInstance::means() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& a : arms_) out.push_back(a.mean);
  return out;
}

void BanditInstance::validate_for(double epsilon) const {
  if (epsilon < 0.0 || std::isnan(epsilon)) throw ConfigError("epsilon must be >= 0");
  if (epsilon == 0.0 && !has_unique_best()) {
    throw ConfigError("best arm is not unique; H_0 undefined for an epsilon = 0 task");
  }
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t player) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(trial + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(player + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

RngStream::RngStream(std::uint64_t master, std::uint64_t trial, std::uint64_t player)
    : master_(master), trial_(trial), player_(player), engine_(derive_seed(master, trial, player)) {}

double RngStream::uniform() noexcept {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double draw_reward(const BanditInstance& instance, ArmIndex arm, RngStream& rng) {
  const double p = instance.mean(arm);
  const double u = rng.uniform();
  if (instance.kind() == RewardKind::deterministic) return p;
  return u < p ? 1.0 : 0.0;
}

std::vector<double> GapProfile::truncated(double epsilon) const {
  std::vector<double> out(deltas.size());
  std::transform(deltas.begin(), deltas.end(), out.begin(),
                 [epsilon](double d) { return std::max(d, epsilon); });
  return out;
}

GapProfile gaps(const BanditInstance& instance) {
  GapProfile profile;
  profile.deltas.reserve(instance.size());
  for (const auto& arm : instance.arms()) {
    const double d = instance.max_mean() - arm.mean;
    profile.deltas.push_back(d);
    if (d > 0.0 && (!profile.min_gap || d < *profile.min_gap)) profile.min_gap = d;
  }
  return profile;
}

double hardness(const BanditInstance& instance, double epsilon) {
  instance.validate_for(epsilon);
  const auto profile = gaps(instance);
  double total = 0.0;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (i == instance.best_arm()) continue;
    const double g = std::max(profile.deltas[i], epsilon);
    total += 1.0 / (g * g);
  }
  return total;
}

nlohmann::json to_json(const BanditInstance& instance) {
  return nlohmann::json{{"reward", std::string(to_string(instance.kind()))},
                        {"means", instance.means()}};
}

BanditInstance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("means") || !doc["means"].is_array()) {
    throw ConfigError("instance JSON must be an object with a \"means\" array");
  }
  const auto kind = parse_reward_kind(doc.value("reward", std::string("bernoulli")));
  std::vector<double> means;
  for (const auto& v : doc["means"]) {
    if (!v.is_number()) throw ConfigError("instance means must be numbers");
    means.push_back(v.get<double>());
  }
  try {
    return BanditInstance::with_kind(means, kind);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid instance: ") + e.what());
  }
}

BanditInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("instance file " + path.string() + " is not valid JSON: " + e.what());
  }
  return instance_from_json(doc);
}

void save_instance(const BanditInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write instance file " + path.string());
  out << to_json(instance).dump() << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace collab

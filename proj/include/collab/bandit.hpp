#pragma once

// Bandit instances, reward sampling, gap profiles and the hardness measure.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace collab {

/// Arms are numbered from 0.
using ArmIndex = std::size_t;

enum class RewardKind { bernoulli, deterministic };

std::string_view to_string(RewardKind kind);
RewardKind parse_reward_kind(std::string_view text);

struct ArmSpec {
  double mean = 0.0;

  friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

class BanditInstance {
 public:
  /// Requires at least two arms with means in [0, 1].
  BanditInstance(std::vector<ArmSpec> arms, RewardKind kind);

  static BanditInstance bernoulli(std::span<const double> means);
  static BanditInstance deterministic(std::span<const double> means);
  static BanditInstance with_kind(std::span<const double> means, RewardKind kind);

  std::size_t size() const noexcept { return arms_.size(); }
  RewardKind kind() const noexcept { return kind_; }
  double mean(ArmIndex arm) const;
  std::span<const ArmSpec> arms() const noexcept { return arms_; }
  std::vector<double> means() const;

  double max_mean() const noexcept { return max_mean_; }
  /// Lowest index attaining the maximal mean.
  ArmIndex best_arm() const noexcept { return best_arm_; }
  bool has_unique_best() const noexcept { return best_count_ == 1; }

  /// Throws ConfigError for an epsilon = 0 task on an instance with tied best arms.
  void validate_for(double epsilon) const;

  friend bool operator==(const BanditInstance&, const BanditInstance&) = default;

 private:
  std::vector<ArmSpec> arms_;
  RewardKind kind_;
  double max_mean_ = 0.0;
  ArmIndex best_arm_ = 0;
  std::size_t best_count_ = 0;
};

/// splitmix64 finaliser; the building block of all seed derivation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for the stream identified by (trial, player) under a master seed.
/// This mixing function is part of the reproducibility contract.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t player) noexcept;

/// Player index reserved for instance generation within a trial.
inline constexpr std::uint64_t kInstanceStream = 0xFFFF'FFFF'FFFF'FFFFULL;

/// A single-owner random stream for one (trial, player) pair.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t master, std::uint64_t trial, std::uint64_t player);

  /// Uniform double in [0, 1) built from the top 53 bits of one engine step.
  double uniform() noexcept;

  engine_type& engine() noexcept { return engine_; }
  std::uint64_t master() const noexcept { return master_; }
  std::uint64_t trial() const noexcept { return trial_; }
  std::uint64_t player() const noexcept { return player_; }

 private:
  std::uint64_t master_;
  std::uint64_t trial_;
  std::uint64_t player_;
  engine_type engine_;
};

/// One reward sample of `arm`; consumes exactly one engine step for either reward kind.
double draw_reward(const BanditInstance& instance, ArmIndex arm, RngStream& rng);

struct GapProfile {
  std::vector<double> deltas;
  /// Smallest strictly positive gap; empty when every arm is maximal.
  std::optional<double> min_gap;

  /// Gaps truncated from below at epsilon: max(delta_i, epsilon).
  std::vector<double> truncated(double epsilon) const;
};

GapProfile gaps(const BanditInstance& instance);

/// Sum over all arms but one maximal arm of 1 / max(delta_i, epsilon)^2.
/// Throws ConfigError when epsilon = 0 and the best arm is not unique.
double hardness(const BanditInstance& instance, double epsilon);

// Instance file: {"reward": "bernoulli"|"deterministic", "means": [...]}
nlohmann::json to_json(const BanditInstance& instance);
BanditInstance instance_from_json(const nlohmann::json& doc);
BanditInstance load_instance(const std::filesystem::path& path);
void save_instance(const BanditInstance& instance, const std::filesystem::path& path);

}  // namespace collab

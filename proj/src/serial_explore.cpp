#include "collab/serial_explore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "collab/errors.hpp"

namespace collab {

double elimination_radius(std::size_t set_size, std::size_t t, double delta) {
  const double td = static_cast<double>(t);
  return std::sqrt(std::log(8.0 * static_cast<double>(set_size) * td * td / delta) / (2.0 * td));
}

namespace {

struct ArmStats {
  ArmIndex arm;
  std::uint64_t pulls = 0;
  double reward_sum = 0.0;

  double mean() const { return reward_sum / static_cast<double>(pulls); }
};

// Highest empirical mean among pulled arms, lowest index on ties. Falls back to
// the first (lowest-index) arm when nothing has been pulled yet.
std::size_t leader_position(const std::vector<ArmStats>& alive) {
  std::size_t best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alive.size(); ++i) {
    if (alive[i].pulls == 0) continue;
    const double m = alive[i].mean();
    if (m > best_mean) {
      best_mean = m;
      best = i;
    }
  }
  return best;
}

}  // namespace

ExploreOutcome successive_elimination(std::span<const ArmIndex> arm_subset, double epsilon,
                                      const SerialBudget& budget, const PullFn& pull) {
  if (arm_subset.empty()) throw ArgumentError("successive elimination needs a nonempty arm set");
  if (epsilon < 0.0) throw ArgumentError("epsilon must be >= 0");

  std::vector<ArmIndex> arms(arm_subset.begin(), arm_subset.end());
  std::sort(arms.begin(), arms.end());
  arms.erase(std::unique(arms.begin(), arms.end()), arms.end());

  std::vector<ArmStats> alive;
  alive.reserve(arms.size());
  for (ArmIndex a : arms) alive.push_back({a});

  ExploreOutcome out;
  for (ArmIndex a : arms) out.per_arm_pulls[a] = 0;

  auto finish = [&](std::size_t leader, bool graceful) {
    out.chosen = alive[leader].arm;
    out.graceful = graceful;
    for (const auto& s : alive) out.survivors.push_back(s.arm);
    return out;
  };

  if (alive.size() == 1) return finish(0, true);

  const std::size_t set_size = arms.size();
  for (std::size_t t = 1;; ++t) {
    if (out.pulls_used >= budget.cap) return finish(leader_position(alive), false);
    ++out.sweeps;
    for (auto& s : alive) {
      if (out.pulls_used >= budget.cap) return finish(leader_position(alive), false);
      s.reward_sum += pull(s.arm);
      ++s.pulls;
      ++out.pulls_used;
      ++out.per_arm_pulls[s.arm];
    }

    const double alpha = elimination_radius(set_size, t);
    const double leader_mean = alive[leader_position(alive)].mean();
    std::erase_if(alive, [&](const ArmStats& s) { return leader_mean - s.mean() > 2.0 * alpha; });

    if (alive.size() == 1) return finish(0, true);
    if (epsilon > 0.0 && alpha < epsilon / 2.0) return finish(leader_position(alive), true);
  }
}

ExploreOutcome successive_elimination(const BanditInstance& instance,
                                      std::span<const ArmIndex> arm_subset, double epsilon,
                                      const SerialBudget& budget, RngStream& rng) {
  for (ArmIndex a : arm_subset) {
    if (a >= instance.size()) throw ArgumentError("arm subset contains out-of-range arm");
  }
  return successive_elimination(arm_subset, epsilon, budget,
                                [&](ArmIndex arm) { return draw_reward(instance, arm, rng); });
}

}  // namespace collab

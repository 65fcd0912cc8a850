#pragma once

// Serial pure-exploration subroutine with a hard pull cap, instantiated as
// Successive Elimination.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "collab/bandit.hpp"

namespace collab {

struct SerialBudget {
  std::uint64_t cap = 0;
  /// Guarantee constant of the explorer; reporting only.
  double c_a = 1.0;
};

struct ExploreOutcome {
  ArmIndex chosen = 0;
  /// True when the stopping rule fired, false when the cap halted the run.
  bool graceful = false;
  std::uint64_t pulls_used = 0;
  std::map<ArmIndex, std::uint64_t> per_arm_pulls;
  /// Sweeps started, including a final truncated one.
  std::size_t sweeps = 0;
  /// Arms still alive when the run stopped, ascending.
  std::vector<ArmIndex> survivors;
};

/// Confidence level the explorer is tuned for (success probability 2/3).
inline constexpr double kExplorerDelta = 1.0 / 3.0;

/// Elimination radius after t pulls of each of `set_size` arms:
/// sqrt(ln(8 * set_size * t^2 / delta) / (2t)).
double elimination_radius(std::size_t set_size, std::size_t t, double delta = kExplorerDelta);

/// Source of rewards for one arm pull. Used so the explorer can run inside a
/// protocol player (pulls go through that player's ledger) or standalone.
using PullFn = std::function<double(ArmIndex)>;

/// Successive Elimination on `arm_subset` with accuracy `epsilon`.
/// Sweeps pull surviving arms in ascending index order; a sweep that would
/// exceed the cap is cut short. Throws ArgumentError on an empty subset.
ExploreOutcome successive_elimination(std::span<const ArmIndex> arm_subset, double epsilon,
                                      const SerialBudget& budget, const PullFn& pull);

ExploreOutcome successive_elimination(const BanditInstance& instance,
                                      std::span<const ArmIndex> arm_subset, double epsilon,
                                      const SerialBudget& budget, RngStream& rng);

}  // namespace collab

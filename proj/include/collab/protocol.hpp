#pragma once

// Synchronous broadcast model: players alternate local play with barriers at
// which everyone broadcasts one message and receives all k messages.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "collab/bandit.hpp"
#include "json.hpp"

namespace collab {

struct PayloadEntry {
  ArmIndex arm = 0;
  std::optional<double> value;
  /// Groups entries of independent copies sharing one broadcast; (section, arm) is unique.
  std::uint32_t section = 0;

  std::size_t value_count() const noexcept { return value ? 2 : 1; }
  friend bool operator==(const PayloadEntry&, const PayloadEntry&) = default;
};

using Payload = std::vector<PayloadEntry>;

struct Broadcast {
  std::size_t player = 0;
  std::size_t round = 0;
  Payload payload;

  std::size_t value_count() const noexcept;
  friend bool operator==(const Broadcast&, const Broadcast&) = default;
};

nlohmann::json to_json(const Broadcast& b);

struct CommStats {
  std::size_t rounds = 0;
  std::size_t values_sent = 0;
  std::size_t values_per_player_max = 0;

  friend bool operator==(const CommStats&, const CommStats&) = default;
};

struct ArmRecord {
  std::uint64_t pulls = 0;
  double reward_sum = 0.0;

  friend bool operator==(const ArmRecord&, const ArmRecord&) = default;
};

inline constexpr std::uint64_t kUnlimitedBudget = ~std::uint64_t{0};

/// Per-player, per-arm pull and reward accounting. Budgets are enforced here.
class PullLedger {
 public:
  PullLedger() = default;
  PullLedger(std::size_t arms, std::vector<std::uint64_t> budgets);

  /// Throws ProtocolViolation when `player` has exhausted its budget.
  void record(std::size_t player, ArmIndex arm, double reward);

  std::size_t players() const noexcept { return budgets_.size(); }
  std::size_t arms() const noexcept { return arms_; }
  std::uint64_t budget(std::size_t player) const { return budgets_.at(player); }
  std::uint64_t total_pulls(std::size_t player) const { return totals_.at(player); }
  const ArmRecord& at(std::size_t player, ArmIndex arm) const;

  friend bool operator==(const PullLedger&, const PullLedger&) = default;

 private:
  std::size_t arms_ = 0;
  std::vector<std::uint64_t> budgets_;
  std::vector<std::uint64_t> totals_;
  std::vector<ArmRecord> records_;  // players x arms, row-major
};

/// What a player may touch during its local phase: its own stream and its own
/// ledger rows. Arm means are not reachable from here.
class PlayerContext {
 public:
  PlayerContext(std::size_t player, const BanditInstance& instance, RngStream& rng,
                PullLedger& ledger)
      : player_(player), instance_(instance), rng_(rng), ledger_(ledger) {}

  double pull(ArmIndex arm);

  std::size_t player() const noexcept { return player_; }
  std::size_t arm_count() const noexcept { return instance_.size(); }
  std::uint64_t pulls_used() const { return ledger_.total_pulls(player_); }
  std::uint64_t budget() const { return ledger_.budget(player_); }
  const ArmRecord& own_record(ArmIndex arm) const { return ledger_.at(player_, arm); }
  /// The player's private stream, for its own randomised choices (subsets).
  RngStream& rng() noexcept { return rng_; }

 private:
  std::size_t player_;
  const BanditInstance& instance_;
  RngStream& rng_;
  PullLedger& ledger_;
};

class PlayerStrategy {
 public:
  virtual ~PlayerStrategy() = default;

  /// Local phase preceding barrier `round` (1-based). Returning nullopt means
  /// the player has nothing to say; if every active player is silent no
  /// barrier is executed and the run ends.
  virtual std::optional<Payload> play(std::size_t round, PlayerContext& ctx) = 0;

  /// All k broadcasts of barrier `round`, ordered by player, own included.
  virtual void receive(std::size_t round, std::span<const Broadcast> inbox) = 0;

  virtual bool done() const = 0;
  virtual ArmIndex answer() const = 0;
};

struct Player {
  std::unique_ptr<PlayerStrategy> strategy;
  RngStream rng;
  std::uint64_t budget = kUnlimitedBudget;
};

using BroadcastObserver = std::function<void(const Broadcast&)>;

struct SyncResult {
  std::vector<ArmIndex> answers;
  CommStats comm;
  PullLedger ledger;
  std::vector<Broadcast> transcript;
};

/// Runs the players in lockstep until all are done or all fall silent.
/// Throws ProtocolViolation on budget overruns, malformed payloads, or a
/// barrier requested beyond `max_rounds`. Players run sequentially in index
/// order, so the result is a pure function of the inputs.
SyncResult run_synchronous(const BanditInstance& instance, std::span<Player> players,
                           std::size_t max_rounds, const BroadcastObserver& observer = {});

}  // namespace collab

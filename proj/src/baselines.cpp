#include <numeric>

#include "collab/algorithms.hpp"
#include "collab/errors.hpp"
#include "collab/serial_explore.hpp"
#include "detail.hpp"

namespace collab {

namespace {

// Runs the serial explorer on every arm with the whole budget. With
// `vote` set it then broadcasts its answer and adopts the plurality.
class SoloPlayer final : public PlayerStrategy {
 public:
  SoloPlayer(std::size_t arms, std::uint64_t budget, double epsilon, bool vote)
      : arms_(arms), budget_(budget), epsilon_(epsilon), vote_(vote) {}

  std::optional<Payload> play(std::size_t, PlayerContext& ctx) override {
    std::vector<ArmIndex> all(arms_);
    std::iota(all.begin(), all.end(), ArmIndex{0});
    local_ = successive_elimination(all, epsilon_, SerialBudget{budget_},
                                    [&](ArmIndex arm) { return ctx.pull(arm); })
                 .chosen;
    answer_ = local_;
    if (!vote_) {
      done_ = true;
      return std::nullopt;
    }
    return Payload{{local_, std::nullopt, 0}};
  }

  void receive(std::size_t, std::span<const Broadcast> inbox) override {
    std::vector<ArmIndex> votes;
    for (const auto& b : inbox) {
      for (const auto& e : b.payload) votes.push_back(e.arm);
    }
    answer_ = plurality(votes, arms_);
    done_ = true;
  }

  bool done() const override { return done_; }
  ArmIndex answer() const override { return answer_; }
  ArmIndex local() const { return local_; }

 private:
  std::size_t arms_;
  std::uint64_t budget_;
  double epsilon_;
  bool vote_;
  ArmIndex local_ = 0;
  ArmIndex answer_ = 0;
  bool done_ = false;
};

RunOutcome run_solo(Algorithm algo, const BanditInstance& instance, std::size_t k,
                    std::uint64_t budget, double epsilon, const TrialStreams& streams,
                    const RunOptions& options, bool vote) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  instance.validate_for(epsilon);
  std::vector<Player> players;
  players.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    players.push_back({std::make_unique<SoloPlayer>(instance.size(), budget, epsilon, vote),
                       streams.player(j), budget});
  }
  auto sync = run_synchronous(instance, players, vote ? 1 : 0, options.observer);

  RunOutcome out;
  for (const auto& p : players) {
    out.per_player_choices.push_back(static_cast<const SoloPlayer&>(*p.strategy).local());
  }
  out.chosen = vote ? sync.answers.front() : out.per_player_choices.front();
  out.comm = sync.comm;
  out.ledger = std::move(sync.ledger);
  out.transcript = std::move(sync.transcript);
  out.meta = detail::make_meta(algo, k, budget, epsilon, 0.0, 0);
  return out;
}

}  // namespace

RunOutcome baseline_no_comm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                            double epsilon, const TrialStreams& streams,
                            const RunOptions& options) {
  return run_solo(Algorithm::no_comm, instance, k, budget, epsilon, streams, options, false);
}

RunOutcome baseline_majority_vote(const BanditInstance& instance, std::size_t k,
                                  std::uint64_t budget, double epsilon,
                                  const TrialStreams& streams, const RunOptions& options) {
  return run_solo(Algorithm::majority_vote, instance, k, budget, epsilon, streams, options, true);
}

RunOutcome baseline_full_comm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                              double epsilon, const TrialStreams& streams, const RunOptions&) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  instance.validate_for(epsilon);

  // Pull number p of the pooled explorer is charged to player p mod k.
  PullLedger ledger(instance.size(), std::vector<std::uint64_t>(k, budget));
  RngStream rng = streams.player(0);
  std::uint64_t pull_number = 0;
  std::vector<ArmIndex> all(instance.size());
  std::iota(all.begin(), all.end(), ArmIndex{0});
  const auto serial = successive_elimination(
      all, epsilon, SerialBudget{budget * k}, [&](ArmIndex arm) {
        const double reward = draw_reward(instance, arm, rng);
        ledger.record(pull_number++ % k, arm, reward);
        return reward;
      });

  RunOutcome out;
  out.chosen = serial.chosen;
  out.per_player_choices.assign(k, serial.chosen);
  out.comm.rounds = serial.sweeps;
  out.comm.values_sent = 2 * serial.pulls_used;
  for (std::size_t j = 0; j < k; ++j) {
    out.comm.values_per_player_max =
        std::max<std::size_t>(out.comm.values_per_player_max, 2 * ledger.total_pulls(j));
  }
  out.ledger = std::move(ledger);
  out.meta = detail::make_meta(Algorithm::full_comm, k, budget, epsilon, 0.0, 0);
  return out;
}

}  // namespace collab

#include <cmath>
#include <numeric>

#include "collab/algorithms.hpp"
#include "collab/errors.hpp"
#include "detail.hpp"

namespace collab {

namespace {

// Hard stop for epsilon = 0 runs, whose round count depends on the unknown
// smallest gap; t_r overflows long before this is reached.
constexpr std::size_t kOpenEndedRoundLimit = 48;

struct Schedule {
  enum class Kind { halving, geometric } kind = Kind::halving;
  double epsilon = 0.0;
  std::size_t rounds = 0;  // R for geometric

  double accuracy(std::size_t r) const {
    if (kind == Kind::halving) return std::ldexp(1.0, -static_cast<int>(r));
    return std::pow(epsilon, static_cast<double>(r) / static_cast<double>(rounds));
  }

  bool last(std::size_t r) const {
    if (kind == Kind::halving) return epsilon > 0.0 && accuracy(r) <= epsilon / 2.0;
    return r >= rounds;
  }

  std::size_t round_limit() const {
    if (kind == Kind::geometric) return rounds;
    return epsilon > 0.0 ? halving_round_limit(epsilon) : kOpenEndedRoundLimit;
  }
};

struct MultiRoundPlan {
  std::size_t k = 0;
  std::size_t arms = 0;
  double delta = 0.0;
  Schedule schedule;
};

// Every player samples each surviving arm up to the cumulative target t_r,
// broadcasts its cumulative means, and applies the same elimination rule to
// the pooled means. All players hold identical survivor sets.
class EliminationPlayer final : public PlayerStrategy {
 public:
  explicit EliminationPlayer(const MultiRoundPlan& plan) : plan_(plan) {
    std::vector<ArmIndex> all(plan.arms);
    std::iota(all.begin(), all.end(), ArmIndex{0});
    history_.push_back(std::move(all));
  }

  std::optional<Payload> play(std::size_t round, PlayerContext& ctx) override {
    const double eps_r = plan_.schedule.accuracy(round);
    const std::uint64_t target = std::max(
        round_samples(eps_r, plan_.k, plan_.arms, round, plan_.delta), previous_target_);
    Payload payload;
    for (ArmIndex arm : history_.back()) {
      for (std::uint64_t p = previous_target_; p < target; ++p) ctx.pull(arm);
      const auto& rec = ctx.own_record(arm);
      const double mean = rec.pulls == 0 ? 0.0 : rec.reward_sum / static_cast<double>(rec.pulls);
      payload.push_back({arm, mean, 0});
    }
    previous_target_ = target;
    return payload;
  }

  void receive(std::size_t round, std::span<const Broadcast> inbox) override {
    const auto& alive = history_.back();
    std::vector<double> pooled(plan_.arms, 0.0);
    std::vector<std::size_t> reports(plan_.arms, 0);
    for (const auto& b : inbox) {
      for (const auto& e : b.payload) {
        if (!e.value) throw ProtocolViolation(b.player, "elimination broadcast without a mean");
        pooled[e.arm] += *e.value;
        ++reports[e.arm];
      }
    }
    double leader = -1.0;
    for (ArmIndex arm : alive) {
      if (reports[arm] != plan_.k) {
        throw ProtocolViolation(0, "surviving arm " + std::to_string(arm) +
                                       " missing from some broadcasts");
      }
      pooled[arm] /= static_cast<double>(plan_.k);
      leader = std::max(leader, pooled[arm]);
    }
    const double eps_r = plan_.schedule.accuracy(round);
    std::vector<ArmIndex> next;
    for (ArmIndex arm : alive) {
      if (!(pooled[arm] < leader - eps_r)) next.push_back(arm);
    }
    history_.push_back(std::move(next));
    done_ = history_.back().size() == 1 || plan_.schedule.last(round);
  }

  bool done() const override { return done_; }
  ArmIndex answer() const override { return history_.back().front(); }

  const std::vector<std::vector<ArmIndex>>& history() const { return history_; }

 private:
  MultiRoundPlan plan_;
  std::vector<std::vector<ArmIndex>> history_;
  std::uint64_t previous_target_ = 0;
  bool done_ = false;
};

RunOutcome run_elimination(const BanditInstance& instance, const MultiRoundPlan& plan,
                           const TrialStreams& streams, const RunOptions& options,
                           RunMetadata meta) {
  const std::size_t limit = plan.schedule.round_limit();
  std::uint64_t budget = kUnlimitedBudget;
  if (plan.schedule.kind == Schedule::Kind::geometric || plan.schedule.epsilon > 0.0) {
    std::uint64_t t_max = 0;
    for (std::size_t r = 1; r <= limit; ++r) {
      t_max = std::max(t_max, round_samples(plan.schedule.accuracy(r), plan.k, plan.arms, r,
                                            plan.delta));
    }
    budget = t_max * plan.arms;
  }

  std::vector<Player> players;
  players.reserve(plan.k);
  for (std::size_t j = 0; j < plan.k; ++j) {
    players.push_back({std::make_unique<EliminationPlayer>(plan), streams.player(j), budget});
  }
  auto sync = run_synchronous(instance, players, limit, options.observer);

  RunOutcome out;
  out.chosen = sync.answers.front();
  out.per_player_choices = sync.answers;
  out.comm = sync.comm;
  out.ledger = std::move(sync.ledger);
  out.transcript = std::move(sync.transcript);
  out.survivors = static_cast<const EliminationPlayer&>(*players.front().strategy).history();
  out.meta = std::move(meta);
  out.meta.budget = budget;
  return out;
}

void check_common(std::size_t k, double delta) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
}

}  // namespace

RunOutcome multi_round(const BanditInstance& instance, std::size_t k, double epsilon, double delta,
                       const TrialStreams& streams, const RunOptions& options) {
  check_common(k, delta);
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be >= 0");
  instance.validate_for(epsilon);
  MultiRoundPlan plan{k, instance.size(), delta, {Schedule::Kind::halving, epsilon, 0}};
  return run_elimination(instance, plan, streams, options,
                         detail::make_meta(Algorithm::multi_round, k, 0, epsilon, delta, 0));
}

RunOutcome r_round(const BanditInstance& instance, std::size_t k, double epsilon, double delta,
                   std::size_t rounds, const TrialStreams& streams, const RunOptions& options) {
  check_common(k, delta);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("r-round needs epsilon in (0, 1)");
  if (rounds < 1) throw ArgumentError("r-round needs R >= 1");
  MultiRoundPlan plan{k, instance.size(), delta, {Schedule::Kind::geometric, epsilon, rounds}};
  return run_elimination(instance, plan, streams, options,
                         detail::make_meta(Algorithm::r_round, k, 0, epsilon, delta, rounds));
}

}  // namespace collab

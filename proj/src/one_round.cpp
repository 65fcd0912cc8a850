#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "collab/algorithms.hpp"
#include "collab/errors.hpp"
#include "collab/serial_explore.hpp"
#include "detail.hpp"

namespace collab {

namespace {

enum class Aggregation { by_votes, by_samples };

struct OneRoundPlan {
  std::size_t k = 0;
  std::size_t arms = 0;
  std::size_t subset = 0;
  double explore_epsilon = 0.0;
  std::size_t copies = 1;
  std::uint64_t copy_budget = 0;
  Aggregation aggregation = Aggregation::by_votes;
  double select_epsilon = 0.0;

  std::uint64_t explore_cap() const { return copy_budget / 2; }
  std::uint64_t exploit_pulls() const { return copy_budget - copy_budget / 2; }
};

// Explore on a random subset, exploit the local winner, broadcast (i_j, q_j)
// once per copy, then aggregate everybody's votes.
class OneRoundPlayer final : public PlayerStrategy {
 public:
  explicit OneRoundPlayer(const OneRoundPlan& plan) : plan_(plan) {}

  std::optional<Payload> play(std::size_t, PlayerContext& ctx) override {
    std::vector<ArmIndex> all(plan_.arms);
    std::iota(all.begin(), all.end(), ArmIndex{0});
    Payload payload;
    for (std::size_t c = 0; c < plan_.copies; ++c) {
      std::vector<ArmIndex> subset;
      subset.reserve(plan_.subset);
      std::sample(all.begin(), all.end(), std::back_inserter(subset), plan_.subset,
                  ctx.rng().engine());
      const auto explored = successive_elimination(
          subset, plan_.explore_epsilon, SerialBudget{plan_.explore_cap()},
          [&](ArmIndex arm) { return ctx.pull(arm); });
      const ArmIndex vote = explored.chosen;
      double sum = 0.0;
      for (std::uint64_t p = 0; p < plan_.exploit_pulls(); ++p) sum += ctx.pull(vote);
      const double q_hat = sum / static_cast<double>(plan_.exploit_pulls());
      local_votes_.push_back(vote);
      payload.push_back({vote, q_hat, static_cast<std::uint32_t>(c)});
    }
    return payload;
  }

  void receive(std::size_t round, std::span<const Broadcast> inbox) override {
    if (round != 1) return;
    boards_.assign(plan_.copies, VoteBoard(plan_.arms, plan_.exploit_pulls()));
    for (const auto& b : inbox) {
      for (const auto& e : b.payload) {
        if (e.section >= plan_.copies || !e.value) {
          throw ProtocolViolation(b.player, "malformed one-round vote");
        }
        boards_[e.section].add_vote(e.arm, *e.value);
      }
    }
    std::vector<ArmIndex> copy_outputs;
    for (const auto& board : boards_) {
      const Selection s = plan_.aggregation == Aggregation::by_votes
                              ? select_by_votes(board, plan_.k)
                              : select_by_samples(board, plan_.select_epsilon);
      fallbacks_ += s.fallback ? 1 : 0;
      copy_outputs.push_back(s.arm);
    }
    answer_ = plurality(copy_outputs, plan_.arms);
    done_ = true;
  }

  bool done() const override { return done_; }
  ArmIndex answer() const override { return answer_; }

  const std::vector<ArmIndex>& local_votes() const { return local_votes_; }
  const std::vector<VoteBoard>& boards() const { return boards_; }
  std::size_t fallbacks() const { return fallbacks_; }

 private:
  OneRoundPlan plan_;
  std::vector<ArmIndex> local_votes_;
  std::vector<VoteBoard> boards_;
  std::size_t fallbacks_ = 0;
  ArmIndex answer_ = 0;
  bool done_ = false;
};

RunOutcome run_one_round(const BanditInstance& instance, const OneRoundPlan& plan,
                         std::uint64_t player_budget, const TrialStreams& streams,
                         const RunOptions& options, RunMetadata meta) {
  std::vector<Player> players;
  players.reserve(plan.k);
  for (std::size_t j = 0; j < plan.k; ++j) {
    players.push_back({std::make_unique<OneRoundPlayer>(plan), streams.player(j), player_budget});
  }
  auto sync = run_synchronous(instance, players, 1, options.observer);

  const auto& lead = static_cast<const OneRoundPlayer&>(*players.front().strategy);
  RunOutcome out;
  out.chosen = sync.answers.front();
  if (plan.copies == 1) {
    for (const auto& p : players) {
      out.per_player_choices.push_back(
          static_cast<const OneRoundPlayer&>(*p.strategy).local_votes().front());
    }
  } else {
    out.per_player_choices = sync.answers;
  }
  out.comm = sync.comm;
  out.ledger = std::move(sync.ledger);
  out.transcript = std::move(sync.transcript);
  out.boards = lead.boards();
  meta.fallback_events = lead.fallbacks();
  meta.copies = plan.copies;
  out.meta = std::move(meta);
  return out;
}

void check_common(std::size_t k, std::uint64_t budget) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (budget < 2) throw ArgumentError("per-player budget T must be >= 2");
}

std::string root_range_warning(std::string_view algo, double lo, std::size_t k, std::size_t n) {
  const double root = std::sqrt(static_cast<double>(k));
  if (root >= lo && root <= static_cast<double>(n)) return {};
  std::ostringstream msg;
  msg << algo << " requires " << lo << " <= sqrt(k) <= n for its guarantee (k = " << k
      << ", n = " << n << ")";
  return msg.str();
}

}  // namespace

RunOutcome one_round_best_arm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                              const TrialStreams& streams, const RunOptions& options) {
  check_common(k, budget);
  instance.validate_for(0.0);
  OneRoundPlan plan{k, instance.size(), subset_size(instance.size(), k, 6.0), 0.0, 1, budget,
                    Aggregation::by_votes, 0.0};
  auto meta = detail::make_meta(Algorithm::one_round_best, k, budget, 0.0, 0.0, 0);
  if (auto w = root_range_warning("one-round-best", 6.0, k, instance.size()); !w.empty()) {
    meta.warnings.push_back(w);
  }
  return run_one_round(instance, plan, budget, streams, options, std::move(meta));
}

RunOutcome one_round_pac(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                         double epsilon, const TrialStreams& streams, const RunOptions& options) {
  check_common(k, budget);
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ArgumentError("one-round-pac needs epsilon in (0, 1); use one-round-best for epsilon = 0");
  }
  OneRoundPlan plan{k,      instance.size(),        subset_size(instance.size(), k, 12.0),
                    epsilon, 1, budget, Aggregation::by_samples, epsilon};
  auto meta = detail::make_meta(Algorithm::one_round_pac, k, budget, epsilon, 0.0, 0);
  if (auto w = root_range_warning("one-round-pac", 24.0, k, instance.size()); !w.empty()) {
    meta.warnings.push_back(w);
  }
  return run_one_round(instance, plan, budget, streams, options, std::move(meta));
}

RunOutcome amplify(Algorithm base, double delta, const BanditInstance& instance, std::size_t k,
                   std::uint64_t total_budget, double epsilon, const TrialStreams& streams,
                   const RunOptions& options) {
  if (base != Algorithm::one_round_best && base != Algorithm::one_round_pac) {
    throw ArgumentError("amplify needs a one-round base strategy");
  }
  const std::size_t copies = amplification_copies(delta, options.amplify_constant);
  const std::uint64_t copy_budget = total_budget / copies;
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (copy_budget < 2) {
    throw ArgumentError("amplified budget leaves each of the " + std::to_string(copies) +
                        " copies fewer than 2 pulls");
  }

  OneRoundPlan plan;
  plan.k = k;
  plan.arms = instance.size();
  plan.copies = copies;
  plan.copy_budget = copy_budget;
  std::string warning;
  if (base == Algorithm::one_round_best) {
    instance.validate_for(0.0);
    plan.subset = subset_size(instance.size(), k, 6.0);
    plan.aggregation = Aggregation::by_votes;
    warning = root_range_warning("one-round-best", 6.0, k, instance.size());
  } else {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("one-round-pac needs epsilon in (0, 1)");
    plan.subset = subset_size(instance.size(), k, 12.0);
    plan.explore_epsilon = epsilon;
    plan.aggregation = Aggregation::by_samples;
    plan.select_epsilon = epsilon;
    warning = root_range_warning("one-round-pac", 24.0, k, instance.size());
  }
  auto meta = detail::make_meta(Algorithm::amplified, k, total_budget, epsilon, delta, 0);
  meta.algorithm += "(" + std::string(to_string(base)) + ")";
  if (!warning.empty()) meta.warnings.push_back(warning);
  return run_one_round(instance, plan, total_budget, streams, options, std::move(meta));
}

}  // namespace collab

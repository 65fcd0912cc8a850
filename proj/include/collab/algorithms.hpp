#pragma once

// Collaborative exploration strategies and baselines. Every strategy is an
// orchestration of player strategies over run_synchronous, except the
// full-communication baseline which simulates the pooled serial explorer.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collab/bandit.hpp"
#include "collab/protocol.hpp"

namespace collab {

enum class Algorithm {
  one_round_best,
  one_round_pac,
  amplified,
  multi_round,
  r_round,
  no_comm,
  majority_vote,
  full_comm,
};

/// Selector strings: "one-round-best", "one-round-pac", "amplified",
/// "multi-round", "r-round", "no-comm", "majority-vote", "full-comm".
std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);
std::span<const Algorithm> all_algorithms();

/// Per-trial stream factory: player j of trial t draws from (master, t, j).
struct TrialStreams {
  std::uint64_t master = 0;
  std::uint64_t trial = 0;

  RngStream player(std::size_t j) const { return RngStream(master, trial, j); }
};

/// Aggregated one-round votes: k_i, the voters' exploit means, t_i.
class VoteBoard {
 public:
  VoteBoard() = default;
  VoteBoard(std::size_t arms, std::uint64_t exploit_pulls);

  void add_vote(ArmIndex arm, double exploit_mean);

  std::size_t arms() const noexcept { return voter_means_.size(); }
  std::size_t votes(ArmIndex arm) const { return voter_means_.at(arm).size(); }
  std::size_t total_votes() const noexcept { return total_votes_; }
  const std::vector<double>& voter_means(ArmIndex arm) const { return voter_means_.at(arm); }
  /// Unweighted mean of the voters' exploit means; 0 with no voters.
  double pooled_mean(ArmIndex arm) const;
  /// t_i = k_i * exploit pulls per player.
  std::uint64_t samples(ArmIndex arm) const { return votes(arm) * exploit_pulls_; }
  std::uint64_t exploit_pulls() const noexcept { return exploit_pulls_; }

 private:
  std::vector<std::vector<double>> voter_means_;
  std::uint64_t exploit_pulls_ = 0;
  std::size_t total_votes_ = 0;
};

struct Selection {
  ArmIndex arm = 0;
  /// The candidate set was empty and the fallback rule picked the arm.
  bool fallback = false;
};

/// argmax of pooled means over {i : k_i > sqrt(k)}; empty set → most votes.
Selection select_by_votes(const VoteBoard& board, std::size_t k);
/// argmax of pooled means over {i : t_i >= ln(12n)/eps^2}; empty set → most samples.
Selection select_by_samples(const VoteBoard& board, double epsilon);
/// Most frequent entry, lowest index on ties.
ArmIndex plurality(std::span<const ArmIndex> votes, std::size_t arms);

/// min(n, ceil(factor * n / sqrt(k))).
std::size_t subset_size(std::size_t n, std::size_t k, double factor);
/// ceil(constant * ln(1/delta)).
std::size_t amplification_copies(double delta, double constant = 18.0);
/// ceil((2 / (k eps_r^2)) ln(4 n r^2 / delta)).
std::uint64_t round_samples(double eps_r, std::size_t k, std::size_t n, std::size_t r,
                            double delta);
/// ln(12n) / eps^2.
double pac_sample_threshold(double epsilon, std::size_t n);
/// 1 + ceil(log2(1/eps)) for eps in (0, 1); the last round of the halving schedule.
std::size_t halving_round_limit(double epsilon);

struct RunMetadata {
  Algorithm kind = Algorithm::one_round_best;
  std::string algorithm;
  std::size_t k = 0;
  std::uint64_t budget = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t rounds_param = 0;
  std::size_t copies = 1;
  std::vector<std::string> warnings;
  std::size_t fallback_events = 0;
};

struct RunOutcome {
  ArmIndex chosen = 0;
  /// One-round and baseline runs: each player's local answer i_j.
  /// Multi-round and amplified runs: each player's final answer.
  std::vector<ArmIndex> per_player_choices;
  CommStats comm;
  PullLedger ledger;
  RunMetadata meta;
  /// One board per copy for one-round strategies.
  std::vector<VoteBoard> boards;
  /// S_0, S_1, ... for the elimination strategies.
  std::vector<std::vector<ArmIndex>> survivors;
  std::vector<Broadcast> transcript;

  std::uint64_t max_player_pulls() const;
  std::uint64_t total_pulls() const;
};

struct RunOptions {
  BroadcastObserver observer;
  double amplify_constant = 18.0;
};

RunOutcome one_round_best_arm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                              const TrialStreams& streams, const RunOptions& options = {});

RunOutcome one_round_pac(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                         double epsilon, const TrialStreams& streams,
                         const RunOptions& options = {});

/// m independent copies of a one-round strategy sharing one barrier; the
/// answer is the plurality of the copies' outputs. `base` must be
/// one_round_best or one_round_pac (`epsilon` is only used by the latter).
RunOutcome amplify(Algorithm base, double delta, const BanditInstance& instance, std::size_t k,
                   std::uint64_t total_budget, double epsilon, const TrialStreams& streams,
                   const RunOptions& options = {});

/// Elimination with eps_r = 2^-r until eps_r <= eps/2 or one arm survives.
RunOutcome multi_round(const BanditInstance& instance, std::size_t k, double epsilon, double delta,
                       const TrialStreams& streams, const RunOptions& options = {});

/// Elimination with eps_r = eps^(r/R) for at most R rounds.
RunOutcome r_round(const BanditInstance& instance, std::size_t k, double epsilon, double delta,
                   std::size_t rounds, const TrialStreams& streams,
                   const RunOptions& options = {});

RunOutcome baseline_no_comm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                            double epsilon, const TrialStreams& streams,
                            const RunOptions& options = {});

RunOutcome baseline_majority_vote(const BanditInstance& instance, std::size_t k,
                                  std::uint64_t budget, double epsilon,
                                  const TrialStreams& streams, const RunOptions& options = {});

/// One serial explorer with the pooled budget k*T; rounds = sweeps.
RunOutcome baseline_full_comm(const BanditInstance& instance, std::size_t k, std::uint64_t budget,
                              double epsilon, const TrialStreams& streams,
                              const RunOptions& options = {});

/// Structural invariants of a finished run (vote conservation, budgets,
/// survivor monotonicity, round limits). Returns one message per violation.
std::vector<std::string> check_invariants(const RunOutcome& outcome);

}  // namespace collab

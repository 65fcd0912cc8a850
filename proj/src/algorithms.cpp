#include "collab/algorithms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "collab/errors.hpp"
#include "detail.hpp"

namespace collab {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 8> kNames{{
    {Algorithm::one_round_best, "one-round-best"},
    {Algorithm::one_round_pac, "one-round-pac"},
    {Algorithm::amplified, "amplified"},
    {Algorithm::multi_round, "multi-round"},
    {Algorithm::r_round, "r-round"},
    {Algorithm::no_comm, "no-comm"},
    {Algorithm::majority_vote, "majority-vote"},
    {Algorithm::full_comm, "full-comm"},
}};

constexpr std::array<Algorithm, 8> kAll{Algorithm::one_round_best, Algorithm::one_round_pac,
                                        Algorithm::amplified,      Algorithm::multi_round,
                                        Algorithm::r_round,        Algorithm::no_comm,
                                        Algorithm::majority_vote,  Algorithm::full_comm};

}  // namespace

std::string_view to_string(Algorithm algo) {
  for (const auto& [a, name] : kNames) {
    if (a == algo) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kNames) {
    if (n == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::span<const Algorithm> all_algorithms() { return kAll; }

namespace detail {

RunMetadata make_meta(Algorithm algo, std::size_t k, std::uint64_t budget, double epsilon,
                      double delta, std::size_t rounds) {
  RunMetadata meta;
  meta.kind = algo;
  meta.algorithm = std::string(to_string(algo));
  meta.k = k;
  meta.budget = budget;
  meta.epsilon = epsilon;
  meta.delta = delta;
  meta.rounds_param = rounds;
  return meta;
}

}  // namespace detail

std::uint64_t RunOutcome::max_player_pulls() const {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < ledger.players(); ++j) m = std::max(m, ledger.total_pulls(j));
  return m;
}

std::uint64_t RunOutcome::total_pulls() const {
  std::uint64_t t = 0;
  for (std::size_t j = 0; j < ledger.players(); ++j) t += ledger.total_pulls(j);
  return t;
}

std::vector<std::string> check_invariants(const RunOutcome& outcome) {
  std::vector<std::string> problems;
  auto fail = [&](auto&&... parts) {
    std::ostringstream msg;
    (msg << ... << parts);
    problems.push_back(msg.str());
  };

  const auto& ledger = outcome.ledger;
  const std::size_t k = outcome.meta.k;
  if (ledger.players() != k) fail("ledger has ", ledger.players(), " players, expected ", k);
  if (outcome.per_player_choices.size() != k) fail("per-player choices do not cover k players");

  for (std::size_t j = 0; j < ledger.players(); ++j) {
    if (ledger.total_pulls(j) > ledger.budget(j)) fail("player ", j, " exceeded its budget");
    std::uint64_t sum = 0;
    for (ArmIndex a = 0; a < ledger.arms(); ++a) {
      const auto& rec = ledger.at(j, a);
      sum += rec.pulls;
      if (rec.reward_sum < 0.0 || rec.reward_sum > static_cast<double>(rec.pulls) + 1e-9) {
        fail("player ", j, " arm ", a, " reward sum outside [0, pulls]");
      }
    }
    if (sum != ledger.total_pulls(j)) fail("player ", j, " ledger rows do not sum to total");
  }

  for (std::size_t c = 0; c < outcome.boards.size(); ++c) {
    if (outcome.boards[c].total_votes() != k) {
      fail("copy ", c, " collected ", outcome.boards[c].total_votes(), " votes, expected ", k);
    }
  }

  const auto& history = outcome.survivors;
  for (std::size_t r = 1; r < history.size(); ++r) {
    if (history[r].empty()) fail("survivor set S_", r, " is empty");
    if (!std::includes(history[r - 1].begin(), history[r - 1].end(), history[r].begin(),
                       history[r].end())) {
      fail("survivor set S_", r, " is not a subset of S_", r - 1);
    }
  }

  const std::size_t rounds = outcome.comm.rounds;
  switch (outcome.meta.kind) {
    case Algorithm::one_round_best:
    case Algorithm::one_round_pac:
    case Algorithm::amplified:
    case Algorithm::majority_vote:
      if (rounds != 1) fail(outcome.meta.algorithm, " used ", rounds, " rounds, expected 1");
      break;
    case Algorithm::no_comm:
      if (rounds != 0) fail("no-comm used ", rounds, " rounds");
      break;
    case Algorithm::r_round:
      if (rounds > outcome.meta.rounds_param) {
        fail("r-round used ", rounds, " rounds, R = ", outcome.meta.rounds_param);
      }
      break;
    case Algorithm::multi_round:
      if (outcome.meta.epsilon > 0.0 && rounds > halving_round_limit(outcome.meta.epsilon)) {
        fail("multi-round used ", rounds, " rounds, limit ",
             halving_round_limit(outcome.meta.epsilon));
      }
      break;
    case Algorithm::full_comm:
      break;
  }

  if (outcome.meta.kind == Algorithm::multi_round || outcome.meta.kind == Algorithm::r_round) {
    if (history.size() != rounds + 1) fail("survivor history does not match round count");
    if (!history.empty() && !std::binary_search(history.back().begin(), history.back().end(),
                                                outcome.chosen)) {
      fail("chosen arm is not a survivor");
    }
  }

  const std::size_t per_section = 2 * ledger.arms() + 2;
  for (const auto& b : outcome.transcript) {
    std::set<std::uint32_t> sections;
    for (const auto& e : b.payload) sections.insert(e.section);
    if (b.value_count() > per_section * std::max<std::size_t>(1, sections.size())) {
      fail("player ", b.player, " sent ", b.value_count(), " values in round ", b.round);
    }
  }
  return problems;
}

}  // namespace collab

#include <cmath>
#include <numeric>

#include "collab/algorithms.hpp"
#include "collab/errors.hpp"
#include "collab/serial_explore.hpp"
#include "doctest.h"

using namespace collab;

namespace {

BanditInstance one_good_deterministic(std::size_t n) {
  std::vector<double> means(n, 0.0);
  means[0] = 1.0;
  return BanditInstance::deterministic(means);
}

std::uint64_t ledger_arm_pulls(const RunOutcome& out, std::size_t player, ArmIndex arm) {
  return out.ledger.at(player, arm).pulls;
}

}  // namespace

TEST_CASE("selector names round-trip") {
  for (Algorithm a : all_algorithms()) CHECK(parse_algorithm(to_string(a)) == a);
  CHECK(to_string(Algorithm::majority_vote) == "majority-vote");
  CHECK_THROWS_AS(parse_algorithm("two-round"), ConfigError);
}

TEST_CASE("subset sizes") {
  CHECK(subset_size(120, 144, 6.0) == 60);
  CHECK(subset_size(100, 576, 12.0) == 50);
  CHECK(subset_size(20, 36, 6.0) == 20);
  CHECK(subset_size(50, 36, 6.0) == 50);
  CHECK(subset_size(100, 50, 6.0) == 85);  // ceil(600 / 7.0711) = 85
  CHECK(subset_size(7, 1, 6.0) == 7);
  CHECK(subset_size(121, 121, 6.0) == 66);  // exact 6 * 121 / 11
}

TEST_CASE("amplification copies") {
  CHECK(amplification_copies(1.0 / 3.0 - 1e-9) == 20);  // ceil(18 ln 3) = ceil(19.775)
  CHECK(amplification_copies(0.05) == 54);              // ceil(18 ln 20) = ceil(53.92)
  CHECK(amplification_copies(0.05, 10.0) == 30);
  CHECK_THROWS_AS(amplification_copies(1.0 / 3.0), ArgumentError);
  CHECK_THROWS_AS(amplification_copies(0.0), ArgumentError);
}

TEST_CASE("round sample targets") {
  // (2 / (4 * 0.25)) ln(400) = 11.98
  CHECK(2.0 * std::log(400.0) == doctest::Approx(11.983).epsilon(1e-4));
  CHECK(round_samples(0.5, 4, 10, 1, 0.1) == 12);
  // (2 / (25 * 0.01)) ln(400) = 47.93
  CHECK(8.0 * std::log(400.0) == doctest::Approx(47.93).epsilon(1e-4));
  CHECK(round_samples(0.1, 25, 10, 1, 0.1) == 48);
  CHECK(round_samples(0.25, 4, 10, 2, 0.1) == static_cast<std::uint64_t>(
                                                  std::ceil(8.0 * std::log(1600.0))));
}

TEST_CASE("halving round limit") {
  CHECK(halving_round_limit(0.5) == 2);
  CHECK(halving_round_limit(0.25) == 3);
  CHECK(halving_round_limit(0.1) == 5);
  CHECK(halving_round_limit(0.01) == 8);
  CHECK(halving_round_limit(1.0) == 1);
  for (double eps : {0.5, 0.3, 0.25, 0.1, 0.05, 0.01, 0.003}) {
    CHECK(halving_round_limit(eps) ==
          static_cast<std::size_t>(1 + std::ceil(std::log2(1.0 / eps))));
  }
}

TEST_CASE("vote board and selection rules") {
  SUBCASE("pooled means and sample counts") {
    VoteBoard board(4, 10);
    board.add_vote(2, 0.4);
    board.add_vote(2, 0.6);
    board.add_vote(1, 0.3);
    CHECK(board.total_votes() == 3);
    CHECK(board.votes(2) == 2);
    CHECK(board.pooled_mean(2) == doctest::Approx(0.5));
    CHECK(board.samples(2) == 20);
    CHECK(board.samples(0) == 0);
  }
  SUBCASE("k_i > sqrt(k) is strict") {
    VoteBoard board(3, 5);
    for (int i = 0; i < 6; ++i) board.add_vote(1, 0.9);
    for (int i = 0; i < 30; ++i) board.add_vote(i % 2 ? 0 : 2, 0.1);
    auto s = select_by_votes(board, 36);
    CHECK(s.arm == 0);  // 15 votes each for arms 0 and 2; both in A, equal means, lowest index
    CHECK_FALSE(s.fallback);

    VoteBoard thin(3, 5);
    for (int i = 0; i < 6; ++i) thin.add_vote(1, 0.9);
    for (int i = 0; i < 5; ++i) thin.add_vote(2, 0.95);
    s = select_by_votes(thin, 36);
    CHECK(s.fallback);
    CHECK(s.arm == 1);  // most votes
  }
  SUBCASE("a single voter with enough samples qualifies") {
    // n = 10, eps = 0.5: threshold 4 ln(120) = 19.15 <= t_3 = 20
    CHECK(pac_sample_threshold(0.5, 10) == doctest::Approx(19.15).epsilon(1e-3));
    VoteBoard board(10, 20);
    board.add_vote(3, 0.2);
    for (int i = 0; i < 799; ++i) board.add_vote(4, 0.1);
    auto s = select_by_samples(board, 0.5);
    CHECK_FALSE(s.fallback);
    CHECK(s.arm == 3);  // both qualify; arm 3 has the larger pooled mean

    VoteBoard small(10, 19);
    small.add_vote(3, 0.2);
    small.add_vote(5, 0.3);
    small.add_vote(5, 0.1);
    s = select_by_samples(small, 0.5);
    CHECK_FALSE(s.fallback);
    CHECK(s.arm == 5);  // t_5 = 38 qualifies, t_3 = 19 does not

    VoteBoard none(10, 5);
    none.add_vote(7, 0.2);
    none.add_vote(2, 0.2);
    s = select_by_samples(none, 0.5);
    CHECK(s.fallback);
    CHECK(s.arm == 2);
  }
  SUBCASE("plurality") {
    CHECK(plurality(std::vector<ArmIndex>{2, 2, 5}, 6) == 2);
    CHECK(plurality(std::vector<ArmIndex>{4, 1}, 6) == 1);
  }
}

TEST_CASE("selection is invariant to shifting every voter mean") {
  RngStream rng(17, 0, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 7;
    const std::size_t k = 4 + trial % 50;
    const double shift = rng.uniform() - 0.5;
    VoteBoard a(n, 8);
    VoteBoard b(n, 8);
    for (std::size_t j = 0; j < k; ++j) {
      const auto arm = static_cast<ArmIndex>(rng.uniform() * rng.uniform() * n);
      const double q = std::round(rng.uniform() * 8.0) / 8.0;
      a.add_vote(arm, q);
      b.add_vote(arm, q + shift);
    }
    CHECK(select_by_votes(a, k).arm == select_by_votes(b, k).arm);
    CHECK(select_by_samples(a, 0.3).arm == select_by_samples(b, 0.3).arm);
  }
}

TEST_CASE("one-round best arm") {
  const auto inst = one_good_deterministic(20);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto out = one_round_best_arm(inst, 36, 200, TrialStreams{1, t});
    CHECK(out.chosen == 0);
    CHECK(out.comm.rounds == 1);
    CHECK(out.comm.values_per_player_max == 2);
    CHECK(out.comm.values_sent == 72);
    REQUIRE(out.boards.size() == 1);
    CHECK(out.boards[0].votes(0) == 36);
    CHECK(out.meta.warnings.empty());
    CHECK(check_invariants(out).empty());
  }

  SUBCASE("odd budget split") {
    const auto b = BanditInstance::bernoulli(std::vector{0.7, 0.5, 0.4, 0.3});
    const auto out = one_round_best_arm(b, 9, 7, TrialStreams{3, 0});
    CHECK(out.boards[0].exploit_pulls() == 4);
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(out.ledger.total_pulls(j) <= 7);
      CHECK(ledger_arm_pulls(out, j, out.per_player_choices[j]) >= 4);
    }
    CHECK(out.meta.warnings.size() == 1);  // sqrt(9) < 6
    CHECK(check_invariants(out).empty());
  }

  CHECK_THROWS_AS(one_round_best_arm(inst, 36, 1, TrialStreams{}), ArgumentError);
  CHECK_THROWS_AS(one_round_best_arm(inst, 0, 10, TrialStreams{}), ArgumentError);
  CHECK_THROWS_AS(
      one_round_best_arm(BanditInstance::bernoulli(std::vector{0.5, 0.5}), 4, 10, TrialStreams{}),
      ConfigError);
}

TEST_CASE("one-round subsets are uniform random subsets of the right size") {
  // n = 120, k = 144: each player explores 60 arms
  std::vector<std::size_t> hits(120, 0);
  const std::size_t k = 144;
  std::vector<double> means(120, 0.5);
  means[0] = 0.6;
  const auto unique = BanditInstance::bernoulli(means);
  const auto out = one_round_best_arm(unique, k, 120, TrialStreams{9, 0});
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t touched = 0;
    for (ArmIndex a = 0; a < 120; ++a) {
      if (out.ledger.at(j, a).pulls > 0) {
        ++touched;
        ++hits[a];
      }
    }
    // explore cap 60 = one sweep over the 60-arm subset, then exploit one of them
    CHECK(touched == 60);
  }
  // each arm lies in a player's subset with probability 1/2
  for (auto h : hits) CHECK(std::abs(static_cast<double>(h) - 72.0) < 5 * 6.0);
}

TEST_CASE("one-round PAC") {
  const auto inst = one_good_deterministic(20);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto out = one_round_pac(inst, 36, 40, 0.1, TrialStreams{2, t});
    CHECK(out.chosen == 0);
    CHECK(out.comm.rounds == 1);
    CHECK(check_invariants(out).empty());
  }
  const auto out = one_round_pac(inst, 36, 40, 0.1, TrialStreams{2, 0});
  CHECK(out.meta.warnings.size() == 1);  // sqrt(36) < 24
  CHECK_THROWS_AS(one_round_pac(inst, 36, 40, 0.0, TrialStreams{}), ArgumentError);
  CHECK_THROWS_AS(one_round_pac(inst, 36, 40, 1.0, TrialStreams{}), ArgumentError);
}

TEST_CASE("amplification") {
  const auto inst = one_good_deterministic(10);
  const double delta = 1.0 / 3.0 - 1e-9;
  const auto out = amplify(Algorithm::one_round_best, delta, inst, 36, 400, 0.0, TrialStreams{4, 0});
  CHECK(out.chosen == 0);
  CHECK(out.comm.rounds == 1);
  CHECK(out.meta.copies == 20);
  CHECK(out.comm.values_per_player_max == 40);
  CHECK(out.boards.size() == 20);
  for (std::size_t j = 0; j < 36; ++j) CHECK(out.ledger.total_pulls(j) <= 400);
  CHECK(check_invariants(out).empty());

  const auto pac = amplify(Algorithm::one_round_pac, 0.1, inst, 36, 400, 0.2, TrialStreams{4, 1});
  CHECK(pac.chosen == 0);
  CHECK(check_invariants(pac).empty());

  CHECK_THROWS_AS(amplify(Algorithm::one_round_best, 1.0 / 3.0, inst, 36, 400, 0.0, TrialStreams{}),
                  ArgumentError);
  CHECK_THROWS_AS(amplify(Algorithm::one_round_best, 0.05, inst, 36, 100, 0.0, TrialStreams{}),
                  ArgumentError);
  CHECK_THROWS_AS(amplify(Algorithm::multi_round, 0.05, inst, 36, 1000, 0.0, TrialStreams{}),
                  ArgumentError);
}

TEST_CASE("multi-round") {
  SUBCASE("zero-variance instance stops after one round") {
    const auto out = multi_round(one_good_deterministic(10), 4, 0.0, 0.1, TrialStreams{});
    CHECK(out.comm.rounds == 1);
    CHECK(out.chosen == 0);
    REQUIRE(out.survivors.size() == 2);
    CHECK(out.survivors[1] == std::vector<ArmIndex>{0});
    CHECK(check_invariants(out).empty());
  }
  SUBCASE("round 1 samples 12 pulls per arm per player") {
    std::vector<double> means(10, 0.5);
    means[0] = 0.52;
    const auto out = multi_round(BanditInstance::deterministic(means), 4, 1.0, 0.1, TrialStreams{});
    CHECK(out.comm.rounds == 1);
    for (std::size_t j = 0; j < 4; ++j) {
      for (ArmIndex a = 0; a < 10; ++a) CHECK(ledger_arm_pulls(out, j, a) == 12);
    }
    CHECK(out.survivors.back().size() == 10);
    CHECK(out.chosen == 0);
    CHECK(out.comm.values_per_player_max == 20);
  }
  SUBCASE("epsilon 0.25 needs at most 3 rounds") {
    const auto inst = BanditInstance::bernoulli(std::vector{0.6, 0.58, 0.55, 0.3});
    for (std::uint64_t t = 0; t < 20; ++t) {
      const auto out = multi_round(inst, 4, 0.25, 0.1, TrialStreams{5, t});
      CHECK(out.comm.rounds <= 3);
      CHECK(check_invariants(out).empty());
    }
  }
  SUBCASE("cumulative schedule: pulls per arm equal the target of the arm's last round") {
    const auto inst = BanditInstance::bernoulli(std::vector{0.9, 0.1, 0.5});
    const auto out = multi_round(inst, 3, 0.1, 0.2, TrialStreams{8, 0});
    for (ArmIndex a = 0; a < 3; ++a) {
      std::size_t last_round = 0;
      for (std::size_t r = 0; r + 1 < out.survivors.size(); ++r) {
        if (std::binary_search(out.survivors[r].begin(), out.survivors[r].end(), a)) {
          last_round = r + 1;
        }
      }
      const auto target = round_samples(std::ldexp(1.0, -static_cast<int>(last_round)), 3, 3,
                                        last_round, 0.2);
      for (std::size_t j = 0; j < 3; ++j) CHECK(ledger_arm_pulls(out, j, a) == target);
    }
  }
  CHECK_THROWS_AS(multi_round(one_good_deterministic(4), 4, 0.1, 1.0, TrialStreams{}),
                  ArgumentError);
  CHECK_THROWS_AS(multi_round(BanditInstance::bernoulli(std::vector{0.4, 0.4}), 4, 0.0, 0.1,
                              TrialStreams{}),
                  ConfigError);
}

TEST_CASE("r-round") {
  const auto flat = BanditInstance::deterministic(std::vector{0.5, 0.5, 0.5});
  SUBCASE("epsilon^(r/R) schedule") {
    const auto out = r_round(flat, 4, 0.01, 0.1, 2, TrialStreams{});
    CHECK(out.comm.rounds == 2);
    // cumulative targets: t_1 at eps_1 = 0.1, t_2 at eps_2 = 0.01
    const auto t2 = round_samples(0.01, 4, 3, 2, 0.1);
    for (ArmIndex a = 0; a < 3; ++a) CHECK(ledger_arm_pulls(out, 0, a) == t2);
    CHECK(std::pow(0.01, 0.5) == doctest::Approx(0.1));
  }
  SUBCASE("single round with eps_1 = eps") {
    std::vector<double> means(10, 0.5);
    const auto out = r_round(BanditInstance::deterministic(means), 25, 0.1, 0.1, 1, TrialStreams{});
    CHECK(out.comm.rounds == 1);
    for (ArmIndex a = 0; a < 10; ++a) CHECK(ledger_arm_pulls(out, 7, a) == 48);
  }
  SUBCASE("never more than R rounds") {
    const auto inst = BanditInstance::bernoulli(std::vector{0.6, 0.59, 0.2});
    for (std::size_t R : {1, 2, 4}) {
      const auto out = r_round(inst, 8, 0.05, 0.1, R, TrialStreams{1, R});
      CHECK(out.comm.rounds <= R);
      CHECK(check_invariants(out).empty());
    }
  }
  CHECK_THROWS_AS(r_round(flat, 4, 0.1, 0.1, 0, TrialStreams{}), ArgumentError);
  CHECK_THROWS_AS(r_round(flat, 4, 0.0, 0.1, 2, TrialStreams{}), ArgumentError);
}

TEST_CASE("baselines") {
  const auto two = BanditInstance::deterministic(std::vector{1.0, 0.0});
  SUBCASE("no communication") {
    const auto out = baseline_no_comm(two, 5, 100, 0.0, TrialStreams{});
    CHECK(out.comm.rounds == 0);
    CHECK(out.comm.values_sent == 0);
    CHECK(out.per_player_choices == std::vector<ArmIndex>(5, 0));
    CHECK(check_invariants(out).empty());
  }
  SUBCASE("majority vote") {
    const auto out = baseline_majority_vote(two, 5, 100, 0.0, TrialStreams{});
    CHECK(out.comm.rounds == 1);
    CHECK(out.comm.values_per_player_max == 1);
    CHECK(out.chosen == 0);
    CHECK(check_invariants(out).empty());
  }
  SUBCASE("full communication with k = 1 is the serial explorer") {
    const auto inst = BanditInstance::bernoulli(std::vector{0.6, 0.5, 0.45});
    for (std::uint64_t t = 0; t < 30; ++t) {
      const TrialStreams streams{12, t};
      const auto out = baseline_full_comm(inst, 1, 300, 0.0, streams);
      RngStream rng = streams.player(0);
      std::vector<ArmIndex> all{0, 1, 2};
      const auto serial = successive_elimination(inst, all, 0.0, SerialBudget{300}, rng);
      CHECK(out.chosen == serial.chosen);
      CHECK(out.ledger.total_pulls(0) == serial.pulls_used);
      CHECK(out.comm.rounds == serial.sweeps);
    }
  }
  SUBCASE("pooled budget") {
    const auto inst = BanditInstance::bernoulli(std::vector{0.6, 0.5, 0.45});
    const auto out = baseline_full_comm(inst, 7, 50, 0.0, TrialStreams{});
    CHECK(out.total_pulls() <= 350);
    for (std::size_t j = 0; j < 7; ++j) CHECK(out.ledger.total_pulls(j) <= 50);
    CHECK(check_invariants(out).empty());
  }
}

TEST_CASE("no-comm player 1 behaves like a solo serial run") {
  const auto inst = BanditInstance::bernoulli(std::vector{0.5, 0.6, 0.5, 0.4, 0.55});
  std::vector<ArmIndex> all{0, 1, 2, 3, 4};
  int team = 0;
  int solo = 0;
  constexpr int trials = 1000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    team += baseline_no_comm(inst, 3, 60, 0.0, TrialStreams{100, t}).chosen == 1;
    RngStream rng(200, t, 0);
    solo += successive_elimination(inst, all, 0.0, SerialBudget{60}, rng).chosen == 1;
  }
  CHECK(std::abs(team - solo) <= 0.05 * trials);
}

TEST_CASE("pooling lifts a weak solo budget") {
  // best arm last so that lowest-index tie-breaking does not favour it
  const auto inst = BanditInstance::bernoulli(std::vector{0.5, 0.9});
  constexpr int trials = 500;
  int solo = 0;
  int pooled = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    solo += baseline_full_comm(inst, 1, 2, 0.0, TrialStreams{31, t}).chosen == 1;
    pooled += baseline_full_comm(inst, 16, 2, 0.0, TrialStreams{32, t}).chosen == 1;
  }
  CHECK(solo > 0.35 * trials);
  CHECK(solo < 0.6 * trials);
  CHECK(pooled >= 0.9 * trials);
}

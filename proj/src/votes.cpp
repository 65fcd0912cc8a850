#include <cmath>
#include <limits>
#include <numeric>

#include "collab/algorithms.hpp"
#include "collab/errors.hpp"

namespace collab {

VoteBoard::VoteBoard(std::size_t arms, std::uint64_t exploit_pulls)
    : voter_means_(arms), exploit_pulls_(exploit_pulls) {}

void VoteBoard::add_vote(ArmIndex arm, double exploit_mean) {
  if (arm >= voter_means_.size()) throw ArgumentError("vote for out-of-range arm");
  voter_means_[arm].push_back(exploit_mean);
  ++total_votes_;
}

double VoteBoard::pooled_mean(ArmIndex arm) const {
  const auto& qs = voter_means_.at(arm);
  if (qs.empty()) return 0.0;
  return std::accumulate(qs.begin(), qs.end(), 0.0) / static_cast<double>(qs.size());
}

namespace {

template <class InCandidates, class FallbackKey>
Selection select(const VoteBoard& board, InCandidates in_candidates, FallbackKey fallback_key) {
  bool found = false;
  ArmIndex best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (ArmIndex i = 0; i < board.arms(); ++i) {
    if (!in_candidates(i)) continue;
    const double m = board.pooled_mean(i);
    if (!found || m > best_mean) {
      found = true;
      best = i;
      best_mean = m;
    }
  }
  if (found) return {best, false};

  ArmIndex most = 0;
  for (ArmIndex i = 1; i < board.arms(); ++i) {
    if (fallback_key(i) > fallback_key(most)) most = i;
  }
  return {most, true};
}

}  // namespace

Selection select_by_votes(const VoteBoard& board, std::size_t k) {
  // k_i > sqrt(k)  <=>  k_i^2 > k for nonnegative integers
  return select(
      board, [&](ArmIndex i) { return board.votes(i) * board.votes(i) > k; },
      [&](ArmIndex i) { return board.votes(i); });
}

Selection select_by_samples(const VoteBoard& board, double epsilon) {
  const double threshold = pac_sample_threshold(epsilon, board.arms());
  return select(
      board, [&](ArmIndex i) { return static_cast<double>(board.samples(i)) >= threshold; },
      [&](ArmIndex i) { return board.samples(i); });
}

ArmIndex plurality(std::span<const ArmIndex> votes, std::size_t arms) {
  std::vector<std::size_t> counts(arms, 0);
  for (ArmIndex v : votes) {
    if (v >= arms) throw ArgumentError("vote for out-of-range arm");
    ++counts[v];
  }
  ArmIndex best = 0;
  for (ArmIndex i = 1; i < arms; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

std::size_t subset_size(std::size_t n, std::size_t k, double factor) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  const double root = std::sqrt(static_cast<double>(k));
  const auto iroot = static_cast<std::size_t>(std::llround(root));
  double raw;
  if (iroot * iroot == k && std::floor(factor) == factor) {
    // exact integer ceiling when sqrt(k) is integral
    const auto num = static_cast<std::size_t>(factor) * n;
    raw = static_cast<double>((num + iroot - 1) / iroot);
  } else {
    raw = std::ceil(factor * static_cast<double>(n) / root);
  }
  return raw >= static_cast<double>(n) ? n : static_cast<std::size_t>(raw);
}

std::size_t amplification_copies(double delta, double constant) {
  if (!(delta > 0.0 && delta < 1.0 / 3.0)) {
    throw ArgumentError("amplification needs 0 < delta < 1/3");
  }
  if (!(constant > 0.0)) throw ArgumentError("amplification constant must be positive");
  return static_cast<std::size_t>(std::ceil(constant * std::log(1.0 / delta)));
}

std::uint64_t round_samples(double eps_r, std::size_t k, std::size_t n, std::size_t r,
                            double delta) {
  const double rr = static_cast<double>(r);
  const double t = (2.0 / (static_cast<double>(k) * eps_r * eps_r)) *
                   std::log(4.0 * static_cast<double>(n) * rr * rr / delta);
  if (!(t < 9.0e18)) throw ArgumentError("per-round sample target overflows");
  return static_cast<std::uint64_t>(std::ceil(t));
}

double pac_sample_threshold(double epsilon, std::size_t n) {
  return std::log(12.0 * static_cast<double>(n)) / (epsilon * epsilon);
}

std::size_t halving_round_limit(double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("halving_round_limit needs epsilon > 0");
  // smallest r with 2^-r <= eps/2; equals 1 + ceil(log2(1/eps)) for eps < 1
  std::size_t r = 1;
  while (std::ldexp(1.0, -static_cast<int>(r)) > epsilon / 2.0) ++r;
  return r;
}

}  // namespace collab

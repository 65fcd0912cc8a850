#include "collab/protocol.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "collab/errors.hpp"

namespace collab {

std::size_t Broadcast::value_count() const noexcept {
  std::size_t total = 0;
  for (const auto& e : payload) total += e.value_count();
  return total;
}

nlohmann::json to_json(const Broadcast& b) {
  auto entries = nlohmann::json::array();
  for (const auto& e : b.payload) {
    nlohmann::json item{{"arm", e.arm}};
    if (e.value) item["value"] = *e.value;
    if (e.section != 0) item["section"] = e.section;
    entries.push_back(std::move(item));
  }
  return {{"round", b.round}, {"player", b.player}, {"payload", std::move(entries)}};
}

PullLedger::PullLedger(std::size_t arms, std::vector<std::uint64_t> budgets)
    : arms_(arms),
      budgets_(std::move(budgets)),
      totals_(budgets_.size(), 0),
      records_(budgets_.size() * arms) {}

void PullLedger::record(std::size_t player, ArmIndex arm, double reward) {
  if (player >= budgets_.size()) throw ArgumentError("unknown player in ledger");
  if (arm >= arms_) throw ProtocolViolation(player, "pulled out-of-range arm " + std::to_string(arm));
  if (totals_[player] >= budgets_[player]) {
    throw ProtocolViolation(player, "pull budget of " + std::to_string(budgets_[player]) +
                                        " exhausted");
  }
  auto& rec = records_[player * arms_ + arm];
  ++rec.pulls;
  rec.reward_sum += reward;
  ++totals_[player];
}

const ArmRecord& PullLedger::at(std::size_t player, ArmIndex arm) const {
  if (player >= budgets_.size() || arm >= arms_) throw ArgumentError("ledger index out of range");
  return records_[player * arms_ + arm];
}

double PlayerContext::pull(ArmIndex arm) {
  if (arm >= instance_.size()) {
    throw ProtocolViolation(player_, "pulled out-of-range arm " + std::to_string(arm));
  }
  if (ledger_.total_pulls(player_) >= ledger_.budget(player_)) {
    throw ProtocolViolation(player_, "pull budget of " + std::to_string(ledger_.budget(player_)) +
                                         " exhausted");
  }
  const double reward = draw_reward(instance_, arm, rng_);
  ledger_.record(player_, arm, reward);
  return reward;
}

namespace {

void check_payload(std::size_t player, std::size_t arms, const Payload& payload) {
  std::set<std::pair<std::uint32_t, ArmIndex>> seen;
  for (const auto& e : payload) {
    if (e.arm >= arms) throw ProtocolViolation(player, "broadcast names out-of-range arm");
    if (e.value && !std::isfinite(*e.value)) {
      throw ProtocolViolation(player, "broadcast carries a non-finite value");
    }
    if (!seen.emplace(e.section, e.arm).second) {
      throw ProtocolViolation(player, "broadcast repeats arm " + std::to_string(e.arm));
    }
  }
}

}  // namespace

SyncResult run_synchronous(const BanditInstance& instance, std::span<Player> players,
                           std::size_t max_rounds, const BroadcastObserver& observer) {
  if (players.empty()) throw ArgumentError("run_synchronous needs at least one player");

  std::vector<std::uint64_t> budgets;
  budgets.reserve(players.size());
  for (const auto& p : players) budgets.push_back(p.budget);

  SyncResult result;
  result.ledger = PullLedger(instance.size(), std::move(budgets));
  std::vector<std::size_t> values_by_player(players.size(), 0);

  for (;;) {
    const std::size_t round = result.comm.rounds + 1;
    std::vector<std::optional<Payload>> outgoing(players.size());
    bool anyone_speaks = false;
    for (std::size_t j = 0; j < players.size(); ++j) {
      auto& strategy = *players[j].strategy;
      if (strategy.done()) continue;
      PlayerContext ctx(j, instance, players[j].rng, result.ledger);
      outgoing[j] = strategy.play(round, ctx);
      if (outgoing[j]) {
        check_payload(j, instance.size(), *outgoing[j]);
        anyone_speaks = true;
      }
    }
    if (!anyone_speaks) break;

    if (result.comm.rounds >= max_rounds) {
      std::size_t first = 0;
      while (!outgoing[first]) ++first;
      throw ProtocolViolation(first, "requested barrier beyond the round limit of " +
                                         std::to_string(max_rounds));
    }

    std::vector<Broadcast> inbox;
    inbox.reserve(players.size());
    for (std::size_t j = 0; j < players.size(); ++j) {
      Broadcast b{j, round, outgoing[j] ? std::move(*outgoing[j]) : Payload{}};
      const std::size_t v = b.value_count();
      result.comm.values_sent += v;
      values_by_player[j] += v;
      if (observer) observer(b);
      inbox.push_back(std::move(b));
    }
    ++result.comm.rounds;

    for (auto& p : players) p.strategy->receive(round, inbox);
    result.transcript.insert(result.transcript.end(), inbox.begin(), inbox.end());
  }

  for (std::size_t v : values_by_player) {
    result.comm.values_per_player_max = std::max(result.comm.values_per_player_max, v);
  }
  result.answers.reserve(players.size());
  for (const auto& p : players) result.answers.push_back(p.strategy->answer());
  return result;
}

}  // namespace collab

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace collab {

/// Bad argument to a library call (out-of-range arm, empty subset, T < 2, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration that cannot be run: malformed generator specs, ties for
/// a best-arm task, unreadable instance files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A player broke the communication model, e.g. pulled beyond its budget.
class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(std::size_t player, const std::string& what)
      : std::runtime_error("player " + std::to_string(player) + ": " + what), player_(player) {}

  std::size_t player() const noexcept { return player_; }

 private:
  std::size_t player_;
};

}  // namespace collab

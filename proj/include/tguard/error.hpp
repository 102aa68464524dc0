#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tguard {

/// Invalid scenario, width mismatch, or a violated scheme constraint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A partial-reconfiguration request that the fabric cannot honor.
class SwapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Logged CRCs do not line up with the replayed input trace.
class AlignmentError : public std::runtime_error {
 public:
  AlignmentError(std::uint64_t cycle, const std::string& what)
      : std::runtime_error(what), cycle_(cycle) {}
  std::uint64_t cycle() const { return cycle_; }

 private:
  std::uint64_t cycle_;
};

/// Authority database or report rejected.
class AuthorityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tguard

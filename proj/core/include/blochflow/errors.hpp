#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace blochflow {

// Invalid or inconsistent user input (config file, CLI values). Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure during a run (eigensolver, divergent integration). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// |Psi|^2 under the node floor: Bohmian quantities are undefined there.
class NodeError : public NumericError {
 public:
  explicit NodeError(const std::string& msg) : NumericError(msg) {}
};

// A weak beam sits too close to the Ewald sphere to fold perturbatively;
// the caller must retag it strong and reassemble.
class BetheFloorError : public std::runtime_error {
 public:
  explicit BetheFloorError(const std::array<int, 3>& hkl)
      : std::runtime_error("weak beam too strong to perturb"), hkl(hkl) {}
  std::array<int, 3> hkl;
};

}  // namespace blochflow

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace stochprox {

/// Dense parameter vector theta. All public entry points expect finite entries.
using ParamVector = Eigen::VectorXd;

/// Thrown when an operation is structurally unavailable (missing callable,
/// state space too large for enumeration, ...) as opposed to a bad argument.
class UnsupportedOperation : public std::logic_error {
 public:
  explicit UnsupportedOperation(const std::string& what) : std::logic_error(what) {}
};

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

inline void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* who) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite entry in input vector");
  }
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace stochprox

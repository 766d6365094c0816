#pragma once

#include <stdexcept>
#include <string>

namespace freeprob {

struct NotInvertible : std::runtime_error {
  double condition;
  explicit NotInvertible(double cond, const std::string& what)
      : std::runtime_error(what), condition(cond) {}
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FactorizationFailed : std::runtime_error {
  double residual;
  explicit FactorizationFailed(double res, const std::string& what)
      : std::runtime_error(what), residual(res) {}
};

struct DepthExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace freeprob

#pragma once

#include <stdexcept>
#include <string>

namespace relaygate {

// Raised when a queue's strict stability inequality fails. `constraint()`
// names the violated inequality, e.g. "lambda_ps < mu_ps".
class instability_error : public std::runtime_error {
  public:
    explicit instability_error(std::string constraint)
        : std::runtime_error("unstable queue: " + constraint),
          constraint_(std::move(constraint)) {}

    const std::string& constraint() const noexcept { return constraint_; }

  private:
    std::string constraint_;
};

// Optimization problem has no feasible acceptance factor.
class infeasible_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Configuration file / override problems; message carries the key path.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace relaygate

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpflow {

struct DegenerateConfiguration : std::domain_error {
  using std::domain_error::domain_error;
};

struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct InvalidBoundaryData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StiffFailure : std::runtime_error {
  StiffFailure(std::size_t path_, double time_, const std::string& state = {})
      : std::runtime_error("stiff failure on path " + std::to_string(path_) + " at t=" +
                           std::to_string(time_) + (state.empty() ? "" : ", state " + state)),
        path(path_),
        time(time_) {}
  std::size_t path;
  double time;
};

struct AcceptanceStarvation : std::runtime_error {
  AcceptanceStarvation(long attempts_, double rate_)
      : std::runtime_error("acceptance starvation after " + std::to_string(attempts_) +
                           " attempts, rate " + std::to_string(rate_)),
        attempts(attempts_),
        rate(rate_) {}
  long attempts;
  double rate;
};

}  // namespace lpflow

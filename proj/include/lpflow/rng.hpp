#pragma once

#include <cstdint>
#include <limits>

namespace lpflow {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so paths can be simulated in any order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  double uniform();  // open interval (0,1)
  double normal();

  // independent child stream, e.g. one per sub-task of a path
  CounterRng split(std::uint64_t sub) const;

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace lpflow

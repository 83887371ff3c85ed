#pragma once

#include <cstdint>

namespace decaylab {

// Counter-based generator: the n-th draw of stream (seed, stream) is a pure
// function of (seed, stream, n). Replicas therefore never share state and the
// output does not depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double gaussian();
  // +1 or -1 with equal probability.
  double rademacher();
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace decaylab

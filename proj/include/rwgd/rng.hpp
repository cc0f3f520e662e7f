#pragma once

#include <cstdint>
#include <limits>

namespace rwgd {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator. The stream it produces is a pure function of
// (seed, stream, counter), so trajectory t at iteration k can be replayed
// without touching any other state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::uint64_t key_;
  std::uint64_t index_ = 0;
};

// Derive an independent seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace rwgd

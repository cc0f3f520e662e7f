#include "rwgd/rng.hpp"

namespace rwgd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (stream * 0xd1342543de82ef95ULL));
  k = splitmix64(k ^ (counter * 0xaf251af3b0f025b5ULL));
  key_ = k;
}

CounterRng::result_type CounterRng::operator()() {
  ++index_;
  return splitmix64(key_ + index_ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(splitmix64(seed) ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

}  // namespace rwgd

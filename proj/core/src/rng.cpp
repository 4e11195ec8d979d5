#include "htc/rng.hpp"

namespace htc {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t index, std::uint64_t tag) {
  std::uint64_t h = mix64(master_seed + kGamma);
  h = mix64(h ^ (index + 0x632be59bd9b4e019ULL));
  return mix64(h ^ (tag * kGamma + 0x8cb92ba72f3d8dd7ULL));
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace htc

#include "fpanel/rng.hpp"

#include "fpanel/stats.hpp"

namespace fpanel {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: a cheap bijective mixer with full avalanche, the
// standard building block for counter-mode generation.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) + stream)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::next_uniform() {
  // Center the 53-bit integer inside its bucket: the result lands in
  // [2^-54, 1 - 2^-54], strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() { return normal_quantile(next_uniform()); }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base) + (index + 1) * kGolden);
}

} // namespace fpanel

#pragma once

#include <concepts>
#include <cstdint>

namespace gpwalk {

// SplitMix64 (Steele/Lea/Flood splittable scheme with Vigna's mix constants).
// The state is a Weyl counter, so the n-th output is a pure function of
// (seed, n); distinct keys give statistically unrelated streams, which is
// what the parallel replication drivers rely on for order-independent replay.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1): 53-bit resolution offset by half an
  // ulp, so quantile transforms never see an endpoint.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Stream key for replication i under a master seed. Two mix rounds: the
// first decorrelates adjacent master seeds, the second spreads consecutive
// indices across the counter space.
inline std::uint64_t substream_key(std::uint64_t master_seed,
                                   std::uint64_t index) {
  SplitMix64 g(master_seed);
  SplitMix64 h(g.next_u64() + 0x9e3779b97f4a7c15ull * index);
  return h.next_u64();
}

// Anything that can hand out uniforms on (0,1); tests inject fixed sequences
// through this to pin down quantile transforms exactly.
template <class T>
concept UniformSource = requires(T t) {
  { t.next_unit() } -> std::convertible_to<double>;
};

}  // namespace gpwalk

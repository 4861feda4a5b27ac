#pragma once

#include <cstdint>

#include "mfc/types.hpp"

namespace mfc::rng {

// Counter-based generator built on the splitmix64 finalizer. Keys are cheap
// to derive, so every (episode, step, agent) gets its own stream and results
// do not depend on evaluation order.

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

struct Key {
  std::uint64_t bits = 0;

  // Derive an independent child key; fold_in-style hashing.
  constexpr Key child(std::uint64_t i) const {
    return Key{mix64(bits ^ (mix64(i + 1) + kGamma))};
  }
};

class Stream {
public:
  explicit Stream(Key key) : state_(key.bits) {}
  Stream(Key key, std::uint64_t lane) : state_(key.child(lane).bits) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  // Uniform on [0, 1).
  Scalar uniform01() {
    return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53;
  }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal (Box-Muller); the second variate is cached.
  Scalar normal();

  // Two independent standard normals from one Box-Muller pair. Does not
  // touch the scalar cache.
  Vec2 normal2();

  int poisson(Scalar lambda);

private:
  std::uint64_t state_;
  bool has_spare_ = false;
  Scalar spare_ = 0.0;
};

} // namespace mfc::rng

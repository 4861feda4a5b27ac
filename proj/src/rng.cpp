#include "mfc/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfc::rng {

namespace {

// Box-Muller pair from two uniforms; u1 is kept in (0, 1].
inline void box_muller(Stream &s, Scalar &z0, Scalar &z1,
                       std::uint64_t u64a, std::uint64_t u64b) {
  (void)s;
  const Scalar u1 = static_cast<Scalar>((u64a >> 11) + 1) * 0x1.0p-53;
  const Scalar u2 = static_cast<Scalar>(u64b >> 11) * 0x1.0p-53;
  const Scalar r = std::sqrt(-2.0 * std::log(u1));
  const Scalar a = 2.0 * std::numbers::pi_v<Scalar> * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

} // namespace

Scalar Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  Scalar z0, z1;
  box_muller(*this, z0, z1, next_u64(), next_u64());
  spare_ = z1;
  has_spare_ = true;
  return z0;
}

Vec2 Stream::normal2() {
  Scalar z0, z1;
  box_muller(*this, z0, z1, next_u64(), next_u64());
  return Vec2(z0, z1);
}

int Stream::poisson(Scalar lambda) {
  if (lambda <= 0.0)
    return 0;
  // Knuth's product method; fine for the small rates used here.
  const Scalar limit = std::exp(-lambda);
  int k = 0;
  Scalar p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > limit);
  return k - 1;
}

} // namespace mfc::rng

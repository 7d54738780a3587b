#pragma once

#include <cmath>

namespace mixkit {

// Sine/cosine with the phase argument in turns (1 turn = 2*pi radians),
// evaluated by range reduction plus fixed polynomial kernels. No libm
// transcendentals, so synthesized datasets are bit-identical across
// platforms (the build disables FP contraction for the same reason).
namespace detmath {

inline double fraction(double x) { return x - std::floor(x); }

namespace detail {

inline double sin_kernel(double a) {
  // |a| <= pi/4; Taylor to a^15.
  const double a2 = a * a;
  double p = -1.0 / 1307674368000.0;
  p = p * a2 + 1.0 / 6227020800.0;
  p = p * a2 - 1.0 / 39916800.0;
  p = p * a2 + 1.0 / 362880.0;
  p = p * a2 - 1.0 / 5040.0;
  p = p * a2 + 1.0 / 120.0;
  p = p * a2 - 1.0 / 6.0;
  p = p * a2 + 1.0;
  return a * p;
}

inline double cos_kernel(double a) {
  // |a| <= pi/4; Taylor to a^16.
  const double a2 = a * a;
  double p = 1.0 / 20922789888000.0;
  p = p * a2 - 1.0 / 87178291200.0;
  p = p * a2 + 1.0 / 479001600.0;
  p = p * a2 - 1.0 / 3628800.0;
  p = p * a2 + 1.0 / 40320.0;
  p = p * a2 - 1.0 / 720.0;
  p = p * a2 + 1.0 / 24.0;
  p = p * a2 - 1.0 / 2.0;
  p = p * a2 + 1.0;
  return p;
}

}  // namespace detail

/// sin(2*pi*turns); turns may be any finite value.
inline double sin_turns(double turns) {
  const double f = fraction(turns);
  const int quadrant = static_cast<int>(std::floor(4.0 * f + 0.5));
  const double y = f - 0.25 * static_cast<double>(quadrant);
  const double a = 6.283185307179586476925286766559 * y;
  switch (quadrant & 3) {
    case 0: return detail::sin_kernel(a);
    case 1: return detail::cos_kernel(a);
    case 2: return -detail::sin_kernel(a);
    default: return -detail::cos_kernel(a);
  }
}

/// cos(2*pi*turns).
inline double cos_turns(double turns) { return sin_turns(turns + 0.25); }

}  // namespace detmath
}  // namespace mixkit

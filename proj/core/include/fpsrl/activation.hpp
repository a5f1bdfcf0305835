#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace fpsrl::activation {

/// Arctangent to within a couple of ulps. Branch-free (Cephes reduction and
/// rational approximation) so loops over many values vectorize; std::atan
/// dominated rollout time otherwise.
inline double arctan(double x) {
  constexpr double kTan3Pi8 = 2.41421356237309504880;
  constexpr double kPi2 = 1.57079632679489661923;
  constexpr double kPi4 = 0.78539816339744830962;
  constexpr double kMoreBits = 6.123233995736765886130e-17;
  const double ax = std::fabs(x);
  // The reductions -1/x and (x-1)/(x+1) share one division; selects keep
  // the loop free of branches.
  const bool mid = ax > 0.66;
  const bool big = ax > kTan3Pi8;
  double num = mid ? ax - 1.0 : ax;
  double den = mid ? ax + 1.0 : 1.0;
  num = big ? -1.0 : num;
  den = big ? ax : den;
  const double r = num / den;
  double base = mid ? kPi4 : 0.0;
  double extra = mid ? 0.5 * kMoreBits : 0.0;
  base = big ? kPi2 : base;
  extra = big ? kMoreBits : extra;
  const double z = r * r;
  const double p =
      (((-8.750608600031904122785e-1 * z - 1.615753718733365076637e1) * z -
        7.500855792314704667340e1) * z - 1.228866684490136173410e2) * z -
      6.485021904942025371773e1;
  const double q =
      ((((z + 2.485846490142306297962e1) * z + 1.650270098316988542046e2) * z +
        4.328810604912902668951e2) * z + 4.853903996359136964868e2) * z +
      1.945506571482613964425e2;
  const double y = base + (r * (z * p / q) + r + extra);
  return std::copysign(y, x);
}

inline double arctan_derivative(double z) { return 1.0 / (1.0 + z * z); }

inline void arctan_inplace(std::span<double> z) {
  double* v = z.data();
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) v[i] = arctan(v[i]);
}

}  // namespace fpsrl::activation

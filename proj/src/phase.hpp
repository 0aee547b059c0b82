#pragma once

// Compensated phase arithmetic shared by the direct and gridded engines.
// At large mode counts the rounding of k * t (or of t * M_r / 2pi) is the
// dominant error, so both are carried as an unevaluated hi + lo pair.

#include <cmath>
#include <complex>

namespace asyncov::detail {

// 1 / (2 pi) as a double-double.
inline constexpr double kInvTwoPiHi = 0.15915494309189535;
inline constexpr double kInvTwoPiLo = -9.839338337591243e-18;

/// exp(i k t) with k * t formed exactly via fma.
inline std::complex<double> unit_phase(double k, double t) {
  const double hi = k * t;
  const double lo = std::fma(k, t, -hi);
  const double c = std::cos(hi);
  const double s = std::sin(hi);
  return {c - s * lo, s + c * lo};
}

/// Position of t (on the 2pi-periodic clock) in units of a grid with `cells`
/// points: cell index and fractional offset in [0, 1).
struct GridCoord {
  long long cell;
  double frac;
};

inline GridCoord grid_coord(double t, long long cells) {
  const double m = static_cast<double>(cells);
  const double p_hi = t * kInvTwoPiHi;
  const double p_lo = std::fma(t, kInvTwoPiHi, -p_hi) + t * kInvTwoPiLo;
  const double u_hi = m * p_hi;
  const double u_lo = std::fma(m, p_hi, -u_hi) + m * p_lo;
  double cell = std::floor(u_hi);
  double frac = (u_hi - cell) + u_lo;
  if (frac < 0.0) {
    cell -= 1.0;
    frac += 1.0;
    if (frac >= 1.0) {
      cell += 1.0;
      frac = 0.0;
    }
  } else if (frac >= 1.0) {
    cell += 1.0;
    frac -= 1.0;
  }
  return {static_cast<long long>(cell), frac};
}

}  // namespace asyncov::detail

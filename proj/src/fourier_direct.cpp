#include <cmath>

#include "asyncov/error.hpp"
#include "asyncov/fourier.hpp"
#include "phase.hpp"

namespace asyncov {

namespace {

void check_inputs(const ReturnSeries& series, int N) {
  if (N < 0) throw Error(ErrorKind::Validation, "mode cutoff N must be non-negative");
  if (series.times.size() != series.deltas.size()) {
    throw Error(ErrorKind::Dimension, "asset '" + series.asset_id + "': times and deltas differ in length");
  }
}

// Exact powers are re-anchored this often; in between the recurrence
// multiplies by exp(i t_h), which adds about one rounding per step.
constexpr int kAnchorStride = 32;

}  // namespace

FourierCoeffs coeffs_forloop(const ReturnSeries& series, int N) {
  check_inputs(series, N);
  FourierCoeffs out(N);
  const auto& t = series.times;
  const auto& d = series.deltas;
  for (int k = -N; k <= N; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t h = 0; h < t.size(); ++h) {
      const auto e = detail::unit_phase(static_cast<double>(k), t[h]);
      re += d[h] * e.real();
      im += d[h] * e.imag();
    }
    out(k) = {re, im};
  }
  return out;
}

FourierCoeffs coeffs_vectorised(const ReturnSeries& series, int N) {
  check_inputs(series, N);
  FourierCoeffs out(N);
  const auto& t = series.times;
  const auto& d = series.deltas;
  const std::size_t n = t.size();

  double c0 = 0.0;
  for (double x : d) c0 += x;
  out(0) = {c0, 0.0};
  if (N == 0 || n == 0) return out;

  // Split storage keeps the per-k inner loop free of std::complex overhead.
  std::vector<double> step_re(n), step_im(n), pow_re(n), pow_im(n);
  for (std::size_t h = 0; h < n; ++h) {
    const auto e = detail::unit_phase(1.0, t[h]);
    step_re[h] = e.real();
    step_im[h] = e.imag();
  }

  for (int k = 1; k <= N; ++k) {
    if ((k - 1) % kAnchorStride == 0) {
      for (std::size_t h = 0; h < n; ++h) {
        const auto e = detail::unit_phase(static_cast<double>(k), t[h]);
        pow_re[h] = e.real();
        pow_im[h] = e.imag();
      }
    } else {
      for (std::size_t h = 0; h < n; ++h) {
        const double r = pow_re[h] * step_re[h] - pow_im[h] * step_im[h];
        const double i = pow_re[h] * step_im[h] + pow_im[h] * step_re[h];
        pow_re[h] = r;
        pow_im[h] = i;
      }
    }
    double re = 0.0;
    double im = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
      re += d[h] * pow_re[h];
      im += d[h] * pow_im[h];
    }
    out(k) = {re, im};
    out(-k) = {re, -im};
  }
  return out;
}

}  // namespace asyncov

#include <cmath>
#include <numbers>

#include "asyncov/error.hpp"
#include "asyncov/fourier.hpp"

namespace asyncov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Nearest grid index; exact half-way positions go to the right neighbour.
long long snap(double t, int grid) {
  return static_cast<long long>(std::floor(t * grid / kTwoPi + 0.5));
}

}  // namespace

int zfft_grid_size(double gap) {
  if (!(gap > 0.0)) throw Error(ErrorKind::DegenerateSpacing, "zero-padded FFT needs a positive minimum gap");
  const double size = std::round(kTwoPi / gap);
  if (size < 2.0) throw Error(ErrorKind::GridTooSmall, "zero-padded grid has fewer than 2 points");
  if (size > 1e9) throw Error(ErrorKind::GridTooSmall, "zero-padded grid would exceed 1e9 points");
  return static_cast<int>(size);
}

std::vector<double> zfft_grid(const ReturnSeries& series, double gap) {
  const int grid = zfft_grid_size(gap);
  std::vector<double> cells(static_cast<std::size_t>(grid), 0.0);
  for (std::size_t h = 0; h < series.times.size(); ++h) {
    long long l = snap(series.times[h], grid);
    // t = 2pi is the same point as t = 0 on the periodic clock.
    if (l >= grid) l -= grid;
    if (l < 0) l = 0;
    cells[static_cast<std::size_t>(l)] += series.deltas[h];
  }
  return cells;
}

bool zfft_off_grid(const ReturnSeries& series, double gap) {
  const int grid = zfft_grid_size(gap);
  for (double t : series.times) {
    const double u = t * grid / kTwoPi;
    if (std::abs(u - std::round(u)) > 1e-6) return true;
  }
  return false;
}

FourierCoeffs coeffs_zfft(const ReturnSeries& series, double gap, std::optional<int> N) {
  const int grid = zfft_grid_size(gap);
  const int limit = grid / 2;
  const int n_modes = N.value_or(limit);
  if (n_modes < 0) throw Error(ErrorKind::Validation, "mode cutoff N must be non-negative");
  if (n_modes > limit) {
    throw Error(ErrorKind::Aliasing, "N = " + std::to_string(n_modes) + " exceeds floor(N*/2) = " +
                                         std::to_string(limit) + " of the zero-padded grid");
  }
  const auto cells = zfft_grid(series, gap);
  const auto modes = forward_fft(std::span<const double>(cells));
  FourierCoeffs out(n_modes);
  out(0) = modes[0];
  for (int k = 1; k <= n_modes; ++k) {
    out(k) = std::conj(modes[static_cast<std::size_t>(k)]);
    out(-k) = modes[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace asyncov

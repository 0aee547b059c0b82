#pragma once

// Fourier coefficients of the return process: exact direct engines, the
// plain FFT and the zero-padded FFT baselines.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "asyncov/tickdata.hpp"

namespace asyncov {

using cplx = std::complex<double>;

/// c+_k = sum_h exp(+i k t_h) delta_h for k = -N..N, without any 1/(2pi)
/// factor. values[0] holds k = -N. Every engine returns this layout.
struct FourierCoeffs {
  int N = 0;
  std::vector<cplx> values;

  FourierCoeffs() = default;
  explicit FourierCoeffs(int n) : N(n), values(static_cast<std::size_t>(2 * n + 1)) {}

  std::size_t size() const noexcept { return values.size(); }
  cplx operator()(int k) const { return values[static_cast<std::size_t>(k + N)]; }
  cplx& operator()(int k) { return values[static_cast<std::size_t>(k + N)]; }
};

/// Direct summation over every (k, h) pair. O(n N); the reference oracle.
FourierCoeffs coeffs_forloop(const ReturnSeries& series, int N);

/// k = 1..N by streaming per-k inner products, k = 0 by a plain sum and k < 0
/// by conjugation. Transient memory is O(n + N).
FourierCoeffs coeffs_vectorised(const ReturnSeries& series, int N);

/// Forward DFT F(k) = sum_l grid[l] exp(-2 pi i k l / L), k = 0..L-1, for any
/// length L.
std::vector<cplx> forward_fft(std::span<const double> grid);
std::vector<cplx> forward_fft(std::span<const cplx> grid);

/// Plain FFT for synchronous data: requires returns on the uniform grid
/// t_h = 2 pi h / L with L = n_returns, and N <= L / 2.
FourierCoeffs coeffs_fft_synchronous(const ReturnSeries& series, int N);

/// Zero-padded FFT: snaps each source to the nearest point of a grid with
/// spacing `gap` (ties go right), accumulating collisions, and transforms.
/// Defaults to N = floor(N* / 2) with N* = round(2 pi / gap).
FourierCoeffs coeffs_zfft(const ReturnSeries& series, double gap,
                          std::optional<int> N = std::nullopt);

/// Grid length N* = round(2 pi / gap) used by coeffs_zfft.
int zfft_grid_size(double gap);

/// The zero-padded grid that coeffs_zfft transforms.
std::vector<double> zfft_grid(const ReturnSeries& series, double gap);

/// True when some source is further than 1e-6 grid cells from a grid point,
/// i.e. snapping would move it and the zero-padded FFT is biased.
bool zfft_off_grid(const ReturnSeries& series, double gap);

}  // namespace asyncov

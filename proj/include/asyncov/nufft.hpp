#pragma once

// Type-1 (adjoint) non-uniform FFT: spread the returns onto an oversampled
// uniform grid with a smooth kernel, FFT the grid, and divide the kernel's
// Fourier transform back out of the central modes.

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "asyncov/fourier.hpp"
#include "asyncov/tickdata.hpp"

namespace asyncov {

enum class Kernel { Gaussian, KaiserBessel, ExpSemicircle };

std::string_view to_string(Kernel kernel) noexcept;

/// Immutable precomputed parameters for one (kernel, M, epsilon) triple.
struct NufftPlan {
  Kernel kernel = Kernel::Gaussian;
  double epsilon = 1e-12;
  double sigma = 2.0;          // oversampling ratio
  int modes = 0;               // M = 2N + 1
  int grid_size = 0;           // M_r = sigma * M
  int half_width = 0;          // M_sp, grid points spread on each side
  double period = 0.0;         // 2pi (Gaussian, ES) or 1 (Kaiser-Bessel)

  double tau = 0.0;            // Gaussian variance parameter
  double lambda = 0.0;         // Gaussian gridding lambda = sigma M_sp / (sigma - 1/2)
  double kb_shape = 0.0;       // Kaiser-Bessel b = pi (2 - 1/sigma)
  double es_beta = 0.0;        // ES shape, 2.3 * width
  double es_alpha = 0.0;       // ES support radius, pi * width / M_r

  /// Continuous Fourier transform of the spreading kernel for k = -N..N
  /// (index 0 is k = -N), in the kernel's own period units.
  std::vector<double> phi_hat;

  int N() const noexcept { return (modes - 1) / 2; }
  int width() const noexcept { return 2 * half_width; }
  double phi_hat_at(int k) const { return phi_hat[static_cast<std::size_t>(k + N())]; }

  friend bool operator==(const NufftPlan&, const NufftPlan&) = default;
};

/// One-sided spreading width chosen so the relative l2 error stays below
/// epsilon. Throws on epsilon outside [1e-15, 1e-1].
int spreading_half_width(Kernel kernel, double epsilon);

/// Builds a plan for M = 2N + 1 output modes. `half_width_offset` perturbs
/// M_sp and exists only to probe how tight the default widths are.
NufftPlan make_plan(Kernel kernel, int modes, double epsilon = 1e-12, int half_width_offset = 0);

/// Kernel value at distance `x`, measured in the plan's period units.
double kernel_value(const NufftPlan& plan, double x);

/// Adds one source of strength `delta` located `frac` cells right of grid
/// point `cell` (any integer; indices wrap modulo M_r).
void spread_source(const NufftPlan& plan, long long cell, double frac, double delta,
                   std::span<double> grid);

/// Periodic discrete convolution of the returns with the kernel on the
/// M_r-point grid. Times must lie in [0, 2pi).
std::vector<double> spread(const NufftPlan& plan, const ReturnSeries& series);

/// Divides out the kernel transform and keeps the 2N + 1 central modes of
/// raw FFT output (length M_r), returned in FourierCoeffs layout.
FourierCoeffs deconvolve(const NufftPlan& plan, std::span<const cplx> raw_modes);

/// spread -> forward_fft -> deconvolve.
FourierCoeffs nufft_type1(const NufftPlan& plan, const ReturnSeries& series);

/// ||approx - exact||_2 / ||exact||_2.
double relative_l2_error(const FourierCoeffs& approx, const FourierCoeffs& exact);

}  // namespace asyncov

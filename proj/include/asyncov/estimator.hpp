#pragma once

// Malliavin-Mancino integrated covariance and correlation from Fourier
// coefficients of each asset's return process.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "asyncov/fourier.hpp"
#include "asyncov/nufft.hpp"
#include "asyncov/tickdata.hpp"

namespace asyncov {

enum class Basis { Dirichlet, Fejer };

enum class EngineKind { ForLoop, Vectorised, Fft, ZFFT, NUFFT };

std::string_view to_string(Basis basis) noexcept;
std::string_view to_string(EngineKind kind) noexcept;

struct Engine {
  EngineKind kind = EngineKind::Vectorised;
  Kernel kernel = Kernel::Gaussian;  // NUFFT only
  double epsilon = 1e-12;            // NUFFT only

  static Engine forloop() { return {EngineKind::ForLoop}; }
  static Engine vectorised() { return {EngineKind::Vectorised}; }
  static Engine fft() { return {EngineKind::Fft}; }
  static Engine zfft() { return {EngineKind::ZFFT}; }
  static Engine nufft(Kernel k, double eps = 1e-12) { return {EngineKind::NUFFT, k, eps}; }
};

/// Short label such as "vectorised" or "nufft-kb".
std::string engine_label(const Engine& engine);

struct NyquistAuto {};
struct FixedN {
  int n = 1;
};
/// Time-scale in original clock units; needs the panel span.
struct FromDt {
  double dt = 1.0;
};
using NMode = std::variant<NyquistAuto, FixedN, FromDt>;

struct EstimatorConfig {
  Basis basis = Basis::Dirichlet;
  Engine engine{};
  NMode n_mode = NyquistAuto{};
  /// Use min(N_i, N_j) for each pair instead of one panel-wide N.
  bool pairwise_n = false;
  bool correlations = true;
  /// Original-clock span T, required by FromDt when estimating from returns.
  std::optional<double> span_seconds;
  /// Worker threads for the per-asset coefficient pass.
  int threads = 1;
};

struct CovarianceEstimate {
  std::vector<std::string> assets;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd corr;     // empty when correlations were not requested
  Eigen::MatrixXi n_used;   // mode cutoff per pair
  int n_global = 0;         // panel-wide N (the smallest pair N when pairwise)
  Basis basis = Basis::Dirichlet;
  /// Pairwise N with the Dirichlet basis does not guarantee a PSD matrix.
  bool psd_warning = false;
  /// Zero-padded FFT was applied to sources off its uniform grid.
  bool zfft_asynchronous_input = false;
};

/// Dirichlet or Fejer convolution of two coefficient sets at cutoff N. Each
/// set must cover at least -N..N.
double integrated_covariance(const FourierCoeffs& ci, const FourierCoeffs& cj, int N, Basis basis);

/// N = floor((T / dt - 1) / 2).
int dt_to_n(double span, double dt);

/// Coefficients of one asset up to N with the chosen engine.
FourierCoeffs compute_coeffs(const ReturnSeries& series, int N, const Engine& engine);

/// Same, reusing a plan built for M = 2N + 1 (NUFFT engine only).
FourierCoeffs compute_coeffs(const ReturnSeries& series, const NufftPlan& plan);

/// Per-asset mode cutoffs implied by `config` (all equal unless pairwise_n).
std::vector<int> resolve_cutoffs(std::span<const ReturnSeries> series, const EstimatorConfig& config);

/// Grid spacing the zero-padded FFT uses per asset: with a common cutoff,
/// the panel shares one grid spaced by the largest per-asset minimum gap;
/// otherwise each asset uses its own minimum gap.
std::vector<double> zfft_gaps(std::span<const ReturnSeries> series, std::span<const int> cutoffs);

/// Coefficients for every asset at its own cutoff, sharing NUFFT plans.
std::vector<FourierCoeffs> panel_coeffs(std::span<const ReturnSeries> series, std::span<const int> cutoffs,
                                        const Engine& engine, int threads = 1);

/// Assembles the matrices from precomputed coefficients. `cutoffs[i]` is
/// asset i's N; pair (i, j) uses min of the two.
CovarianceEstimate covariance_from_coeffs(std::span<const FourierCoeffs> coeffs,
                                          std::span<const int> cutoffs, Basis basis,
                                          bool correlations, std::vector<std::string> assets = {});

CovarianceEstimate covariance_matrix(std::span<const ReturnSeries> series, const EstimatorConfig& config);

/// Rescales and differences the events first; supplies T for FromDt.
CovarianceEstimate covariance_matrix(std::span<const EventSeries> series, const EstimatorConfig& config);

}  // namespace asyncov

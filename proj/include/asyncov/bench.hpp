#pragma once

// Experiment drivers: wall-clock timing, engine agreement across asynchrony
// scenarios, bias and MSE against N, and estimate-versus-truth sensitivity.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asyncov/estimator.hpp"
#include "asyncov/simulate.hpp"

namespace asyncov {

/// Minimum wall-clock seconds over `reps` runs after one unmeasured warm-up.
/// A failing run is rethrown with its rep index (0 is the warm-up).
double time_min(const std::function<void()>& task, int reps = 10);

/// Least-squares slope and intercept of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Slope of log(y) on log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct TimingConfig {
  std::vector<Engine> engines{Engine::forloop(), Engine::vectorised(), Engine::fft(), Engine::zfft(),
                              Engine::nufft(Kernel::Gaussian)};
  std::vector<int> n_values{1000, 2000, 4000, 8000};
  std::vector<int> D_values{2};
  std::vector<Basis> bases{Basis::Dirichlet, Basis::Fejer};
  int reps = 10;
  std::uint64_t seed = 1;
  /// The vectorised engine is charged the n * N * 16 bytes of an explicit
  /// phase matrix; cells above this budget are recorded as skipped.
  double memory_budget_bytes = 2.0 * 1024 * 1024 * 1024;
  /// Repetitions are cut to one when a single run exceeds this many seconds.
  double slow_run_seconds = 5.0;
};

struct TimingRow {
  std::string engine;
  Basis basis = Basis::Dirichlet;
  int n = 0;
  int D = 0;
  int N = 0;
  int reps = 0;
  double seconds = 0.0;
  bool skipped = false;
};

/// Synchronous GBM per (n, D); each cell times the full estimator at the
/// Nyquist cutoff from returns to matrix.
std::vector<TimingRow> timing_sweep(const TimingConfig& config);

enum class Scenario { Synchronous, Missing, Arrival };
std::string_view to_string(Scenario scenario) noexcept;

/// Event panels for one replication of the accuracy experiments.
std::vector<EventSeries> scenario_events(Scenario scenario, const PricePaths& paths, std::uint64_t seed,
                                         double missing_fraction, std::span<const double> lambda);

struct AccuracyConfig {
  /// NUFFT engines are swept over `epsilons`; their own epsilon is ignored.
  std::vector<Engine> engines{Engine::zfft(), Engine::nufft(Kernel::Gaussian), Engine::nufft(Kernel::KaiserBessel),
                              Engine::nufft(Kernel::ExpSemicircle)};
  std::vector<double> epsilons{1e-12};
  std::vector<Scenario> scenarios{Scenario::Synchronous, Scenario::Missing, Scenario::Arrival};
  std::vector<Basis> bases{Basis::Dirichlet, Basis::Fejer};
  int n = 10000;
  int reps = 100;
  std::uint64_t seed = 1;
  double missing_fraction = 0.4;
  std::vector<double> lambda{1.0 / 30.0, 1.0 / 45.0};
  int threads = 1;
};

struct AccuracyRow {
  Scenario scenario = Scenario::Synchronous;
  Basis basis = Basis::Dirichlet;
  std::string engine;
  double epsilon = 0.0;           // 0 for engines without a tolerance
  double mean_abs_diff = 0.0;     // mean |rho_engine - rho_vectorised|
  double max_abs_diff = 0.0;
  double mean_rho_reference = 0.0;
  int reps = 0;
};

/// Per replication: Nyquist N, vectorised reference correlation, and each
/// engine's deviation from it.
std::vector<AccuracyRow> accuracy_sweep(const AccuracyConfig& config);

struct MseBiasConfig {
  std::vector<int> N_values{1, 5, 10, 25, 50};
  std::vector<Engine> engines{Engine::vectorised()};
  Basis basis = Basis::Dirichlet;
  int n = 100;
  int reps = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct MseBiasRow {
  std::string engine;
  Basis basis = Basis::Dirichlet;
  int N = 0;
  double bias11 = 0.0, se11 = 0.0, mse11 = 0.0;
  double bias12 = 0.0, se12 = 0.0, mse12 = 0.0;
};

/// Regular non-synchronous bivariate GBM (step 1/n); bias, its Monte-Carlo
/// standard error and MSE of Sigma11 and Sigma12 against the integrated truth.
std::vector<MseBiasRow> mse_bias(const MseBiasConfig& config);

struct SensitivityConfig {
  std::vector<double> sigma11_grid{0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<double> sigma12_grid{-0.1, -0.05, 0.0, 0.05, 0.1};
  std::vector<Engine> engines{Engine::nufft(Kernel::Gaussian)};
  std::vector<Basis> bases{Basis::Dirichlet, Basis::Fejer};
  int n = 10000;
  int reps = 200;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SensitivityRow {
  std::string target;   // "sigma11" or "sigma12"
  double truth = 0.0;   // integrated value over the path
  std::string engine;
  Basis basis = Basis::Dirichlet;
  double mean_estimate = 0.0;
  double se = 0.0;
};

/// Synchronous bivariate GBM whose integrated covariance equals each grid
/// value (Sigma22 = 0.2; Sigma12 follows rho = 0.35 on the Sigma11 sweep and
/// Sigma11 = 0.1 on the Sigma12 sweep).
std::vector<SensitivityRow> sensitivity(const SensitivityConfig& config);

/// Regression of mean estimate on truth for one (target, engine, basis).
LinearFit sensitivity_fit(std::span<const SensitivityRow> rows, std::string_view target, std::string_view engine,
                          Basis basis);

}  // namespace asyncov

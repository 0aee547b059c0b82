#pragma once

// Correlation as a function of the sampling time-scale: the Poisson
// asynchrony model, simulated and empirical sweeps, and block-bootstrap
// error bars.

#include <span>
#include <string>
#include <vector>

#include "asyncov/estimator.hpp"
#include "asyncov/simulate.hpp"

namespace asyncov {

/// c (1 + (exp(-lambda dt) - 1) / (lambda dt)).
double epps_theoretical(double c, double lambda, double dt);

/// One asset pair's correlation against the time-scale dt.
struct EppsCurve {
  std::string asset_i;
  std::string asset_j;
  std::vector<double> dt_values;
  std::vector<int> n_modes;
  std::vector<double> rho_mean;
  std::vector<double> rho_err;   // half-width of the error bar, 0 for a single run
  Basis basis = Basis::Dirichlet;
  int replications = 1;
  double confidence = 0.0;
};

/// N = floor((T / dt - 1) / 2) for each dt; dts must be strictly increasing.
std::vector<int> dt_grid_to_n(double span, std::span<const double> dts);

/// t_{(1+confidence)/2, R-1} times the sample standard deviation.
double t_half_width(std::span<const double> samples, double confidence);

/// Correlation matrices for every dt from one set of coefficients computed
/// at the largest N. Times are rescaled with the given bounds.
std::vector<Eigen::MatrixXd> correlation_by_dt(std::span<const EventSeries> series, double t_min, double t_max,
                                               std::span<const double> dts, const EstimatorConfig& config);

/// Single-dataset sweep (one curve per pair, no error bars).
std::vector<EppsCurve> epps_curve(std::span<const EventSeries> series, std::span<const double> dts,
                                  const EstimatorConfig& config);

struct EppsSimulation {
  GbmSpec gbm;                 // gbm.seed is the base seed
  std::vector<double> lambda;  // arrival rate per asset
  int replications = 100;
  double confidence = 0.68;
};

/// Replicated sweep on Poisson-sampled GBM paths: mean correlation and a
/// t-interval half-width of the replicate spread.
std::vector<EppsCurve> epps_simulated(const EppsSimulation& sim, std::span<const double> dts,
                                      const EstimatorConfig& config);

/// Deletes each of B equal calendar blocks in turn, keeping the full-sample
/// clock, and reports the replicate mean with a t-interval half-width.
std::vector<EppsCurve> block_bootstrap(std::span<const EventSeries> series, std::span<const double> dts,
                                       const EstimatorConfig& config, int blocks = 100,
                                       double confidence = 0.95);

}  // namespace asyncov

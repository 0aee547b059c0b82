#pragma once

// Correlated geometric Brownian motion and the three asynchrony schemes:
// random missing data, Poisson arrivals and regular non-synchronous trading.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asyncov/tickdata.hpp"

namespace asyncov {

/// Generator behind every simulated stream, recorded in output metadata.
inline constexpr std::string_view kRngName = "mt19937_64+seed_seq";

struct GbmSpec {
  int n = 10000;                  // path length (grid points)
  Eigen::VectorXd mu;             // drift per unit interval
  Eigen::MatrixXd sigma;          // covariance of log-returns per unit interval
  Eigen::VectorXd s0;             // initial prices
  double dt = 1.0 / 86400.0;      // step in units of the interval
  std::uint64_t seed = 1;

  /// Bivariate daily set-up: mu = 0.01, variances 0.1 and 0.2,
  /// correlation 0.35, one-second steps, S(0) = 100.
  static GbmSpec bivariate_daily(int n, std::uint64_t seed);
};

/// D x n prices on the uniform grid t = 0, 1, ..., n - 1 (seconds).
struct PricePaths {
  std::vector<std::string> asset_ids;
  std::vector<double> times;
  Eigen::MatrixXd prices;

  int n() const noexcept { return static_cast<int>(times.size()); }
  int D() const noexcept { return static_cast<int>(prices.rows()); }
};

/// Log-Euler recursion S_{k+1} = S_k exp[(mu - diag(Sigma)/2) dt + sqrt(dt) A Z],
/// A A^T = Sigma from a pivoted LDL^T factorisation.
PricePaths gbm_paths(const GbmSpec& spec);

/// Integrated covariance the estimator targets over the whole path:
/// Sigma * (n - 1) * dt.
Eigen::MatrixXd integrated_truth(const GbmSpec& spec);

/// U U^T with U ~ uniform(0, 1), normalised to unit diagonal and scaled to
/// the target variance. All entries are positive.
Eigen::MatrixXd random_covariance(int D, std::uint64_t seed, double variance = 0.1);

/// Every grid point of every asset.
std::vector<EventSeries> synchronous(const PricePaths& paths);

/// Removes exactly floor(fraction * n) grid points per asset, never the
/// first, with an independent draw per asset.
std::vector<EventSeries> sample_missing(const PricePaths& paths, double fraction, std::uint64_t seed);

/// Arrival clocks with Exp(lambda_i) gaps from t = 0 up to the last grid
/// time; each arrival reads the previous-tick grid price.
std::vector<EventSeries> sample_arrivals(const PricePaths& paths, std::span<const double> lambda,
                                         std::uint64_t seed);

/// Asset 1 keeps every point, asset 2 the even grid indices.
std::vector<EventSeries> regular_nonsynchronous(const PricePaths& paths);

}  // namespace asyncov

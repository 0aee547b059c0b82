#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "asyncov/epps.hpp"
#include "asyncov/error.hpp"
#include "parallel.hpp"

namespace asyncov {

namespace {

std::pair<double, double> panel_bounds(std::span<const EventSeries> series) {
  if (series.empty()) throw Error(ErrorKind::Validation, "no assets supplied");
  double lo = series.front().times().front();
  double hi = series.front().times().back();
  for (const auto& s : series) {
    lo = std::min(lo, s.times().front());
    hi = std::max(hi, s.times().back());
  }
  return {lo, hi};
}

std::vector<EppsCurve> empty_curves(std::span<const EventSeries> series, std::span<const double> dts,
                                    const std::vector<int>& modes, const EstimatorConfig& config) {
  std::vector<EppsCurve> curves;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      EppsCurve c;
      c.asset_i = series[i].asset_id();
      c.asset_j = series[j].asset_id();
      c.dt_values.assign(dts.begin(), dts.end());
      c.n_modes = modes;
      c.basis = config.basis;
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

// Fills mean and half-width from samples[r][d] per pair curve.
void summarise(std::vector<EppsCurve>& curves, const std::vector<std::vector<Eigen::MatrixXd>>& samples,
               std::size_t D, double confidence) {
  const std::size_t R = samples.size();
  std::size_t pair = 0;
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = i + 1; j < D; ++j, ++pair) {
      auto& c = curves[pair];
      c.replications = static_cast<int>(R);
      c.confidence = R > 1 ? confidence : 0.0;
      for (std::size_t d = 0; d < c.dt_values.size(); ++d) {
        std::vector<double> x(R);
        for (std::size_t r = 0; r < R; ++r) {
          x[r] = samples[r][d](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(R);
        c.rho_mean.push_back(mean);
        c.rho_err.push_back(R > 1 ? t_half_width(x, confidence) : 0.0);
      }
    }
  }
}

}  // namespace

double epps_theoretical(double c, double lambda, double dt) {
  if (!(lambda > 0.0) || !(dt > 0.0)) throw Error(ErrorKind::Validation, "lambda and dt must be positive");
  const double x = lambda * dt;
  return c * (1.0 + std::expm1(-x) / x);
}

std::vector<int> dt_grid_to_n(double span, std::span<const double> dts) {
  std::vector<int> out;
  for (std::size_t d = 0; d < dts.size(); ++d) {
    if (d > 0 && !(dts[d] > dts[d - 1])) throw Error(ErrorKind::Validation, "dt values must be strictly increasing");
    out.push_back(dt_to_n(span, dts[d]));
  }
  return out;
}

double t_half_width(std::span<const double> samples, double confidence) {
  const std::size_t R = samples.size();
  if (R < 2) throw Error(ErrorKind::Validation, "an error bar needs at least 2 replicates");
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorKind::Validation, "confidence must lie in (0, 1)");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(R);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(R - 1));
  const boost::math::students_t dist(static_cast<double>(R - 1));
  return boost::math::quantile(dist, 0.5 + confidence / 2.0) * sd;
}

std::vector<Eigen::MatrixXd> correlation_by_dt(std::span<const EventSeries> series, double t_min, double t_max,
                                               std::span<const double> dts, const EstimatorConfig& config) {
  const auto modes = dt_grid_to_n(t_max - t_min, dts);
  const int n_max = *std::max_element(modes.begin(), modes.end());
  const auto returns = panel_returns(series, t_min, t_max);
  const std::vector<int> top(returns.size(), n_max);
  const auto coeffs = panel_coeffs(returns, top, config.engine, config.threads);
  std::vector<Eigen::MatrixXd> out;
  for (int n : modes) {
    const std::vector<int> cut(returns.size(), n);
    out.push_back(covariance_from_coeffs(coeffs, cut, config.basis, true).corr);
  }
  return out;
}

std::vector<EppsCurve> epps_curve(std::span<const EventSeries> series, std::span<const double> dts,
                                  const EstimatorConfig& config) {
  const auto [lo, hi] = panel_bounds(series);
  auto curves = empty_curves(series, dts, dt_grid_to_n(hi - lo, dts), config);
  summarise(curves, {correlation_by_dt(series, lo, hi, dts, config)}, series.size(), 0.0);
  return curves;
}

std::vector<EppsCurve> epps_simulated(const EppsSimulation& sim, std::span<const double> dts,
                                      const EstimatorConfig& config) {
  if (sim.replications < 2) throw Error(ErrorKind::Validation, "simulated sweeps need at least 2 replications");
  const auto R = static_cast<std::size_t>(sim.replications);
  std::vector<std::vector<Eigen::MatrixXd>> samples(R);
  auto inner = config;
  inner.threads = 1;
  detail::parallel_for(R, config.threads, [&](std::size_t r) {
    auto spec = sim.gbm;
    spec.seed = sim.gbm.seed + r;
    const auto paths = gbm_paths(spec);
    const auto events = sample_arrivals(paths, sim.lambda, spec.seed);
    const auto [lo, hi] = panel_bounds(events);
    samples[r] = correlation_by_dt(events, lo, hi, dts, inner);
  });
  // The reported N uses the nominal horizon of the simulated grid.
  std::vector<EventSeries> labels;
  for (std::size_t i = 0; i < static_cast<std::size_t>(sim.gbm.sigma.rows()); ++i) {
    labels.emplace_back("asset" + std::to_string(i + 1), std::vector<double>{0.0, 1.0},
                        std::vector<double>{1.0, 1.0});
  }
  auto curves = empty_curves(labels, dts, dt_grid_to_n(static_cast<double>(sim.gbm.n - 1), dts), config);
  summarise(curves, samples, labels.size(), sim.confidence);
  return curves;
}

std::vector<EppsCurve> block_bootstrap(std::span<const EventSeries> series, std::span<const double> dts,
                                       const EstimatorConfig& config, int blocks, double confidence) {
  if (blocks < 2) throw Error(ErrorKind::Validation, "block bootstrap needs at least 2 blocks");
  const auto [lo, hi] = panel_bounds(series);
  const double width = (hi - lo) / blocks;
  auto block_of = [&](double t) { return std::min(static_cast<int>((t - lo) / width), blocks - 1); };

  // Build every replicate first so an underpopulated one fails before any work.
  std::vector<std::vector<EventSeries>> replicates;
  for (int b = 0; b < blocks; ++b) {
    std::vector<EventSeries> rep;
    for (const auto& s : series) {
      std::vector<double> t, p;
      for (std::size_t h = 0; h < s.size(); ++h) {
        if (block_of(s.times()[h]) == b) continue;
        t.push_back(s.times()[h]);
        p.push_back(s.prices()[h]);
      }
      if (t.size() < 2) {
        throw Error(ErrorKind::Underpopulated, "removing block " + std::to_string(b + 1) + " leaves asset '" +
                                                   s.asset_id() + "' with fewer than 2 events");
      }
      rep.emplace_back(s.asset_id(), std::move(t), std::move(p));
    }
    replicates.push_back(std::move(rep));
  }

  std::vector<std::vector<Eigen::MatrixXd>> samples(replicates.size());
  auto inner = config;
  inner.threads = 1;
  detail::parallel_for(replicates.size(), config.threads, [&](std::size_t b) {
    samples[b] = correlation_by_dt(replicates[b], lo, hi, dts, inner);
  });
  auto curves = empty_curves(series, dts, dt_grid_to_n(hi - lo, dts), config);
  summarise(curves, samples, series.size(), confidence);
  return curves;
}

}  // namespace asyncov

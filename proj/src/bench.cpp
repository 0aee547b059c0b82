#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "asyncov/bench.hpp"
#include "asyncov/error.hpp"
#include "parallel.hpp"

namespace asyncov {

namespace {

using Clock = std::chrono::steady_clock;

double run_timed(const std::function<void()>& task, int rep) {
  const auto t0 = Clock::now();
  try {
    task();
  } catch (const Error& e) {
    throw Error(e.kind(), "rep " + std::to_string(rep) + ": " + e.what(), e.line());
  } catch (const std::exception& e) {
    throw std::runtime_error("rep " + std::to_string(rep) + ": " + e.what());
  }
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_nufft(const Engine& e) { return e.kind == EngineKind::NUFFT; }

// Expands NUFFT engines over the epsilon list; other engines appear once.
std::vector<Engine> expand(const std::vector<Engine>& engines, const std::vector<double>& epsilons) {
  std::vector<Engine> out;
  for (const auto& e : engines) {
    if (!is_nufft(e)) {
      out.push_back(e);
      continue;
    }
    for (double eps : epsilons) out.push_back(Engine::nufft(e.kernel, eps));
  }
  return out;
}

GbmSpec timing_spec(int n, int D, std::uint64_t seed) {
  GbmSpec spec;
  spec.n = n;
  spec.mu = Eigen::VectorXd::Constant(D, 0.01);
  spec.sigma = random_covariance(D, seed);
  spec.s0 = Eigen::VectorXd::Constant(D, 100.0);
  spec.seed = seed;
  return spec;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return base * 1000003ULL + a * 10007ULL + b;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

double time_min(const std::function<void()>& task, int reps) {
  if (reps < 1) throw Error(ErrorKind::Validation, "time_min needs at least one repetition");
  run_timed(task, 0);
  double best = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= reps; ++r) best = std::min(best, run_timed(task, r));
  return best;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Dimension, "regression needs two equal-length series");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::DivisionByZero, "regressor has no spread");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

std::vector<TimingRow> timing_sweep(const TimingConfig& config) {
  std::vector<TimingRow> rows;
  for (int D : config.D_values) {
    for (int n : config.n_values) {
      const auto paths = gbm_paths(timing_spec(n, D, config.seed));
      const auto events = synchronous(paths);
      const auto returns = panel_returns(events);
      const int N = nyquist_cutoff(std::span<const ReturnSeries>(returns));
      for (const auto& engine : config.engines) {
        for (Basis basis : config.bases) {
          TimingRow row{engine_label(engine), basis, n, D, N, 0, 0.0, false};
          const double phase_bytes = static_cast<double>(n) * N * 16.0;
          if (engine.kind == EngineKind::Vectorised && phase_bytes > config.memory_budget_bytes) {
            row.skipped = true;
            rows.push_back(row);
            continue;
          }
          EstimatorConfig est;
          est.basis = basis;
          est.engine = engine;
          auto task = [&] { (void)covariance_matrix(std::span<const ReturnSeries>(returns), est); };
          const double warm = run_timed(task, 0);
          row.reps = warm > config.slow_run_seconds ? 1 : config.reps;
          double best = std::numeric_limits<double>::infinity();
          for (int r = 1; r <= row.reps; ++r) best = std::min(best, run_timed(task, r));
          row.seconds = best;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::string_view to_string(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::Synchronous: return "synchronous";
    case Scenario::Missing: return "missing";
    case Scenario::Arrival: return "arrival";
  }
  return "unknown";
}

std::vector<EventSeries> scenario_events(Scenario scenario, const PricePaths& paths, std::uint64_t seed,
                                         double missing_fraction, std::span<const double> lambda) {
  switch (scenario) {
    case Scenario::Synchronous: return synchronous(paths);
    case Scenario::Missing: return sample_missing(paths, missing_fraction, seed);
    case Scenario::Arrival: return sample_arrivals(paths, lambda, seed);
  }
  throw Error(ErrorKind::Validation, "unknown scenario");
}

std::vector<AccuracyRow> accuracy_sweep(const AccuracyConfig& config) {
  if (config.reps < 1) throw Error(ErrorKind::Validation, "accuracy sweep needs at least one replication");
  const auto engines = expand(config.engines, config.epsilons);
  const std::size_t E = engines.size();
  const std::size_t B = config.bases.size();
  const auto R = static_cast<std::size_t>(config.reps);
  std::vector<AccuracyRow> rows;

  for (Scenario scenario : config.scenarios) {
    // diffs[r][e * B + b]; reference[r][b]
    std::vector<std::vector<double>> diffs(R, std::vector<double>(E * B));
    std::vector<std::vector<double>> reference(R, std::vector<double>(B));
    detail::parallel_for(R, config.threads, [&](std::size_t r) {
      const std::uint64_t seed = config.seed + r;
      const auto paths = gbm_paths(GbmSpec::bivariate_daily(config.n, seed));
      const auto events = scenario_events(scenario, paths, seed, config.missing_fraction, config.lambda);
      const auto returns = panel_returns(events);
      const int N = nyquist_cutoff(std::span<const ReturnSeries>(returns));
      const std::vector<int> cut(returns.size(), N);
      const auto ref = panel_coeffs(returns, cut, Engine::vectorised());
      for (std::size_t b = 0; b < B; ++b) {
        reference[r][b] = covariance_from_coeffs(ref, cut, config.bases[b], true).corr(0, 1);
      }
      for (std::size_t e = 0; e < E; ++e) {
        const auto c = panel_coeffs(returns, cut, engines[e]);
        for (std::size_t b = 0; b < B; ++b) {
          const double rho = covariance_from_coeffs(c, cut, config.bases[b], true).corr(0, 1);
          diffs[r][e * B + b] = std::abs(rho - reference[r][b]);
        }
      }
    });
    for (std::size_t e = 0; e < E; ++e) {
      for (std::size_t b = 0; b < B; ++b) {
        AccuracyRow row;
        row.scenario = scenario;
        row.basis = config.bases[b];
        row.engine = engine_label(engines[e]);
        row.epsilon = is_nufft(engines[e]) ? engines[e].epsilon : 0.0;
        row.reps = config.reps;
        double sum = 0.0, mx = 0.0, ref = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          sum += diffs[r][e * B + b];
          mx = std::max(mx, diffs[r][e * B + b]);
          ref += reference[r][b];
        }
        row.mean_abs_diff = sum / static_cast<double>(R);
        row.max_abs_diff = mx;
        row.mean_rho_reference = ref / static_cast<double>(R);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<MseBiasRow> mse_bias(const MseBiasConfig& config) {
  if (config.reps < 2) throw Error(ErrorKind::Validation, "bias and MSE need at least two replications");
  if (config.N_values.empty()) throw Error(ErrorKind::Validation, "no N values supplied");
  const int n_max = *std::max_element(config.N_values.begin(), config.N_values.end());
  const std::size_t E = config.engines.size();
  const std::size_t K = config.N_values.size();
  const auto R = static_cast<std::size_t>(config.reps);

  auto spec_for = [&](std::uint64_t seed) {
    auto spec = GbmSpec::bivariate_daily(config.n, seed);
    spec.dt = 1.0 / config.n;
    return spec;
  };
  const Eigen::MatrixXd truth = integrated_truth(spec_for(config.seed));

  // err11[e][k][r], err12[e][k][r]
  std::vector<std::vector<std::vector<double>>> err11(E, std::vector<std::vector<double>>(K, std::vector<double>(R)));
  auto err12 = err11;
  detail::parallel_for(R, config.threads, [&](std::size_t r) {
    const auto paths = gbm_paths(spec_for(config.seed + r));
    const auto events = regular_nonsynchronous(paths);
    const auto returns = panel_returns(events);
    const std::vector<int> top(returns.size(), n_max);
    for (std::size_t e = 0; e < E; ++e) {
      const auto c = panel_coeffs(returns, top, config.engines[e]);
      for (std::size_t k = 0; k < K; ++k) {
        const int N = config.N_values[k];
        err11[e][k][r] = integrated_covariance(c[0], c[0], N, config.basis) - truth(0, 0);
        err12[e][k][r] = integrated_covariance(c[0], c[1], N, config.basis) - truth(0, 1);
      }
    }
  });

  std::vector<MseBiasRow> rows;
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t k = 0; k < K; ++k) {
      MseBiasRow row;
      row.engine = engine_label(config.engines[e]);
      row.basis = config.basis;
      row.N = config.N_values[k];
      const auto& a = err11[e][k];
      const auto& b = err12[e][k];
      row.bias11 = mean_of(a);
      row.se11 = std_error(a);
      row.bias12 = mean_of(b);
      row.se12 = std_error(b);
      for (std::size_t r = 0; r < R; ++r) {
        row.mse11 += a[r] * a[r];
        row.mse12 += b[r] * b[r];
      }
      row.mse11 /= static_cast<double>(R);
      row.mse12 /= static_cast<double>(R);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SensitivityRow> sensitivity(const SensitivityConfig& config) {
  if (config.reps < 2) throw Error(ErrorKind::Validation, "sensitivity needs at least two replications");
  struct Point {
    std::string target;
    double truth;
    Eigen::Matrix2d sigma;
  };
  std::vector<Point> points;
  for (double v : config.sigma11_grid) {
    const double c = 0.35 * std::sqrt(v * 0.2);
    points.push_back({"sigma11", v, (Eigen::Matrix2d() << v, c, c, 0.2).finished()});
  }
  for (double v : config.sigma12_grid) {
    points.push_back({"sigma12", v, (Eigen::Matrix2d() << 0.1, v, v, 0.2).finished()});
  }

  const std::size_t E = config.engines.size();
  const std::size_t B = config.bases.size();
  const auto R = static_cast<std::size_t>(config.reps);
  std::vector<SensitivityRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    // est[r][e * B + b]
    std::vector<std::vector<double>> est(R, std::vector<double>(E * B));
    detail::parallel_for(R, config.threads, [&](std::size_t r) {
      GbmSpec spec;
      spec.n = config.n;
      spec.mu = Eigen::Vector2d(0.01, 0.01);
      spec.sigma = points[p].sigma;
      spec.s0 = Eigen::Vector2d(100.0, 100.0);
      // Unit horizon: the integrated covariance equals the grid value.
      spec.dt = 1.0 / (config.n - 1);
      spec.seed = mix_seed(config.seed, p, r);
      const auto returns = panel_returns(synchronous(gbm_paths(spec)));
      const int N = nyquist_cutoff(std::span<const ReturnSeries>(returns));
      const std::vector<int> cut(2, N);
      for (std::size_t e = 0; e < E; ++e) {
        const auto c = panel_coeffs(returns, cut, config.engines[e]);
        for (std::size_t b = 0; b < B; ++b) {
          const bool diag = points[p].target == "sigma11";
          est[r][e * B + b] = integrated_covariance(c[0], c[diag ? 0 : 1], N, config.bases[b]);
        }
      }
    });
    for (std::size_t e = 0; e < E; ++e) {
      for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> v(R);
        for (std::size_t r = 0; r < R; ++r) v[r] = est[r][e * B + b];
        rows.push_back({points[p].target, points[p].truth, engine_label(config.engines[e]), config.bases[b],
                        mean_of(v), std_error(v)});
      }
    }
  }
  return rows;
}

LinearFit sensitivity_fit(std::span<const SensitivityRow> rows, std::string_view target, std::string_view engine,
                          Basis basis) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.target == target && r.engine == engine && r.basis == basis) {
      x.push_back(r.truth);
      y.push_back(r.mean_estimate);
    }
  }
  return linear_fit(x, y);
}

}  // namespace asyncov

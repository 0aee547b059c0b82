#include <algorithm>
#include <cmath>
#include <functional>

#include "asyncov/error.hpp"
#include "asyncov/estimator.hpp"
#include "parallel.hpp"

namespace asyncov {

std::string_view to_string(Basis basis) noexcept {
  return basis == Basis::Dirichlet ? "dirichlet" : "fejer";
}

std::string_view to_string(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::ForLoop: return "forloop";
    case EngineKind::Vectorised: return "vectorised";
    case EngineKind::Fft: return "fft";
    case EngineKind::ZFFT: return "zfft";
    case EngineKind::NUFFT: return "nufft";
  }
  return "unknown";
}

std::string engine_label(const Engine& engine) {
  std::string s(to_string(engine.kind));
  if (engine.kind == EngineKind::NUFFT) s += "-" + std::string(to_string(engine.kernel));
  return s;
}

double integrated_covariance(const FourierCoeffs& ci, const FourierCoeffs& cj, int N, Basis basis) {
  if (N < 0 || ci.N < N || cj.N < N) {
    throw Error(ErrorKind::Dimension, "coefficient sets do not cover k = -" + std::to_string(N) + ".." +
                                          std::to_string(N));
  }
  if (basis == Basis::Fejer && N == 0) {
    throw Error(ErrorKind::DegenerateWeight, "Fejer weights 1 - |k|/N are undefined for N = 0");
  }
  cplx acc = 0.0;
  if (basis == Basis::Dirichlet) {
    for (int k = -N; k <= N; ++k) acc += ci(k) * std::conj(cj(k));
    acc /= static_cast<double>(2 * N + 1);
  } else {
    const double n = N;
    for (int k = -N + 1; k <= N - 1; ++k) acc += (1.0 - std::abs(k) / n) * (ci(k) * std::conj(cj(k)));
    acc /= n + 1.0;
  }
  if (std::abs(acc.imag()) > 1e-10 * (1.0 + std::abs(acc.real()))) {
    throw Error(ErrorKind::NumericalConsistency,
                "imaginary residual " + std::to_string(acc.imag()) + " of the convolution is too large");
  }
  return acc.real();
}

int dt_to_n(double span, double dt) {
  if (!(dt > 0.0) || !(span > 0.0)) throw Error(ErrorKind::Validation, "time-scale and span must be positive");
  if (dt > span) throw Error(ErrorKind::Resolution, "time-scale exceeds the sample span");
  const double n = std::floor((span / dt - 1.0) / 2.0);
  if (n < 1.0) {
    throw Error(ErrorKind::Resolution, "time-scale " + std::to_string(dt) + " leaves fewer than one Fourier mode");
  }
  if (n > 1e9) throw Error(ErrorKind::Resolution, "time-scale implies more than 1e9 Fourier modes");
  return static_cast<int>(n);
}

FourierCoeffs compute_coeffs(const ReturnSeries& series, const NufftPlan& plan) {
  return nufft_type1(plan, series);
}

FourierCoeffs compute_coeffs(const ReturnSeries& series, int N, const Engine& engine) {
  switch (engine.kind) {
    case EngineKind::ForLoop: return coeffs_forloop(series, N);
    case EngineKind::Vectorised: return coeffs_vectorised(series, N);
    case EngineKind::Fft: return coeffs_fft_synchronous(series, N);
    case EngineKind::ZFFT: return coeffs_zfft(series, min_gap(series), N);
    case EngineKind::NUFFT: return nufft_type1(make_plan(engine.kernel, 2 * N + 1, engine.epsilon), series);
  }
  throw Error(ErrorKind::Validation, "unknown engine");
}

std::vector<int> resolve_cutoffs(std::span<const ReturnSeries> series, const EstimatorConfig& config) {
  if (series.empty()) throw Error(ErrorKind::Validation, "no assets supplied");
  const std::size_t D = series.size();
  std::vector<int> out(D);
  if (const auto* fixed = std::get_if<FixedN>(&config.n_mode)) {
    if (fixed->n < 1) throw Error(ErrorKind::Validation, "fixed N must be at least 1");
    std::fill(out.begin(), out.end(), fixed->n);
    return out;
  }
  if (const auto* from = std::get_if<FromDt>(&config.n_mode)) {
    if (!config.span_seconds) {
      throw Error(ErrorKind::Validation, "a time-scale N needs the original-clock span T");
    }
    std::fill(out.begin(), out.end(), dt_to_n(*config.span_seconds, from->dt));
    return out;
  }
  for (std::size_t i = 0; i < D; ++i) out[i] = nyquist_cutoff(series[i]);
  if (!config.pairwise_n) std::fill(out.begin(), out.end(), *std::min_element(out.begin(), out.end()));
  for (std::size_t i = 0; i < D; ++i) {
    if (out[i] < 1) {
      throw Error(ErrorKind::Resolution, "asset '" + series[i].asset_id + "' has a Nyquist cutoff below 1");
    }
  }
  return out;
}

std::vector<double> zfft_gaps(std::span<const ReturnSeries> series, std::span<const int> cutoffs) {
  std::vector<double> gaps;
  for (const auto& s : series) gaps.push_back(min_gap(s));
  if (!gaps.empty() && std::adjacent_find(cutoffs.begin(), cutoffs.end(), std::not_equal_to<>()) == cutoffs.end()) {
    // One grid for the panel, spaced by the gap that sets the panel cutoff.
    std::fill(gaps.begin(), gaps.end(), *std::max_element(gaps.begin(), gaps.end()));
  }
  return gaps;
}

std::vector<FourierCoeffs> panel_coeffs(std::span<const ReturnSeries> series, std::span<const int> cutoffs,
                                        const Engine& engine, int threads) {
  const std::size_t D = series.size();
  if (cutoffs.size() != D) throw Error(ErrorKind::Dimension, "one cutoff per asset required");
  std::vector<FourierCoeffs> out(D);

  // Plans depend only on N, so assets sharing a cutoff share a plan.
  std::vector<int> distinct(cutoffs.begin(), cutoffs.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<NufftPlan> plans;
  if (engine.kind == EngineKind::NUFFT) {
    for (int n : distinct) plans.push_back(make_plan(engine.kernel, 2 * n + 1, engine.epsilon));
  }
  std::vector<double> gaps;
  if (engine.kind == EngineKind::ZFFT) gaps = zfft_gaps(series, cutoffs);
  auto work = [&](std::size_t i) {
    if (engine.kind == EngineKind::ZFFT) {
      out[i] = coeffs_zfft(series[i], gaps[i], cutoffs[i]);
    } else if (engine.kind == EngineKind::NUFFT) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), cutoffs[i]);
      out[i] = nufft_type1(plans[static_cast<std::size_t>(it - distinct.begin())], series[i]);
    } else {
      out[i] = compute_coeffs(series[i], cutoffs[i], engine);
    }
  };

  detail::parallel_for(D, threads, work);
  return out;
}

CovarianceEstimate covariance_from_coeffs(std::span<const FourierCoeffs> coeffs, std::span<const int> cutoffs,
                                          Basis basis, bool correlations, std::vector<std::string> assets) {
  const auto D = static_cast<Eigen::Index>(coeffs.size());
  if (cutoffs.size() != coeffs.size()) throw Error(ErrorKind::Dimension, "one cutoff per asset required");
  if (assets.empty()) {
    for (Eigen::Index i = 0; i < D; ++i) assets.push_back("asset" + std::to_string(i + 1));
  }
  CovarianceEstimate est;
  est.basis = basis;
  est.sigma.resize(D, D);
  est.n_used.resize(D, D);
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = i; j < D; ++j) {
      const int n = std::min(cutoffs[static_cast<std::size_t>(i)], cutoffs[static_cast<std::size_t>(j)]);
      const double v = integrated_covariance(coeffs[static_cast<std::size_t>(i)],
                                             coeffs[static_cast<std::size_t>(j)], n, basis);
      est.sigma(i, j) = est.sigma(j, i) = v;
      est.n_used(i, j) = est.n_used(j, i) = n;
    }
  }
  est.n_global = D > 0 ? est.n_used.minCoeff() : 0;
  if (correlations) {
    for (Eigen::Index i = 0; i < D; ++i) {
      if (!(est.sigma(i, i) > 0.0)) {
        throw Error(ErrorKind::ZeroVariance, "asset '" + assets[static_cast<std::size_t>(i)] +
                                                 "' has zero estimated variance");
      }
    }
    const Eigen::VectorXd s = est.sigma.diagonal().cwiseSqrt();
    est.corr = est.sigma.array() / (s * s.transpose()).array();
    est.corr.diagonal().setOnes();
  }
  est.assets = std::move(assets);
  return est;
}

CovarianceEstimate covariance_matrix(std::span<const ReturnSeries> series, const EstimatorConfig& config) {
  const auto cutoffs = resolve_cutoffs(series, config);
  const auto coeffs = panel_coeffs(series, cutoffs, config.engine, config.threads);
  std::vector<std::string> assets;
  for (const auto& s : series) assets.push_back(s.asset_id);
  auto est = covariance_from_coeffs(coeffs, cutoffs, config.basis, config.correlations, std::move(assets));
  est.psd_warning = config.pairwise_n && config.basis == Basis::Dirichlet &&
                    std::holds_alternative<NyquistAuto>(config.n_mode);
  if (config.engine.kind == EngineKind::ZFFT) {
    const auto gaps = zfft_gaps(series, cutoffs);
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (zfft_off_grid(series[i], gaps[i])) est.zfft_asynchronous_input = true;
    }
  }
  return est;
}

CovarianceEstimate covariance_matrix(std::span<const EventSeries> series, const EstimatorConfig& config) {
  if (series.empty()) throw Error(ErrorKind::Validation, "no assets supplied");
  const auto returns = panel_returns(series);
  auto cfg = config;
  if (!cfg.span_seconds) {
    double lo = series.front().times().front();
    double hi = series.front().times().back();
    for (const auto& s : series) {
      lo = std::min(lo, s.times().front());
      hi = std::max(hi, s.times().back());
    }
    cfg.span_seconds = hi - lo;
  }
  return covariance_matrix(std::span<const ReturnSeries>(returns), cfg);
}

}  // namespace asyncov

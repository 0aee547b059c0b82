#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "asyncov/error.hpp"
#include "asyncov/simulate.hpp"

namespace asyncov {

namespace {

// Stream tags keep the draws of different schemes independent for one seed.
enum StreamTag : std::uint64_t { kGbm = 1, kMissing = 2, kArrivals = 3, kRandomCov = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t asset = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(asset),
                    static_cast<std::uint32_t>(asset >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
  const Eigen::Index D = sigma.rows();
  if (sigma.cols() != D) throw Error(ErrorKind::Dimension, "covariance matrix must be square");
  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::Factorisation, "covariance matrix is not symmetric");
  }
  if (sigma.isZero(0.0)) return Eigen::MatrixXd::Zero(D, D);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::Factorisation, "LDL^T factorisation failed");
  Eigen::VectorXd d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < D; ++i) {
    if (d(i) < -1e-12 * scale) throw Error(ErrorKind::Factorisation, "covariance matrix is not positive semi-definite");
    d(i) = std::max(d(i), 0.0);
  }
  Eigen::MatrixXd L = ldlt.matrixL();
  Eigen::MatrixXd A = L * d.cwiseSqrt().asDiagonal();
  A = ldlt.transpositionsP().transpose() * A;
  if ((A * A.transpose() - sigma).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::Factorisation, "covariance matrix is not positive semi-definite");
  }
  return A;
}

EventSeries take(const PricePaths& paths, int asset, const std::vector<int>& idx) {
  std::vector<double> t, p;
  t.reserve(idx.size());
  p.reserve(idx.size());
  for (int k : idx) {
    t.push_back(paths.times[static_cast<std::size_t>(k)]);
    p.push_back(paths.prices(asset, k));
  }
  return EventSeries(paths.asset_ids[static_cast<std::size_t>(asset)], std::move(t), std::move(p));
}

}  // namespace

GbmSpec GbmSpec::bivariate_daily(int n, std::uint64_t seed) {
  GbmSpec s;
  s.n = n;
  s.mu = Eigen::Vector2d(0.01, 0.01);
  const double c = 0.35 * std::sqrt(0.1 * 0.2);
  s.sigma.resize(2, 2);
  s.sigma << 0.1, c, c, 0.2;
  s.s0 = Eigen::Vector2d(100.0, 100.0);
  s.dt = 1.0 / 86400.0;
  s.seed = seed;
  return s;
}

PricePaths gbm_paths(const GbmSpec& spec) {
  const Eigen::Index D = spec.sigma.rows();
  if (spec.n < 2) throw Error(ErrorKind::Validation, "path length must be at least 2");
  if (D < 1 || spec.mu.size() != D || spec.s0.size() != D) {
    throw Error(ErrorKind::Dimension, "mu, sigma and s0 must agree on the number of assets");
  }
  if (!(spec.dt > 0.0)) throw Error(ErrorKind::Validation, "time step must be positive");
  if ((spec.s0.array() <= 0.0).any()) throw Error(ErrorKind::Validation, "initial prices must be positive");
  const Eigen::MatrixXd A = psd_factor(spec.sigma);

  PricePaths out;
  for (Eigen::Index i = 0; i < D; ++i) out.asset_ids.push_back("asset" + std::to_string(i + 1));
  out.times.resize(static_cast<std::size_t>(spec.n));
  std::iota(out.times.begin(), out.times.end(), 0.0);
  out.prices.resize(D, spec.n);

  auto rng = make_rng(spec.seed, kGbm);
  std::normal_distribution<double> normal;
  const Eigen::VectorXd drift = (spec.mu - 0.5 * spec.sigma.diagonal()) * spec.dt;
  const double root_dt = std::sqrt(spec.dt);
  // Accumulated log-increment; a path with no increments stays at s0 exactly.
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd z(D);
  out.prices.col(0) = spec.s0;
  for (int k = 1; k < spec.n; ++k) {
    for (Eigen::Index i = 0; i < D; ++i) z(i) = normal(rng);
    cum += drift + root_dt * (A * z);
    out.prices.col(k) = spec.s0.array() * cum.array().exp();
  }
  return out;
}

Eigen::MatrixXd integrated_truth(const GbmSpec& spec) {
  return spec.sigma * (static_cast<double>(spec.n - 1) * spec.dt);
}

Eigen::MatrixXd random_covariance(int D, std::uint64_t seed, double variance) {
  if (D < 2) throw Error(ErrorKind::Validation, "random covariance needs D >= 2");
  if (!(variance > 0.0)) throw Error(ErrorKind::Validation, "target variance must be positive");
  auto rng = make_rng(seed, kRandomCov);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd U(D, D);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) U(i, j) = unif(rng);
  }
  const Eigen::MatrixXd raw = U * U.transpose();
  const Eigen::VectorXd inv = raw.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = inv.asDiagonal() * raw * inv.asDiagonal();
  corr = 0.5 * (corr + corr.transpose());
  corr.diagonal().setOnes();
  return variance * corr;
}

std::vector<EventSeries> synchronous(const PricePaths& paths) {
  std::vector<int> all(static_cast<std::size_t>(paths.n()));
  std::iota(all.begin(), all.end(), 0);
  std::vector<EventSeries> out;
  for (int i = 0; i < paths.D(); ++i) out.push_back(take(paths, i, all));
  return out;
}

std::vector<EventSeries> sample_missing(const PricePaths& paths, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(ErrorKind::Validation, "missing fraction must lie in [0, 1)");
  const int n = paths.n();
  const auto removed = static_cast<int>(std::floor(fraction * n));
  if (n - removed < 2) {
    throw Error(ErrorKind::Underpopulated, "removing " + std::to_string(removed) + " of " + std::to_string(n) +
                                               " points leaves fewer than 2");
  }
  std::vector<EventSeries> out;
  for (int i = 0; i < paths.D(); ++i) {
    auto rng = make_rng(seed, kMissing, static_cast<std::uint64_t>(i));
    std::vector<int> candidates(static_cast<std::size_t>(n - 1));
    std::iota(candidates.begin(), candidates.end(), 1);
    // Partial Fisher-Yates: the first `removed` slots are the dropped indices.
    for (int r = 0; r < removed; ++r) {
      std::uniform_int_distribution<int> pick(r, n - 2);
      std::swap(candidates[static_cast<std::size_t>(r)], candidates[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<char> keep(static_cast<std::size_t>(n), 1);
    for (int r = 0; r < removed; ++r) keep[static_cast<std::size_t>(candidates[static_cast<std::size_t>(r)])] = 0;
    std::vector<int> idx;
    for (int k = 0; k < n; ++k) {
      if (keep[static_cast<std::size_t>(k)]) idx.push_back(k);
    }
    out.push_back(take(paths, i, idx));
  }
  return out;
}

std::vector<EventSeries> sample_arrivals(const PricePaths& paths, std::span<const double> lambda,
                                         std::uint64_t seed) {
  if (static_cast<int>(lambda.size()) != paths.D()) {
    throw Error(ErrorKind::Dimension, "one arrival rate per asset required");
  }
  const double horizon = paths.times.back();
  std::vector<EventSeries> out;
  for (int i = 0; i < paths.D(); ++i) {
    const double rate = lambda[static_cast<std::size_t>(i)];
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorKind::Validation, "arrival rates must be positive");
    auto rng = make_rng(seed, kArrivals, static_cast<std::uint64_t>(i));
    std::exponential_distribution<double> gap(rate);
    std::vector<double> t, p;
    for (double a = 0.0; a <= horizon; a += gap(rng)) {
      // Grid times are the integers 0..n-1, so the previous tick is floor(a).
      const auto k = static_cast<Eigen::Index>(std::floor(a));
      if (!t.empty() && a <= t.back()) continue;
      t.push_back(a);
      p.push_back(paths.prices(i, k));
    }
    if (t.size() < 2) {
      throw Error(ErrorKind::Underpopulated, "asset '" + paths.asset_ids[static_cast<std::size_t>(i)] +
                                                 "' received fewer than 2 arrivals before the horizon");
    }
    out.emplace_back(paths.asset_ids[static_cast<std::size_t>(i)], std::move(t), std::move(p));
  }
  return out;
}

std::vector<EventSeries> regular_nonsynchronous(const PricePaths& paths) {
  if (paths.D() < 2) throw Error(ErrorKind::Validation, "regular non-synchronous trading needs two assets");
  std::vector<int> all(static_cast<std::size_t>(paths.n())), even;
  std::iota(all.begin(), all.end(), 0);
  for (int k = 0; k < paths.n(); k += 2) even.push_back(k);
  return {take(paths, 0, all), take(paths, 1, even)};
}

}  // namespace asyncov

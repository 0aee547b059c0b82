// Acceptance harness: one PASS/FAIL line per criterion A1..A8.
//
//   asyncov_acceptance [--threads N] [--only A1,A4,...]
//
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "asyncov/bench.hpp"
#include "asyncov/epps.hpp"
#include "asyncov/estimator.hpp"
#include "asyncov/nufft.hpp"
#include "asyncov/simulate.hpp"
#include "oracles.hpp"

using namespace asyncov;

namespace {

int g_threads = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr Kernel kKernels[] = {Kernel::Gaussian, Kernel::KaiserBessel, Kernel::ExpSemicircle};

// NUFFT accuracy contract on the arrival-time panel at its Nyquist cutoff.
Outcome a1() {
  const std::vector<double> eps{1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
  double worst_ratio = 0.0;
  int cells = 0, failed = 0, modes_min = 1 << 30, modes_max = 0;
  for (int input = 0; input < 20; ++input) {
    const auto paths = gbm_paths(GbmSpec::bivariate_daily(10000, 9000 + input));
    const std::vector<double> lambda{1.0 / 30, 1.0 / 45};
    const auto returns = panel_returns(sample_arrivals(paths, lambda, 9000 + input));
    const int N = nyquist_cutoff(std::span<const ReturnSeries>(returns));
    modes_min = std::min(modes_min, N);
    modes_max = std::max(modes_max, N);
    for (const auto& r : returns) {
      const auto exact = coeffs_forloop(r, N);
      for (Kernel k : kKernels) {
        for (double e : eps) {
          const double err = relative_l2_error(nufft_type1(make_plan(k, 2 * N + 1, e), r), exact);
          worst_ratio = std::max(worst_ratio, err / e);
          ++cells;
          if (err > e) ++failed;
        }
      }
    }
  }
  return {failed == 0, fmt("%d/%d cells within eps, worst err/eps %.3g, N in [%d, %d]", cells - failed, cells,
                           worst_ratio, modes_min, modes_max)};
}

// A2 and A3 share one accuracy sweep.
std::vector<AccuracyRow> g_accuracy;

const std::vector<AccuracyRow>& accuracy_rows() {
  if (g_accuracy.empty()) {
    AccuracyConfig c;
    c.n = 10000;
    c.reps = 100;
    c.engines = {Engine::zfft(), Engine::nufft(Kernel::Gaussian), Engine::nufft(Kernel::KaiserBessel),
                 Engine::nufft(Kernel::ExpSemicircle)};
    c.epsilons = {1e-6, 1e-12};
    c.bases = {Basis::Dirichlet, Basis::Fejer};
    c.seed = 2024;
    c.threads = g_threads;
    g_accuracy = accuracy_sweep(c);
  }
  return g_accuracy;
}

Outcome a2() {
  double worst = 0.0;
  int cells = 0, failed = 0;
  for (const auto& r : accuracy_rows()) {
    if (r.engine == "zfft") continue;
    worst = std::max(worst, r.mean_abs_diff);
    ++cells;
    if (!(r.mean_abs_diff < 1e-6)) ++failed;
  }
  return {failed == 0 && cells == 36,
          fmt("%d/%d NUFFT cells with mean |drho| < 1e-6, worst %.3g", cells - failed, cells, worst)};
}

Outcome a3() {
  bool pass = true;
  std::ostringstream d;
  for (const auto& r : accuracy_rows()) {
    if (r.engine != "zfft") continue;
    const bool ok = r.scenario == Scenario::Arrival ? r.mean_abs_diff > 1e-2 : r.mean_abs_diff < 1e-10;
    pass = pass && ok;
    d << fmt("%s/%s %.3g (rho_ref %.3g)%s; ", std::string(to_string(r.scenario)).c_str(),
             std::string(to_string(r.basis)).c_str(), r.mean_abs_diff, r.mean_rho_reference, ok ? "" : " !");
  }
  return {pass, d.str()};
}

// Complexity slopes and the speed-up of fast Gaussian gridding.
Outcome a4() {
  TimingConfig c;
  c.engines = {Engine::forloop(), Engine::nufft(Kernel::Gaussian)};
  c.n_values = {1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16};
  c.D_values = {2};
  c.bases = {Basis::Dirichlet};
  c.reps = 5;
  c.seed = 7;
  const auto rows = timing_sweep(c);
  std::vector<double> n, loop, fgg;
  for (const auto& r : rows) {
    if (r.engine == "forloop") {
      n.push_back(r.n);
      loop.push_back(r.seconds);
    } else {
      fgg.push_back(r.seconds);
    }
  }
  const double s_loop = loglog_slope(n, loop), s_fgg = loglog_slope(n, fgg);
  const double speedup = loop.back() / fgg.back();
  const bool pass = s_loop >= 1.8 && s_loop <= 2.3 && s_fgg >= 0.9 && s_fgg <= 1.4 && speedup >= 50;
  return {pass, fmt("for-loop slope %.3f, FGG slope %.3f, speed-up at n=%d %.0fx (%.3g s vs %.3g s)", s_loop,
                    s_fgg, static_cast<int>(n.back()), speedup, loop.back(), fgg.back())};
}

// Epps recovery by simulation against the theoretical curve.
Outcome a5() {
  EppsSimulation sim;
  sim.gbm = GbmSpec::bivariate_daily(28801, 5150);
  const double c = 0.35 * std::sqrt(0.1 * 0.2);
  sim.gbm.sigma << 0.1, c, c, 0.2;
  sim.lambda = {0.2, 0.2};
  sim.replications = 100;
  sim.confidence = 0.68;
  std::vector<double> dts{1};
  for (int d = 5; d <= 100; d += 5) dts.push_back(d);
  EstimatorConfig cfg;
  cfg.engine = Engine::nufft(Kernel::Gaussian);
  cfg.threads = g_threads;
  cfg.basis = Basis::Dirichlet;
  const auto dir = epps_simulated(sim, dts, cfg)[0];
  cfg.basis = Basis::Fejer;
  const auto fej = epps_simulated(sim, dts, cfg)[0];
  int inside = 0, above = 0;
  std::string misses;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double theory = epps_theoretical(0.35, 0.2, dts[i]);
    if (std::abs(dir.rho_mean[i] - theory) <= dir.rho_err[i]) {
      ++inside;
    } else {
      misses += fmt(" %g:%+.3f/%.3f", dts[i], dir.rho_mean[i] - theory, dir.rho_err[i]);
    }
    if (fej.rho_mean[i] >= dir.rho_mean[i]) ++above;
  }
  const double need = 0.9 * static_cast<double>(dts.size());
  const bool pass = inside >= need && above >= need;
  return {pass, fmt("Dirichlet inside 68%% bars at %d/%zu, Fejer >= Dirichlet at %d/%zu", inside, dts.size(), above,
                    dts.size()) +
                    (misses.empty() ? "" : "; misses (dt:mean-theory/halfwidth)" + misses)};
}

// Bias and MSE shape on regular non-synchronous trading.
Outcome a6() {
  MseBiasConfig c;
  c.N_values = {1, 5, 10, 25, 50};
  c.engines = {Engine::vectorised()};
  c.basis = Basis::Dirichlet;
  c.n = 100;
  c.reps = 1000;
  c.seed = 66;
  c.threads = g_threads;
  const auto rows = mse_bias(c);
  bool unbiased = true;
  double worst_z = 0.0, b5 = 0.0, b50 = 0.0;
  for (const auto& r : rows) {
    const double z = std::abs(r.bias11) / r.se11;
    worst_z = std::max(worst_z, z);
    unbiased = unbiased && z < 3.0;
    if (r.N == 5) b5 = r.bias12;
    if (r.N == 50) b50 = r.bias12;
  }
  const bool pass = unbiased && std::abs(b50) > std::abs(b5);
  return {pass, fmt("max |bias11|/se %.2f, |bias12| at N=5 %.4g, at N=50 %.4g", worst_z, std::abs(b5), std::abs(b50))};
}

// Estimated against true integrated covariance.
Outcome a7() {
  SensitivityConfig c;
  c.reps = 200;
  c.seed = 77;
  c.threads = g_threads;
  const auto rows = sensitivity(c);
  bool pass = true;
  std::string d;
  for (Basis b : c.bases) {
    for (const char* t : {"sigma11", "sigma12"}) {
      const auto f = sensitivity_fit(rows, t, "nufft-gaussian", b);
      const bool ok = f.slope >= 0.95 && f.slope <= 1.05 && f.intercept >= -0.01 && f.intercept <= 0.01;
      pass = pass && ok;
      d += fmt("%s/%s slope %.4f intercept %+.2e%s; ", t, std::string(to_string(b)).c_str(), f.slope, f.intercept,
               ok ? "" : " !");
    }
  }
  return {pass, d};
}

// Property suites.
Outcome a8() {
  std::vector<std::string> bad;

  // Hermitian symmetry.
  {
    const auto s = oracle::random_sample(2000, 81);
    const auto r = oracle::as_returns(s);
    const int N = 400;
    auto hermitian_gap = [&](const FourierCoeffs& c) {
      double worst = 0.0, norm = 0.0;
      for (int k = -N; k <= N; ++k) norm += std::norm(c(k));
      for (int k = 1; k <= N; ++k) worst = std::max(worst, std::abs(c(-k) - std::conj(c(k))));
      return worst / std::sqrt(norm);
    };
    if (hermitian_gap(coeffs_vectorised(r, N)) != 0.0) bad.push_back("vectorised not exactly Hermitian");
    if (hermitian_gap(coeffs_forloop(r, N)) >= 1e-12) bad.push_back("for-loop Hermitian gap");
    for (Kernel k : kKernels) {
      if (hermitian_gap(nufft_type1(make_plan(k, 2 * N + 1, 1e-10), r)) > 1e-10) bad.push_back("NUFFT Hermitian gap");
    }
  }

  // Fejer PSD on 50 random 10-asset panels with one common cutoff.
  double worst_eig = 0.0;
  for (std::uint64_t p = 0; p < 50; ++p) {
    GbmSpec spec;
    spec.n = 600;
    spec.sigma = random_covariance(10, 300 + p);
    spec.mu = Eigen::VectorXd::Constant(10, 0.01);
    spec.s0 = Eigen::VectorXd::Constant(10, 100.0);
    spec.seed = 300 + p;
    const std::vector<double> lambda(10, 0.5);
    const auto ev = sample_arrivals(gbm_paths(spec), lambda, 300 + p);
    EstimatorConfig cfg;
    cfg.basis = Basis::Fejer;
    cfg.engine = Engine::nufft(Kernel::Gaussian);
    const auto est = covariance_matrix(std::span<const EventSeries>(ev), cfg);
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(est.sigma).eigenvalues().minCoeff();
    worst_eig = std::min(worst_eig, lo / est.sigma.norm());
  }
  if (worst_eig < -1e-10) bad.push_back(fmt("Fejer min eigenvalue %.3g of the norm", worst_eig));

  // Price-scale invariance.
  {
    const auto ev = sample_missing(gbm_paths(GbmSpec::bivariate_daily(3000, 8)), 0.4, 8);
    std::vector<EventSeries> scaled;
    for (const auto& s : ev) {
      auto px = s.prices();
      for (double& v : px) v *= 1234.5;
      scaled.emplace_back(s.asset_id(), s.times(), px);
    }
    for (Basis b : {Basis::Dirichlet, Basis::Fejer}) {
      EstimatorConfig cfg;
      cfg.basis = b;
      const auto x = covariance_matrix(std::span<const EventSeries>(ev), cfg);
      const auto y = covariance_matrix(std::span<const EventSeries>(scaled), cfg);
      if ((x.sigma - y.sigma).norm() > 1e-12 * x.sigma.norm() || (x.corr - y.corr).norm() > 1e-12) {
        bad.push_back("price scaling changed the estimate");
      }
    }
  }

  // Seed determinism.
  {
    auto run = [] {
      const auto paths = gbm_paths(GbmSpec::bivariate_daily(2000, 31));
      const std::vector<double> lambda{0.1, 0.2};
      const auto ev = sample_arrivals(paths, lambda, 31);
      EstimatorConfig cfg;
      cfg.engine = Engine::nufft(Kernel::ExpSemicircle);
      return covariance_matrix(std::span<const EventSeries>(ev), cfg).sigma;
    };
    if (run() != run()) bad.push_back("same seed gave different output");
  }

  // Triple-sum definition on tiny instances.
  double worst_rel = 0.0;
  for (unsigned inst = 0; inst < 200; ++inst) {
    const std::size_t ni = 2 + inst % 7, nj = 2 + (inst / 7) % 7;
    const int N = 1 + static_cast<int>(inst % 4);
    const auto a = oracle::random_sample(ni, 1000 + inst), b = oracle::random_sample(nj, 5000 + inst);
    std::vector<ReturnSeries> rs{oracle::as_returns(a, "a"), oracle::as_returns(b, "b")};
    for (Basis basis : {Basis::Dirichlet, Basis::Fejer}) {
      EstimatorConfig cfg;
      cfg.basis = basis;
      cfg.n_mode = FixedN{N};
      cfg.correlations = false;
      cfg.engine = Engine::forloop();
      const double got = covariance_matrix(std::span<const ReturnSeries>(rs), cfg).sigma(0, 1);
      const double want = static_cast<double>(basis == Basis::Dirichlet
                                                  ? oracle::dirichlet_triple(a.t, a.d, b.t, b.d, N)
                                                  : oracle::fejer_triple(a.t, a.d, b.t, b.d, N));
      const double scale = std::sqrt(static_cast<double>(oracle::dirichlet_triple(a.t, a.d, a.t, a.d, N) *
                                                         oracle::dirichlet_triple(b.t, b.d, b.t, b.d, N)));
      worst_rel = std::max(worst_rel, std::abs(got - want) / scale);
    }
  }
  if (worst_rel > 1e-12) bad.push_back(fmt("triple-sum mismatch %.3g", worst_rel));

  std::string d = fmt("Fejer worst eigenvalue/norm %.2e, triple-sum worst rel %.2e", worst_eig, worst_rel);
  for (const auto& b : bad) d += "; " + b;
  return {bad.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
      g_threads = std::max(1, std::atoi(argv[++i]));
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string t; std::getline(ss, t, ',');) only.insert(t);
    } else {
      std::fprintf(stderr, "usage: %s [--threads N] [--only A1,A2,...]\n", argv[0]);
      return 2;
    }
  }
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s  %s [%.1f s]\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "asyncov/error.hpp"
#include "asyncov/nufft.hpp"
#include "phase.hpp"

namespace asyncov {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSigma = 2.0;

// ceil(log10(1/eps)) without the off-by-one that rounding in log10 can cause
// at exact powers of ten.
int decimal_digits(double epsilon) {
  return static_cast<int>(std::ceil(-std::log10(epsilon) - 1e-9));
}

double es_shape(double y, double beta) {
  const double r = 1.0 - y * y;
  if (r <= 0.0) return r == 0.0 ? std::exp(-beta) : 0.0;
  return std::exp(beta * (std::sqrt(r) - 1.0));
}

// sinh(b s) / s or sin(b s) / s, continuous through s = 0.
double kb_ratio(double b, double s, bool hyperbolic) {
  if (s < 1e-8) return b;
  return hyperbolic ? std::sinh(b * s) / s : std::sin(b * s) / s;
}

double es_transform(const NufftPlan& plan, int k, double l1_norm) {
  const double a = plan.es_alpha;
  const double beta = plan.es_beta;
  const double freq = a * static_cast<double>(k);
  // y = sin(theta) removes the square-root singularity at y = 1.
  auto f = [beta, freq](double th) {
    const double c = std::cos(th);
    return std::exp(beta * (c - 1.0)) * std::cos(freq * std::sin(th)) * c;
  };
  // Boost's tolerance is relative to the integrand's L1 norm; scaling by the
  // k = 0 norm (the largest) turns it into an absolute bound of 1e-15.
  const double tol = l1_norm > 0.0 ? 1e-15 / l1_norm : 1e-15;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kPi / 2, 8, tol);
  return a * 2.0 * integral;
}

}  // namespace

std::string_view to_string(Kernel kernel) noexcept {
  switch (kernel) {
    case Kernel::Gaussian: return "gaussian";
    case Kernel::KaiserBessel: return "kb";
    case Kernel::ExpSemicircle: return "es";
  }
  return "unknown";
}

int spreading_half_width(Kernel kernel, double epsilon) {
  if (!(epsilon >= 1e-15 && epsilon <= 1e-1)) {
    throw Error(ErrorKind::Tolerance, "epsilon must lie in [1e-15, 1e-1]");
  }
  switch (kernel) {
    case Kernel::Gaussian:
      return static_cast<int>(
          std::floor(-std::log(epsilon) * (kSigma - 0.5) / (kPi * (kSigma - 1.0)) + 0.5));
    case Kernel::KaiserBessel:
      return (decimal_digits(epsilon) + 2) / 2;
    case Kernel::ExpSemicircle:
      return (decimal_digits(epsilon) + 2) / 2 + 2;
  }
  return 0;
}

NufftPlan make_plan(Kernel kernel, int modes, double epsilon, int half_width_offset) {
  if (modes < 3 || modes % 2 == 0) {
    throw Error(ErrorKind::Validation, "mode count M must be odd and at least 3");
  }
  NufftPlan plan;
  plan.kernel = kernel;
  plan.epsilon = epsilon;
  plan.sigma = kSigma;
  plan.modes = modes;
  plan.grid_size = 2 * modes;
  plan.half_width = spreading_half_width(kernel, epsilon) + half_width_offset;
  if (plan.half_width < 1) throw Error(ErrorKind::Validation, "spreading half-width must be at least 1");
  if (2 * plan.half_width + 1 > plan.grid_size) {
    throw Error(ErrorKind::GridTooSmall, "spreading width " + std::to_string(2 * plan.half_width + 1) +
                                             " exceeds the " + std::to_string(plan.grid_size) +
                                             "-point oversampled grid");
  }
  const double Mr = plan.grid_size;
  const double msp = plan.half_width;
  const int N = plan.N();
  plan.phi_hat.assign(static_cast<std::size_t>(modes), 0.0);

  switch (kernel) {
    case Kernel::Gaussian: {
      plan.period = kTwoPi;
      plan.lambda = kSigma * msp / (kSigma - 0.5);
      plan.tau = kPi * plan.lambda / (Mr * Mr);
      const double scale = 2.0 * std::sqrt(kPi * plan.tau);
      for (int k = -N; k <= N; ++k) {
        plan.phi_hat[static_cast<std::size_t>(k + N)] =
            scale * std::exp(-static_cast<double>(k) * k * plan.tau);
      }
      break;
    }
    case Kernel::KaiserBessel: {
      plan.period = 1.0;
      plan.kb_shape = kPi * (2.0 - 1.0 / kSigma);
      const double b = plan.kb_shape;
      for (int k = -N; k <= N; ++k) {
        const double w = kTwoPi * k / Mr;
        plan.phi_hat[static_cast<std::size_t>(k + N)] =
            std::cyl_bessel_i(0.0, msp * std::sqrt(b * b - w * w)) / Mr;
      }
      break;
    }
    case Kernel::ExpSemicircle: {
      plan.period = kTwoPi;
      const double width = 2.0 * msp;
      plan.es_beta = 2.3 * width;
      plan.es_alpha = kPi * width / Mr;
      const double beta = plan.es_beta;
      const double l1 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [beta](double th) { return std::exp(beta * (std::cos(th) - 1.0)) * std::cos(th); }, 0.0,
          kPi / 2, 8, 1e-15);
      for (int k = 0; k <= N; ++k) {
        const double v = es_transform(plan, k, l1);
        plan.phi_hat[static_cast<std::size_t>(N + k)] = v;
        plan.phi_hat[static_cast<std::size_t>(N - k)] = v;
      }
      break;
    }
  }
  return plan;
}

double kernel_value(const NufftPlan& plan, double x) {
  switch (plan.kernel) {
    case Kernel::Gaussian:
      return std::exp(-x * x / (4.0 * plan.tau));
    case Kernel::KaiserBessel: {
      const double m = plan.half_width;
      const double u = plan.grid_size * x;
      const double r = m * m - u * u;
      return r >= 0.0 ? kb_ratio(plan.kb_shape, std::sqrt(r), true) / kPi
                      : kb_ratio(plan.kb_shape, std::sqrt(-r), false) / kPi;
    }
    case Kernel::ExpSemicircle:
      return es_shape(x / plan.es_alpha, plan.es_beta);
  }
  return 0.0;
}

namespace {

struct Spreader {
  const NufftPlan& plan;
  std::vector<double> e3;  // exp(-t1 k^2), Gaussian only

  explicit Spreader(const NufftPlan& p) : plan(p) {
    if (p.kernel == Kernel::Gaussian) {
      const double t1 = kPi / p.lambda;
      e3.resize(static_cast<std::size_t>(p.half_width + 1));
      for (int k = 0; k <= p.half_width; ++k) e3[static_cast<std::size_t>(k)] = std::exp(-t1 * k * k);
    }
  }

  void add(long long cell, double frac, double delta, std::span<double> grid) const {
    const long long Mr = plan.grid_size;
    const int m = plan.half_width;
    cell %= Mr;
    if (cell < 0) cell += Mr;
    auto put = [&](int k, double v) {
      long long l = cell + k;
      if (l < 0) l += Mr;
      else if (l >= Mr) l -= Mr;
      grid[static_cast<std::size_t>(l)] += delta * v;
    };
    switch (plan.kernel) {
      case Kernel::Gaussian: {
        // exp(-t1 (k - frac)^2) = E1 * E2^k * E3[|k|]: two exponentials per source.
        const double t1 = kPi / plan.lambda;
        const double e1 = std::exp(-t1 * frac * frac);
        const double e2 = std::exp(2.0 * t1 * frac);
        put(0, e1);
        double up = e1;
        for (int k = 1; k <= m; ++k) {
          up *= e2;
          put(k, up * e3[static_cast<std::size_t>(k)]);
        }
        const double e2inv = 1.0 / e2;
        double down = e1;
        for (int k = 1; k <= m - 1; ++k) {
          down *= e2inv;
          put(-k, down * e3[static_cast<std::size_t>(k)]);
        }
        break;
      }
      case Kernel::KaiserBessel: {
        const double b = plan.kb_shape;
        const double msp2 = static_cast<double>(m) * m;
        for (int k = -m; k <= m; ++k) {
          const double u = frac - k;
          const double r = msp2 - u * u;
          const double v = r >= 0.0 ? kb_ratio(b, std::sqrt(r), true) : kb_ratio(b, std::sqrt(-r), false);
          put(k, v / kPi);
        }
        break;
      }
      case Kernel::ExpSemicircle: {
        const double inv_m = 1.0 / m;
        for (int k = -m; k <= m; ++k) put(k, es_shape((frac - k) * inv_m, plan.es_beta));
        break;
      }
    }
  }
};

}  // namespace

void spread_source(const NufftPlan& plan, long long cell, double frac, double delta,
                   std::span<double> grid) {
  if (grid.size() != static_cast<std::size_t>(plan.grid_size)) {
    throw Error(ErrorKind::Dimension, "grid length must equal M_r");
  }
  Spreader(plan).add(cell, frac, delta, grid);
}

std::vector<double> spread(const NufftPlan& plan, const ReturnSeries& series) {
  if (series.times.size() != series.deltas.size()) {
    throw Error(ErrorKind::Dimension, "asset '" + series.asset_id + "': times and deltas differ in length");
  }
  std::vector<double> grid(static_cast<std::size_t>(plan.grid_size), 0.0);
  const Spreader spreader(plan);
  for (std::size_t h = 0; h < series.times.size(); ++h) {
    const double t = series.times[h];
    if (!(t >= 0.0 && t < kTwoPi)) {
      throw Error(ErrorKind::Domain, "asset '" + series.asset_id + "': source time " + std::to_string(t) +
                                         " outside [0, 2pi)");
    }
    const auto c = detail::grid_coord(t, plan.grid_size);
    spreader.add(c.cell, c.frac, series.deltas[h], grid);
  }
  return grid;
}

FourierCoeffs deconvolve(const NufftPlan& plan, std::span<const cplx> raw_modes) {
  if (raw_modes.size() != static_cast<std::size_t>(plan.grid_size)) {
    throw Error(ErrorKind::Dimension, "raw mode vector length must equal M_r");
  }
  const int N = plan.N();
  const long long Mr = plan.grid_size;
  const double norm = plan.period / static_cast<double>(Mr);
  FourierCoeffs out(N);
  for (int k = -N; k <= N; ++k) {
    const double ph = plan.phi_hat_at(k);
    if (!(std::abs(ph) >= 1e-300)) {
      throw Error(ErrorKind::DeconvolutionSingularity,
                  "kernel transform vanishes at k = " + std::to_string(k));
    }
    // raw_modes[j] approximates sum delta e^{-i j t}; c+_k is the mode at -k.
    long long j = -k;
    if (j < 0) j += Mr;
    out(k) = raw_modes[static_cast<std::size_t>(j)] * (norm / ph);
  }
  return out;
}

FourierCoeffs nufft_type1(const NufftPlan& plan, const ReturnSeries& series) {
  const auto grid = spread(plan, series);
  const auto modes = forward_fft(std::span<const double>(grid));
  return deconvolve(plan, modes);
}

double relative_l2_error(const FourierCoeffs& approx, const FourierCoeffs& exact) {
  if (approx.N != exact.N || approx.size() != exact.size()) {
    throw Error(ErrorKind::Dimension, "coefficient sets cover different mode ranges");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += std::norm(approx.values[i] - exact.values[i]);
    den += std::norm(exact.values[i]);
  }
  if (den == 0.0) throw Error(ErrorKind::DivisionByZero, "reference coefficients are all zero");
  return std::sqrt(num / den);
}

}  // namespace asyncov

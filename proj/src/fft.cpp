#include <cmath>
#include <cstring>
#include <memory>
#include <type_traits>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "asyncov/error.hpp"
#include "asyncov/fourier.hpp"

namespace asyncov {

namespace {

// fftw planner calls are not thread-safe; execution on a plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

}  // namespace

std::vector<cplx> forward_fft(std::span<const double> grid) {
  const std::size_t L = grid.size();
  std::vector<cplx> out(L);
  if (L == 0) return out;
  std::vector<double> in(grid.begin(), grid.end());
  std::vector<cplx> half(L / 2 + 1);
  PlanHandle plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(L), in.data(),
                                    reinterpret_cast<fftw_complex*>(half.data()), FFTW_ESTIMATE));
  }
  // FFTW_ESTIMATE never touches the arrays while planning, so `in` is intact.
  fftw_execute(plan.get());
  for (std::size_t k = 0; k < half.size(); ++k) out[k] = half[k];
  for (std::size_t k = half.size(); k < L; ++k) out[k] = std::conj(half[L - k]);
  return out;
}

std::vector<cplx> forward_fft(std::span<const cplx> grid) {
  const std::size_t L = grid.size();
  std::vector<cplx> in(grid.begin(), grid.end());
  std::vector<cplx> out(L);
  if (L == 0) return out;
  PlanHandle plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(L), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  return out;
}

FourierCoeffs coeffs_fft_synchronous(const ReturnSeries& series, int N) {
  const std::size_t L = series.deltas.size();
  if (L == 0) throw Error(ErrorKind::Underpopulated, "asset '" + series.asset_id + "' has no returns");
  if (N < 0 || 2 * static_cast<std::size_t>(N) > L) {
    throw Error(ErrorKind::Aliasing, "N = " + std::to_string(N) + " exceeds half the " +
                                         std::to_string(L) + "-point synchronous grid");
  }
  const double step = 2.0 * std::numbers::pi / static_cast<double>(L);
  for (std::size_t h = 0; h < L; ++h) {
    if (std::abs(series.times[h] - step * static_cast<double>(h)) > 1e-9 * step) {
      throw Error(ErrorKind::Validation,
                  "asset '" + series.asset_id + "' is not on the uniform synchronous grid");
    }
  }
  const auto modes = forward_fft(std::span<const double>(series.deltas));
  FourierCoeffs out(N);
  // modes[k] = sum delta e^{-ikt}, so c+_k = conj(modes[k]) and c+_{-k} = modes[k].
  out(0) = modes[0];
  for (int k = 1; k <= N; ++k) {
    out(k) = std::conj(modes[static_cast<std::size_t>(k)]);
    out(-k) = modes[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace asyncov

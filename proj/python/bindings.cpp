#include <optional>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "asyncov/epps.hpp"
#include "asyncov/error.hpp"
#include "asyncov/estimator.hpp"
#include "asyncov/simulate.hpp"
#include "asyncov/tickdata.hpp"

namespace py = pybind11;
using namespace asyncov;

namespace {

Basis parse_basis(const std::string& s) {
  if (s == "dirichlet") return Basis::Dirichlet;
  if (s == "fejer") return Basis::Fejer;
  throw Error(ErrorKind::Validation, "unknown basis '" + s + "'");
}

Kernel parse_kernel(const std::string& s) {
  if (s == "gaussian") return Kernel::Gaussian;
  if (s == "kb") return Kernel::KaiserBessel;
  if (s == "es") return Kernel::ExpSemicircle;
  throw Error(ErrorKind::Validation, "unknown kernel '" + s + "'");
}

Engine parse_engine(const std::string& s, const std::string& kernel, double eps) {
  if (s == "forloop") return Engine::forloop();
  if (s == "vectorised") return Engine::vectorised();
  if (s == "fft") return Engine::fft();
  if (s == "zfft") return Engine::zfft();
  if (s == "nufft") return Engine::nufft(parse_kernel(kernel), eps);
  throw Error(ErrorKind::Validation, "unknown engine '" + s + "'");
}

EstimatorConfig make_config(const std::string& basis, const std::string& engine, const std::string& kernel,
                            double eps, std::optional<int> n, std::optional<double> dt, bool pairwise,
                            int threads) {
  if (n && dt) throw Error(ErrorKind::Validation, "give at most one of n and dt");
  EstimatorConfig c;
  c.basis = parse_basis(basis);
  c.engine = parse_engine(engine, kernel, eps);
  if (n) c.n_mode = FixedN{*n};
  if (dt) c.n_mode = FromDt{*dt};
  c.pairwise_n = pairwise;
  c.threads = threads;
  return c;
}

py::dict to_dict(const CovarianceEstimate& e) {
  py::dict d;
  d["assets"] = e.assets;
  d["sigma"] = e.sigma;
  d["corr"] = e.corr;
  d["n_used"] = e.n_used;
  d["n"] = e.n_global;
  d["psd_warning"] = e.psd_warning;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fourier covariance estimation for asynchronous tick data";

  static py::exception<Error> exc(m, "AsyncovError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      exc(e.what());
    }
  });

  py::class_<EventSeries>(m, "EventSeries")
      .def(py::init<std::string, std::vector<double>, std::vector<double>>(), py::arg("asset_id"),
           py::arg("times"), py::arg("prices"))
      .def_property_readonly("asset_id", &EventSeries::asset_id)
      .def_property_readonly("times", [](const EventSeries& s) { return py::array(py::cast(s.times())); })
      .def_property_readonly("prices", [](const EventSeries& s) { return py::array(py::cast(s.prices())); })
      .def("__len__", &EventSeries::size)
      .def("__repr__", [](const EventSeries& s) {
        return "EventSeries('" + s.asset_id() + "', n=" + std::to_string(s.size()) + ")";
      });

  m.def("ingest_csv", [](const std::string& path) { return ingest_taq_file(path).series; }, py::arg("path"),
        "Read a long or wide tick CSV into one EventSeries per asset.");

  m.def(
      "nyquist_cutoff",
      [](const std::vector<EventSeries>& series) {
        const auto r = panel_returns(series);
        return nyquist_cutoff(std::span<const ReturnSeries>(r));
      },
      py::arg("series"));

  m.def(
      "coefficients",
      [](const std::vector<EventSeries>& series, int n, const std::string& engine, const std::string& kernel,
         double eps) {
        const auto returns = panel_returns(series);
        const Engine e = parse_engine(engine, kernel, eps);
        std::vector<int> cutoffs(returns.size(), n);
        std::vector<py::array_t<std::complex<double>>> out;
        for (const auto& c : panel_coeffs(returns, cutoffs, e)) out.push_back(py::cast(c.values));
        return out;
      },
      py::arg("series"), py::arg("n"), py::arg("engine") = "vectorised", py::arg("kernel") = "gaussian",
      py::arg("eps") = 1e-12, "Coefficients c_k for k = -n..n of each asset's return process.");

  m.def(
      "covariance",
      [](const std::vector<EventSeries>& series, const std::string& basis, const std::string& engine,
         const std::string& kernel, double eps, std::optional<int> n, std::optional<double> dt, bool pairwise,
         int threads) {
        const auto cfg = make_config(basis, engine, kernel, eps, n, dt, pairwise, threads);
        py::gil_scoped_release release;
        auto est = covariance_matrix(std::span<const EventSeries>(series), cfg);
        py::gil_scoped_acquire acquire;
        return to_dict(est);
      },
      py::arg("series"), py::arg("basis") = "dirichlet", py::arg("engine") = "vectorised",
      py::arg("kernel") = "gaussian", py::arg("eps") = 1e-12, py::arg("n") = py::none(),
      py::arg("dt") = py::none(), py::arg("pairwise") = false, py::arg("threads") = 1,
      "Integrated covariance and correlation. N defaults to the Nyquist cutoff.");

  m.def(
      "gbm_paths",
      [](const Eigen::MatrixXd& sigma, int n, std::uint64_t seed, std::optional<Eigen::VectorXd> mu,
         std::optional<Eigen::VectorXd> s0, double dt) {
        GbmSpec spec;
        spec.n = n;
        spec.sigma = sigma;
        spec.mu = mu ? *mu : Eigen::VectorXd::Zero(sigma.rows());
        spec.s0 = s0 ? *s0 : Eigen::VectorXd::Constant(sigma.rows(), 100.0);
        spec.dt = dt;
        spec.seed = seed;
        const auto p = gbm_paths(spec);
        return py::make_tuple(py::array(py::cast(p.times)), p.prices);
      },
      py::arg("sigma"), py::arg("n"), py::arg("seed") = 1, py::arg("mu") = py::none(), py::arg("s0") = py::none(),
      py::arg("dt") = 1.0 / 86400.0, "Correlated GBM on the grid 0..n-1. Returns (times, prices[D, n]).");

  m.def(
      "sample_arrivals",
      [](const std::vector<double>& times, const Eigen::MatrixXd& prices, const std::vector<double>& lam,
         std::uint64_t seed) {
        PricePaths p;
        p.times = times;
        p.prices = prices;
        if (static_cast<Eigen::Index>(times.size()) != prices.cols()) {
          throw Error(ErrorKind::Dimension, "prices must have one column per time");
        }
        for (int i = 0; i < p.D(); ++i) p.asset_ids.push_back("asset" + std::to_string(i + 1));
        return sample_arrivals(p, lam, seed);
      },
      py::arg("times"), py::arg("prices"), py::arg("lam"), py::arg("seed") = 1,
      "Poisson arrival sampling of grid prices with previous-tick values.");

  m.def("epps_theoretical", &epps_theoretical, py::arg("c"), py::arg("lam"), py::arg("dt"));

  m.def(
      "epps_curve",
      [](const std::vector<EventSeries>& series, const std::vector<double>& dts, const std::string& basis,
         const std::string& engine, const std::string& kernel, double eps) {
        const auto cfg = make_config(basis, engine, kernel, eps, std::nullopt, std::nullopt, false, 1);
        py::list out;
        for (const auto& c : epps_curve(std::span<const EventSeries>(series), dts, cfg)) {
          py::dict d;
          d["asset_i"] = c.asset_i;
          d["asset_j"] = c.asset_j;
          d["dt"] = c.dt_values;
          d["n_modes"] = c.n_modes;
          d["rho"] = c.rho_mean;
          out.append(d);
        }
        return out;
      },
      py::arg("series"), py::arg("dts"), py::arg("basis") = "dirichlet", py::arg("engine") = "vectorised",
      py::arg("kernel") = "gaussian", py::arg("eps") = 1e-12, "Correlation against sampling interval per pair.");
}

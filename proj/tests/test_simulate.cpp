#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "asyncov/error.hpp"
#include "asyncov/simulate.hpp"

using namespace asyncov;

namespace {

GbmSpec flat_spec(int n, int D) {
  GbmSpec s;
  s.n = n;
  s.mu = Eigen::VectorXd::Zero(D);
  s.sigma = Eigen::MatrixXd::Zero(D, D);
  s.s0 = Eigen::VectorXd::LinSpaced(D, 10.0, 20.0);
  return s;
}

}  // namespace

TEST_CASE("zero drift and volatility keep prices at s0") {
  const auto p = gbm_paths(flat_spec(50, 3));
  CHECK(p.n() == 50);
  CHECK(p.D() == 3);
  CHECK(p.times.front() == 0.0);
  CHECK(p.times.back() == 49.0);
  for (int i = 0; i < 3; ++i) CHECK((p.prices.row(i).array() == p.prices(i, 0)).all());
  CHECK(p.prices(2, 0) == 20.0);
}

TEST_CASE("bivariate daily moments over 1e5 steps") {
  const auto spec = GbmSpec::bivariate_daily(100001, 42);
  const auto p = gbm_paths(spec);
  const Eigen::MatrixXd lr =
      (p.prices.rightCols(p.n() - 1).array() / p.prices.leftCols(p.n() - 1).array()).log().matrix();
  const Eigen::VectorXd mean = lr.rowwise().mean();
  const Eigen::MatrixXd c = lr.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / (lr.cols() - 1);
  CHECK(std::abs(cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1)) - 0.35) < 0.02);
  for (int i = 0; i < 2; ++i) {
    const double drift = (spec.mu(i) - spec.sigma(i, i) / 2) * spec.dt;
    const double se = std::sqrt(spec.sigma(i, i) * spec.dt / lr.cols());
    CHECK(std::abs(mean(i) - drift) < 3 * se);
  }
  CHECK(integrated_truth(spec)(0, 1) == doctest::Approx(spec.sigma(0, 1) * 100000 * spec.dt));
}

TEST_CASE("factorisation") {
  auto s = flat_spec(10, 2);
  s.sigma << 0.1, 0.1, 0.1, 0.1;  // singular but PSD
  CHECK_NOTHROW(gbm_paths(s));
  s.sigma << 0.1, 0.5, 0.5, 0.1;
  try {
    gbm_paths(s);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Factorisation);
  }
}

TEST_CASE("random covariance") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = random_covariance(6, seed);
    CHECK((m.diagonal().array() - 0.1).abs().maxCoeff() < 1e-15);
    CHECK((m.array() > 0).all());
    CHECK((m - m.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff() >= -1e-12);
  }
  CHECK(random_covariance(2, 9, 1.0).diagonal().isApprox(Eigen::Vector2d(1, 1)));
}

TEST_CASE("missing data") {
  const auto p = gbm_paths(GbmSpec::bivariate_daily(10000, 6));
  const auto none = sample_missing(p, 0.0, 1);
  CHECK(none == synchronous(p));
  const auto m = sample_missing(p, 0.4, 1);
  for (const auto& s : m) {
    CHECK(s.size() == 6000);
    CHECK(s.times().front() == 0.0);
    for (std::size_t h = 0; h < s.size(); h += 97) {
      const int idx = static_cast<int>(s.times()[h]);
      CHECK(s.prices()[h] == p.prices(s.asset_id() == "asset1" ? 0 : 1, idx));
    }
  }
  CHECK(m[0].times() != m[1].times());
  const auto few = gbm_paths(GbmSpec::bivariate_daily(4, 1));
  CHECK_THROWS_AS(sample_missing(few, 0.9, 1), Error);
}

TEST_CASE("arrivals") {
  const auto p = gbm_paths(GbmSpec::bivariate_daily(10000, 7));
  const std::vector<double> lambda{1.0 / 30, 1.0 / 45};
  const auto a = sample_arrivals(p, lambda, 7);
  CHECK(std::abs(static_cast<double>(a[0].size()) - 333) < 4 * std::sqrt(333.0));
  CHECK(std::abs(static_cast<double>(a[1].size()) - 222) < 4 * std::sqrt(222.0));
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& t = a[i].times();
    const double mean_gap = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    CHECK(std::abs(mean_gap - 1 / lambda[i]) < 3 * (1 / lambda[i]) / std::sqrt(static_cast<double>(t.size() - 1)));
    for (std::size_t h = 0; h < t.size(); ++h) {
      CHECK(a[i].prices()[h] == p.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(std::floor(t[h]))));
    }
  }
  // Intensity far above the grid rate reads (almost) every grid point.
  const std::vector<double> dense{1000.0, 1000.0};
  const auto d = sample_arrivals(gbm_paths(GbmSpec::bivariate_daily(500, 1)), dense, 3);
  std::set<long> cells;
  for (double t : d[0].times()) cells.insert(static_cast<long>(std::floor(t)));
  CHECK(cells.size() >= 495);
}

TEST_CASE("regular non-synchronous trading") {
  const auto p = gbm_paths(GbmSpec::bivariate_daily(100, 5));
  const auto r = regular_nonsynchronous(p);
  CHECK(r[0].size() == 100);
  CHECK(r[1].size() == 50);
  CHECK(r[0] == synchronous(p)[0]);
  const auto small = regular_nonsynchronous(gbm_paths(GbmSpec::bivariate_daily(4, 5)));
  CHECK(small[1].times() == std::vector<double>{0, 2});
}

TEST_CASE("seed determinism and substreams") {
  const auto a = gbm_paths(GbmSpec::bivariate_daily(300, 99));
  const auto b = gbm_paths(GbmSpec::bivariate_daily(300, 99));
  CHECK(a.prices == b.prices);
  const std::vector<double> l{0.5, 0.5};
  CHECK(sample_arrivals(a, l, 4) == sample_arrivals(b, l, 4));
  CHECK(sample_missing(a, 0.2, 4) == sample_missing(b, 0.2, 4));
  CHECK(gbm_paths(GbmSpec::bivariate_daily(300, 100)).prices != a.prices);
}

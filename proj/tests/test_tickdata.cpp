#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "asyncov/error.hpp"
#include "asyncov/tickdata.hpp"

using namespace asyncov;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an asyncov::Error");
  return ErrorKind::Io;
}

IngestResult ingest(const std::string& text, TableLayout layout = TableLayout::Auto) {
  std::istringstream in(text);
  return ingest_taq(in, layout);
}

}  // namespace

TEST_CASE("same-timestamp trades merge at the volume-weighted price") {
  const auto r = ingest("asset,time,price,volume\nX,0,100,1\nX,0,102,3\nX,5,101,1\n");
  REQUIRE(r.series.size() == 1);
  CHECK(r.series[0].size() == 2);
  CHECK(r.series[0].prices()[0] == doctest::Approx(101.5).epsilon(1e-15));
  CHECK(r.diagnostics.assets[0].merged_duplicates == 1);
}

TEST_CASE("wide layout drops empty cells") {
  const auto r = ingest("time,A,B\n0,10,20\n1,,21\n2,11,22\n");
  REQUIRE(r.series.size() == 2);
  CHECK(r.series[0].times() == std::vector<double>{0, 2});
  CHECK(r.series[1].times() == std::vector<double>{0, 1, 2});
  CHECK(r.diagnostics.layout == TableLayout::Wide);
}

TEST_CASE("committed three-asset fixture") {
  const auto r = ingest_taq_file(ASYNCOV_FIXTURES "/panel3.csv");
  REQUIRE(r.series.size() == 3);
  CHECK(r.series[0].size() == 48);
  CHECK(r.series[1].size() == 50);
  CHECK(r.series[2].size() == 47);
  CHECK(r.diagnostics.data_rows == 150);
}

TEST_CASE("ingest is idempotent on deduplicated input") {
  const auto first = ingest_taq_file(ASYNCOV_FIXTURES "/panel3.csv");
  std::ostringstream out;
  out << "asset,time,price,volume\n";
  out.precision(17);
  for (const auto& s : first.series) {
    for (std::size_t h = 0; h < s.size(); ++h) out << s.asset_id() << ',' << s.times()[h] << ',' << s.prices()[h] << ",1\n";
  }
  const auto second = ingest(out.str());
  CHECK(second.series == first.series);
}

TEST_CASE("ingest errors") {
  CHECK(kind_of([] { ingest("asset,time,price,volume\nX,0,100,1\nX,zz,1,1\n"); }) == ErrorKind::Parse);
  try {
    ingest("asset,time,price,volume\nX,0,100,1\nX,1,100\n");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(e.line() == 3);
  }
  CHECK(kind_of([] { ingest("asset,time,price,volume\nX,0,100,1\nX,1,-3,1\n"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { ingest("asset,time,price,volume\nX,0,100,1\nY,0,100,1\nY,1,100,1\n"); }) ==
        ErrorKind::Underpopulated);
}

TEST_CASE("rescaling maps the panel range onto [0, 2pi]") {
  std::vector<EventSeries> s{EventSeries("a", {0, 5, 10}, {1, 1, 1})};
  auto p = rescale_times(s);
  CHECK(p.rescaled[0][0] == 0.0);
  CHECK(p.rescaled[0][1] == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(p.rescaled[0][2] == doctest::Approx(2 * kPi).epsilon(1e-15));

  std::vector<EventSeries> t{EventSeries("a", {1, 2, 4}, {1, 1, 1})};
  p = rescale_times(t);
  CHECK(p.rescaled[0][1] == doctest::Approx(2 * kPi / 3).epsilon(1e-15));

  std::vector<EventSeries> two{EventSeries("a", {3, 7}, {1, 1}), EventSeries("b", {2, 9}, {1, 1})};
  p = rescale_times(two);
  CHECK(p.rescaled[1][0] == 0.0);
  CHECK(p.rescaled[1][1] == doctest::Approx(2 * kPi));
  CHECK(p.rescaled[0][0] < p.rescaled[0][1]);
  CHECK(p.span() == 7.0);

  CHECK(kind_of([&] { rescale_times(two, 4.0, 4.0); }) == ErrorKind::DegenerateSpan);
  CHECK(kind_of([] { rescale_times(std::vector<EventSeries>{}); }) == ErrorKind::Validation);
}

TEST_CASE("log returns") {
  std::vector<EventSeries> c{EventSeries("a", {0, 1, 2, 3}, {7, 7, 7, 7})};
  const auto flat = panel_returns(c);
  for (double d : flat[0].deltas) CHECK(d == 0.0);

  std::vector<EventSeries> e{EventSeries("a", {0, 9}, {100, 100 * std::numbers::e})};
  const auto r = panel_returns(e)[0];
  REQUIRE(r.n_returns() == 1);
  CHECK(r.deltas[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.last_time == doctest::Approx(2 * kPi));

  // Ten prices; deltas scripted independently as log(p[h+1] / p[h]).
  const std::vector<double> p{100, 100.5, 99.8, 101.2, 101.0, 102.3, 101.7, 103.1, 102.9, 104.0};
  std::vector<double> times(10);
  for (int i = 0; i < 10; ++i) times[i] = i;
  std::vector<EventSeries> g{EventSeries("g", times, p)};
  const auto gr = panel_returns(g)[0];
  for (int h = 0; h < 9; ++h) {
    CHECK(gr.deltas[h] == doctest::Approx(std::log(p[h + 1] / p[h])).epsilon(1e-14));
    CHECK(gr.times[h] == doctest::Approx(2 * kPi * h / 9.0));
  }
}

TEST_CASE("log returns are invariant under price scaling") {
  const auto base = ingest_taq_file(ASYNCOV_FIXTURES "/panel3.csv").series;
  std::vector<EventSeries> scaled;
  for (const auto& s : base) {
    std::vector<double> p = s.prices();
    for (double& v : p) v *= 37.5;
    scaled.emplace_back(s.asset_id(), s.times(), p);
  }
  const auto a = panel_returns(base), b = panel_returns(scaled);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t h = 0; h < a[i].deltas.size(); ++h) CHECK(b[i].deltas[h] == doctest::Approx(a[i].deltas[h]).epsilon(1e-12).scale(1e-3));
  }
}

TEST_CASE("Nyquist cutoff") {
  ReturnSeries r;
  r.times = {0, kPi / 4, kPi};
  r.deltas = {0.1, 0.2, 0.3};
  r.last_time = 2 * kPi;
  CHECK(nyquist_cutoff(r) == 4);

  // n uniform points spanning [0, 2pi] -> floor((n - 1) / 2).
  for (int n : {10, 11, 100, 101}) {
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) times[i] = i;
    std::vector<EventSeries> s{EventSeries("u", times, std::vector<double>(n, 1.0))};
    CHECK(nyquist_cutoff(panel_returns(s)) == (n - 1) / 2);
  }

  // Thinning that widens the minimum gap never raises N.
  std::vector<EventSeries> full{EventSeries("f", {0, 1, 3, 4, 8, 9, 10}, std::vector<double>(7, 1.0))};
  std::vector<EventSeries> thin{EventSeries("f", {0, 3, 8, 10}, std::vector<double>(4, 1.0))};
  CHECK(nyquist_cutoff(panel_returns(thin)) <= nyquist_cutoff(panel_returns(full)));

  std::vector<EventSeries> two{EventSeries("a", {0, 1, 100}, {1, 1, 1}), EventSeries("b", {0, 3, 100}, {1, 1, 1})};
  const auto rs = panel_returns(two);
  CHECK(nyquist_cutoff(rs) == std::min(nyquist_cutoff(rs[0]), nyquist_cutoff(rs[1])));

  ReturnSeries dup;
  dup.times = {0, 1, 1};
  dup.deltas = {0.1, 0.2, 0.3};
  dup.last_time = 2;
  CHECK(kind_of([&] { nyquist_cutoff(dup); }) == ErrorKind::DegenerateSpacing);
}

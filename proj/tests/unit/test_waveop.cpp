#include <cmath>
#include <sstream>

#include "doctest.h"
#include "scatter/waveop.hpp"

using namespace scatter;
using namespace scatter::waveop;

namespace {

// Free Schroedinger evolution of exp(-(x - x0)^2 / (2a) + i k x) under -d^2/dx^2.
cplx free_gaussian_1d(double x, double x0, double a, double k, double t) {
  const cplx s = 1.0 + cplx(0.0, 2.0 * t / a);
  const double c = x - x0 - 2.0 * k * t;
  return std::exp(-c * c / (2.0 * a * s) + cplx(0.0, k * x - k * k * t)) / std::sqrt(s);
}

SparsePotential well(double amplitude, double radius = 1.5) {
  SparsePotential p;
  p.dim = 2;
  p.R = radius;
  p.gamma = 2.05;
  p.centers = {Point{0.0, 0.0, 0.0}};
  p.bumps = {{Profile::SmoothBump, amplitude, radius}};
  p.validate();
  return p;
}

const PeriodicBox kBox{60.0, 128};

}  // namespace

TEST_CASE("free propagator reproduces the exact Gaussian") {
  const double sigma = 2.0, kx = 0.5, ky = -0.3, x0 = -3.0, y0 = 1.0;
  const SplitStep prop(kBox, std::vector<double>(kBox.size(), 0.0));
  Field f = gaussian_packet(kBox, x0, y0, sigma, kx, ky);
  for (double t : {1.0, -0.5}) {
    Field g = f;
    prop.free(g, t);
    double err = 0.0;
    for (int i = 0; i < kBox.n; ++i)
      for (int j = 0; j < kBox.n; ++j) {
        const cplx ref = free_gaussian_1d(kBox.coord(i), x0, sigma * sigma, kx, t) *
                         free_gaussian_1d(kBox.coord(j), y0, sigma * sigma, ky, t);
        err = std::max(err, std::abs(g[static_cast<std::size_t>(i) * kBox.n + j] - ref));
      }
    CHECK(err <= 1e-6);
  }
  // With V = 0 the split-step propagator is the free one.
  Field a = f, b = f;
  prop.free(a, 1.0);
  prop.full(b, 0.05, 20);
  CHECK(distance(kBox, a, b) <= 1e-12 * norm(kBox, f));
}

TEST_CASE("Strang splitting is second order in dt") {
  const SparsePotential p = well(0.8);
  const SplitStep prop(kBox, sample_potential(p, kBox));
  const Field f0 = gaussian_packet(kBox, -4.0, 0.0, 2.0, 0.8, 0.0);
  auto run = [&](double dt) {
    Field f = f0;
    prop.full(f, dt, std::lround(2.0 / dt));
    return f;
  };
  const Field ref = run(0.0025);
  const double e1 = distance(kBox, run(0.04), ref), e2 = distance(kBox, run(0.02), ref);
  MESSAGE("errors ", e1, " ", e2, " ratio ", e1 / e2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("full propagator conserves the norm") {
  const SparsePotential p = well(0.8);
  const SplitStep prop(kBox, sample_potential(p, kBox));
  Field f = gaussian_packet(kBox, -4.0, 0.0, 2.0, 0.8, 0.0);
  const double n0 = norm(kBox, f);
  prop.full(f, 0.05, 1000);
  CHECK(std::abs(norm(kBox, f) - n0) <= 1e-7 * n0);
  // Time reversal.
  Field g = gaussian_packet(kBox, -4.0, 0.0, 2.0, 0.8, 0.0), h = g;
  prop.full(g, 0.05, 40);
  prop.full(g, -0.05, 40);
  CHECK(distance(kBox, g, h) <= 1e-12 * n0);
  PropagatorState st{kBox, h, 0.0, sample_potential(p, kBox)};
  CHECK_THROWS_AS(propagate(st, 0.5, 1, Which::Full), std::invalid_argument);
  propagate(st, 0.05, 10, Which::Full);
  CHECK(st.time == doctest::Approx(0.5));
}

TEST_CASE("band projection is an orthogonal projection") {
  const SplitStep prop(kBox, std::vector<double>(kBox.size(), 0.0));
  const Field f = gaussian_packet(kBox, 0.0, 0.0, 1.5, 0.8, 0.2);
  const EnergyBand band{0.3, 1.0};
  Field p1 = f;
  prop.project(p1, band);
  Field p2 = p1;
  prop.project(p2, band);
  CHECK(distance(kBox, p1, p2) <= 1e-13 * norm(kBox, f));
  cplx inner = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) inner += std::conj(p1[k]) * (f[k] - p1[k]);
  CHECK(std::abs(inner) * kBox.dx() * kBox.dx() <= 1e-12 * norm(kBox, f) * norm(kBox, f));
  CHECK(norm(kBox, p1) < norm(kBox, f));
  Field all = f;
  prop.project(all, {0.0, 1e6});
  CHECK(distance(kBox, all, f) <= 1e-13 * norm(kBox, f));

  // |k|^2 = 0.4321 falls on no lattice point, so the two closed bands split the lattice.
  Field lo = f, hi = f;
  prop.project(lo, {0.0, 0.4321});
  prop.project(hi, {0.4321, 1e6});
  Field sum(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) sum[k] = lo[k] + hi[k];
  CHECK(distance(kBox, sum, f) <= 1e-13 * norm(kBox, f));

  const PropagatorState st{kBox, f, 0.0, std::vector<double>(kBox.size(), 0.0)};
  CHECK(distance(kBox, band_project(st, band).psi, p1) <= 1e-13 * norm(kBox, f));
}

TEST_CASE("zero potential: wave operator approximants equal the projected packet") {
  const SplitStep prop(kBox, std::vector<double>(kBox.size(), 0.0));
  const Field f = gaussian_packet(kBox, 0.0, 0.0, 2.0, 0.8, 0.0);
  WaveOpSetup setup;
  Field proj = f;
  prop.project(proj, setup.band);
  for (const auto& [t, w] : wave_op_approx(prop, f, setup, {1.0, 2.0, 4.0}))
    CHECK(distance(kBox, w, proj) <= 1e-11 * norm(kBox, f));
  CHECK(intertwine_check(prop, f, setup, 4.0, 1.0) <= 1e-11);
  for (double v : smoothness_integral(prop, f, setup, {1.0, 2.0})) CHECK(v == 0.0);
}

TEST_CASE("intertwining with s = 0 is exact and the smoothness integral is bounded") {
  const SparsePotential p = well(0.8);
  const SplitStep prop(kBox, sample_potential(p, kBox));
  const Field f = gaussian_packet(kBox, -4.0, 0.0, 2.0, 0.8, 0.0);
  WaveOpSetup setup;
  CHECK(intertwine_check(prop, f, setup, 2.0, 0.0) <= 1e-13);
  Field proj = f;
  prop.project(proj, setup.band);
  const double n2 = norm(kBox, proj) * norm(kBox, proj);
  const std::vector<double> T{1.0, 2.0, 4.0};
  const std::vector<double> s = smoothness_integral(prop, f, setup, T);
  REQUIRE(s.size() == 3);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s[k] > 0.0);
    CHECK(s[k] <= prop.potential_sup() * T[k] * n2 * (1 + 1e-9));
    if (k > 0) CHECK(s[k] >= s[k - 1]);
  }
  Field twice = f;
  for (cplx& c : twice) c *= 2.0;
  const std::vector<double> s2 = smoothness_integral(prop, twice, setup, T);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s2[k] == doctest::Approx(4.0 * s[k]).epsilon(1e-12));
}

TEST_CASE("horizon and resolution guards") {
  const PeriodicBox box{150.0, 256};
  CHECK(box.horizon(1.0) == doctest::Approx(37.5));
  const SparsePotential p = well(0.5, 0.6);
  const Field f = gaussian_packet(box, 0.0, 0.0, 3.0, 0.8, 0.0);
  WaveOpSetup setup;
  CHECK_NOTHROW(validate_setup(p, box, setup));
  CHECK_THROWS_AS(run_diagnostics(p, box, f, setup, {4.0, 64.0}, 2.0), HorizonError);
  CHECK_THROWS_AS(run_diagnostics(p, box, f, setup, {4.0, 36.0}, 2.0), HorizonError);
  const PeriodicBox coarse{150.0, 64};
  CHECK(coarse.points_per_wavelength(1.0) < 8.0);
  CHECK_THROWS_AS(validate_setup(p, coarse, setup), ResolutionError);
  WaveOpSetup stiff;
  stiff.dt = 1.0;
  CHECK_THROWS_AS(validate_setup(p, box, stiff), std::invalid_argument);
  CHECK_THROWS(validate_setup(well(0.5, 1.5), {2.0, 64}, setup));
}

TEST_CASE("diagnostics report: Cauchy gaps shrink and the CSV is complete") {
  const SparsePotential p = well(0.5, 1.0);
  const Field f = gaussian_packet(kBox, 0.0, 0.0, 2.0, 0.8, 0.0);
  WaveOpSetup setup;
  const WaveOpReport r = run_diagnostics(p, kBox, f, setup, {2.0, 4.0, 8.0}, 1.0);
  REQUIRE(r.rows.size() == 3);
  CHECK(std::isnan(r.rows[0].cauchy_gap));
  CHECK(r.rows[2].cauchy_gap < r.rows[1].cauchy_gap);
  for (const WaveOpRow& row : r.rows) CHECK(row.isometry_defect <= 1e-10);
  std::ostringstream os;
  r.write_csv(os);
  int lines = 0;
  for (char c : os.str()) lines += c == '\n';
  CHECK(lines == 4);
}

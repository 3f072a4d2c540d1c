#include <cmath>
#include <random>
#include <stdexcept>

#include "bessel_oracle.hpp"
#include "doctest.h"
#include "scatter/specfun.hpp"

using namespace scatter;
using scatter::specfun::kPi;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("K_0 matches the 100-digit series across all three evaluation regimes") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> mod(std::log(1e-4), std::log(45.0));
  std::uniform_real_distribution<double> arg(-0.5 * kPi, 0.5 * kPi);
  double worst = 0.0;
  for (int k = 0; k < 400; ++k) {
    const cplx w = std::polar(std::exp(mod(rng)), arg(rng));
    worst = std::max(worst, rel(specfun::macdonald_k(0.0, w), oracle::k0_series_mp(w)));
  }
  CHECK(worst < 1e-10);
  // Switch radii themselves.
  for (double r : {specfun::kSeriesRadius, specfun::kAsymptoticRadius})
    for (double a : {0.0, 0.7, -1.5}) {
      const cplx w = std::polar(r, a);
      CHECK(rel(specfun::macdonald_k(0.0, w), oracle::k0_series_mp(w)) < 1e-10);
    }
}

TEST_CASE("K_0 on the real axis agrees with its integral representation") {
  for (double x : {0.01, 0.5, 2.0, 9.0, 30.0})
    CHECK(std::abs(specfun::macdonald_k(0.0, x).real() / oracle::k0_quadrature(x) - 1.0) < 1e-10);
}

TEST_CASE("K_1/2 closed form") {
  CHECK(specfun::macdonald_k(0.5, 2.0).real() == doctest::Approx(0.1199377720).epsilon(1e-10));
  const cplx w(1.3, -2.4);
  const cplx expected = std::sqrt(kPi / (2.0 * w)) * std::exp(-w);
  CHECK(rel(specfun::macdonald_k(0.5, w), expected) < 1e-14);
}

TEST_CASE("macdonald_k rejects orders and arguments outside its domain") {
  CHECK_THROWS_AS(specfun::macdonald_k(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(specfun::macdonald_k(0.0, cplx(-1.0, 0.5)), std::domain_error);
  CHECK_THROWS_AS(specfun::macdonald_k(0.0, 0.0), std::domain_error);
}

TEST_CASE("d = 2 boundary kernel equals (i/4) H_0^(1) from the J_0, Y_0 series") {
  for (double lambda : {1.0, 2.5, 4.0})
    for (double r : {0.05, 0.7, 3.0, 12.0}) {
      const double t = std::sqrt(lambda) * r;
      const cplx hankel(oracle::j0_series_mp(t), oracle::y0_series_mp(t));
      const cplx expected = cplx(0.0, 0.25) * hankel;
      CHECK(rel(specfun::free_kernel({2}, SpectralPoint(lambda, 0.0), r), expected) < 1e-10);
    }
}

TEST_CASE("d = 3 closed form and K-form agree; d = 2 paths agree") {
  for (double eps : {0.0, 1e-3, 0.5, 1.0})
    for (double r : {0.01, 0.4, 2.0, 9.0}) {
      const SpectralPoint z(2.0, eps);
      CHECK(rel(specfun::free_kernel_kform({3}, z, r), specfun::free_kernel({3}, z, r)) < 1e-12);
      CHECK(rel(specfun::free_kernel_kform({2}, z, r), specfun::free_kernel({2}, z, r)) < 1e-12);
    }
}

TEST_CASE("d = 3 kernel decays with Im sqrt(z) and equals the textbook formula") {
  const SpectralPoint z(3.0, 0.4);
  const cplx k = std::sqrt(cplx(3.0, 0.4));
  const double r = 1.7;
  CHECK(rel(specfun::free_kernel({3}, z, r), std::exp(cplx(0, 1) * k * r) / (4 * kPi * r)) < 1e-14);
  CHECK(std::abs(specfun::free_kernel({3}, z, 2 * r)) < std::abs(specfun::free_kernel({3}, z, r)));
}

TEST_CASE("sqrt branch: Im sqrt(z) > 0 inside, sqrt(lambda) on the boundary") {
  for (double eps : {1e-8, 1e-3, 0.3, 1.0}) {
    const SpectralPoint z(1.5, eps);
    CHECK(z.sqrt_z().imag() > 0.0);
    CHECK(std::abs(z.sqrt_z() * z.sqrt_z() - z.z()) < 1e-14);
  }
  CHECK(SpectralPoint(4.0, 0.0).sqrt_z() == cplx(2.0, 0.0));
  CHECK_THROWS_AS(SpectralPoint(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(SpectralPoint(1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(SpectralPoint(1.0, -0.1), std::domain_error);
}

TEST_CASE("negative-energy kernels") {
  const double kappa = 1.3, r = 0.8;
  CHECK(specfun::negative_energy_kernel({3}, kappa, r) ==
        doctest::Approx(std::exp(-kappa * r) / (4 * kPi * r)).epsilon(1e-14));
  CHECK(specfun::negative_energy_kernel({3}, 0.0, r) == doctest::Approx(1.0 / (4 * kPi * r)).epsilon(1e-14));
  CHECK(specfun::negative_energy_kernel({2}, kappa, r) ==
        doctest::Approx(oracle::k0_quadrature(kappa * r) / (2 * kPi)).epsilon(1e-10));
  CHECK_THROWS_AS(specfun::negative_energy_kernel({3}, kappa, 0.0), std::domain_error);
  CHECK_THROWS_AS(specfun::negative_energy_kernel({3}, -1.0, r), std::domain_error);
}

TEST_CASE("free_kernel rejects r <= 0 and unsupported dimensions") {
  CHECK_THROWS_AS(specfun::free_kernel({3}, SpectralPoint(1.0, 0.1), 0.0), std::domain_error);
  CHECK_THROWS_AS(specfun::free_kernel({4}, SpectralPoint(1.0, 0.1), 1.0), std::domain_error);
}

TEST_CASE("calibrated envelope dominates the kernel on fresh samples") {
  SpectralRect rect;
  rect.a = 1.0;
  rect.b = 4.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim : {2, 3}) {
    const specfun::KernelEnvelope env({dim}, 1.0, rect);
    CHECK(env.constant() > env.raw_max_ratio());
    for (int k = 0; k < 2000; ++k) {
      const SpectralPoint z(1.0 + 3.0 * u(rng), u(rng) < 0.2 ? 0.0 : u(rng));
      const double r = std::pow(10.0, -5.0 + 8.0 * u(rng));
      CHECK(std::abs(specfun::free_kernel({dim}, z, r)) <= specfun::kernel_envelope(env, r));
    }
    CHECK(env.scaled(0.5).constant() == doctest::Approx(0.5 * env.constant()));
  }
}

TEST_CASE("log_ladder is strictly decreasing with exact end points") {
  const auto l = SpectralRect::log_ladder(1.0, 1e-3, 10);
  REQUIRE(l.size() == 10);
  CHECK(l.front() == 1.0);
  CHECK(l.back() == 1e-3);
  for (std::size_t k = 1; k < l.size(); ++k) CHECK(l[k] < l[k - 1]);
  CHECK(l[3] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(SpectralRect::log_ladder(1.0, 2.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(SpectralRect::log_ladder(1.0, 0.0, 5), std::invalid_argument);
}

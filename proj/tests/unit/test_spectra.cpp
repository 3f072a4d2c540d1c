#include <cmath>
#include <sstream>

#include "doctest.h"
#include "radial_oracle.hpp"
#include "scatter/specfun.hpp"
#include "scatter/spectra.hpp"

using namespace scatter;

namespace {

const oracle::RadialProfile kFlat = [](double) { return 1.0; };

SparsePotential identical_wells(int count, const Bump& b) {
  SparsePotential p;
  p.dim = 3;
  p.R = b.radius;
  p.sparsity_C = 5.0;
  p.gamma = 2.0;
  p.centers = gen_sparse_centers(3, p.sparsity_C, p.gamma, count, 3);
  p.bumps.assign(static_cast<std::size_t>(count), b);
  p.validate();
  apply_truncation(p);
  return p;
}

}  // namespace

TEST_CASE("binding threshold of the unit ball matches radial shooting") {
  const double exact = oracle::threshold_depth(kFlat, 1.0);
  CHECK(exact == doctest::Approx(specfun::kPi * specfun::kPi / 4.0).epsilon(1e-8));
  for (double h : {0.25, 0.125}) {
    spectra::SpectrumOptions o;
    o.grid.h = h;
    const double t = spectra::bound_state_threshold(3, Profile::ConstantBall, 1.0, o);
    MESSAGE("h = ", h, " threshold ", t, " exact ", exact);
    CHECK(std::abs(t - exact) <= (h == 0.25 ? 0.02 : 0.01) * exact);
  }
}

TEST_CASE("threshold separates bound from unbound wells") {
  const double t = spectra::bound_state_threshold(3, Profile::ConstantBall, 1.0);
  CHECK(spectra::discrete_spectrum(3, {Profile::ConstantBall, -0.9 * t, 1.0}).empty());
  CHECK(spectra::discrete_spectrum(3, {Profile::ConstantBall, -1.2 * t, 1.0}).size() == 1);
  // Scaling the radius by s scales the threshold by 1/s^2.
  const double t2 = spectra::bound_state_threshold(3, Profile::ConstantBall, 2.0);
  CHECK(t2 * 4.0 == doctest::Approx(t).epsilon(0.02));
}

TEST_CASE("deep well spectrum matches radial shooting") {
  const std::vector<double> exact = oracle::bound_states(kFlat, 20.0, 1.0, 2);
  REQUIRE(exact.size() == 4);  // one s-state, three p-states
  CHECK(exact[0] == doctest::Approx(-13.558120042821).epsilon(1e-9));
  const std::vector<double> got = spectra::discrete_spectrum(3, {Profile::ConstantBall, -20.0, 1.0});
  REQUIRE(got.size() == 4);
  CHECK(std::abs(got[0] - exact[0]) <= 0.01 * std::abs(exact[0]));
  for (int k = 1; k < 4; ++k) CHECK(std::abs(got[k] - exact[1]) <= 0.03 * std::abs(exact[1]));
  CHECK(spectra::ground_state_energy(3, {Profile::ConstantBall, -20.0, 1.0}, 1.0) == doctest::Approx(got[0]));
}

TEST_CASE("no eigenvalues for repulsive, zero or shallow bumps") {
  CHECK(spectra::discrete_spectrum(3, {Profile::ConstantBall, 3.0, 1.0}).empty());
  CHECK(spectra::discrete_spectrum(3, {Profile::SmoothBump, 0.0, 1.0}).empty());
  CHECK(spectra::discrete_spectrum(3, {Profile::StepWell, -1.0, 1.0}).empty());
  CHECK_THROWS_AS(spectra::ground_state_energy(3, {Profile::ConstantBall, -1.0, 1.0}, 1.0), EigenvalueLost);
  GridOptions o;
  o.h = 0.3;
  const Bump zero{Profile::ConstantBall, 0.0, 1.0};
  for (double mu : spectra::bs_eigs(zero, -1.0, build_bump_grid(3, zero, o))) CHECK(mu == 0.0);
}

TEST_CASE("Birman-Schwinger matrix is symmetric positive semidefinite and monotone in E") {
  GridOptions o;
  o.h = 0.3;
  const NystromGrid g = build_bump_grid(3, {Profile::SmoothBump, -5.0, 1.0}, o);
  const Eigen::MatrixXd s = spectra::bs_matrix(g, -2.0);
  CHECK((s - s.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  // The top eigenvalue grows as E rises towards 0.
  double prev = 0.0;
  for (double E : {-8.0, -4.0, -1.0, -0.1, 0.0}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(spectra::bs_matrix(g, E), Eigen::EigenvaluesOnly);
    CHECK(e.eigenvalues().maxCoeff() > prev);
    prev = e.eigenvalues().maxCoeff();
  }
  // sgn(v) S for an attractive bump: eigenvalues are -mu, so the ground state sits at -1.
  const double e0 = spectra::ground_state_energy(3, {Profile::SmoothBump, -5.0, 1.0}, 2.0, {o});
  const NystromGrid g2 = build_bump_grid(3, {Profile::SmoothBump, -10.0, 1.0}, o);
  const std::vector<double> mu = spectra::bs_eigs({Profile::SmoothBump, -10.0, 1.0}, e0, g2);
  CHECK(mu.front() == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("identical bumps: the sampled set is the spectrum of one bump") {
  const Bump b{Profile::ConstantBall, -20.0, 1.0};
  const SparsePotential p = identical_wells(4, b);
  const spectra::SpectrumReport r = spectra::klaus_set(p, 1e-3);
  const std::vector<double> one = spectra::discrete_spectrum(3, b);
  CHECK(r.identical_bumps);
  REQUIRE(r.per_bump.size() == p.retained_indices().size());
  for (const auto& s : r.per_bump) CHECK(s == one);
  CHECK(r.merged.size() == one.size() * r.per_bump.size());
  // The p-states are a triple within the resolution.
  CHECK(r.distinct.size() <= one.size());
  // A finite set: the fattened cover shrinks with the resolution.
  CHECK(spectra::cover_length(r.distinct, 1e-4) == doctest::Approx(0.1 * spectra::cover_length(r.distinct, 1e-3)));
  std::ostringstream js;
  r.write_json(js);
  CHECK(js.str().find("\"cover_length\"") != std::string::npos);
}

TEST_CASE("clusters and cover length") {
  CHECK(spectra::cover_length({}, 0.1) == 0.0);
  CHECK(spectra::cover_length({0.0}, 0.1) == doctest::Approx(0.1));
  CHECK(spectra::cover_length({0.0, 0.05}, 0.1) == doctest::Approx(0.15));
  CHECK(spectra::cover_length({0.0, 1.0}, 0.1) == doctest::Approx(0.2));
  const std::vector<spectra::Cluster> c = spectra::find_clusters({-1.0, -1.0005, -2.0, -0.5, -0.5004, -0.5008}, 1e-3);
  REQUIRE(c.size() == 3);
  CHECK(c[0].size == 1);
  CHECK_FALSE(c[0].accumulation);
  CHECK(c[1].size == 2);
  CHECK(c[1].accumulation);
  CHECK(c[2].size == 3);
}

TEST_CASE("beta family lands on its target energies") {
  const Bump b{Profile::ConstantBall, -6.0, 1.0};
  const spectra::BetaFamily f = spectra::beta_family(3, b, 0.1, 20);
  CHECK(f.e_low < f.e_high);
  REQUIRE(f.betas.size() == 20);
  for (std::size_t n = 0; n < f.betas.size(); ++n) {
    CHECK(f.betas[n] > 0.9);
    CHECK(f.betas[n] < 1.1);
    CHECK(f.targets[n] > f.e_low);
    CHECK(f.targets[n] < f.e_high);
    if (n % 5 == 0)
      CHECK(spectra::ground_state_energy(3, b, f.betas[n]) == doctest::Approx(f.targets[n]).epsilon(1e-7));
  }
}

TEST_CASE("Feynman-Hellmann: the ground state is smooth and decreasing in the coupling") {
  const spectra::FeynmanHellmann fh =
      spectra::feynman_hellmann_check(3, {Profile::ConstantBall, -20.0, 1.0}, 0.9, 1.1, 21);
  REQUIRE(fh.energies.size() == 21);
  CHECK(fh.strictly_decreasing);
  CHECK(fh.repeat_identical);
  CHECK(fh.slope_fh < 0.0);
  CHECK(fh.relative_mismatch <= 1e-3);
  CHECK(fh.max_second_derivative < 10.0);
  CHECK_THROWS(spectra::feynman_hellmann_check(3, {Profile::ConstantBall, -20.0, 1.0}, 0.9, 1.1, 2));
}

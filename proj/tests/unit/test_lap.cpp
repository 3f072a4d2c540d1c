#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "fd_resolvent.hpp"
#include "scatter/lap.hpp"

using namespace scatter;

namespace {

SparsePotential single(const Bump& b, int dim = 3) {
  SparsePotential p;
  p.dim = dim;
  p.R = b.radius;
  p.gamma = dim == 3 ? 2.0 : 2.5;
  p.centers = {Point{0, 0, 0}};
  p.bumps = {b};
  p.validate();
  return p;
}

std::shared_ptr<const NystromGrid> grid_of(const SparsePotential& p, double h) {
  GridOptions o;
  o.h = h;
  return std::make_shared<const NystromGrid>(build_grid(p, o));
}

OperatorMatrix custom(const Eigen::MatrixXcd& m) {
  OperatorMatrix op;
  op.entries = m;
  op.kind = OperatorKind::F;
  return op;
}

}  // namespace

TEST_CASE("F = 0 gives P = 0 with unit inverse norm") {
  const lap::SolveResult s = lap::solve_full(custom(Eigen::MatrixXcd::Zero(6, 6)));
  CHECK(s.P.entries.norm() == 0.0);
  CHECK(s.inv_norm == doctest::Approx(1.0));
  CHECK(s.residual == 0.0);
  CHECK(s.P.kind == OperatorKind::P);
}

TEST_CASE("random system satisfies the resolvent identity") {
  std::srand(3);
  const Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(50, 50) * 0.1;
  const lap::SolveResult s = lap::solve_full(custom(m));
  CHECK(s.residual <= 1e-12);
  // P(1+F) = F and (1+F)P = F: the two factors commute.
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(50, 50) + m;
  CHECK((a * s.P.entries - m).norm() <= 1e-12 * m.norm());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  CHECK(s.inv_norm == doctest::Approx(1.0 / svd.singularValues()(49)).epsilon(1e-8));
  CHECK(s.min_sv == doctest::Approx(svd.singularValues()(49)).epsilon(1e-8));
}

TEST_CASE("1 + F singular raises SingularSystemError") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = -1.0;
  CHECK_THROWS_AS(lap::solve_full(custom(m)), SingularSystemError);
  try {
    lap::solve_full(custom(m));
  } catch (const SingularSystemError& e) {
    CHECK(e.condition() > lap::kConditionThreshold);
  }
}

TEST_CASE("weak bump: ||F|| <= 1/2 implies ||(1+F)^-1|| <= 2 and ||P|| <= 1") {
  const auto g = grid_of(single({Profile::ConstantBall, 0.8, 1.0}), 0.25);
  for (double lambda : {1.0, 2.5, 4.0})
    for (double eps : {1.0, 0.1, 0.0}) {
      const OperatorMatrix f = opcore::assemble_F(g, SpectralPoint(lambda, eps));
      const double nf = opcore::op_norm(f);
      REQUIRE(nf <= 0.5);
      const lap::SolveResult s = lap::solve_full(f);
      CHECK(s.inv_norm <= 1.0 / (1.0 - nf) * (1 + 1e-9));
      CHECK(s.inv_norm <= 2.0);
      CHECK(opcore::op_norm(s.P) <= 1.0);
    }
}

TEST_CASE("Neumann series error respects its geometric bound") {
  const auto g = grid_of(single({Profile::SmoothBump, -1.0, 1.0}), 0.25);
  const OperatorMatrix f = opcore::assemble_F(g, SpectralPoint(2.0, 0.5));
  double prev = 1e300;
  for (int K : {0, 2, 4, 8}) {
    const lap::NeumannCheck c = lap::neumann_check(f, K);
    REQUIRE(c.applicable);
    CHECK(c.error <= c.bound * (1 + 1e-9));
    CHECK(c.error < prev);
    prev = c.error;
  }
  CHECK_THROWS_AS(lap::neumann_check(f, -1), std::invalid_argument);
}

TEST_CASE("boundary ladder: Cauchy gaps decrease with a positive rate") {
  const auto g = grid_of(single({Profile::ConstantBall, -2.0, 1.0}), 0.25);
  const lap::BoundaryLimit b = lap::boundary_limit(g, 2.0, {1.0, 0.5, 0.1, 0.01, 0.001});
  REQUIRE(b.gaps.size() == 5);
  for (std::size_t k = 1; k < b.gaps.size(); ++k) CHECK(b.gaps[k] < b.gaps[k - 1]);
  CHECK(b.monotone);
  CHECK(b.alpha > 0.5);
  CHECK(b.terminal_relative_gap() < 1e-2);
  CHECK(b.boundary_norm == doctest::Approx(opcore::op_norm(b.F_boundary)));
  CHECK(lap::fit_rate({1.0, 0.1, 0.01}, {2.0, 0.2, 0.02}) == doctest::Approx(1.0));
  CHECK(lap::fit_rate({1.0, 0.1, 0.01}, {3.0, 3.0 * std::sqrt(0.1), 0.3}) == doctest::Approx(0.5));
}

TEST_CASE("approximate-inverse certificate") {
  const auto g = grid_of(single({Profile::ConstantBall, -2.0, 1.0}), 0.25);
  const OperatorMatrix f_bnd = opcore::assemble_F(g, SpectralPoint(2.0, 0.0));
  const Eigen::Index n = f_bnd.size();
  const Eigen::MatrixXcd direct = (Eigen::MatrixXcd::Identity(n, n) + f_bnd.entries).inverse();

  SUBCASE("identical operators") {
    const lap::Certificate c = lap::approx_inverse_certificate(f_bnd, f_bnd);
    CHECK(c.r1 == 0.0);
    CHECK(c.r2 == 0.0);
    CHECK((c.inverse - direct).norm() <= 1e-12 * direct.norm());
  }
  SUBCASE("near the boundary") {
    const OperatorMatrix f_eps = opcore::assemble_F(g, SpectralPoint(2.0, 1e-6));
    const lap::Certificate c = lap::approx_inverse_certificate(f_eps, f_bnd);
    CHECK(c.r1 < 1.0);
    CHECK(c.r2 < 1.0);
    CHECK(c.formula_gap <= 1e-8);
    CHECK(opcore::spectral_norm(c.inverse - direct) <= 1e-8);
  }
  SUBCASE("forced failure") {
    OperatorMatrix shifted = f_bnd;
    shifted.entries -= 3.0 * Eigen::MatrixXcd::Identity(n, n);
    CHECK_THROWS_AS(lap::approx_inverse_certificate(f_bnd, shifted), CertificateFailure);
    try {
      lap::approx_inverse_certificate(f_bnd, shifted);
    } catch (const CertificateFailure& e) {
      CHECK(e.r1() >= 1.0);
    }
  }
}

TEST_CASE("scan of the zero potential is identically zero") {
  const SparsePotential p = single({Profile::ConstantBall, 0.0, 1.0});
  const auto g = grid_of(p, 0.5);
  SpectralRect rect;
  rect.lambda_samples = 3;
  rect.eps_samples = {1.0, 0.1};
  const lap::ScanReport r = lap::rect_scan(p, g, rect);
  REQUIRE(r.records.size() == 6);
  for (const lap::ScanRecord& x : r.records) {
    CHECK(x.ok);
    CHECK(x.norm_F == 0.0);
    CHECK(x.norm_P == 0.0);
    CHECK(x.inv_norm == doctest::Approx(1.0));
  }
  CHECK(r.summary.failures == 0);
  CHECK(r.summary.sup_norm_F == 0.0);
}

TEST_CASE("parallel and serial scans agree and the CSV has the documented header") {
  const SparsePotential p = single({Profile::StepWell, -1.5, 1.0});
  const auto g = grid_of(p, 0.3);
  SpectralRect rect;
  rect.lambda_samples = 3;
  rect.eps_samples = {1.0, 0.1, 0.01};
  lap::ScanOptions serial;
  serial.parallel = false;
  const lap::ScanReport a = lap::rect_scan(p, g, rect), b = lap::rect_scan(p, g, rect, serial);
  std::ostringstream ca, cb;
  a.write_csv(ca);
  b.write_csv(cb);
  CHECK(ca.str() == cb.str());
  std::istringstream lines(ca.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "lambda,epsilon,norm_F,norm_P,inv_norm,residual,cauchy_gap,min_sv");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 9);
  CHECK(a.summary.cauchy_monotone);
  CHECK(a.summary.max_residual <= 1e-10);
}

TEST_CASE("P agrees with an independent finite-difference resolvent (d = 2)") {
  for (double h : {0.25, 0.125}) {
    const Bump b{Profile::SmoothBump, -1.5, 1.0};
    const auto g = grid_of(single(b, 2), h);
    REQUIRE(g->size() <= 600);
    const SpectralPoint z(1.0, 0.5);
    const OperatorMatrix P = lap::solve_P(opcore::assemble_F(g, z));

    oracle::FdBox box;
    box.h = h;
    box.M = static_cast<int>(std::lround(30.0 / h));
    const Eigen::Index nfd = static_cast<Eigen::Index>(box.side()) * box.side();
    Eigen::VectorXd V = Eigen::VectorXd::Zero(nfd);
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(nfd);
    Eigen::VectorXcd phi(static_cast<Eigen::Index>(g->size()));
    std::vector<int> at(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
      phi(i) = cplx(1.0 + 0.3 * g->nodes[i][0], 0.2 * g->nodes[i][1]);
      at[i] = box.index(g->lattice[i][0], g->lattice[i][1]);
      // Cell integrals over h^2: the FD point stands for the whole square.
      const double frac = g->weights[i] / g->cell_volume();
      V(at[i]) = g->potential[i] * frac;
      f(at[i]) = g->root(i).signedroot * frac * phi(i);
    }
    const Eigen::VectorXcd psi = oracle::fd_resolvent_apply(box, V, z.z(), f);
    Eigen::VectorXcd ref(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) ref(i) = g->root(i).absroot * psi(at[i]);
    const Eigen::VectorXcd got = P.collocation() * phi;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      num += std::norm(got(i) - ref(i)) * g->weights[i];
      den += std::norm(ref(i)) * g->weights[i];
    }
    MESSAGE("h = ", h, " nodes ", g->size(), " relative L2 difference ", std::sqrt(num / den));
    CHECK(std::sqrt(num / den) <= 0.02);
  }
}

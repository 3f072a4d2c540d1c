#include "scatter/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scatter {

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::F: return "F";
    case OperatorKind::P: return "P";
    case OperatorKind::BS: return "BS";
    case OperatorKind::Custom: return "custom";
  }
  return "custom";
}

Eigen::MatrixXcd OperatorMatrix::collocation() const {
  if (!grid) throw std::logic_error("OperatorMatrix::collocation: no grid attached");
  const Eigen::Index n = size();
  Eigen::MatrixXcd m = entries;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sj = std::sqrt(grid->weights[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) *= sj / std::sqrt(grid->weights[static_cast<std::size_t>(i)]);
  }
  return m;
}

namespace opcore {

namespace {

void check_point(const SpectralPoint& z) {
  if (!(z.lambda() > 0.0)) throw std::invalid_argument("operator assembly requires lambda > 0");
}

// row_scale[i] * k_ij * col_scale[j], with the weight square roots folded into the scales.
OperatorMatrix scaled_operator(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z,
                               bool signed_columns, bool signed_rows, bool serial) {
  if (!g) throw std::invalid_argument("operator assembly: null grid");
  check_point(z);
  const std::size_t n = g->size();
  Eigen::VectorXd rs(static_cast<Eigen::Index>(n)), cs(static_cast<Eigen::Index>(n));
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    const SqrtSplit s = g->root(i);
    const double sw = std::sqrt(g->weights[i]);
    rs(static_cast<Eigen::Index>(i)) = (signed_rows ? s.signedroot : s.absroot) * sw;
    cs(static_cast<Eigen::Index>(i)) = (signed_columns ? s.signedroot : s.absroot) * sw;
    all_zero = all_zero && s.absroot == 0.0;
  }
  OperatorMatrix out;
  out.grid = g;
  out.z = z;
  if (all_zero) {
    out.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return out;
  }
  out.entries = serial ? kernel_matrix_serial(*g, z) : kernel_matrix(*g, z);
  out.entries = rs.asDiagonal() * out.entries * cs.asDiagonal();
  return out;
}

}  // namespace

Eigen::MatrixXcd kernel_matrix(const NystromGrid& g, const SpectralPoint& z) {
  check_point(z);
  const specfun::KernelSpec ks{g.dim};
  const CellKernel cell(g, [ks, z](double r) { return specfun::free_kernel(ks, z, r); });
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd k(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = cell(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cplx v = cell(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXcd kernel_matrix_serial(const NystromGrid& g, const SpectralPoint& z) {
  check_point(z);
  const specfun::KernelSpec ks{g.dim};
  const CellKernel cell(g, [ks, z](double r) { return specfun::free_kernel(ks, z, r); });
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) k(i, j) = cell(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return k;
}

OperatorMatrix assemble_F(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z) {
  OperatorMatrix m = scaled_operator(g, z, true, false, false);
  m.kind = OperatorKind::F;
  return m;
}

OperatorMatrix assemble_F_serial(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z) {
  OperatorMatrix m = scaled_operator(g, z, true, false, true);
  m.kind = OperatorKind::F;
  return m;
}

OperatorMatrix assemble_F(const SparsePotential& p, const std::shared_ptr<const NystromGrid>& g,
                          const SpectralPoint& z) {
  if (!g) throw std::invalid_argument("assemble_F: null grid");
  if (g->dim != p.dim) throw std::invalid_argument("assemble_F: grid and potential dimensions differ");
  for (int b : g->bump_index)
    if (!p.retained(b)) throw std::invalid_argument("assemble_F: grid node on a dropped bump");
  return assemble_F(g, z);
}

OperatorMatrix assemble_G(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z) {
  OperatorMatrix m = scaled_operator(g, z, true, true, false);
  m.kind = OperatorKind::Custom;
  return m;
}

std::pair<OperatorMatrix, OperatorMatrix> block_split(const OperatorMatrix& m) {
  if (!m.grid) throw std::invalid_argument("block_split: no grid attached");
  if (m.kind != OperatorKind::F) throw std::invalid_argument("block_split: requires kind F");
  OperatorMatrix diag = m, off = m;
  const Eigen::Index n = m.size();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool same = m.grid->bump_index[static_cast<std::size_t>(i)] ==
                        m.grid->bump_index[static_cast<std::size_t>(j)];
      (same ? off : diag).entries(i, j) = cplx(0.0, 0.0);
    }
  return {std::move(diag), std::move(off)};
}

double hermitian_top(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply, Eigen::Index n,
                     const NormOptions& opts) {
  if (n == 0) return 0.0;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = cplx(1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3), 0.25 * std::cos(0.9 * static_cast<double>(i)));
  v.normalize();
  const Eigen::Index m = std::min<Eigen::Index>(std::max(opts.krylov, 2), n);
  double theta = 0.0;
  int applied = 0;
  while (applied < opts.max_iter) {
    Eigen::MatrixXcd basis(n, m);
    std::vector<double> alpha, beta;
    basis.col(0) = v;
    Eigen::VectorXd ritz;
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::VectorXcd w = apply(basis.col(k));
      ++applied;
      alpha.push_back(basis.col(k).dot(w).real());
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).adjoint() * w);
      const double b = w.norm();
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (Eigen::Index i = 0; i <= k; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      theta = es.eigenvalues()(k);
      ritz = es.eigenvectors().col(k);
      // Ritz value error bound min(r, r^2 / gap), gap to the next Ritz value.
      const double residual = b * std::abs(ritz(k));
      double err = residual;
      if (k > 0) {
        const double gap = theta - es.eigenvalues()(k - 1);
        if (gap > 0.0) err = std::min(err, residual * residual / gap);
      }
      if (err <= opts.rel_tol * std::abs(theta) || b <= 1e-300 || k + 1 == n) return std::max(theta, 0.0);
      if (k + 1 < m) {
        beta.push_back(b);
        basis.col(k + 1) = w / b;
      }
    }
    v = basis * ritz;
    v.normalize();
  }
  return std::max(theta, 0.0);
}

double spectral_norm(const Eigen::MatrixXcd& m, const NormOptions& opts) {
  if (m.cols() == 0 || m.rows() == 0) return 0.0;
  auto apply = [&m](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return m.adjoint() * (m * x); };
  return std::sqrt(hermitian_top(apply, m.cols(), opts));
}

double op_norm(const OperatorMatrix& m, const NormOptions& opts) { return spectral_norm(m.entries, opts); }

double hs_norm(const OperatorMatrix& m) { return m.entries.norm(); }

double min_eigenvalue_imag_part(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return 0.0;
  const Eigen::MatrixXcd h = (m - m.adjoint()) * cplx(0.0, -0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("min_eigenvalue_imag_part: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

double positivity_check(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z) {
  if (!(z.epsilon() > 0.0)) throw std::invalid_argument("positivity_check requires epsilon > 0");
  return min_eigenvalue_imag_part(assemble_G(g, z).entries);
}

double sparse_tail_sum(int dim, double gamma, int N) {
  const double p = (dim - 1) * gamma - 1.0;  // sum n^{-p}
  if (!(p > 1.0)) throw std::invalid_argument("sparse_tail_sum: series diverges for (d-1) gamma <= 2");
  if (N < 1) throw std::invalid_argument("sparse_tail_sum: N must be >= 1");
  // Direct sum up to M, then Euler-Maclaurin for the remainder.
  const long M = std::max<long>(N, 1000) + 1000;
  double s = 0.0;
  for (long n = M - 1; n >= N; --n) s += std::pow(static_cast<double>(n), -p);
  const double m = static_cast<double>(M);
  s += std::pow(m, 1.0 - p) / (p - 1.0) + 0.5 * std::pow(m, -p) + p / 12.0 * std::pow(m, -p - 1.0) -
       p * (p + 1.0) * (p + 2.0) / 720.0 * std::pow(m, -p - 3.0);
  return s;
}

double offdiag_hs_constant(const SparsePotential& p, double envelope_constant) {
  return p.sup_norm() * envelope_constant * ball_volume(p.dim, p.R) *
         std::sqrt(2.0 * std::pow(2.0 / p.sparsity_C, p.dim - 1));
}

}  // namespace opcore
}  // namespace scatter

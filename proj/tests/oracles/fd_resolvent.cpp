#include "fd_resolvent.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>
#include <vector>

namespace scatter::oracle {

Eigen::VectorXcd fd_resolvent_apply(const FdBox& box, const Eigen::VectorXd& V, std::complex<double> z,
                                    const Eigen::VectorXcd& f) {
  const int s = box.side();
  const Eigen::Index n = static_cast<Eigen::Index>(s) * s;
  if (V.size() != n || f.size() != n) throw std::invalid_argument("fd_resolvent_apply: size mismatch");
  const double c = 1.0 / (box.h * box.h);
  std::vector<Eigen::Triplet<std::complex<double>>> t;
  t.reserve(static_cast<std::size_t>(5 * n));
  for (int i = -box.M; i < box.M; ++i)
    for (int j = -box.M; j < box.M; ++j) {
      const int k = box.index(i, j);
      t.emplace_back(k, k, 4.0 * c + V(k) - z);
      if (i > -box.M) t.emplace_back(k, box.index(i - 1, j), -c);
      if (i < box.M - 1) t.emplace_back(k, box.index(i + 1, j), -c);
      if (j > -box.M) t.emplace_back(k, box.index(i, j - 1), -c);
      if (j < box.M - 1) t.emplace_back(k, box.index(i, j + 1), -c);
    }
  Eigen::SparseMatrix<std::complex<double>> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("fd_resolvent_apply: factorization failed");
  return lu.solve(f);
}

}  // namespace scatter::oracle

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iterator>
#include <memory>
#include <utility>
#include <vector>
#include <algorithm>

#include "scatter/grid.hpp"
#include "scatter/potential.hpp"
#include "scatter/specfun.hpp"
#include "scatter/spectral.hpp"

namespace scatter {

enum class OperatorKind { F, P, BS, Custom };

const char* to_string(OperatorKind k);

/// Dense discretization of an integral operator on a NystromGrid.
///
/// entries are stored in L^2-symmetrized form: for an operator with kernel
/// k(x, y), entries(i, j) = sqrt(w_i) k(x_i, x_j) sqrt(w_j), which is the similarity
/// transform W^{1/2} M W^{-1/2} of the collocation matrix M_ij = k(x_i, x_j) w_j.
/// Spectral and Frobenius norms of entries then approximate the L^2 operator and
/// Hilbert-Schmidt norms, and products/inverses commute with the transform.
struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  std::shared_ptr<const NystromGrid> grid;
  SpectralPoint z;
  OperatorKind kind = OperatorKind::Custom;

  Eigen::Index size() const { return entries.rows(); }
  /// Collocation form M = W^{-1/2} entries W^{1/2} (acts on nodal values).
  Eigen::MatrixXcd collocation() const;
};

namespace opcore {

/// Average of k(|y|) over the cube [-h/2, h/2]^d: midpoint rule on m^d subcells, with
/// the 2^d subcells touching the origin refined recursively depth times.
template <class Kernel>
auto self_cell_average(Kernel&& k, int dim, double h, int m, int depth) -> decltype(k(1.0)) {
  using Value = decltype(k(1.0));
  struct Rec {
    Kernel& k;
    int dim, m;
    Value integrate(double side, int level) {
      const double sub = side / m;
      const double cell = std::pow(sub, dim);
      Value total{};
      const int mz = dim == 3 ? m : 1;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int l = 0; l < mz; ++l) {
            const bool central = (i == m / 2 - 1 || i == m / 2) && (j == m / 2 - 1 || j == m / 2) &&
                                 (dim == 2 || l == m / 2 - 1 || l == m / 2);
            if (central && level > 1) continue;
            double x = -0.5 * side + (i + 0.5) * sub;
            double y = -0.5 * side + (j + 0.5) * sub;
            double zc = dim == 3 ? -0.5 * side + (l + 0.5) * sub : 0.0;
            total += k(std::sqrt(x * x + y * y + zc * zc)) * cell;
          }
      if (level > 1) {
        // The 2^d central subcells form a cube of edge 2*sub centred at the origin.
        total += integrate(2.0 * sub, level - 1);
      }
      return total;
    }
  };
  Rec rec{k, dim, m};
  return rec.integrate(h, depth) / std::pow(h, dim);
}

/// Average of k(|y|) over the cube of edge h centred at offset * h (offset != 0),
/// midpoint rule on m^d subcells.
template <class Kernel>
auto offset_cell_average(Kernel&& k, int dim, double h, const int* offset, int m) -> decltype(k(1.0)) {
  using Value = decltype(k(1.0));
  const double sub = h / m;
  const int mz = dim == 3 ? m : 1;
  Value total{};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < mz; ++l) {
        const double x = offset[0] * h - 0.5 * h + (i + 0.5) * sub;
        const double y = offset[1] * h - 0.5 * h + (j + 0.5) * sub;
        const double zc = dim == 3 ? offset[2] * h - 0.5 * h + (l + 0.5) * sub : 0.0;
        total += k(std::sqrt(x * x + y * y + zc * zc));
      }
  return total / static_cast<double>(m * m * mz);
}

/// Kernel entries on a grid. Same-bump pairs whose lattice offset is within
/// options.near_field cells in every coordinate take cell averages: between two full cells
/// the average of the kernel over the source cube (the self-cell average on the diagonal),
/// keyed by the sorted absolute offsets; when a boundary cuts either cell, the grid's
/// binned quadrature of the two one-sided averages. A cut cell's diagonal is the self-cell
/// average of a cube with the same volume. All other pairs take the point value
/// k(|x_i - x_j|). Entries are symmetric bitwise.
template <class Kernel>
class CellKernel {
 public:
  using Value = decltype(std::declval<Kernel&>()(1.0));

  CellKernel(const NystromGrid& g, Kernel k) : g_(g), k_(std::move(k)), M_(std::max(g.options.near_field, 0)) {
    const int side = M_ + 1;
    const int count = g.dim == 3 ? side * side * side : side * side;
    table_.assign(static_cast<std::size_t>(count), Value{});
    const double h = g.options.h;
    const int m = g.options.self_cell_subdivision;
    table_[0] = self_cell_average(k_, g.dim, h, m, g.options.self_cell_depth);
    for (int a = 0; a <= M_; ++a)
      for (int b = 0; b <= a; ++b)
        for (int c = 0; c <= (g.dim == 3 ? b : 0); ++c) {
          if (a == 0) continue;
          const int off[3] = {a, b, c};
          table_[key(a, b, c)] = offset_cell_average(k_, g.dim, h, off, 2 * m);
        }
    diag_.assign(g.size(), table_[0]);
    std::vector<std::pair<double, Value>> by_volume;  // cut cells share few distinct volumes
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.partial(i)) continue;
      auto it = std::find_if(by_volume.begin(), by_volume.end(), [&](const auto& e) { return e.first == g.weights[i]; });
      if (it == by_volume.end()) {
        const double edge = std::pow(g.weights[i], 1.0 / g.dim);
        by_volume.emplace_back(g.weights[i], self_cell_average(k_, g.dim, edge, m, g.options.self_cell_depth));
        it = std::prev(by_volume.end());
      }
      diag_[i] = it->second;
    }
  }

  Value operator()(std::size_t i, std::size_t j) const {
    if (i == j) return diag_[i];
    const Point& xi = g_.nodes[i];
    const Point& xj = g_.nodes[j];
    if (M_ > 0 && g_.bump_index[i] == g_.bump_index[j]) {
      if (g_.partial(i) || g_.partial(j)) {
        const auto it = g_.near_pairs.find(NystromGrid::pair_key(std::min(i, j), std::max(i, j)));
        if (it != g_.near_pairs.end()) {
          Value total{};
          for (std::size_t b = it->second.begin; b < it->second.end; ++b) total += g_.near_w[b] * k_(g_.near_r[b]);
          return total;
        }
        return k_(distance(xi, xj));
      }
      int o[3];
      for (int c = 0; c < 3; ++c) o[c] = std::abs(g_.lattice[j][static_cast<std::size_t>(c)] - g_.lattice[i][static_cast<std::size_t>(c)]);
      if (o[0] <= M_ && o[1] <= M_ && o[2] <= M_) {
        std::sort(o, o + 3, [](int p, int q) { return p > q; });
        return table_[key(o[0], o[1], o[2])];
      }
    }
    return k_(distance(xi, xj));
  }

 private:
  std::size_t key(int a, int b, int c) const {
    const int side = M_ + 1;
    return static_cast<std::size_t>(g_.dim == 3 ? (a * side + b) * side + c : a * side + b);
  }

  const NystromGrid& g_;
  Kernel k_;
  int M_;
  std::vector<Value> table_;
  std::vector<Value> diag_;
};

/// Complex-symmetric matrix of the free kernel: k_{0,z}(|x_i - x_j|) off the diagonal,
/// the self-cell average on it. Rows are distributed over OpenMP threads.
Eigen::MatrixXcd kernel_matrix(const NystromGrid& g, const SpectralPoint& z);

/// Serial reference for kernel_matrix; fills every entry independently.
Eigen::MatrixXcd kernel_matrix_serial(const NystromGrid& g, const SpectralPoint& z);

/// F(z) = |V|^{1/2} R_0(z) V^{1/2} on the grid. Boundary points (epsilon = 0) are
/// assembled directly from the boundary kernel.
OperatorMatrix assemble_F(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z);
OperatorMatrix assemble_F_serial(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z);

/// Overload taking the potential to check it against the grid; the grid carries the
/// cell-averaged potential values.
OperatorMatrix assemble_F(const SparsePotential& p, const std::shared_ptr<const NystromGrid>& g,
                          const SpectralPoint& z);

/// G(z) = V^{1/2} R_0(z) V^{1/2}.
OperatorMatrix assemble_G(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z);

/// Diagonal (same bump) and off-diagonal parts; diag + offdiag == m entrywise.
std::pair<OperatorMatrix, OperatorMatrix> block_split(const OperatorMatrix& m);

struct NormOptions {
  double rel_tol = 1e-10;  // Ritz residual relative to the Ritz value
  int krylov = 40;         // Lanczos steps before a restart
  int max_iter = 2000;     // total operator applications
};

/// Largest eigenvalue of a Hermitian positive semidefinite operator of size n, by
/// restarted Lanczos with full reorthogonalization from a fixed start vector.
double hermitian_top(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply, Eigen::Index n,
                     const NormOptions& opts = {});

/// Largest singular value: sqrt of the top eigenvalue of M^* M.
double spectral_norm(const Eigen::MatrixXcd& m, const NormOptions& opts = {});
double op_norm(const OperatorMatrix& m, const NormOptions& opts = {});

/// (sum_ij |k_ij|^2 w_i w_j)^{1/2}.
double hs_norm(const OperatorMatrix& m);

/// Smallest eigenvalue of the Hermitian part (M - M^*)/(2i).
double min_eigenvalue_imag_part(const Eigen::MatrixXcd& m);

/// Smallest eigenvalue of Im G(z), G = V^{1/2} R_0(z) V^{1/2}; requires epsilon > 0.
double positivity_check(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z);

/// sum_{n >= N} n^{1 - (d-1) gamma}; requires (d-1) gamma - 1 > 1.
double sparse_tail_sum(int dim, double gamma, int N);

/// Constant K in hs_norm(offdiag F) <= K * sparse_tail_sum^{1/2}, following the
/// off-diagonal estimate: |x - y| >= C n^gamma / 2 on Sigma_m x Sigma_n (m < n) and
/// |k| <= C_env |x - y|^{-(d-1)/2}, so
///   K = sup|V| * C_env * |B_R| * sqrt(2 (2/C)^{d-1}).
double offdiag_hs_constant(const SparsePotential& p, double envelope_constant);

}  // namespace opcore
}  // namespace scatter

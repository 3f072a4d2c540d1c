#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatter/opcore.hpp"

namespace scatter {

/// 1 + F is numerically singular; carries the condition estimate.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// The approximate-inverse certificate did not apply (r1 or r2 >= 1).
class CertificateFailure : public std::runtime_error {
 public:
  CertificateFailure(const std::string& what, double r1, double r2)
      : std::runtime_error(what), r1_(r1), r2_(r2) {}
  double r1() const { return r1_; }
  double r2() const { return r2_; }

 private:
  double r1_, r2_;
};

namespace lap {

inline constexpr double kConditionThreshold = 1e12;

struct SolveResult {
  OperatorMatrix P;
  double residual = 0.0;   // ||P(1+F) - F||_HS / max(1, ||F||)
  double condition = 1.0;  // reciprocal of the LU condition estimate of 1+F
  double inv_norm = 1.0;   // ||(1+F)^{-1}||
  double min_sv = 1.0;     // smallest singular value of 1+F
};

/// Solves P(1+F) = F densely. P = (1+F)^{-1} F, which equals F (1+F)^{-1} since the
/// two factors commute. Throws SingularSystemError when the condition estimate of 1+F
/// exceeds kConditionThreshold.
SolveResult solve_full(const OperatorMatrix& F, const opcore::NormOptions& pi = {});

OperatorMatrix solve_P(const OperatorMatrix& F);

/// ||(1+F)^{-1}||.
double inverse_norm(const OperatorMatrix& F);

struct NeumannCheck {
  int K = 0;
  double normF = 0.0;
  double error = 0.0;  // ||(1+F)^{-1} - sum_{k<=K} (-F)^k||
  double bound = 0.0;  // ||F||^{K+1} / (1 - ||F||)
  bool applicable = false;  // ||F|| < 1
};

NeumannCheck neumann_check(const OperatorMatrix& F, int K);

struct BoundaryLimit {
  OperatorMatrix F_boundary;
  std::vector<double> eps;
  std::vector<double> gaps;  // ||F(lambda + i eps_k) - F(lambda + i0)||
  double boundary_norm = 0.0;
  double alpha = 0.0;        // slope of log gap against log eps
  bool monotone = true;      // gaps strictly decreasing along the ladder
  double terminal_relative_gap() const;
};

/// Evaluates F along the eps ladder (strictly decreasing, positive) and at eps = 0.
BoundaryLimit boundary_limit(const std::shared_ptr<const NystromGrid>& g, double lambda,
                             const std::vector<double>& ladder);

/// Least-squares slope of log(gap) on log(eps) over entries with gap > 0.
double fit_rate(const std::vector<double>& eps, const std::vector<double>& gaps);

struct ScanRecord {
  double lambda = 0.0;
  double epsilon = 0.0;
  double norm_F = 0.0;
  double norm_P = 0.0;
  double inv_norm = 0.0;
  double residual = 0.0;
  double cauchy_gap = 0.0;
  double min_sv = 0.0;
  double condition = 0.0;
  bool ok = true;
  std::string error;
};

struct ScanSummary {
  double sup_norm_F = 0.0;
  double sup_norm_P = 0.0;
  double sup_inv_norm = 0.0;
  double max_residual = 0.0;
  double inf_min_sv = 0.0;
  double max_cauchy_gap = 0.0;
  int failures = 0;
  bool cauchy_monotone = true;             // at every lambda, gap decreasing in eps
  double max_terminal_relative_gap = 0.0;  // gap at the smallest eps / ||F(lambda + i0)||
  double min_rate = 0.0;                   // smallest fitted Cauchy rate alpha over lambda
  std::vector<double> boundary_norms;      // ||F(lambda + i0)|| per lambda
  std::vector<double> rates;               // fitted alpha per lambda
};

struct ScanReport {
  std::vector<ScanRecord> records;  // sorted by (lambda, epsilon)
  ScanSummary summary;
  std::size_t nodes = 0;

  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

struct ScanOptions {
  bool parallel = true;
  std::string dump_dir;  // empty: no dumps
  bool resume = false;   // load existing dumps instead of assembling
  opcore::NormOptions power;
};

/// Sweeps the rectangle: for each lambda the boundary operator F(lambda + i0), then for each
/// eps on the ladder F, P, the norms, the residual and the Cauchy gap to the boundary.
/// Per-point solver failures are recorded, not thrown.
ScanReport rect_scan(const SparsePotential& p, const std::shared_ptr<const NystromGrid>& g,
                     const SpectralRect& rect, const ScanOptions& opts = {});

/// Rebuilds the summary from the records (sorting them first).
void summarize(ScanReport& report, const std::vector<double>& boundary_norms);

struct Certificate {
  double r1 = 0.0;  // ||(F_bnd - F_eps)(1+F_eps)^{-1}||
  double r2 = 0.0;  // ||(1+F_eps)^{-1}(F_bnd - F_eps)||
  Eigen::MatrixXcd inverse;     // two-sided inverse of 1 + F_bnd
  double formula_gap = 0.0;     // ||B1 (I+R1)^{-1} - (I+R2)^{-1} B2||
};

/// Approximate-inverse certificate for 1 + F_bnd from the invertible 1 + F_eps.
/// Throws CertificateFailure when r1 or r2 >= 1.
Certificate approx_inverse_certificate(const OperatorMatrix& F_eps, const OperatorMatrix& F_bnd);

}  // namespace lap
}  // namespace scatter

#include "scatter/lap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "scatter/matrix_dump.hpp"

namespace scatter::lap {

namespace {

using Eigen::MatrixXcd;

MatrixXcd identity_plus(const MatrixXcd& f) {
  MatrixXcd a = f;
  a.diagonal().array() += cplx(1.0, 0.0);
  return a;
}

// Largest singular value of A^{-1}. For a well-conditioned A the smallest eigenvalue of
// A^* A is accurate to ~1e-16 cond^2 relative and is taken densely: there 1 + F is close
// to the identity on most directions and Krylov methods crawl through the cluster at
// the bottom of the spectrum. Otherwise the top of (A^* A)^{-1} is well separated and
// Lanczos through the LU factors converges quickly.
double inverse_spectral_norm(const MatrixXcd& a, const Eigen::PartialPivLU<MatrixXcd>& lu, double condition,
                             const opcore::NormOptions& opts) {
  if (a.rows() == 0) return 0.0;
  if (condition <= 1e4) {
    const MatrixXcd gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && es.eigenvalues()(0) > 0.0) return 1.0 / std::sqrt(es.eigenvalues()(0));
  }
  auto apply = [&lu](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return lu.adjoint().solve(lu.solve(x)); };
  return std::sqrt(opcore::hermitian_top(apply, lu.rows(), opts));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string dump_name(const std::string& dir, std::size_t li, long ei) {
  char buf[64];
  if (ei < 0)
    std::snprintf(buf, sizeof buf, "F_l%02zu_bnd.bin", li);
  else
    std::snprintf(buf, sizeof buf, "F_l%02zu_e%02ld.bin", li, ei);
  return (std::filesystem::path(dir) / buf).string();
}

OperatorMatrix assemble_or_load(const std::shared_ptr<const NystromGrid>& g, const SpectralPoint& z,
                                const ScanOptions& opts, const std::string& path) {
  if (!opts.dump_dir.empty() && opts.resume && std::filesystem::exists(path)) {
    OperatorMatrix m = read_matrix_dump(path);
    if (static_cast<std::size_t>(m.size()) == g->size() && m.z.lambda() == z.lambda() &&
        m.z.epsilon() == z.epsilon() && m.kind == OperatorKind::F) {
      m.grid = g;
      return m;
    }
  }
  OperatorMatrix m = opcore::assemble_F(g, z);
  if (!opts.dump_dir.empty()) write_matrix_dump(path, m);
  return m;
}

}  // namespace

SolveResult solve_full(const OperatorMatrix& F, const opcore::NormOptions& pi) {
  SolveResult out;
  out.P.grid = F.grid;
  out.P.z = F.z;
  out.P.kind = OperatorKind::P;
  const Eigen::Index n = F.size();
  if (n == 0) {
    out.P.entries = MatrixXcd(0, 0);
    return out;
  }
  const MatrixXcd a = identity_plus(F.entries);
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  const double rcond = lu.rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kConditionThreshold))
    throw SingularSystemError("1 + F(z) is numerically singular (condition estimate " + fmt(out.condition) + ")",
                              out.condition);
  out.P.entries = lu.solve(F.entries);
  const double normF = opcore::spectral_norm(F.entries, pi);
  out.residual = (out.P.entries * a - F.entries).norm() / std::max(1.0, normF);
  out.inv_norm = inverse_spectral_norm(a, lu, out.condition, pi);
  out.min_sv = out.inv_norm > 0.0 ? 1.0 / out.inv_norm : 0.0;
  return out;
}

OperatorMatrix solve_P(const OperatorMatrix& F) { return solve_full(F).P; }

double inverse_norm(const OperatorMatrix& F) { return solve_full(F).inv_norm; }

NeumannCheck neumann_check(const OperatorMatrix& F, int K) {
  if (K < 0) throw std::invalid_argument("neumann_check: K must be >= 0");
  NeumannCheck c;
  c.K = K;
  c.normF = opcore::spectral_norm(F.entries);
  c.applicable = c.normF < 1.0;
  const Eigen::Index n = F.size();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  MatrixXcd sum = id, term = id;
  for (int k = 1; k <= K; ++k) {
    term = -(term * F.entries);
    sum += term;
  }
  const MatrixXcd inv = identity_plus(F.entries).partialPivLu().inverse();
  c.error = opcore::spectral_norm(inv - sum);
  c.bound = c.applicable ? std::pow(c.normF, K + 1) / (1.0 - c.normF) : std::numeric_limits<double>::infinity();
  return c;
}

double BoundaryLimit::terminal_relative_gap() const {
  if (gaps.empty() || boundary_norm == 0.0) return 0.0;
  return gaps.back() / boundary_norm;
}

double fit_rate(const std::vector<double>& eps, const std::vector<double>& gaps) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < eps.size() && k < gaps.size(); ++k) {
    if (!(gaps[k] > 0.0) || !(eps[k] > 0.0)) continue;
    const double x = std::log(eps[k]), y = std::log(gaps[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  const double den = m * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (m * sxy - sx * sy) / den;
}

namespace {

bool decreasing(const std::vector<double>& gaps) {
  for (std::size_t k = 1; k < gaps.size(); ++k)
    if (!(gaps[k] < gaps[k - 1] || (gaps[k] == 0.0 && gaps[k - 1] == 0.0))) return false;
  return true;
}

}  // namespace

BoundaryLimit boundary_limit(const std::shared_ptr<const NystromGrid>& g, double lambda,
                             const std::vector<double>& ladder) {
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0.0)) throw std::invalid_argument("boundary_limit: ladder values must be positive");
    if (k > 0 && !(ladder[k] < ladder[k - 1]))
      throw std::invalid_argument("boundary_limit: ladder must be strictly decreasing");
  }
  BoundaryLimit out;
  out.F_boundary = opcore::assemble_F(g, SpectralPoint(lambda, 0.0));
  out.boundary_norm = opcore::op_norm(out.F_boundary);
  for (double e : ladder) {
    OperatorMatrix f = opcore::assemble_F(g, SpectralPoint(lambda, e));
    out.eps.push_back(e);
    out.gaps.push_back(opcore::spectral_norm(f.entries - out.F_boundary.entries));
  }
  out.monotone = decreasing(out.gaps);
  out.alpha = fit_rate(out.eps, out.gaps);
  return out;
}

void summarize(ScanReport& report, const std::vector<double>& boundary_norms) {
  auto& recs = report.records;
  std::sort(recs.begin(), recs.end(), [](const ScanRecord& a, const ScanRecord& b) {
    return a.lambda != b.lambda ? a.lambda < b.lambda : a.epsilon < b.epsilon;
  });
  ScanSummary s;
  s.boundary_norms = boundary_norms;
  s.inf_min_sv = std::numeric_limits<double>::infinity();
  for (const ScanRecord& r : recs) {
    s.sup_norm_F = std::max(s.sup_norm_F, r.norm_F);
    s.max_cauchy_gap = std::max(s.max_cauchy_gap, r.cauchy_gap);
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    s.sup_norm_P = std::max(s.sup_norm_P, r.norm_P);
    s.sup_inv_norm = std::max(s.sup_inv_norm, r.inv_norm);
    s.max_residual = std::max(s.max_residual, r.residual);
    s.inf_min_sv = std::min(s.inf_min_sv, r.min_sv);
  }
  if (recs.empty()) s.inf_min_sv = 0.0;

  // Per-lambda Cauchy table, read from the largest eps down.
  s.min_rate = std::numeric_limits<double>::infinity();
  std::size_t li = 0;
  for (std::size_t i = 0; i < recs.size(); ++li) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].lambda == recs[i].lambda) ++j;
    std::vector<double> eps, gaps;
    for (std::size_t k = j; k-- > i;) {
      eps.push_back(recs[k].epsilon);
      gaps.push_back(recs[k].cauchy_gap);
    }
    s.cauchy_monotone = s.cauchy_monotone && decreasing(gaps);
    const double bn = li < boundary_norms.size() ? boundary_norms[li] : 0.0;
    if (bn > 0.0) s.max_terminal_relative_gap = std::max(s.max_terminal_relative_gap, gaps.back() / bn);
    const double rate = fit_rate(eps, gaps);
    s.rates.push_back(rate);
    s.min_rate = std::min(s.min_rate, rate);
    i = j;
  }
  if (s.rates.empty()) s.min_rate = 0.0;
  report.summary = std::move(s);
}

ScanReport rect_scan(const SparsePotential& p, const std::shared_ptr<const NystromGrid>& g,
                     const SpectralRect& rect, const ScanOptions& opts) {
  rect.validate();
  if (!g) throw std::invalid_argument("rect_scan: null grid");
  if (g->dim != p.dim) throw std::invalid_argument("rect_scan: grid and potential dimensions differ");
  const std::vector<double> lambdas = rect.lambdas();
  std::vector<double> ladder;
  for (double e : rect.eps_samples)
    if (e > 0.0) ladder.push_back(e);
  if (!opts.dump_dir.empty()) std::filesystem::create_directories(opts.dump_dir);

  const long nl = static_cast<long>(lambdas.size());
  const long ne = static_cast<long>(ladder.size());
  std::vector<OperatorMatrix> boundary(static_cast<std::size_t>(nl));
  std::vector<double> boundary_norms(static_cast<std::size_t>(nl), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(nl));

#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (long li = 0; li < nl; ++li) {
    const auto l = static_cast<std::size_t>(li);
    try {
      boundary[l] = assemble_or_load(g, SpectralPoint(lambdas[l], 0.0), opts, dump_name(opts.dump_dir, l, -1));
      boundary_norms[l] = opcore::op_norm(boundary[l], opts.power);
    } catch (const std::exception& e) {
      errors[l] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error("rect_scan: boundary assembly failed: " + e);

  ScanReport report;
  report.nodes = g->size();
  report.records.resize(static_cast<std::size_t>(nl * ne));
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (long t = 0; t < nl * ne; ++t) {
    const auto l = static_cast<std::size_t>(t / ne);
    const auto e = static_cast<std::size_t>(t % ne);
    ScanRecord& r = report.records[static_cast<std::size_t>(t)];
    r.lambda = lambdas[l];
    r.epsilon = ladder[e];
    try {
      OperatorMatrix F =
          assemble_or_load(g, SpectralPoint(r.lambda, r.epsilon), opts, dump_name(opts.dump_dir, l, static_cast<long>(e)));
      r.norm_F = opcore::op_norm(F, opts.power);
      r.cauchy_gap = opcore::spectral_norm(F.entries - boundary[l].entries, opts.power);
      SolveResult s = solve_full(F, opts.power);
      r.norm_P = opcore::op_norm(s.P, opts.power);
      r.inv_norm = s.inv_norm;
      r.residual = s.residual;
      r.min_sv = s.min_sv;
      r.condition = s.condition;
    } catch (const SingularSystemError& ex) {
      r.ok = false;
      r.condition = ex.condition();
      r.error = ex.what();
    } catch (const std::exception& ex) {
      r.ok = false;
      r.error = ex.what();
    }
  }
  summarize(report, boundary_norms);
  return report;
}

void ScanReport::write_csv(std::ostream& os) const {
  os << "lambda,epsilon,norm_F,norm_P,inv_norm,residual,cauchy_gap,min_sv\n";
  for (const ScanRecord& r : records) {
    if (r.ok)
      os << fmt(r.lambda) << ',' << fmt(r.epsilon) << ',' << fmt(r.norm_F) << ',' << fmt(r.norm_P) << ','
         << fmt(r.inv_norm) << ',' << fmt(r.residual) << ',' << fmt(r.cauchy_gap) << ',' << fmt(r.min_sv) << '\n';
    else
      os << fmt(r.lambda) << ',' << fmt(r.epsilon) << ',' << fmt(r.norm_F) << ",nan,nan,nan," << fmt(r.cauchy_gap)
         << ",nan\n";
  }
}

void ScanReport::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  const ScanSummary& s = summary;
  j["nodes"] = nodes;
  j["points"] = records.size();
  j["failures"] = s.failures;
  j["sup_norm_F"] = s.sup_norm_F;
  j["sup_norm_P"] = s.sup_norm_P;
  j["sup_inv_norm"] = s.sup_inv_norm;
  j["max_residual"] = s.max_residual;
  j["inf_min_sv"] = s.inf_min_sv;
  j["max_cauchy_gap"] = s.max_cauchy_gap;
  j["cauchy_monotone"] = s.cauchy_monotone;
  j["max_terminal_relative_gap"] = s.max_terminal_relative_gap;
  j["min_cauchy_rate"] = s.min_rate;
  j["boundary_norms"] = s.boundary_norms;
  j["cauchy_rates"] = s.rates;
  nlohmann::ordered_json fails = nlohmann::ordered_json::array();
  for (const ScanRecord& r : records)
    if (!r.ok) fails.push_back({{"lambda", r.lambda}, {"epsilon", r.epsilon}, {"error", r.error}});
  j["failed_points"] = fails;
  os << j.dump(2) << '\n';
}

Certificate approx_inverse_certificate(const OperatorMatrix& F_eps, const OperatorMatrix& F_bnd) {
  if (F_eps.size() != F_bnd.size()) throw std::invalid_argument("approx_inverse_certificate: size mismatch");
  const Eigen::Index n = F_eps.size();
  Eigen::PartialPivLU<MatrixXcd> lu(identity_plus(F_eps.entries));
  const double rcond = lu.rcond();
  if (!(rcond > 0.0 && 1.0 / rcond <= kConditionThreshold))
    throw SingularSystemError("approx_inverse_certificate: 1 + F_eps is numerically singular",
                              rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
  const MatrixXcd B = lu.inverse();
  const MatrixXcd D = F_bnd.entries - F_eps.entries;
  const MatrixXcd R1 = D * B;
  const MatrixXcd R2 = B * D;
  Certificate c;
  c.r1 = opcore::spectral_norm(R1);
  c.r2 = opcore::spectral_norm(R2);
  if (!(c.r1 < 1.0 && c.r2 < 1.0))
    throw CertificateFailure("approximate-inverse certificate failed: r1 = " + fmt(c.r1) + ", r2 = " + fmt(c.r2) +
                                 " (shrink epsilon)",
                             c.r1, c.r2);
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  // 1 + F_bnd = (I + R1)(1 + F_eps) = (1 + F_eps)(I + R2).
  const MatrixXcd left = (id + R1).transpose().partialPivLu().solve(B.transpose()).transpose();
  const MatrixXcd right = (id + R2).partialPivLu().solve(B);
  c.formula_gap = opcore::spectral_norm(left - right);
  c.inverse = right;
  return c;
}

}  // namespace scatter::lap

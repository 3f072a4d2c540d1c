#include "scatter/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "scatter/opcore.hpp"
#include "scatter/specfun.hpp"

namespace scatter::spectra {

namespace {

double kappa_of(double E) { return std::sqrt(std::max(0.0, -E)); }

double upper_energy(int dim, const SpectrumOptions& opts) { return dim == 3 ? 0.0 : -opts.d2_energy_cutoff; }

std::vector<double> descending_eigenvalues(const Eigen::MatrixXd& s) {
  if (s.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::reverse(out.begin(), out.end());
  return out;
}

// Top eigenvalue (and vector) of a symmetric positive semidefinite matrix.
double top_eigenpair(const Eigen::MatrixXd& s, Eigen::VectorXd* vec = nullptr) {
  const Eigen::Index n = s.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double mu = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd w = s * v;
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
    if (it > 0 && std::abs(next - mu) <= 1e-13 * std::abs(next)) {
      mu = next;
      break;
    }
    mu = next;
  }
  if (vec) *vec = v;
  return mu;
}

// Root of f on [a, b] with f(a) < 0 < f(b), Illinois variant of regula falsi.
template <class Fn>
double illinois(Fn&& f, double a, double fa, double b, double fb, double tol) {
  int side = 0;
  double c = 0.5 * (a + b);
  for (int it = 0; it < 500; ++it) {
    c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if (fc > 0.0) {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    } else {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    }
    if (b - a <= tol) break;
    if (std::abs(fc) <= 1e-14) break;
  }
  return c;
}

}  // namespace

Eigen::MatrixXd bs_matrix(const NystromGrid& g, double E) {
  if (E > 0.0) throw std::invalid_argument("bs_matrix: E must be <= 0");
  if (E == 0.0 && g.dim != 3) throw std::invalid_argument("bs_matrix: E = 0 is only allowed for d = 3");
  const specfun::KernelSpec ks{g.dim};
  const double kappa = kappa_of(E);
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i)
    scale(i) = g.root_potential[static_cast<std::size_t>(i)] * std::sqrt(g.weights[static_cast<std::size_t>(i)]);
  const opcore::CellKernel cell(g, [ks, kappa](double r) { return specfun::negative_energy_kernel(ks, kappa, r); });
  Eigen::MatrixXd s(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, i) = scale(i) * cell(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) * scale(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = scale(i) * cell(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * scale(j);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

std::vector<double> bs_eigs(const Bump& v, double E, const NystromGrid& g) {
  if (!(E < 0.0)) throw std::invalid_argument("bs_eigs: E must be negative");
  std::vector<double> s = descending_eigenvalues(bs_matrix(g, E));
  const double sign = v.amplitude < 0.0 ? -1.0 : 1.0;
  for (double& x : s) x *= sign;
  std::sort(s.begin(), s.end());
  return s;
}

namespace {

// Sub-zero spectrum of H_0 + v on a grid built for a bump with the same profile and
// radius; S_v = scale * S_grid with scale the ratio of the amplitudes.
std::vector<double> spectrum_on_grid(int dim, const Bump& v, const NystromGrid& g, double scale,
                                     const SpectrumOptions& opts) {
  if (!(v.amplitude < 0.0)) return {};
  const double e_hi = upper_energy(dim, opts);
  double e_lo = -v.sup_norm();
  auto s_at = [&](double E) {
    std::vector<double> s = descending_eigenvalues(bs_matrix(g, E));
    for (double& x : s) x *= scale;
    return s;
  };
  const std::vector<double> top = s_at(e_hi);
  const auto states = static_cast<std::size_t>(std::count_if(top.begin(), top.end(), [](double s) { return s > 1.0; }));
  if (states == 0) return {};
  std::vector<double> low = s_at(e_lo);
  for (int k = 0; k < 8 && low[0] >= 1.0; ++k) {
    e_lo *= 2.0;  // discretization may push the lowest root slightly below -sup|v|
    low = s_at(e_lo);
  }
  if (low[0] >= 1.0) throw EigenvalueLost("discrete_spectrum: no bracket below -sup|v|");

  std::vector<double> out;
  for (std::size_t j = 0; j < states; ++j) {
    // The top branch only needs the dominant eigenvalue.
    auto f = [&](double E) { return (j == 0 ? scale * top_eigenpair(bs_matrix(g, E)) : s_at(E)[j]) - 1.0; };
    out.push_back(illinois(f, e_lo, low[j] - 1.0, e_hi, top[j] - 1.0, opts.energy_tol));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<double> discrete_spectrum(int dim, const Bump& v, const SpectrumOptions& opts) {
  if (!(v.amplitude < 0.0)) return {};
  return spectrum_on_grid(dim, v, build_bump_grid(dim, v, opts.grid), 1.0, opts);
}

double bound_state_threshold(int dim, Profile profile, double radius, const SpectrumOptions& opts) {
  // S_{-depth f} = depth S_{-f} on a fixed grid, so the binding depth is 1 / s_1(E -> 0).
  const NystromGrid g = build_bump_grid(dim, Bump{profile, -1.0, radius}, opts.grid);
  return 1.0 / top_eigenpair(bs_matrix(g, upper_energy(dim, opts)));
}

namespace {

struct GroundState {
  double energy;
  Eigen::VectorXd vector;  // top eigenvector of S_{beta v}(energy)
};

GroundState ground_state_impl(int dim, const Bump& v, double beta, const SpectrumOptions& opts,
                              const NystromGrid& g) {
  if (!(v.amplitude < 0.0)) throw EigenvalueLost("ground state requested for a nonnegative bump");
  if (!(beta > 0.0)) throw std::invalid_argument("coupling beta must be positive");
  const double e_hi = upper_energy(dim, opts);
  const double e_lo = -beta * v.sup_norm();
  auto f = [&](double E) { return beta * top_eigenpair(bs_matrix(g, E)) - 1.0; };
  const double f_hi = f(e_hi);
  if (!(f_hi > 0.0)) throw EigenvalueLost("no bound state of H_0 + beta v in (-sup|beta v|, 0)");
  const double f_lo = f(e_lo);
  if (!(f_lo < 0.0)) throw EigenvalueLost("ground state left (-sup|beta v|, 0)");
  GroundState gs;
  gs.energy = illinois(f, e_lo, f_lo, e_hi, f_hi, opts.energy_tol);
  top_eigenpair(bs_matrix(g, gs.energy), &gs.vector);
  return gs;
}

}  // namespace

double ground_state_energy(int dim, const Bump& v, double beta, const SpectrumOptions& opts) {
  const NystromGrid g = build_bump_grid(dim, v, opts.grid);
  return ground_state_impl(dim, v, beta, opts, g).energy;
}

double cover_length(std::vector<double> points, double resolution) {
  if (points.empty()) return 0.0;
  std::sort(points.begin(), points.end());
  const double half = 0.5 * resolution;
  double total = 0.0, lo = points[0] - half, hi = points[0] + half;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] - half <= hi) {
      hi = std::max(hi, points[i] + half);
    } else {
      total += hi - lo;
      lo = points[i] - half;
      hi = points[i] + half;
    }
  }
  return total + (hi - lo);
}

std::vector<Cluster> find_clusters(std::vector<double> points, double resolution) {
  std::sort(points.begin(), points.end());
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < points.size();) {
    std::size_t j = i + 1;
    while (j < points.size() && points[j] - points[j - 1] <= resolution) ++j;
    Cluster c;
    c.lo = points[i];
    c.hi = points[j - 1];
    c.size = static_cast<int>(j - i);
    c.accumulation = c.size >= 2;
    out.push_back(c);
    i = j;
  }
  return out;
}

SpectrumReport klaus_set(const SparsePotential& p, double resolution, const SpectrumOptions& opts) {
  if (!(resolution > 0.0)) throw std::invalid_argument("klaus_set: resolution must be positive");
  SpectrumReport rep;
  rep.resolution = resolution;
  const std::vector<int> idx = p.retained_indices();

  // Distinct bumps are solved once each; identical bumps share the result.
  std::vector<Bump> unique;
  std::vector<std::size_t> which(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Bump& b = p.bumps[static_cast<std::size_t>(idx[k])];
    auto it = std::find(unique.begin(), unique.end(), b);
    which[k] = static_cast<std::size_t>(it - unique.begin());
    if (it == unique.end()) unique.push_back(b);
  }
  // Bumps differing only in amplitude share one grid.
  std::vector<NystromGrid> grids;
  std::vector<std::size_t> grid_of(unique.size());
  std::vector<double> scale(unique.size(), 1.0);
  for (std::size_t u = 0; u < unique.size(); ++u) {
    const Bump& b = unique[u];
    std::size_t k = 0;
    for (; k < u; ++k) {
      const Bump& a = unique[k];
      if (a.profile == b.profile && a.radius == b.radius && a.amplitude < 0.0 && b.amplitude < 0.0) break;
    }
    if (k < u && b.amplitude < 0.0) {
      grid_of[u] = grid_of[k];
      scale[u] = b.amplitude / unique[k].amplitude * scale[k];
    } else {
      grid_of[u] = grids.size();
      grids.push_back(b.amplitude < 0.0 ? build_bump_grid(p.dim, b, opts.grid) : NystromGrid{});
    }
  }
  std::vector<std::vector<double>> spectra(unique.size());
  std::vector<std::string> errors(unique.size());
  const long nu = static_cast<long>(unique.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long u = 0; u < nu; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    try {
      spectra[uu] = spectrum_on_grid(p.dim, unique[uu], grids[grid_of[uu]], scale[uu], opts);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(u)] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error("klaus_set: " + e);

  for (std::size_t k = 0; k < idx.size(); ++k) {
    rep.bump_numbers.push_back(idx[k] + 1);
    rep.per_bump.push_back(spectra[which[k]]);
    rep.merged.insert(rep.merged.end(), spectra[which[k]].begin(), spectra[which[k]].end());
  }
  std::sort(rep.merged.begin(), rep.merged.end());
  rep.distinct = rep.merged;
  rep.distinct.erase(std::unique(rep.distinct.begin(), rep.distinct.end()), rep.distinct.end());
  rep.clusters = find_clusters(rep.merged, resolution);
  rep.cover_length = cover_length(rep.distinct, resolution);
  rep.identical_bumps = unique.size() == 1;
  if (rep.identical_bumps)
    rep.note = "all retained bumps are identical: the sampled set is the discrete spectrum of one bump, "
               "repeated for every bump";
  else if (rep.merged.empty())
    rep.note = "no eigenvalues below zero: the sampled set is empty";
  return rep;
}

void SpectrumReport::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json bumps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < per_bump.size(); ++k)
    bumps.push_back({{"n", bump_numbers[k]}, {"eigenvalues", per_bump[k]}});
  j["bumps"] = bumps;
  j["merged"] = merged;
  j["distinct"] = distinct;
  nlohmann::ordered_json cl = nlohmann::ordered_json::array();
  for (const Cluster& c : clusters)
    cl.push_back({{"lo", c.lo}, {"hi", c.hi}, {"size", c.size}, {"accumulation", c.accumulation}});
  j["clusters"] = cl;
  j["resolution"] = resolution;
  j["cover_length"] = cover_length;
  j["cover_length_method"] = "heuristic: length of the union of resolution-wide intervals around the distinct eigenvalues";
  j["identical_bumps"] = identical_bumps;
  j["note"] = note;
  os << j.dump(2) << '\n';
}

BetaFamily beta_family(int dim, const Bump& v, double beta0, int count, const SpectrumOptions& opts) {
  if (!(beta0 > 0.0 && beta0 < 1.0)) throw std::invalid_argument("beta_family: beta0 must lie in (0, 1)");
  if (count < 1) throw std::invalid_argument("beta_family: count must be >= 1");
  const NystromGrid g = build_bump_grid(dim, v, opts.grid);
  BetaFamily fam;
  fam.e_low = ground_state_impl(dim, v, 1.0 + beta0, opts, g).energy;
  fam.e_high = ground_state_impl(dim, v, 1.0 - beta0, opts, g).energy;
  for (long q = 1; static_cast<int>(fam.targets.size()) < count; ++q) {
    if (q > 1000000) throw std::runtime_error("beta_family: energy window too narrow");
    const long p_lo = static_cast<long>(std::ceil(fam.e_low * static_cast<double>(q)));
    const long p_hi = static_cast<long>(std::floor(fam.e_high * static_cast<double>(q)));
    for (long p = p_lo; p <= p_hi && static_cast<int>(fam.targets.size()) < count; ++p) {
      const double t = static_cast<double>(p) / static_cast<double>(q);
      if (!(t > fam.e_low && t < fam.e_high) || std::gcd(std::abs(p), q) != 1) continue;
      fam.targets.push_back(t);
    }
  }
  fam.betas.resize(fam.targets.size());
  const long nt = static_cast<long>(fam.targets.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < nt; ++k)
    fam.betas[static_cast<std::size_t>(k)] = 1.0 / top_eigenpair(bs_matrix(g, fam.targets[static_cast<std::size_t>(k)]));
  return fam;
}

FeynmanHellmann feynman_hellmann_check(int dim, const Bump& v, double beta_lo, double beta_hi, int samples,
                                       const SpectrumOptions& opts) {
  if (!(v.amplitude < 0.0)) throw std::invalid_argument("feynman_hellmann_check: v must be nonpositive");
  if (samples < 3 || samples % 2 == 0) throw std::invalid_argument("feynman_hellmann_check: samples must be odd and >= 3");
  if (!(beta_lo > 0.0 && beta_hi > beta_lo)) throw std::invalid_argument("feynman_hellmann_check: bad beta window");
  const NystromGrid g = build_bump_grid(dim, v, opts.grid);
  FeynmanHellmann fh;
  const double db = (beta_hi - beta_lo) / (samples - 1);
  fh.betas.resize(static_cast<std::size_t>(samples));
  fh.energies.resize(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) fh.betas[static_cast<std::size_t>(k)] = beta_lo + k * db;
  std::vector<std::string> errors(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < samples; ++k) {
    try {
      fh.energies[static_cast<std::size_t>(k)] =
          ground_state_impl(dim, v, fh.betas[static_cast<std::size_t>(k)], opts, g).energy;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw EigenvalueLost("feynman_hellmann_check: " + e);

  fh.strictly_decreasing = true;
  for (std::size_t k = 1; k < fh.energies.size(); ++k)
    fh.strictly_decreasing = fh.strictly_decreasing && fh.energies[k] < fh.energies[k - 1];
  for (std::size_t k = 1; k + 1 < fh.energies.size(); ++k)
    fh.max_second_derivative = std::max(
        fh.max_second_derivative, std::abs(fh.energies[k + 1] - 2.0 * fh.energies[k] + fh.energies[k - 1]) / (db * db));

  const std::size_t c = static_cast<std::size_t>(samples / 2);
  const double beta = fh.betas[c];
  const GroundState gs = ground_state_impl(dim, v, beta, opts, g);
  fh.repeat_identical = gs.energy == fh.energies[c];
  fh.slope_fd = (fh.energies[c + 1] - fh.energies[c - 1]) / (2.0 * db);

  if (dim == 3) {
    // u = sqrt(w) |beta v|^{1/2} psi; <psi, v psi> = -|u|^2 / beta and
    // ||psi||^2 = <u, T u> with the kernel of R_0(E)^2, exp(-kappa r) / (8 pi kappa).
    const double kappa = kappa_of(gs.energy);
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i)
      a(i) = std::sqrt(beta * g.weights[static_cast<std::size_t>(i)]) * g.root_potential[static_cast<std::size_t>(i)];
    const opcore::CellKernel k2(g, [kappa](double r) { return std::exp(-kappa * r) / (8.0 * specfun::kPi * kappa); });
    const Eigen::VectorXd u = gs.vector;
    const Eigen::VectorXd au = a.cwiseProduct(u);
    double quad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) row += k2(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * au(j);
      quad += au(i) * row;
    }
    fh.slope_fh = -u.squaredNorm() / (beta * quad);
    fh.relative_mismatch = std::abs(fh.slope_fd - fh.slope_fh) / std::abs(fh.slope_fh);
  } else {
    fh.slope_fh = std::nan("");
    fh.relative_mismatch = std::nan("");
  }
  return fh;
}

}  // namespace scatter::spectra

#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatter/grid.hpp"
#include "scatter/potential.hpp"

namespace scatter {

/// An eigenvalue branch left (-sup|v|, 0) during continuation.
class EigenvalueLost : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace spectra {

struct SpectrumOptions {
  GridOptions grid{0.25, 6, 8, 3};
  double energy_tol = 1e-10;
  /// d = 2 only: the kernel is singular at E = 0, so states above -cutoff are not resolved.
  double d2_energy_cutoff = 1e-8;
};

/// Weight-symmetrized Birman-Schwinger matrix at E < 0,
///   S_ij = |v|^{1/2}(x_i) sqrt(w_i) k_E(|x_i - x_j|) sqrt(w_j) |v|^{1/2}(x_j),
/// real symmetric and positive semidefinite. E = 0 is allowed for d = 3.
Eigen::MatrixXd bs_matrix(const NystromGrid& g, double E);

/// Eigenvalues (ascending) of the sign-adjusted operator sgn(v) S at E < 0 for a one-signed
/// bump on its grid. E is an eigenvalue of H_0 + v exactly when -1 is among them.
std::vector<double> bs_eigs(const Bump& v, double E, const NystromGrid& g);

/// Eigenvalues of H_0 + v below 0 (ascending, with multiplicity), located as the roots of
/// mu_j(E) = -1 on (-sup|v|, 0). Empty for nonnegative bumps.
std::vector<double> discrete_spectrum(int dim, const Bump& v, const SpectrumOptions& opts = {});

/// Smallest depth v0 such that -v0 times the given profile binds a state: the reciprocal
/// of the top Birman-Schwinger eigenvalue of the unit-depth profile at the upper energy.
double bound_state_threshold(int dim, Profile profile, double radius, const SpectrumOptions& opts = {});

/// Lowest eigenvalue of H_0 + beta v; throws EigenvalueLost when there is none.
double ground_state_energy(int dim, const Bump& v, double beta, const SpectrumOptions& opts = {});

struct Cluster {
  double lo = 0.0;
  double hi = 0.0;
  int size = 0;
  bool accumulation = false;  // two or more eigenvalues within the resolution
};

/// Total length of the union of [E - res/2, E + res/2] over the points.
double cover_length(std::vector<double> points, double resolution);

std::vector<Cluster> find_clusters(std::vector<double> points, double resolution);

struct SpectrumReport {
  std::vector<int> bump_numbers;               // 1-based, retained bumps
  std::vector<std::vector<double>> per_bump;   // discrete spectrum of H_0 + v_n
  std::vector<double> merged;                  // sorted union with multiplicity
  std::vector<double> distinct;                // sorted distinct values
  std::vector<Cluster> clusters;
  double resolution = 1e-3;
  double cover_length = 0.0;  // accumulation proxy: fattened-cover length
  bool identical_bumps = false;
  std::string note;

  void write_json(std::ostream& os) const;
};

/// Sub-zero spectra of the retained single-bump operators and the sampled Klaus set.
SpectrumReport klaus_set(const SparsePotential& p, double resolution, const SpectrumOptions& opts = {});

struct BetaFamily {
  double e_low = 0.0;   // E(1 + beta0)
  double e_high = 0.0;  // E(1 - beta0)
  std::vector<double> targets;  // rational energies in (e_low, e_high)
  std::vector<double> betas;    // beta_n with E(beta_n) = target_n
};

/// Coupling constants beta_n in (1 - beta0, 1 + beta0) whose ground states hit the
/// rationals of the energy window, ordered by (denominator, numerator), count of them.
/// Uses S_{beta v} = beta S_v, so beta(E) = 1 / s_1(E) with s_1 the top BS eigenvalue.
BetaFamily beta_family(int dim, const Bump& v, double beta0, int count, const SpectrumOptions& opts = {});

struct FeynmanHellmann {
  std::vector<double> betas;
  std::vector<double> energies;
  bool strictly_decreasing = false;
  bool repeat_identical = false;          // recomputing one beta reproduces it bitwise
  double max_second_derivative = 0.0;     // |central second difference|
  double slope_fd = 0.0;                  // dE/dbeta at the window centre, central difference
  double slope_fh = 0.0;                  // <psi, v psi> / ||psi||^2 at the centre (d = 3)
  double relative_mismatch = 0.0;
};

/// Tracks the ground state of H_0 + beta v over [beta_lo, beta_hi] (samples >= 3, odd for a
/// centre sample). v must be nonpositive with a bound state at beta = 1.
FeynmanHellmann feynman_hellmann_check(int dim, const Bump& v, double beta_lo, double beta_hi, int samples,
                                       const SpectrumOptions& opts = {});

}  // namespace spectra
}  // namespace scatter

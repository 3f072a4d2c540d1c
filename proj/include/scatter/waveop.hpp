#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scatter/potential.hpp"
#include "scatter/spectral.hpp"

namespace scatter {

/// The lattice does not resolve the energy band (fewer than 8 points per wavelength).
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested time exceeds the periodic-wraparound horizon.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace waveop {

using Field = std::vector<cplx>;  // n x n, index i * n + j for (x_i, y_j)

/// Square periodic box [-L/2, L/2)^2 with n points per side (d = 2).
struct PeriodicBox {
  double L = 150.0;
  int n = 256;

  double dx() const { return L / n; }
  double coord(int i) const { return -0.5 * L + i * dx(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  /// L / (2 * max group speed), the max group speed in the band [a, b] being 2 sqrt(b).
  double horizon(double b) const;
  /// Lattice points per shortest band wavelength 2 pi / sqrt(b).
  double points_per_wavelength(double b) const;
};

struct EnergyBand {
  double a = 0.3;
  double b = 1.0;
};

struct PropagatorState {
  PeriodicBox box;
  Field psi;
  double time = 0.0;
  std::vector<double> potential_field;
};

double norm(const PeriodicBox& box, const Field& f);
double distance(const PeriodicBox& box, const Field& f, const Field& g);

/// Potential sampled at the lattice points.
std::vector<double> sample_potential(const SparsePotential& p, const PeriodicBox& box);

/// exp(-|x - x0|^2 / (2 sigma^2) + i k0 . x).
Field gaussian_packet(const PeriodicBox& box, double x0, double y0, double sigma, double kx, double ky);

/// Fourier split-step propagator for H_0 = -Laplacian and H = H_0 + V on the box.
/// Not safe for concurrent use of one instance (it owns the FFT work buffer).
class SplitStep {
 public:
  SplitStep(const PeriodicBox& box, std::vector<double> potential);
  ~SplitStep();
  SplitStep(const SplitStep&) = delete;
  SplitStep& operator=(const SplitStep&) = delete;

  const PeriodicBox& box() const { return box_; }
  const std::vector<double>& potential() const { return potential_; }
  double potential_sup() const;

  /// exp(-i H_0 t) exactly (one Fourier multiplier); t may be negative.
  void free(Field& f, double t) const;
  /// steps Strang steps of exp(-i H dt): half kinetic, potential phase, half kinetic.
  /// dt may be negative. observer, when given, sees the field after every full step.
  void full(Field& f, double dt, long steps,
            const std::function<void(long, const Field&)>& observer = nullptr) const;
  /// Sharp indicator of |k|^2 in [a, b].
  void project(Field& f, const EnergyBand& band) const;

 private:
  void forward() const;
  void backward() const;
  void load(const Field& f) const;
  void store(Field& f) const;
  void multiply(const std::vector<cplx>& m) const;

  PeriodicBox box_;
  std::vector<double> potential_;
  std::vector<double> k2_;
  void* buffer_;
  void* fwd_;
  void* bwd_;
};

/// propagate(state, dt, steps, free|full): advances state.psi and state.time.
/// Requires |dt| * sup|V| <= 0.1 for the full propagator.
enum class Which { Free, Full };
void propagate(PropagatorState& state, double dt, long steps, Which which);

PropagatorState band_project(const PropagatorState& state, const EnergyBand& band);

struct WaveOpSetup {
  EnergyBand band;
  double dt = 0.05;
};

/// Checks bumps inside the box, lattice resolution and the splitting regime.
void validate_setup(const SparsePotential& p, const PeriodicBox& box, const WaveOpSetup& setup);

/// W(t) psi0 = exp(iHt) exp(-iH_0 t) chi_I(H_0) psi0 for every t in t_list.
std::vector<std::pair<double, Field>> wave_op_approx(const SplitStep& prop, const Field& psi0,
                                                     const WaveOpSetup& setup, const std::vector<double>& t_list);

/// ||exp(-iHs) W(T) psi0 - W(T) exp(-iH_0 s) psi0|| / ||psi0||.
double intertwine_check(const SplitStep& prop, const Field& psi0, const WaveOpSetup& setup, double T, double s);

/// Partial integrals of ||V|^{1/2} exp(-iHt) chi_I(H_0) psi0||^2 over [0, T] for each T.
std::vector<double> smoothness_integral(const SplitStep& prop, const Field& psi0, const WaveOpSetup& setup,
                                        const std::vector<double>& T_list);

struct WaveOpRow {
  double t = 0.0;
  double cauchy_gap = 0.0;  // ||W(t) psi0 - W(t_prev) psi0||, NaN on the first row
  double isometry_defect = 0.0;  // | ||W(t) psi0|| - ||chi_I psi0|| |
  double intertwine_defect = 0.0;
  double smooth_integral = 0.0;
};

struct WaveOpReport {
  std::vector<WaveOpRow> rows;
  double horizon = 0.0;
  double projected_norm = 0.0;
  bool cauchy_decreasing = false;
  bool smoothness_plateau = false;  // last increment <= 1/2 previous increment
  void write_csv(std::ostream& os) const;
};

/// Runs the ladder, isometry, intertwining and smoothness diagnostics.
/// Throws HorizonError when max(t_list) + s exceeds the horizon.
WaveOpReport run_diagnostics(const SparsePotential& p, const PeriodicBox& box, const Field& psi0,
                             const WaveOpSetup& setup, const std::vector<double>& t_list, double s);

}  // namespace waveop
}  // namespace scatter

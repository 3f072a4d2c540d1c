#pragma once

#include <complex>

#include "scatter/spectral.hpp"

namespace scatter::specfun {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Radius below which macdonald_k uses the power series.
inline constexpr double kSeriesRadius = 8.0;
/// Radius above which the large-argument asymptotic expansion is used; the
/// continued fraction covers the band in between.
inline constexpr double kAsymptoticRadius = 25.0;

struct KernelSpec {
  int dim = 3;
};

/// Macdonald function K_nu(w) for nu in {0, 1/2} and Re(w) >= 0, w != 0.
/// Throws std::domain_error outside that domain.
cplx macdonald_k(double nu, cplx w);

/// Free resolvent kernel k_{0,z}(r) of (-Laplacian - z)^{-1}:
///   d = 3: exp(i sqrt(z) r) / (4 pi r)
///   d = 2: (i/4) H_0^(1)(sqrt(z) r) = K_0(-i sqrt(z) r) / (2 pi)
cplx free_kernel(KernelSpec ks, const SpectralPoint& z, double r);

/// Same kernel through the generic Bessel-potential form
///   c_d (sqrt(z)/r)^nu K_nu(-i sqrt(z) r),  nu = (d-2)/2,  c_d = (2 pi)^{-d/2} (-i)^nu.
/// Used to cross-check the dimension-specific paths.
cplx free_kernel_kform(KernelSpec ks, const SpectralPoint& z, double r);

/// Kernel of (-Laplacian - E)^{-1} for E = -kappa^2 < 0 (kappa > 0); real and positive.
/// kappa == 0 is allowed for d = 3 (Newton kernel 1/(4 pi r)).
double negative_energy_kernel(KernelSpec ks, double kappa, double r);

/// Radial profile of the kernel bound: ln(2 rho / r) (d = 2) or r^{-(d-2)} (d >= 3)
/// for r <= 2R, and r^{-(d-1)/2} for r > 2R. rho = max(1, 2R).
double envelope_shape(KernelSpec ks, double r, double R);

struct EnvelopeCalibration {
  int lambda_samples = 41;
  int eps_samples = 25;   // log-spaced in [1e-4, 1], plus eps = 0
  int r_samples = 400;    // log-spaced over [r_min_factor*R, r_max]
  double r_min_factor = 1e-6;
  double r_max = 1.0e3;
  double safety = 1.1;
};

/// Kernel bound |k_{0,z}(r)| <= C * envelope_shape(r) over the closed rectangle.
/// The constant C(a, b) is calibrated by dense sampling with a safety margin.
class KernelEnvelope {
 public:
  KernelEnvelope(KernelSpec ks, double R, const SpectralRect& rect,
                 const EnvelopeCalibration& cal = {});

  double constant() const { return constant_; }
  /// Largest sampled |k|/shape before the safety factor.
  double raw_max_ratio() const { return raw_max_; }
  double R() const { return R_; }
  KernelSpec spec() const { return ks_; }

  double operator()(double r) const;

  /// Copy with the constant scaled (used to inject violations in self-tests).
  KernelEnvelope scaled(double factor) const;

 private:
  KernelSpec ks_;
  double R_;
  double constant_ = 0.0;
  double raw_max_ = 0.0;
};

/// Envelope value at r (throws std::domain_error for r <= 0).
double kernel_envelope(const KernelEnvelope& env, double r);

}  // namespace scatter::specfun

#pragma once

#include <complex>
#include <vector>

namespace scatter {

using cplx = std::complex<double>;

/// Spectral parameter z = lambda + i*epsilon with lambda > 0 and epsilon in [0, 1].
/// epsilon == 0 denotes the boundary value z = lambda + i0.
class SpectralPoint {
 public:
  SpectralPoint() = default;
  SpectralPoint(double lambda, double epsilon);

  double lambda() const { return lambda_; }
  double epsilon() const { return epsilon_; }
  cplx z() const { return {lambda_, epsilon_}; }

  /// Branch of sqrt(z) with Im > 0 for epsilon > 0; equals sqrt(lambda) at epsilon == 0.
  cplx sqrt_z() const;

  bool on_boundary() const { return epsilon_ == 0.0; }

 private:
  double lambda_ = 1.0;
  double epsilon_ = 1.0;
};

/// The rectangle [a, b] x (0, eps_max] sampled on a lambda grid and a strictly
/// decreasing epsilon ladder.
struct SpectralRect {
  double a = 1.0;
  double b = 4.0;
  double eps_max = 1.0;
  int lambda_samples = 20;
  std::vector<double> eps_samples;

  void validate() const;
  std::vector<double> lambdas() const;

  /// Logarithmic ladder from eps_max down to terminal (inclusive), count values.
  static std::vector<double> log_ladder(double eps_max, double terminal, int count);
};

}  // namespace scatter

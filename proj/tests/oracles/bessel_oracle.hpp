#pragma once

// Test-only reference values for Bessel functions. Everything here is computed in
// 100-digit arithmetic straight from the defining power series (and, for K_0 on the
// real axis, from its integral representation), sharing no code with scatter::specfun.

#include <complex>

namespace scatter::oracle {

/// K_0(w) from the ascending series in 100-digit complex arithmetic. Valid for any
/// w != 0 off the negative real axis; intended for |w| <= 60.
std::complex<double> k0_series_mp(std::complex<double> w);

/// J_0(t), Y_0(t) for real t > 0 from their ascending series in 100-digit arithmetic.
double j0_series_mp(double t);
double y0_series_mp(double t);

/// K_0(x) for real x > 0 by adaptive quadrature of int_0^inf exp(-x cosh s) ds.
double k0_quadrature(double x);

}  // namespace scatter::oracle

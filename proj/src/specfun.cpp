#include "scatter/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace scatter {

SpectralPoint::SpectralPoint(double lambda, double epsilon) : lambda_(lambda), epsilon_(epsilon) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::domain_error("spectral point requires lambda > 0, got " + std::to_string(lambda));
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::domain_error("spectral point requires epsilon in [0, 1], got " +
                            std::to_string(epsilon));
}

cplx SpectralPoint::sqrt_z() const {
  if (epsilon_ == 0.0) return {std::sqrt(lambda_), 0.0};
  // Principal branch: lambda > 0 keeps z off the cut, Im sqrt(z) > 0 for epsilon > 0.
  return std::sqrt(z());
}

void SpectralRect::validate() const {
  if (!(a > 0.0 && a < b)) throw std::invalid_argument("rectangle requires 0 < a < b");
  if (!(eps_max > 0.0 && eps_max <= 1.0))
    throw std::invalid_argument("rectangle requires eps_max in (0, 1]");
  if (lambda_samples < 1) throw std::invalid_argument("rectangle needs at least one lambda sample");
  for (std::size_t k = 0; k < eps_samples.size(); ++k) {
    double e = eps_samples[k];
    if (!(e >= 0.0 && e <= eps_max))
      throw std::invalid_argument("epsilon sample outside [0, eps_max]");
    if (k > 0 && !(e < eps_samples[k - 1]))
      throw std::invalid_argument("epsilon samples must be strictly decreasing");
  }
}

std::vector<double> SpectralRect::lambdas() const {
  std::vector<double> out(static_cast<std::size_t>(lambda_samples));
  if (lambda_samples == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < lambda_samples; ++i)
    out[static_cast<std::size_t>(i)] = a + (b - a) * i / (lambda_samples - 1);
  return out;
}

std::vector<double> SpectralRect::log_ladder(double eps_max, double terminal, int count) {
  if (count < 1 || !(terminal > 0.0) || !(terminal <= eps_max))
    throw std::invalid_argument("invalid epsilon ladder");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = eps_max;
    return out;
  }
  double l0 = std::log(eps_max), l1 = std::log(terminal);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = std::exp(l0 + (l1 - l0) * k / (count - 1));
  out.front() = eps_max;
  out.back() = terminal;
  return out;
}

namespace specfun {

namespace {

using lcplx = std::complex<long double>;

bool is_order(double nu, double value) { return std::abs(nu - value) < 1e-14; }

// Ascending series K_0(w) = -(ln(w/2) + gamma) I_0(w) + sum_k H_k (w^2/4)^k / (k!)^2,
// summed in extended precision to absorb the cancellation for real w near the switch radius.
cplx k0_series(cplx w) {
  const lcplx wl(w.real(), w.imag());
  const lcplx t = wl * wl / 4.0L;
  lcplx term = 1.0L;
  lcplx i0 = 1.0L;
  lcplx harmonic_sum = 0.0L;
  long double harmonic = 0.0L;
  for (int k = 1; k < 400; ++k) {
    term *= t / static_cast<long double>(k * k);
    harmonic += 1.0L / k;
    i0 += term;
    harmonic_sum += harmonic * term;
    long double scale = std::abs(i0) + std::abs(harmonic_sum);
    if (std::abs(term) * (1.0L + harmonic) < 1e-21L * scale) break;
  }
  const lcplx lg = std::log(wl / 2.0L) + static_cast<long double>(kEulerGamma);
  lcplx k0 = -lg * i0 + harmonic_sum;
  return {static_cast<double>(k0.real()), static_cast<double>(k0.imag())};
}

// Steed's continued fraction for K_0 (Temme's CF2); converges for |w| >~ 2 off the
// negative real axis.
cplx k0_continued_fraction(cplx x) {
  const double a1 = 0.25;
  cplx b = 2.0 * (1.0 + x);
  cplx d = 1.0 / b;
  cplx h = d;
  cplx delh = d;
  cplx q1 = 0.0, q2 = 1.0;
  cplx q = a1, c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  for (int i = 2; i < 20000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / static_cast<double>(i);
    cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s)) break;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
}

cplx k0_asymptotic(cplx w) {
  cplx sum = 1.0;
  cplx term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    double odd = 2.0 * k - 1.0;
    term *= -(odd * odd) / (8.0 * k * w);
    double mag = std::abs(term);
    if (mag > prev) break;  // divergent tail
    sum += term;
    prev = mag;
    if (mag < 1e-18 * std::abs(sum)) break;
  }
  return std::sqrt(kPi / (2.0 * w)) * std::exp(-w) * sum;
}

}  // namespace

cplx macdonald_k(double nu, cplx w) {
  if (w == cplx(0.0, 0.0)) throw std::domain_error("macdonald_k: argument must be nonzero");
  if (w.real() < -1e-14 * std::abs(w))
    throw std::domain_error("macdonald_k: requires Re(w) >= 0");
  if (w.real() < 0.0) w = {0.0, w.imag()};
  if (is_order(nu, 0.5)) return std::sqrt(kPi / (2.0 * w)) * std::exp(-w);
  if (!is_order(nu, 0.0))
    throw std::domain_error("macdonald_k: only orders 0 and 1/2 are supported");
  const double mag = std::abs(w);
  if (mag <= kSeriesRadius) return k0_series(w);
  if (mag <= kAsymptoticRadius) return k0_continued_fraction(w);
  return k0_asymptotic(w);
}

cplx free_kernel(KernelSpec ks, const SpectralPoint& z, double r) {
  if (!(r > 0.0)) throw std::domain_error("free_kernel: distance must be positive");
  const cplx root = z.sqrt_z();
  switch (ks.dim) {
    case 3:
      return std::exp(cplx(0.0, 1.0) * root * r) / (4.0 * kPi * r);
    case 2:
      return macdonald_k(0.0, cplx(0.0, -1.0) * root * r) / (2.0 * kPi);
    default:
      throw std::domain_error("free_kernel: only d = 2 and d = 3 are evaluated");
  }
}

cplx free_kernel_kform(KernelSpec ks, const SpectralPoint& z, double r) {
  if (!(r > 0.0)) throw std::domain_error("free_kernel_kform: distance must be positive");
  if (ks.dim != 2 && ks.dim != 3)
    throw std::domain_error("free_kernel_kform: only d = 2 and d = 3 are evaluated");
  const double nu = 0.5 * (ks.dim - 2);
  const cplx root = z.sqrt_z();
  const cplx cd = std::pow(2.0 * kPi, -0.5 * ks.dim) * std::exp(cplx(0.0, -0.5 * kPi * nu));
  const cplx prefactor = nu == 0.0 ? cplx(1.0, 0.0) : std::pow(root / r, nu);
  return cd * prefactor * macdonald_k(nu, cplx(0.0, -1.0) * root * r);
}

double negative_energy_kernel(KernelSpec ks, double kappa, double r) {
  if (!(r > 0.0)) throw std::domain_error("negative_energy_kernel: distance must be positive");
  if (kappa < 0.0) throw std::domain_error("negative_energy_kernel: kappa must be >= 0");
  switch (ks.dim) {
    case 3:
      return std::exp(-kappa * r) / (4.0 * kPi * r);
    case 2:
      if (kappa == 0.0)
        throw std::domain_error("negative_energy_kernel: d = 2 kernel diverges at E = 0");
      return macdonald_k(0.0, cplx(kappa * r, 0.0)).real() / (2.0 * kPi);
    default:
      throw std::domain_error("negative_energy_kernel: only d = 2 and d = 3 are evaluated");
  }
}

double envelope_shape(KernelSpec ks, double r, double R) {
  if (!(r > 0.0)) throw std::domain_error("envelope: distance must be positive");
  if (!(R > 0.0)) throw std::domain_error("envelope: R must be positive");
  if (r > 2.0 * R) return std::pow(r, -0.5 * (ks.dim - 1));
  if (ks.dim == 2) return std::log(2.0 * std::max(1.0, 2.0 * R) / r);
  return std::pow(r, -(ks.dim - 2.0));
}

KernelEnvelope::KernelEnvelope(KernelSpec ks, double R, const SpectralRect& rect,
                               const EnvelopeCalibration& cal)
    : ks_(ks), R_(R) {
  if (!(R > 0.0)) throw std::domain_error("envelope: R must be positive");
  if (!(rect.a > 0.0 && rect.a < rect.b)) throw std::domain_error("envelope: need 0 < a < b");

  std::vector<double> eps{0.0};
  for (int k = 0; k < cal.eps_samples; ++k)
    eps.push_back(std::exp(std::log(1e-4) + (std::log(rect.eps_max) - std::log(1e-4)) * k /
                                              std::max(1, cal.eps_samples - 1)));
  std::vector<double> radii;
  const double r_lo = cal.r_min_factor * R;
  const double r_hi = std::max(cal.r_max, 4.0 * R);
  for (int k = 0; k < cal.r_samples; ++k)
    radii.push_back(std::exp(std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * k /
                                                 std::max(1, cal.r_samples - 1)));
  radii.push_back(2.0 * R);
  radii.push_back(2.0 * R * (1.0 + 1e-12));
  std::sort(radii.begin(), radii.end());

  double best = 0.0;
  for (int i = 0; i < cal.lambda_samples; ++i) {
    double lambda = rect.a + (rect.b - rect.a) * i / std::max(1, cal.lambda_samples - 1);
    for (double e : eps) {
      SpectralPoint z(lambda, e);
      for (double r : radii) best = std::max(best, std::abs(free_kernel(ks, z, r)) / envelope_shape(ks, r, R));
    }
  }
  raw_max_ = best;
  constant_ = cal.safety * best;
}

double KernelEnvelope::operator()(double r) const { return constant_ * envelope_shape(ks_, r, R_); }

KernelEnvelope KernelEnvelope::scaled(double factor) const {
  KernelEnvelope copy = *this;
  copy.constant_ *= factor;
  return copy;
}

double kernel_envelope(const KernelEnvelope& env, double r) { return env(r); }

}  // namespace specfun
}  // namespace scatter

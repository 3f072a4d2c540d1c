#include "quadrature_oracle.hpp"

#include <cmath>

namespace scatter::oracle {

std::complex<double> apply_F_bruteforce(const std::function<double(double)>& v, double radius,
                                        std::complex<double> z, const std::function<double(const Vec3&)>& phi,
                                        const Vec3& x, double h_fine) {
  // sqrt(z) with positive imaginary part.
  std::complex<double> k = std::sqrt(z);
  if (k.imag() < 0.0) k = -k;
  const double pi = std::acos(-1.0);
  auto kernel = [&](double r) { return std::exp(std::complex<double>(0.0, 1.0) * k * r) / (4.0 * pi * r); };
  auto root = [](double a, bool sign) { return (sign && a < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(a)); };

  const int m = static_cast<int>(std::ceil(radius / h_fine));
  std::complex<double> total = 0.0;
  for (int i = -m; i < m; ++i)
    for (int j = -m; j < m; ++j)
      for (int l = -m; l < m; ++l) {
        const Vec3 c{(i + 0.5) * h_fine, (j + 0.5) * h_fine, (l + 0.5) * h_fine};
        const double dc = std::hypot(c[0] - x[0], c[1] - x[1], c[2] - x[2]);
        const int sub = dc < 2.0 * h_fine ? 8 : 1;
        const double hs = h_fine / sub;
        for (int a = 0; a < sub; ++a)
          for (int b = 0; b < sub; ++b)
            for (int e = 0; e < sub; ++e) {
              const Vec3 y{c[0] - 0.5 * h_fine + (a + 0.5) * hs, c[1] - 0.5 * h_fine + (b + 0.5) * hs,
                           c[2] - 0.5 * h_fine + (e + 0.5) * hs};
              const double rho = std::hypot(y[0], y[1], y[2]);
              if (rho > radius) continue;
              const double r = std::hypot(y[0] - x[0], y[1] - x[1], y[2] - x[2]);
              total += kernel(r) * root(v(rho), true) * phi(y) * hs * hs * hs;
            }
      }
  return root(v(std::hypot(x[0], x[1], x[2])), false) * total;
}

}  // namespace scatter::oracle

#pragma once

// Brute-force evaluation of (F(z) phi)(x) = |V|^{1/2}(x) int k(x - y) V^{1/2}(y) phi(y) dy
// for one bump at the origin in d = 3, by the midpoint rule on a fine voxel grid with
// the cells near x subdivided. The kernel is written out here from its closed form.

#include <array>
#include <complex>
#include <functional>

namespace scatter::oracle {

using Vec3 = std::array<double, 3>;

std::complex<double> apply_F_bruteforce(const std::function<double(double)>& v, double radius,
                                        std::complex<double> z, const std::function<double(const Vec3&)>& phi,
                                        const Vec3& x, double h_fine);

}  // namespace scatter::oracle

#include "scatter/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace scatter {

double distance(const Point& a, const Point& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::ConstantBall: return "constant";
    case Profile::SmoothBump: return "smooth";
    case Profile::StepWell: return "step";
  }
  return "unknown";
}

Profile profile_from_string(const std::string& name) {
  if (name == "constant") return Profile::ConstantBall;
  if (name == "smooth") return Profile::SmoothBump;
  if (name == "step") return Profile::StepWell;
  throw std::invalid_argument("unknown bump profile '" + name + "' (constant | smooth | step)");
}

double Bump::value(double rho) const {
  if (rho > radius) return 0.0;
  switch (profile) {
    case Profile::ConstantBall:
      return amplitude;
    case Profile::SmoothBump: {
      double s = rho / radius;
      if (s >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
    }
    case Profile::StepWell:
      return rho <= 0.5 * radius ? amplitude : 0.5 * amplitude;
  }
  return 0.0;
}

double Bump::sup_norm() const { return std::abs(amplitude); }

std::vector<int> SparsePotential::retained_indices() const {
  std::vector<int> out;
  for (int n = std::max(1, trunc_N); n <= count(); ++n) out.push_back(n - 1);
  return out;
}

double SparsePotential::sup_norm() const {
  double m = 0.0;
  for (int i : retained_indices()) m = std::max(m, bumps[static_cast<std::size_t>(i)].sup_norm());
  return m;
}

double gamma_threshold(int dim) {
  if (dim < 2) throw std::invalid_argument("dimension must be >= 2");
  return 2.0 / (dim - 1);
}

void SparsePotential::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("potential.d must be 2 or 3");
  if (!(R > 0.0)) throw std::invalid_argument("potential.R must be positive");
  if (!(sparsity_C > 0.0)) throw std::invalid_argument("potential.C must be positive");
  if (!(gamma > gamma_threshold(dim))) {
    std::ostringstream msg;
    msg << "sparsity exponent gamma = " << gamma << " violates gamma > 2/(d-1) = "
        << gamma_threshold(dim);
    throw std::invalid_argument(msg.str());
  }
  if (bumps.size() != centers.size())
    throw std::invalid_argument("bump and center lists differ in length");
  if (bumps.empty()) throw std::invalid_argument("potential needs at least one bump");
  for (const Bump& b : bumps) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
    if (b.radius > R * (1.0 + 1e-12))
      throw std::invalid_argument("bump radius exceeds the global support radius R");
    if (!std::isfinite(b.amplitude)) throw std::invalid_argument("bump amplitude must be finite");
  }
  if (dim == 2)
    for (const Point& c : centers)
      if (c[2] != 0.0) throw std::invalid_argument("d = 2 centers must have zero third component");
  if (trunc_N < 1) throw std::invalid_argument("truncation index must be >= 1");
}

namespace {

Point random_direction(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Point v{g(rng), g(rng), dim == 3 ? g(rng) : 0.0};
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

}  // namespace

std::vector<Point> gen_sparse_centers(int dim, double C, double gamma, int count, std::uint64_t seed) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("gen_sparse_centers: d must be 2 or 3");
  if (!(gamma > gamma_threshold(dim))) {
    std::ostringstream msg;
    msg << "gen_sparse_centers: gamma = " << gamma << " must exceed 2/(d-1) = " << gamma_threshold(dim);
    throw std::invalid_argument(msg.str());
  }
  if (!(C > 0.0)) throw std::invalid_argument("gen_sparse_centers: C must be positive");
  if (count < 1) throw std::invalid_argument("gen_sparse_centers: count must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.25);
  std::vector<Point> centers{Point{0.0, 0.0, 0.0}};
  for (int n = 2; n <= count; ++n) {
    const double required = C * std::pow(static_cast<double>(n), gamma);
    double radius = required * (1.0 + jitter(rng));
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0 && attempt % 64 == 0) radius *= 1.25;
      Point dir = random_direction(dim, rng);
      Point x{radius * dir[0], radius * dir[1], radius * dir[2]};
      bool ok = true;
      for (const Point& y : centers)
        if (distance(x, y) < required) {
          ok = false;
          break;
        }
      if (ok) {
        centers.push_back(x);
        break;
      }
    }
  }
  return centers;
}

double nearest_center_distance(const std::vector<Point>& centers, int n) {
  double best = std::numeric_limits<double>::infinity();
  const Point& x = centers.at(static_cast<std::size_t>(n - 1));
  for (std::size_t m = 0; m < centers.size(); ++m)
    if (static_cast<int>(m) != n - 1) best = std::min(best, distance(x, centers[m]));
  return best;
}

Truncation choose_truncation_N(const SparsePotential& p) {
  Truncation t;
  const int count = p.count();
  if (count == 0) {
    t.N = 1;
    t.flagged = true;
    return t;
  }
  // A pair (m, n), m < n, violates the window conditions when the closed supports come
  // within 2R of each other; any admissible N must then exceed m.
  int N = 1;
  for (int m = 1; m <= count; ++m) {
    for (int n = m + 1; n <= count; ++n) {
      const double gap = distance(p.centers[static_cast<std::size_t>(m - 1)],
                                  p.centers[static_cast<std::size_t>(n - 1)]) -
                         p.bumps[static_cast<std::size_t>(m - 1)].radius -
                         p.bumps[static_cast<std::size_t>(n - 1)].radius;
      if (!(gap > 2.0 * p.R)) N = std::max(N, m + 1);
    }
  }
  t.N = N;
  for (int n = 1; n < N; ++n) t.dropped.push_back(n);
  t.flagged = N > count;
  return t;
}

void apply_truncation(SparsePotential& p) {
  Truncation t = choose_truncation_N(p);
  p.trunc_N = t.N;
  p.dropped = t.dropped;
}

double eval_potential(const SparsePotential& p, const Point& x) {
  double v = 0.0;
  for (int i : p.retained_indices())
    v += p.bumps[static_cast<std::size_t>(i)].value(distance(x, p.centers[static_cast<std::size_t>(i)]));
  return v;
}

SqrtSplit split_sqrt(double v) {
  double root = std::sqrt(std::abs(v));
  return {root, v < 0.0 ? -root : root};
}

SqrtSplit split_sqrt(const SparsePotential& p, const Point& x) { return split_sqrt(eval_potential(p, x)); }

}  // namespace scatter

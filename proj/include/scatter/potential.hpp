#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace scatter {

/// Point in R^d stored with three components; the third is zero for d = 2.
using Point = std::array<double, 3>;

double distance(const Point& a, const Point& b);

enum class Profile { ConstantBall, SmoothBump, StepWell };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& name);

/// Single-site potential supported in the closed ball of the given radius.
///   ConstantBall: amplitude on |x| <= radius
///   SmoothBump:   amplitude * exp(1 - 1/(1 - (|x|/radius)^2)) on |x| < radius
///   StepWell:     amplitude on |x| <= radius/2, amplitude/2 on radius/2 < |x| <= radius
struct Bump {
  Profile profile = Profile::ConstantBall;
  double amplitude = 1.0;
  double radius = 1.0;

  /// Value at distance rho from the bump center.
  double value(double rho) const;
  double sup_norm() const;

  friend bool operator==(const Bump&, const Bump&) = default;
};

/// Result of the truncation search: bumps 1..N-1 (1-based) are dropped.
struct Truncation {
  int N = 1;
  std::vector<int> dropped;  // 1-based indices
  bool flagged = false;      // no admissible window
};

/// V = sum_n v_n(. - x_n) over a finite window, with the sparse-geometry metadata.
/// Indices follow the 1-based convention n = 1..count; retained bumps are n >= trunc_N.
struct SparsePotential {
  int dim = 3;
  double R = 1.0;           // global support radius: every bump radius <= R
  double sparsity_C = 1.0;  // dist(x_n, {x_m}_{m != n}) >= C n^gamma
  double gamma = 2.0;
  std::vector<Bump> bumps;
  std::vector<Point> centers;
  int trunc_N = 1;
  std::vector<int> dropped;

  int count() const { return static_cast<int>(bumps.size()); }
  bool retained(int n) const { return n >= trunc_N && n <= count(); }
  /// 0-based positions of the retained bumps.
  std::vector<int> retained_indices() const;
  double sup_norm() const;

  /// Checks the hypotheses on (d, R, C, gamma), bump radii and center dimension.
  /// Throws std::invalid_argument with the violated hypothesis.
  void validate() const;
};

/// Strict lower bound on gamma: 2/(d-1).
double gamma_threshold(int dim);

/// Centers on a seeded randomized radial spiral: x_1 = 0, |x_n| ~ C n^gamma with
/// random directions, redrawn until dist(x_n, x_m) >= C n^gamma for all m < n.
/// The bound for m > n then holds automatically since C m^gamma > C n^gamma.
std::vector<Point> gen_sparse_centers(int dim, double C, double gamma, int count, std::uint64_t seed);

/// Smallest distance from center n (1-based) to every other center.
double nearest_center_distance(const std::vector<Point>& centers, int n);

/// Least N such that the supports Sigma_n (n >= N) are pairwise disjoint and
/// Sigma_m x Sigma_n stays outside {|x - y| <= 2R} for m != n >= N.
Truncation choose_truncation_N(const SparsePotential& p);

/// Runs choose_truncation_N and stores the result in p.
void apply_truncation(SparsePotential& p);

/// Sum of retained bump values at x.
double eval_potential(const SparsePotential& p, const Point& x);

struct SqrtSplit {
  double absroot;     // |V|^{1/2}
  double signedroot;  // sgn(V) |V|^{1/2}
};

SqrtSplit split_sqrt(double v);
SqrtSplit split_sqrt(const SparsePotential& p, const Point& x);

}  // namespace scatter

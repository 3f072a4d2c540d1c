#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "scatter/potential.hpp"

namespace scatter {

struct GridOptions {
  double h = 0.25;              // voxel edge
  int weight_subsamples = 6;    // per axis, for the intersected volume and the cell-averaged V
  int self_cell_subdivision = 8;
  int self_cell_depth = 3;      // recursive refinement of the subcells touching the node
  int near_field = 2;           // same-bump neighbours within this many cells use cell averages
};

/// Piecewise-constant collocation grid over the retained supports. Each bump carries its
/// own lattice anchored at its center, so identical bumps get identical local node sets.
///
/// Node i represents the voxel of edge h with integer index lattice[i] on its bump's
/// lattice. weights[i] is the volume of that voxel intersected with the bump support,
/// potential[i] the average of V over the intersected part (so potential[i] * weights[i]
/// is the integral of V over the voxel), root_potential[i] the average of |V|^{1/2} over
/// the same part and nodes[i] its centroid. Operators sandwiched by V^{1/2} use the root
/// averages, so they are the Galerkin matrices on the voxel indicators.
struct NystromGrid {
  int dim = 3;
  GridOptions options;
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::vector<int> bump_index;  // 1-based bump number n
  std::vector<std::array<int, 3>> lattice;
  std::vector<double> potential;
  std::vector<double> root_potential;
  std::vector<char> cut;  // cell cut by the support boundary

  /// Near-field pairs (i < j) with a cut cell. The kernel entry is the mean of the two
  /// one-sided averages over the source cell's inside subsamples, stored as binned
  /// distances: k_ij ~ sum over [begin, end) of near_w * k(near_r).
  struct NearQuadrature {
    std::size_t begin = 0, end = 0;
  };
  std::unordered_map<std::uint64_t, NearQuadrature> near_pairs;
  std::vector<double> near_r, near_w;
  static std::uint64_t pair_key(std::size_t i, std::size_t j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

  /// Cell-averaged |V|^{1/2} and its signed counterpart at node i.
  SqrtSplit root(std::size_t i) const;

  std::size_t size() const { return nodes.size(); }
  bool partial(std::size_t i) const { return !cut.empty() && cut[i]; }
  double cell_volume() const;
  /// Sum of weights of nodes belonging to bump n.
  double bump_volume(int n) const;
  std::size_t bump_node_count(int n) const;
};

NystromGrid build_grid(const SparsePotential& p, const GridOptions& opts);

/// Grid for a single bump centered at the origin (used by the Birman-Schwinger code).
NystromGrid build_bump_grid(int dim, const Bump& bump, const GridOptions& opts);

/// Volume of the d-ball of the given radius.
double ball_volume(int dim, double radius);

}  // namespace scatter

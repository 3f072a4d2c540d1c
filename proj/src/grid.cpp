#include "scatter/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "scatter/specfun.hpp"

namespace scatter {

double NystromGrid::cell_volume() const { return std::pow(options.h, dim); }

SqrtSplit NystromGrid::root(std::size_t i) const {
  const double r = root_potential[i];
  return {r, potential[i] < 0.0 ? -r : r};
}

double NystromGrid::bump_volume(int n) const {
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (bump_index[i] == n) v += weights[i];
  return v;
}

std::size_t NystromGrid::bump_node_count(int n) const {
  std::size_t c = 0;
  for (int b : bump_index) c += (b == n);
  return c;
}

double ball_volume(int dim, double radius) {
  if (dim == 2) return specfun::kPi * radius * radius;
  if (dim == 3) return 4.0 / 3.0 * specfun::kPi * radius * radius * radius;
  throw std::invalid_argument("ball_volume: d must be 2 or 3");
}

namespace {

// Appends the nodes of bump n and returns, per new node, the inside subsample midpoints of
// cut cells (empty for full cells).
std::vector<std::vector<Point>> append_bump_nodes(NystromGrid& g, const Bump& bump, const Point& center, int n) {
  std::vector<std::vector<Point>> cut_samples;
  const double h = g.options.h;
  const int s = g.options.weight_subsamples;
  const int half = static_cast<int>(std::ceil(bump.radius / h + 0.5));
  const int kz_lo = g.dim == 3 ? -half : 0;
  const int kz_hi = g.dim == 3 ? half - 1 : 0;
  const double sub = h / s;
  const int sub_z = g.dim == 3 ? s : 1;
  const double full = std::pow(h, g.dim);

  for (int kx = -half; kx < half; ++kx)
    for (int ky = -half; ky < half; ++ky)
      for (int kz = kz_lo; kz <= kz_hi; ++kz) {
        Point local{(kx + 0.5) * h, (ky + 0.5) * h, g.dim == 3 ? (kz + 0.5) * h : 0.0};
        double nearest_sq = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          double lo = local[static_cast<std::size_t>(a)] - 0.5 * h;
          double hi = local[static_cast<std::size_t>(a)] + 0.5 * h;
          double c = std::max(lo, std::min(0.0, hi));
          nearest_sq += c * c;
        }
        if (std::sqrt(nearest_sq) > bump.radius) continue;

        int inside = 0;
        double vsum = 0.0, rsum = 0.0;
        Point centroid{0.0, 0.0, 0.0};
        std::vector<Point> samples;
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j)
            for (int k = 0; k < sub_z; ++k) {
              double x = local[0] - 0.5 * h + (i + 0.5) * sub;
              double y = local[1] - 0.5 * h + (j + 0.5) * sub;
              double z = g.dim == 3 ? local[2] - 0.5 * h + (k + 0.5) * sub : 0.0;
              double rho = std::sqrt(x * x + y * y + z * z);
              if (rho <= bump.radius) {
                ++inside;
                const double v = bump.value(rho);
                vsum += v;
                rsum += std::sqrt(std::abs(v));
                centroid[0] += x;
                centroid[1] += y;
                centroid[2] += z;
                samples.push_back({center[0] + x, center[1] + y, center[2] + z});
              }
            }
        if (inside == 0) continue;
        const double total = static_cast<double>(s) * s * sub_z;
        // Full cells keep the exact voxel center.
        if (inside == s * s * sub_z) {
          centroid = local;
          samples.clear();
        } else {
          for (double& c : centroid) c /= inside;
        }
        g.nodes.push_back({center[0] + centroid[0], center[1] + centroid[1], center[2] + centroid[2]});
        g.lattice.push_back({kx, ky, kz});
        g.weights.push_back(full * inside / total);
        g.potential.push_back(vsum / inside);
        g.root_potential.push_back(rsum / inside);
        g.bump_index.push_back(n);
        g.cut.push_back(samples.empty() ? 0 : 1);
        cut_samples.push_back(std::move(samples));
      }
  return cut_samples;
}

// Midpoints of the m^d subcells of the full cube around c.
std::vector<Point> cube_samples(const NystromGrid& g, const Point& c) {
  const int m = g.options.weight_subsamples;
  const double h = g.options.h, sub = h / m;
  const int mz = g.dim == 3 ? m : 1;
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(m * m * mz));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int l = 0; l < mz; ++l)
        out.push_back({c[0] - 0.5 * h + (a + 0.5) * sub, c[1] - 0.5 * h + (b + 0.5) * sub,
                       g.dim == 3 ? c[2] - 0.5 * h + (l + 0.5) * sub : 0.0});
  return out;
}

// Relative width of the logarithmic distance bins; the bin mean stands in for every
// distance in it, a relative error of about kBinWidth^2 / 12 for 1/r.
constexpr double kBinWidth = 0.05;

void attach_near_field(NystromGrid& g, std::size_t first, const std::vector<std::vector<Point>>& samples) {
  const int M = g.options.near_field;
  if (M <= 0) return;
  std::map<std::array<int, 3>, std::size_t> at;
  for (std::size_t i = first; i < g.size(); ++i) at[g.lattice[i]] = i;
  const int mz = g.dim == 3 ? M : 0;
  std::vector<std::pair<double, double>> dw;
  for (std::size_t i = first; i < g.size(); ++i) {
    if (!g.cut[i]) continue;
    for (int a = -M; a <= M; ++a)
      for (int b = -M; b <= M; ++b)
        for (int c = -mz; c <= mz; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          const auto it = at.find({g.lattice[i][0] + a, g.lattice[i][1] + b, g.lattice[i][2] + c});
          if (it == at.end()) continue;
          const std::size_t j = it->second;
          if (g.cut[j] && j < i) continue;  // found from the other side
          const std::size_t lo = std::min(i, j), hi = std::max(i, j);
          dw.clear();
          for (const auto& [t, s] : {std::pair{lo, hi}, std::pair{hi, lo}}) {
            const std::vector<Point> src = g.cut[s] ? samples[s - first] : cube_samples(g, g.nodes[s]);
            const double w = 0.5 / static_cast<double>(src.size());
            for (const Point& y : src) dw.emplace_back(distance(g.nodes[t], y), w);
          }
          std::sort(dw.begin(), dw.end());
          NystromGrid::NearQuadrature q;
          q.begin = g.near_r.size();
          std::size_t k = 0;
          while (k < dw.size()) {
            const double edge = dw[k].first * (1.0 + kBinWidth);
            double wsum = 0.0, rsum = 0.0;
            for (; k < dw.size() && dw[k].first <= edge; ++k) {
              wsum += dw[k].second;
              rsum += dw[k].second * dw[k].first;
            }
            g.near_r.push_back(rsum / wsum);
            g.near_w.push_back(wsum);
          }
          q.end = g.near_r.size();
          g.near_pairs.emplace(NystromGrid::pair_key(lo, hi), q);
        }
  }
}

void check_options(const GridOptions& opts) {
  if (!(opts.h > 0.0)) throw std::invalid_argument("grid: h must be positive");
  if (opts.weight_subsamples < 1) throw std::invalid_argument("grid: weight_subsamples must be >= 1");
  if (opts.self_cell_subdivision < 2 || opts.self_cell_subdivision % 2 != 0)
    throw std::invalid_argument("grid: self-cell subdivision must be even and >= 2");
  if (opts.self_cell_depth < 1) throw std::invalid_argument("grid: self-cell depth must be >= 1");
}

}  // namespace

NystromGrid build_grid(const SparsePotential& p, const GridOptions& opts) {
  check_options(opts);
  NystromGrid g;
  g.dim = p.dim;
  g.options = opts;
  for (int i : p.retained_indices()) {
    const std::size_t first = g.size();
    const auto samples =
        append_bump_nodes(g, p.bumps[static_cast<std::size_t>(i)], p.centers[static_cast<std::size_t>(i)], i + 1);
    attach_near_field(g, first, samples);
  }
  return g;
}

NystromGrid build_bump_grid(int dim, const Bump& bump, const GridOptions& opts) {
  check_options(opts);
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid: d must be 2 or 3");
  NystromGrid g;
  g.dim = dim;
  g.options = opts;
  attach_near_field(g, 0, append_bump_nodes(g, bump, Point{0.0, 0.0, 0.0}, 1));
  return g;
}

}  // namespace scatter

#include "scatter/matrix_dump.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace scatter {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'T', 'O', 'P', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("matrix dump '" + path + "' is truncated");
  return v;
}

}  // namespace

void write_matrix_dump(const std::string& path, const OperatorMatrix& m) {
  if (!m.grid) throw std::invalid_argument("write_matrix_dump: matrix has no grid");
  const NystromGrid& g = *m.grid;
  if (static_cast<std::size_t>(m.size()) != g.size())
    throw std::invalid_argument("write_matrix_dump: matrix and grid sizes differ");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::int32_t>(os, g.dim);
  put<std::uint64_t>(os, g.size());
  put<double>(os, m.z.lambda());
  put<double>(os, m.z.epsilon());
  put<std::int32_t>(os, static_cast<std::int32_t>(m.kind));
  put<double>(os, g.options.h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (double c : g.nodes[i]) put<double>(os, c);
    put<double>(os, g.weights[i]);
    put<double>(os, g.potential[i]);
    put<double>(os, g.root_potential[i]);
    put<std::int32_t>(os, g.bump_index[i]);
    for (int c : g.lattice[i]) put<std::int32_t>(os, c);
  }
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      put<double>(os, m.entries(i, j).real());
      put<double>(os, m.entries(i, j).imag());
    }
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

OperatorMatrix read_matrix_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open matrix dump '" + path + "'");
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("'" + path + "' is not a matrix dump");
  if (get<std::uint32_t>(is, path) != kVersion) throw std::runtime_error("unsupported dump version in '" + path + "'");
  auto g = std::make_shared<NystromGrid>();
  g->dim = get<std::int32_t>(is, path);
  const std::uint64_t n = get<std::uint64_t>(is, path);
  const double lambda = get<double>(is, path);
  const double eps = get<double>(is, path);
  const std::int32_t kind = get<std::int32_t>(is, path);
  g->options.h = get<double>(is, path);
  if (kind < 0 || kind > 3) throw std::runtime_error("bad operator kind in '" + path + "'");
  g->nodes.resize(n);
  g->weights.resize(n);
  g->potential.resize(n);
  g->root_potential.resize(n);
  g->bump_index.resize(n);
  g->lattice.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (double& c : g->nodes[i]) c = get<double>(is, path);
    g->weights[i] = get<double>(is, path);
    g->potential[i] = get<double>(is, path);
    g->root_potential[i] = get<double>(is, path);
    g->bump_index[i] = get<std::int32_t>(is, path);
    for (int& c : g->lattice[i]) c = get<std::int32_t>(is, path);
  }
  OperatorMatrix m;
  m.z = SpectralPoint(lambda, eps);
  m.kind = static_cast<OperatorKind>(kind);
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  m.entries.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < ni; ++j) {
      const double re = get<double>(is, path);
      const double im = get<double>(is, path);
      m.entries(i, j) = cplx(re, im);
    }
  m.grid = std::move(g);
  return m;
}

}  // namespace scatter

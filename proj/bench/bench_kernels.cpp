// Serial reference vs OpenMP: kernel matrix assembly, F assembly and a small rectangle scan.
// Usage: bench_kernels [h] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "scatter/config.hpp"
#include "scatter/lap.hpp"
#include "scatter/opcore.hpp"

using namespace scatter;

namespace {

template <class Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-16s %10.4f %10.4f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const double h = argc > 1 ? std::atof(argv[1]) : 1.0 / 6.0;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  PotentialConfig pc;
  pc.dim = 3;
  pc.R = 0.5;
  pc.C = 0.75;
  pc.count = 8;
  pc.seed = 7;
  pc.amplitudes = {4.0};
  pc.radii = {0.5};
  const SparsePotential p = build_potential(pc);
  GridOptions go;
  go.h = h;
  const auto g = std::make_shared<const NystromGrid>(build_grid(p, go));
  const SpectralPoint z(2.0, 0.1);

  std::setvbuf(stdout, nullptr, _IONBF, 0);
  std::printf("%zu nodes, %d threads, best of %d\n", g->size(), omp_get_max_threads(), repeats);
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  Eigen::MatrixXcd a, b;
  const double ks = best_of(repeats, [&] { a = opcore::kernel_matrix_serial(*g, z); });
  const double kp = best_of(repeats, [&] { b = opcore::kernel_matrix(*g, z); });
  row("kernel_matrix", ks, kp);
  if (a != b) std::printf("  warning: serial and parallel kernel matrices differ\n");

  OperatorMatrix fa, fb;
  const double fs = best_of(repeats, [&] { fa = opcore::assemble_F_serial(g, z); });
  const double fp = best_of(repeats, [&] { fb = opcore::assemble_F(g, z); });
  row("assemble_F", fs, fp);
  if (fa.entries != fb.entries) std::printf("  warning: serial and parallel F differ\n");

  SpectralRect rect;
  rect.lambda_samples = 4;
  rect.eps_samples = SpectralRect::log_ladder(1.0, 1e-2, 3);
  lap::ScanOptions serial, parallel;
  serial.parallel = false;
  const double ss = best_of(1, [&] { lap::rect_scan(p, g, rect, serial); });
  const double sp = best_of(1, [&] { lap::rect_scan(p, g, rect, parallel); });
  row("rect_scan 4x3", ss, sp);
  return 0;
}

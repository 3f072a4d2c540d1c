#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scatter/config.hpp"

namespace scatter::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,    // unexpected error
  kConfig = 2,     // config or hypothesis violation
  kGuard = 3,      // runtime guard: horizon, resolution, conditioning
  kInvariant = 4,  // invariant breach
};

struct CommandArgs {
  std::string command;
  std::string config;
  std::string out = "out";
  bool resume = false;
};

/// Dispatches lap-scan | spectrum | waveop | kernel-check (alias selftest) and maps
/// exceptions to exit codes. Progress goes to log, errors to err.
int run(const CommandArgs& args, std::ostream& log, std::ostream& err);

int cmd_lap_scan(const RunConfig& cfg, const std::string& out, bool resume, std::ostream& log);
int cmd_spectrum(const RunConfig& cfg, const std::string& out, std::ostream& log);
int cmd_waveop(const RunConfig& cfg, const std::string& out, std::ostream& log);
int cmd_kernel_check(const RunConfig& cfg, const std::string& out, std::ostream& log);

struct CheckRow {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

/// The kernel self-test: closed form vs K-form (d = 3), Hankel form vs an integral
/// representation of K_0 (d = 2), envelope dominance over the closed rectangle,
/// boundary continuity in epsilon and the small-argument asymptotics of K_0.
std::vector<CheckRow> kernel_checks(const KernelCheckConfig& kc, const SpectralRect& rect);

/// K_0(w) for Re w >= 0 from
///   K_0(w) = sqrt(pi/(2w)) e^{-w} pi^{-1/2} int_R exp(-u^2) (1 + u^2/(2w))^{-1/2} du,
/// by the trapezoidal rule; an independent check on the series and continued-fraction paths.
cplx k0_integral(cplx w);

}  // namespace scatter::cli

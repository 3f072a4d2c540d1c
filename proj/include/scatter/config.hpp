#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatter/grid.hpp"
#include "scatter/potential.hpp"
#include "scatter/spectral.hpp"

namespace scatter {

/// Malformed config or a violated hypothesis; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat "key = value" text with dotted keys; '#' starts a comment.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& is, const std::string& origin = "<config>");
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Keys never read through an accessor.
  std::vector<std::string> unread() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;
  std::string origin_;
};

struct PotentialConfig {
  int dim = 3;
  double R = 1.0;
  double C = 1.0;
  double gamma = 2.0;
  int count = 8;
  std::uint64_t seed = 0;
  std::vector<std::string> profiles{"constant"};  // one entry applies to every bump
  std::vector<double> amplitudes{1.0};
  std::vector<double> radii{1.0};
};

struct ScanConfig {
  bool dumps = false;
  bool parallel = true;
};

struct SpectrumConfig {
  double resolution = 1e-3;
  bool beta_family = false;
  double beta0 = 0.1;
  bool feynman_hellmann = false;
  double fh_beta_lo = 0.9;
  double fh_beta_hi = 1.1;
  int fh_samples = 21;
};

struct WaveopConfig {
  double L = 150.0;
  int n = 256;
  double band_a = 0.3;
  double band_b = 1.0;
  double dt = 0.05;
  std::vector<double> t_list{4, 8, 16, 32};
  double s = 2.0;
  double x0 = 0.0, y0 = 0.0, sigma = 3.0, kx = 0.8, ky = 0.0;
};

struct KernelCheckConfig {
  int oracle_samples = 1000;
  int envelope_samples = 10000;
  double envelope_scale = 1.0;  // < 1 injects an envelope violation
  double R = 1.0;
  std::uint64_t seed = 1;
};

struct RunConfig {
  PotentialConfig potential;
  SpectralRect rect;
  GridOptions grid;
  ScanConfig scan;
  SpectrumConfig spectrum;
  WaveopConfig waveop;
  KernelCheckConfig kernel_check;

  /// Reads every known key, rejects unknown ones and validates the hypotheses.
  static RunConfig from(const KeyValueFile& kv);
  static RunConfig load(const std::string& path);
  void validate() const;
};

/// Centers from the seeded generator, bumps from the profile/amplitude/radius lists,
/// truncation applied, hypotheses validated. Throws ConfigError.
SparsePotential build_potential(const PotentialConfig& pc);

}  // namespace scatter

#include "scatter/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace scatter {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError("config key '" + key + "': '" + v + "' is not a finite number");
  return d;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& is, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    if (!kv.values_.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse(is, path);
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KeyValueFile::text(const std::string& key, const std::string& fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::real(const std::string& key, double fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_real(key, it->second);
}

long KeyValueFile::integer(const std::string& key, long fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (it->second.empty() || end != it->second.c_str() + it->second.size() || errno == ERANGE)
    throw ConfigError("config key '" + key + "': '" + it->second + "' is not an integer");
  return v;
}

bool KeyValueFile::flag(const std::string& key, bool fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key '" + key + "': '" + it->second + "' is not a boolean");
}

std::vector<double> KeyValueFile::reals(const std::string& key, const std::vector<double>& fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& s : split_list(it->second)) out.push_back(parse_real(key, s));
  return out;
}

std::vector<std::string> KeyValueFile::texts(const std::string& key, const std::vector<std::string>& fallback) const {
  read_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : split_list(it->second);
}

std::vector<std::string> KeyValueFile::unread() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

RunConfig RunConfig::from(const KeyValueFile& kv) {
  RunConfig c;
  PotentialConfig& p = c.potential;
  p.dim = static_cast<int>(kv.integer("potential.d", p.dim));
  p.R = kv.real("potential.R", p.R);
  p.C = kv.real("potential.C", p.C);
  p.gamma = kv.real("potential.gamma", p.gamma);
  p.count = static_cast<int>(kv.integer("potential.count", p.count));
  const long seed = kv.integer("potential.seed", 0);
  if (seed < 0) throw ConfigError("potential.seed must be >= 0");
  p.seed = static_cast<std::uint64_t>(seed);
  p.profiles = kv.texts("potential.profile", p.profiles);
  p.amplitudes = kv.reals("potential.amplitude", p.amplitudes);
  p.radii = kv.reals("potential.radius", p.radii);

  c.rect.a = kv.real("rect.a", c.rect.a);
  c.rect.b = kv.real("rect.b", c.rect.b);
  c.rect.eps_max = kv.real("rect.eps_max", c.rect.eps_max);
  c.rect.lambda_samples = static_cast<int>(kv.integer("rect.lambda_samples", c.rect.lambda_samples));
  const double terminal = kv.real("rect.eps_terminal", 1e-3);
  const long eps_count = kv.integer("rect.eps_count", 10);
  if (kv.has("rect.eps_list")) {
    c.rect.eps_samples = kv.reals("rect.eps_list", {});
  } else {
    if (eps_count < 1) throw ConfigError("rect.eps_count must be >= 1");
    if (!(terminal > 0.0 && terminal <= c.rect.eps_max))
      throw ConfigError("rect.eps_terminal must lie in (0, rect.eps_max]");
    c.rect.eps_samples = SpectralRect::log_ladder(c.rect.eps_max, terminal, static_cast<int>(eps_count));
  }

  c.grid.h = kv.real("grid.h", c.grid.h);
  c.grid.weight_subsamples = static_cast<int>(kv.integer("grid.weight_subsamples", c.grid.weight_subsamples));
  c.grid.self_cell_subdivision =
      static_cast<int>(kv.integer("grid.self_cell_subdivision", c.grid.self_cell_subdivision));
  c.grid.self_cell_depth = static_cast<int>(kv.integer("grid.self_cell_depth", c.grid.self_cell_depth));
  c.grid.near_field = static_cast<int>(kv.integer("grid.near_field", c.grid.near_field));

  c.scan.dumps = kv.flag("scan.dumps", c.scan.dumps);
  c.scan.parallel = kv.flag("scan.parallel", c.scan.parallel);

  SpectrumConfig& s = c.spectrum;
  s.resolution = kv.real("spectrum.resolution", s.resolution);
  s.beta_family = kv.flag("spectrum.beta_family", s.beta_family);
  s.beta0 = kv.real("spectrum.beta0", s.beta0);
  s.feynman_hellmann = kv.flag("spectrum.feynman_hellmann", s.feynman_hellmann);
  s.fh_beta_lo = kv.real("spectrum.fh_beta_lo", s.fh_beta_lo);
  s.fh_beta_hi = kv.real("spectrum.fh_beta_hi", s.fh_beta_hi);
  s.fh_samples = static_cast<int>(kv.integer("spectrum.fh_samples", s.fh_samples));

  WaveopConfig& w = c.waveop;
  w.L = kv.real("waveop.L", w.L);
  w.n = static_cast<int>(kv.integer("waveop.n", w.n));
  w.band_a = kv.real("waveop.band_a", w.band_a);
  w.band_b = kv.real("waveop.band_b", w.band_b);
  w.dt = kv.real("waveop.dt", w.dt);
  w.t_list = kv.reals("waveop.t_list", w.t_list);
  w.s = kv.real("waveop.s", w.s);
  w.x0 = kv.real("waveop.packet_x0", w.x0);
  w.y0 = kv.real("waveop.packet_y0", w.y0);
  w.sigma = kv.real("waveop.packet_sigma", w.sigma);
  w.kx = kv.real("waveop.packet_kx", w.kx);
  w.ky = kv.real("waveop.packet_ky", w.ky);

  KernelCheckConfig& k = c.kernel_check;
  k.oracle_samples = static_cast<int>(kv.integer("kernel_check.oracle_samples", k.oracle_samples));
  k.envelope_samples = static_cast<int>(kv.integer("kernel_check.envelope_samples", k.envelope_samples));
  k.envelope_scale = kv.real("kernel_check.envelope_scale", k.envelope_scale);
  k.R = kv.real("kernel_check.R", k.R);
  const long kseed = kv.integer("kernel_check.seed", 1);
  if (kseed < 0) throw ConfigError("kernel_check.seed must be >= 0");
  k.seed = static_cast<std::uint64_t>(kseed);

  const std::vector<std::string> unknown = kv.unread();
  if (!unknown.empty()) {
    std::string msg = "unknown config key";
    msg += unknown.size() > 1 ? "s:" : ":";
    for (const std::string& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) { return from(KeyValueFile::load(path)); }

void RunConfig::validate() const {
  const PotentialConfig& p = potential;
  if (p.dim != 2 && p.dim != 3) throw ConfigError("potential.d must be 2 or 3");
  if (!(p.R > 0.0)) throw ConfigError("potential.R must be positive");
  if (!(p.C > 0.0)) throw ConfigError("potential.C must be positive");
  if (!(p.gamma > gamma_threshold(p.dim))) {
    std::ostringstream msg;
    msg << "hypothesis violated: potential.gamma = " << p.gamma << " must exceed 2/(d-1) = " << gamma_threshold(p.dim);
    throw ConfigError(msg.str());
  }
  if (p.count < 1) throw ConfigError("potential.count must be >= 1");
  auto check_len = [&](std::size_t n, const char* key) {
    if (n != 1 && n != static_cast<std::size_t>(p.count))
      throw ConfigError(std::string(key) + " must list one value or potential.count values");
  };
  check_len(p.profiles.size(), "potential.profile");
  check_len(p.amplitudes.size(), "potential.amplitude");
  check_len(p.radii.size(), "potential.radius");
  for (const std::string& s : p.profiles) {
    try {
      profile_from_string(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (double r : p.radii)
    if (!(r > 0.0 && r <= p.R)) throw ConfigError("hypothesis violated: every bump radius must lie in (0, potential.R]");

  try {
    rect.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rect: ") + e.what());
  }
  for (double e : rect.eps_samples)
    if (!(e > 0.0)) throw ConfigError("rect: the epsilon ladder must be positive (the boundary eps = 0 is always added)");
  if (!(grid.h > 0.0)) throw ConfigError("grid.h must be positive");
  if (grid.weight_subsamples < 1) throw ConfigError("grid.weight_subsamples must be >= 1");
  if (grid.self_cell_subdivision < 2 || grid.self_cell_subdivision % 2)
    throw ConfigError("grid.self_cell_subdivision must be even and >= 2");
  if (grid.self_cell_depth < 1 || grid.self_cell_depth > 6) throw ConfigError("grid.self_cell_depth must be in [1, 6]");
  if (grid.near_field < 0 || grid.near_field > 4) throw ConfigError("grid.near_field must be in [0, 4]");

  if (!(spectrum.resolution > 0.0)) throw ConfigError("spectrum.resolution must be positive");
  if (!(spectrum.beta0 > 0.0 && spectrum.beta0 < 1.0)) throw ConfigError("spectrum.beta0 must lie in (0, 1)");
  if (!(spectrum.fh_beta_lo > 0.0 && spectrum.fh_beta_hi > spectrum.fh_beta_lo))
    throw ConfigError("spectrum.fh_beta_lo/hi must satisfy 0 < lo < hi");
  if (spectrum.fh_samples < 3 || spectrum.fh_samples % 2 == 0)
    throw ConfigError("spectrum.fh_samples must be odd and >= 3");

  if (!(waveop.L > 0.0)) throw ConfigError("waveop.L must be positive");
  if (waveop.n < 4 || waveop.n % 2) throw ConfigError("waveop.n must be even and >= 4");
  if (!(waveop.band_a > 0.0 && waveop.band_b > waveop.band_a))
    throw ConfigError("waveop band must satisfy 0 < band_a < band_b");
  if (!(waveop.dt > 0.0)) throw ConfigError("waveop.dt must be positive");
  if (waveop.t_list.empty()) throw ConfigError("waveop.t_list must not be empty");
  for (std::size_t k = 0; k < waveop.t_list.size(); ++k)
    if (!(waveop.t_list[k] > 0.0) || (k > 0 && !(waveop.t_list[k] > waveop.t_list[k - 1])))
      throw ConfigError("waveop.t_list must be positive and increasing");
  if (!(waveop.s >= 0.0)) throw ConfigError("waveop.s must be >= 0");
  if (!(waveop.sigma > 0.0)) throw ConfigError("waveop.packet_sigma must be positive");

  if (kernel_check.oracle_samples < 1 || kernel_check.envelope_samples < 1)
    throw ConfigError("kernel_check sample counts must be >= 1");
  if (!(kernel_check.envelope_scale > 0.0)) throw ConfigError("kernel_check.envelope_scale must be positive");
  if (!(kernel_check.R > 0.0)) throw ConfigError("kernel_check.R must be positive");
}

SparsePotential build_potential(const PotentialConfig& pc) {
  SparsePotential p;
  p.dim = pc.dim;
  p.R = pc.R;
  p.sparsity_C = pc.C;
  p.gamma = pc.gamma;
  try {
    p.centers = gen_sparse_centers(pc.dim, pc.C, pc.gamma, pc.count, pc.seed);
    for (int n = 0; n < pc.count; ++n) {
      auto pick = [n](const auto& v) { return v.size() == 1 ? v[0] : v[static_cast<std::size_t>(n)]; };
      p.bumps.push_back(Bump{profile_from_string(pick(pc.profiles)), pick(pc.amplitudes), pick(pc.radii)});
    }
    apply_truncation(p);
    p.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

}  // namespace scatter

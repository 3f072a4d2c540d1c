#include "scatter/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "scatter/lap.hpp"
#include "scatter/specfun.hpp"
#include "scatter/spectra.hpp"
#include "scatter/waveop.hpp"

namespace scatter::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr double kResidualTol = 1e-10;
constexpr double kIsometryTol = 1e-8;

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  return os;
}

json potential_json(const SparsePotential& p) {
  json j;
  j["d"] = p.dim;
  j["R"] = p.R;
  j["C"] = p.sparsity_C;
  j["gamma"] = p.gamma;
  j["count"] = p.count();
  j["trunc_N"] = p.trunc_N;
  j["dropped"] = p.dropped;
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

int cmd_lap_scan(const RunConfig& cfg, const std::string& out, bool resume, std::ostream& log) {
  const SparsePotential p = build_potential(cfg.potential);
  auto grid = std::make_shared<const NystromGrid>(build_grid(p, cfg.grid));
  log << "lap-scan: d=" << p.dim << " bumps " << p.trunc_N << ".." << p.count() << ", " << grid->size() << " nodes, "
      << cfg.rect.lambda_samples << " x " << cfg.rect.eps_samples.size() << " points\n";

  lap::ScanOptions opts;
  opts.parallel = cfg.scan.parallel;
  opts.resume = resume;
  if (cfg.scan.dumps || resume) opts.dump_dir = (fs::path(out) / "dumps").string();
  const lap::ScanReport rep = lap::rect_scan(p, grid, cfg.rect, opts);

  {
    std::ofstream os = open_out(out, "scan.csv");
    rep.write_csv(os);
  }
  {
    std::ostringstream js;
    rep.write_json(js);
    json j = json::parse(js.str());
    j["potential"] = potential_json(p);
    std::ofstream os = open_out(out, "scan_summary.json");
    os << j.dump(2) << '\n';
  }
  const lap::ScanSummary& s = rep.summary;
  log << "  sup ||F|| = " << fmt(s.sup_norm_F) << ", sup ||P|| = " << fmt(s.sup_norm_P)
      << ", sup ||(1+F)^-1|| = " << fmt(s.sup_inv_norm) << ", max residual = " << fmt(s.max_residual) << "\n";
  if (s.failures > 0) {
    log << "  " << s.failures << " point(s) failed the conditioning guard\n";
    return kGuard;
  }
  if (s.max_residual > kResidualTol) {
    log << "  resolvent identity residual above " << kResidualTol << "\n";
    return kInvariant;
  }
  return kOk;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  SparsePotential p = build_potential(cfg.potential);
  spectra::SpectrumOptions opts;
  opts.grid = cfg.grid;
  json extra;
  if (cfg.spectrum.beta_family) {
    const Bump base = p.bumps.front();
    const spectra::BetaFamily fam = spectra::beta_family(p.dim, base, cfg.spectrum.beta0, p.count(), opts);
    for (std::size_t n = 0; n < p.bumps.size(); ++n) p.bumps[n].amplitude = base.amplitude * fam.betas[n];
    json jf;
    jf["beta0"] = cfg.spectrum.beta0;
    jf["E_at_1_plus_beta0"] = fam.e_low;
    jf["E_at_1_minus_beta0"] = fam.e_high;
    jf["window_length"] = fam.e_high - fam.e_low;
    jf["targets"] = fam.targets;
    jf["betas"] = fam.betas;
    extra["beta_family"] = jf;
    log << "spectrum: beta family on [" << fmt(fam.e_low) << ", " << fmt(fam.e_high) << "], " << fam.betas.size()
        << " couplings\n";
  }
  const spectra::SpectrumReport rep = spectra::klaus_set(p, cfg.spectrum.resolution, opts);
  int code = kOk;
  if (cfg.spectrum.feynman_hellmann) {
    const Bump& base = p.bumps[static_cast<std::size_t>(p.retained_indices().front())];
    const spectra::FeynmanHellmann fh = spectra::feynman_hellmann_check(
        p.dim, base, cfg.spectrum.fh_beta_lo, cfg.spectrum.fh_beta_hi, cfg.spectrum.fh_samples, opts);
    json jf;
    jf["betas"] = fh.betas;
    jf["energies"] = fh.energies;
    jf["strictly_decreasing"] = fh.strictly_decreasing;
    jf["repeat_identical"] = fh.repeat_identical;
    jf["max_second_derivative"] = fh.max_second_derivative;
    jf["slope_finite_difference"] = fh.slope_fd;
    if (p.dim == 3) {
      jf["slope_expectation"] = fh.slope_fh;
      jf["relative_mismatch"] = fh.relative_mismatch;
    }
    extra["feynman_hellmann"] = jf;
    if (!fh.strictly_decreasing || !fh.repeat_identical) code = kInvariant;
  }
  std::ostringstream js;
  rep.write_json(js);
  json j = json::parse(js.str());
  j["potential"] = potential_json(p);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream os = open_out(out, "spectrum.json");
  os << j.dump(2) << '\n';
  log << "spectrum: " << rep.merged.size() << " eigenvalue(s) below 0 over " << rep.per_bump.size()
      << " bump(s), cover length " << fmt(rep.cover_length) << "\n";
  if (!rep.note.empty()) log << "  note: " << rep.note << "\n";
  return code;
}

int cmd_waveop(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  const SparsePotential p = build_potential(cfg.potential);
  const WaveopConfig& w = cfg.waveop;
  waveop::PeriodicBox box{w.L, w.n};
  waveop::WaveOpSetup setup;
  setup.band = {w.band_a, w.band_b};
  setup.dt = w.dt;
  const waveop::Field psi0 = waveop::gaussian_packet(box, w.x0, w.y0, w.sigma, w.kx, w.ky);
  log << "waveop: box L=" << w.L << " n=" << w.n << ", horizon " << fmt(box.horizon(w.band_b)) << "\n";
  const waveop::WaveOpReport rep = waveop::run_diagnostics(p, box, psi0, setup, w.t_list, w.s);
  {
    std::ofstream os = open_out(out, "waveop.csv");
    rep.write_csv(os);
  }
  json j;
  j["potential"] = potential_json(p);
  j["horizon"] = rep.horizon;
  j["projected_norm"] = rep.projected_norm;
  j["cauchy_decreasing"] = rep.cauchy_decreasing;
  j["smoothness_plateau"] = rep.smoothness_plateau;
  double iso = 0.0;
  for (const auto& r : rep.rows) iso = std::max(iso, r.isometry_defect);
  j["max_isometry_defect"] = iso;
  j["terminal_cauchy_gap"] = rep.rows.size() > 1 ? rep.rows.back().cauchy_gap : 0.0;
  j["terminal_intertwine_defect"] = rep.rows.back().intertwine_defect;
  {
    std::ofstream os = open_out(out, "waveop_summary.json");
    os << j.dump(2) << '\n';
  }
  log << "  max isometry defect " << fmt(iso) << ", Cauchy ladder "
      << (rep.cauchy_decreasing ? "decreasing" : "not decreasing") << "\n";
  return iso > kIsometryTol * std::max(1.0, rep.projected_norm) ? kInvariant : kOk;
}

cplx k0_integral(cplx w) {
  if (w == cplx(0.0, 0.0) || w.real() < 0.0) throw std::domain_error("k0_integral requires Re w >= 0, w != 0");
  const double h = 0.01;
  const int m = 800;  // |u| <= 8
  cplx sum = 1.0;     // u = 0 term
  for (int k = 1; k <= m; ++k) {
    const double u = k * h;
    sum += 2.0 * std::exp(-u * u) / std::sqrt(1.0 + u * u / (2.0 * w));
  }
  return std::sqrt(specfun::kPi / (2.0 * w)) * std::exp(-w) * sum * h / std::sqrt(specfun::kPi);
}

std::vector<CheckRow> kernel_checks(const KernelCheckConfig& kc, const SpectralRect& rect) {
  std::mt19937_64 rng(kc.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto sample_point = [&]() {
    const double lambda = rect.a + (rect.b - rect.a) * uni(rng);
    const double eps = uni(rng) < 0.2 ? 0.0 : std::pow(10.0, -4.0 + 4.0 * uni(rng));
    return SpectralPoint(lambda, eps);
  };
  std::vector<CheckRow> rows;

  {
    double worst = 0.0;
    for (int k = 0; k < kc.oracle_samples; ++k) {
      const SpectralPoint z = sample_point();
      const double r = std::pow(10.0, -3.0 + 4.7 * uni(rng));
      const cplx a = specfun::free_kernel({3}, z, r);
      const cplx b = specfun::free_kernel_kform({3}, z, r);
      worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    rows.push_back({"d3_closed_form_vs_kform", worst <= 1e-10, worst, 1e-10});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < kc.oracle_samples; ++k) {
      const SpectralPoint z = sample_point();
      // |sqrt(z)| r spans [0.5, 30]
      const double target = 0.5 * std::pow(60.0, uni(rng));
      const double r = target / std::abs(z.sqrt_z());
      const cplx a = specfun::free_kernel({2}, z, r);
      const cplx b = k0_integral(cplx(0.0, -1.0) * z.sqrt_z() * r) / (2.0 * specfun::kPi);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    rows.push_back({"d2_hankel_vs_integral", worst <= 1e-10, worst, 1e-10});
  }
  for (int d : {2, 3}) {
    const specfun::KernelEnvelope env =
        specfun::KernelEnvelope({d}, kc.R, rect).scaled(kc.envelope_scale);
    double worst = 0.0;
    for (int k = 0; k < kc.envelope_samples; ++k) {
      const SpectralPoint z = sample_point();
      const double r = kc.R * std::pow(10.0, -4.0 + 7.0 * uni(rng));
      worst = std::max(worst, std::abs(specfun::free_kernel({d}, z, r)) / env(r));
    }
    rows.push_back({"d" + std::to_string(d) + "_envelope_dominance", worst <= 1.0, worst, 1.0});
  }
  {
    // |k(lambda + i eps) - k(lambda + i0)| decreasing in eps on [r0, r1]
    bool monotone = true;
    double last = 0.0;
    for (int d : {2, 3})
      for (double lambda : {rect.a, 0.5 * (rect.a + rect.b), rect.b})
        for (double r : {0.1, 1.0, 10.0}) {
          const cplx k0 = specfun::free_kernel({d}, SpectralPoint(lambda, 0.0), r);
          double prev = INFINITY;
          for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            const double gap = std::abs(specfun::free_kernel({d}, SpectralPoint(lambda, eps), r) - k0) / std::abs(k0);
            monotone = monotone && gap < prev;
            prev = gap;
          }
          last = std::max(last, prev);
        }
    rows.push_back({"boundary_continuity", monotone && last <= 1e-4, last, 1e-4});
  }
  {
    double worst = 0.0;
    for (double w : {1e-4, 1e-6, 1e-8}) {
      const double lead = -std::log(w / 2.0) - specfun::kEulerGamma;
      worst = std::max(worst, std::abs(specfun::macdonald_k(0.0, w).real() / lead - 1.0));
    }
    rows.push_back({"k0_small_argument", worst <= 1e-6, worst, 1e-6});
  }
  return rows;
}

int cmd_kernel_check(const RunConfig& cfg, const std::string& out, std::ostream& log) {
  const std::vector<CheckRow> rows = kernel_checks(cfg.kernel_check, cfg.rect);
  std::ofstream os = open_out(out, "kernel_check.csv");
  os << "check,status,value,threshold\n";
  bool all = true;
  for (const CheckRow& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6e,%.6e\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.value,
                  r.threshold);
    os << buf;
    log << (r.passed ? "PASS " : "FAIL ") << r.name << "  value " << fmt(r.value) << "  threshold " << fmt(r.threshold)
        << "\n";
    all = all && r.passed;
  }
  return all ? kOk : kInvariant;
}

int run(const CommandArgs& args, std::ostream& log, std::ostream& err) {
  try {
    const RunConfig cfg = RunConfig::load(args.config);
    if (args.command == "lap-scan") return cmd_lap_scan(cfg, args.out, args.resume, log);
    if (args.command == "spectrum") return cmd_spectrum(cfg, args.out, log);
    if (args.command == "waveop") return cmd_waveop(cfg, args.out, log);
    if (args.command == "kernel-check" || args.command == "selftest") return cmd_kernel_check(cfg, args.out, log);
    err << "unknown command '" << args.command << "' (lap-scan | spectrum | waveop | kernel-check)\n";
    return kConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const HorizonError& e) {
    err << "horizon guard: " << e.what() << "\n";
    return kGuard;
  } catch (const ResolutionError& e) {
    err << "resolution guard: " << e.what() << "\n";
    return kGuard;
  } catch (const SingularSystemError& e) {
    err << "conditioning guard: " << e.what() << "\n";
    return kGuard;
  } catch (const EigenvalueLost& e) {
    err << "spectrum guard: " << e.what() << "\n";
    return kGuard;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace scatter::cli

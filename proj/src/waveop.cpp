#include "scatter/waveop.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>
#include <sstream>

#include "scatter/specfun.hpp"

namespace scatter::waveop {

namespace {

constexpr double kPi = specfun::kPi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

long step_count(double t, double dt) {
  const double q = t / dt;
  const long s = std::lround(q);
  if (std::abs(q - static_cast<double>(s)) > 1e-9 * std::max(1.0, q))
    throw std::invalid_argument("time " + fmt(t) + " is not a multiple of dt = " + fmt(dt));
  return s;
}

}  // namespace

double PeriodicBox::horizon(double b) const { return L / (2.0 * 2.0 * std::sqrt(b)); }

double PeriodicBox::points_per_wavelength(double b) const { return 2.0 * kPi / std::sqrt(b) / dx(); }

double norm(const PeriodicBox& box, const Field& f) {
  double s = 0.0;
  for (const cplx& v : f) s += std::norm(v);
  return std::sqrt(s) * box.dx();
}

double distance(const PeriodicBox& box, const Field& f, const Field& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i] - g[i]);
  return std::sqrt(s) * box.dx();
}

std::vector<double> sample_potential(const SparsePotential& p, const PeriodicBox& box) {
  if (p.dim != 2) throw std::invalid_argument("wave-operator runs use d = 2");
  std::vector<double> v(box.size(), 0.0);
  for (int i = 0; i < box.n; ++i)
    for (int j = 0; j < box.n; ++j)
      v[static_cast<std::size_t>(i) * box.n + j] = eval_potential(p, Point{box.coord(i), box.coord(j), 0.0});
  return v;
}

Field gaussian_packet(const PeriodicBox& box, double x0, double y0, double sigma, double kx, double ky) {
  Field f(box.size());
  for (int i = 0; i < box.n; ++i)
    for (int j = 0; j < box.n; ++j) {
      const double x = box.coord(i), y = box.coord(j);
      const double r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
      f[static_cast<std::size_t>(i) * box.n + j] = std::exp(cplx(-r2 / (2.0 * sigma * sigma), kx * x + ky * y));
    }
  return f;
}

SplitStep::SplitStep(const PeriodicBox& box, std::vector<double> potential)
    : box_(box), potential_(std::move(potential)) {
  if (box_.n < 4 || box_.n % 2 != 0) throw std::invalid_argument("box size n must be even and >= 4");
  if (!(box_.L > 0.0)) throw std::invalid_argument("box length L must be positive");
  if (potential_.size() != box_.size()) throw std::invalid_argument("potential field does not match the box");
  const int n = box_.n;
  k2_.resize(box_.size());
  const double dk = 2.0 * kPi / box_.L;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double kx = dk * (i < n / 2 ? i : i - n);
      const double ky = dk * (j < n / 2 ? j : j - n);
      k2_[static_cast<std::size_t>(i) * n + j] = kx * kx + ky * ky;
    }
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * box_.size()));
  if (!buf) throw std::bad_alloc();
  buffer_ = buf;
  fwd_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SplitStep::~SplitStep() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buffer_);
}

double SplitStep::potential_sup() const {
  double m = 0.0;
  for (double v : potential_) m = std::max(m, std::abs(v));
  return m;
}

void SplitStep::forward() const { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void SplitStep::backward() const { fftw_execute(static_cast<fftw_plan>(bwd_)); }

void SplitStep::load(const Field& f) const {
  if (f.size() != box_.size()) throw std::invalid_argument("field does not match the box");
  std::memcpy(buffer_, f.data(), sizeof(cplx) * f.size());
}

void SplitStep::store(Field& f) const { std::memcpy(f.data(), buffer_, sizeof(cplx) * f.size()); }

void SplitStep::multiply(const std::vector<cplx>& m) const {
  auto* b = reinterpret_cast<cplx*>(buffer_);
  for (std::size_t i = 0; i < m.size(); ++i) b[i] *= m[i];
}

void SplitStep::free(Field& f, double t) const {
  const double scale = 1.0 / static_cast<double>(box_.size());
  std::vector<cplx> m(k2_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(scale, -k2_[i] * t);
  load(f);
  forward();
  multiply(m);
  backward();
  store(f);
}

void SplitStep::full(Field& f, double dt, long steps, const std::function<void(long, const Field&)>& observer) const {
  if (steps <= 0) return;
  const double scale = 1.0 / static_cast<double>(box_.size());
  std::vector<cplx> half(k2_.size()), whole(k2_.size()), phase(potential_.size());
  for (std::size_t i = 0; i < k2_.size(); ++i) {
    half[i] = std::polar(scale, -k2_[i] * 0.5 * dt);
    whole[i] = std::polar(scale, -k2_[i] * dt);
  }
  for (std::size_t i = 0; i < phase.size(); ++i) phase[i] = std::polar(1.0, -potential_[i] * dt);

  load(f);
  if (observer) {
    for (long s = 1; s <= steps; ++s) {
      forward();
      multiply(half);
      backward();
      multiply(phase);
      forward();
      multiply(half);
      backward();
      store(f);
      observer(s, f);
    }
    return;
  }
  // Consecutive half kinetic steps merged: K/2 (V K)^{steps-1} V K/2.
  forward();
  multiply(half);
  for (long s = 1; s <= steps; ++s) {
    backward();
    multiply(phase);
    forward();
    multiply(s == steps ? half : whole);
  }
  backward();
  store(f);
}

void SplitStep::project(Field& f, const EnergyBand& band) const {
  const double scale = 1.0 / static_cast<double>(box_.size());
  std::vector<cplx> m(k2_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (k2_[i] >= band.a && k2_[i] <= band.b) ? scale : 0.0;
  load(f);
  forward();
  multiply(m);
  backward();
  store(f);
}

void propagate(PropagatorState& state, double dt, long steps, Which which) {
  SplitStep prop(state.box, which == Which::Full ? state.potential_field : std::vector<double>(state.box.size(), 0.0));
  if (which == Which::Full && std::abs(dt) * prop.potential_sup() > 0.1 + 1e-12)
    throw std::invalid_argument("splitting regime requires |dt| * sup|V| <= 0.1");
  if (which == Which::Free)
    prop.free(state.psi, dt * static_cast<double>(steps));
  else
    prop.full(state.psi, dt, steps);
  state.time += dt * static_cast<double>(steps);
}

PropagatorState band_project(const PropagatorState& state, const EnergyBand& band) {
  if (!(band.a > 0.0 && band.b > band.a)) throw std::invalid_argument("energy band must satisfy 0 < a < b");
  PropagatorState out = state;
  SplitStep prop(state.box, std::vector<double>(state.box.size(), 0.0));
  prop.project(out.psi, band);
  return out;
}

void validate_setup(const SparsePotential& p, const PeriodicBox& box, const WaveOpSetup& setup) {
  if (p.dim != 2) throw std::invalid_argument("wave-operator runs use d = 2");
  if (!(setup.band.a > 0.0 && setup.band.b > setup.band.a))
    throw std::invalid_argument("energy band must satisfy 0 < a < b");
  if (!(setup.dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (box.points_per_wavelength(setup.band.b) < 8.0) {
    std::ostringstream msg;
    msg << "lattice resolves only " << box.points_per_wavelength(setup.band.b)
        << " points per wavelength at energy b = " << setup.band.b << " (need 8)";
    throw ResolutionError(msg.str());
  }
  for (int i : p.retained_indices()) {
    const Point& c = p.centers[static_cast<std::size_t>(i)];
    const double reach = std::max(std::abs(c[0]), std::abs(c[1])) + p.bumps[static_cast<std::size_t>(i)].radius;
    if (reach >= 0.5 * box.L - box.dx())
      throw std::invalid_argument("bump " + std::to_string(i + 1) + " does not fit inside the box");
  }
  if (setup.dt * p.sup_norm() > 0.1 + 1e-12)
    throw std::invalid_argument("splitting regime requires dt * sup|V| <= 0.1");
}

namespace {

void check_horizon(const PeriodicBox& box, const WaveOpSetup& setup, double t) {
  const double h = box.horizon(setup.band.b);
  if (t > h) throw HorizonError("time " + fmt(t) + " exceeds the wraparound horizon " + fmt(h));
}

Field apply_W(const SplitStep& prop, const Field& psi0, const WaveOpSetup& setup, double t) {
  Field f = psi0;
  prop.project(f, setup.band);
  prop.free(f, t);
  prop.full(f, -setup.dt, step_count(t, setup.dt));
  return f;
}

}  // namespace

std::vector<std::pair<double, Field>> wave_op_approx(const SplitStep& prop, const Field& psi0,
                                                     const WaveOpSetup& setup, const std::vector<double>& t_list) {
  std::vector<std::pair<double, Field>> out;
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    if (k > 0 && !(t_list[k] > t_list[k - 1])) throw std::invalid_argument("t_list must be increasing");
    if (t_list[k] < 0.0) throw std::invalid_argument("t_list must be nonnegative");
    check_horizon(prop.box(), setup, t_list[k]);
  }
  for (double t : t_list) out.emplace_back(t, apply_W(prop, psi0, setup, t));
  return out;
}

double intertwine_check(const SplitStep& prop, const Field& psi0, const WaveOpSetup& setup, double T, double s) {
  if (s < 0.0) throw std::invalid_argument("intertwining shift s must be >= 0");
  check_horizon(prop.box(), setup, T + s);
  const double n0 = norm(prop.box(), psi0);
  if (n0 == 0.0) return 0.0;
  Field a = apply_W(prop, psi0, setup, T);
  prop.full(a, setup.dt, step_count(s, setup.dt));
  Field shifted = psi0;
  prop.free(shifted, s);
  const Field b = apply_W(prop, shifted, setup, T);
  return distance(prop.box(), a, b) / n0;
}

std::vector<double> smoothness_integral(const SplitStep& prop, const Field& psi0, const WaveOpSetup& setup,
                                        const std::vector<double>& T_list) {
  std::vector<long> marks;
  for (std::size_t k = 0; k < T_list.size(); ++k) {
    if (k > 0 && !(T_list[k] > T_list[k - 1])) throw std::invalid_argument("T_list must be increasing");
    marks.push_back(step_count(T_list[k], setup.dt));
  }
  if (marks.empty()) return {};
  const PeriodicBox& box = prop.box();
  const std::vector<double>& v = prop.potential();
  const double cell = box.dx() * box.dx();
  auto weight = [&](const Field& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(v[i]) * std::norm(f[i]);
    return s * cell;
  };
  Field f = psi0;
  prop.project(f, setup.band);
  std::vector<double> out(marks.size(), 0.0);
  double integral = 0.0, prev = weight(f);
  std::size_t next = 0;
  while (next < marks.size() && marks[next] == 0) out[next++] = 0.0;
  prop.full(f, setup.dt, marks.back(), [&](long step, const Field& g) {
    const double cur = weight(g);
    integral += 0.5 * setup.dt * (prev + cur);
    prev = cur;
    while (next < marks.size() && marks[next] == step) out[next++] = integral;
  });
  return out;
}

WaveOpReport run_diagnostics(const SparsePotential& p, const PeriodicBox& box, const Field& psi0,
                             const WaveOpSetup& setup, const std::vector<double>& t_list, double s) {
  validate_setup(p, box, setup);
  if (t_list.empty()) throw std::invalid_argument("t_list must not be empty");
  check_horizon(box, setup, t_list.back() + s);
  SplitStep prop(box, sample_potential(p, box));

  WaveOpReport rep;
  rep.horizon = box.horizon(setup.band.b);
  Field projected = psi0;
  prop.project(projected, setup.band);
  rep.projected_norm = norm(box, projected);

  const auto ladder = wave_op_approx(prop, psi0, setup, t_list);
  const std::vector<double> smooth = smoothness_integral(prop, psi0, setup, t_list);
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    WaveOpRow r;
    r.t = ladder[k].first;
    r.cauchy_gap = k == 0 ? std::numeric_limits<double>::quiet_NaN() : distance(box, ladder[k].second, ladder[k - 1].second);
    r.isometry_defect = std::abs(norm(box, ladder[k].second) - rep.projected_norm);
    r.intertwine_defect = intertwine_check(prop, psi0, setup, r.t, s);
    r.smooth_integral = smooth[k];
    rep.rows.push_back(r);
  }
  rep.cauchy_decreasing = rep.rows.size() >= 3;
  for (std::size_t k = 2; k < rep.rows.size(); ++k)
    rep.cauchy_decreasing = rep.cauchy_decreasing && rep.rows[k].cauchy_gap < rep.rows[k - 1].cauchy_gap;
  if (smooth.size() >= 3) {
    const std::size_t m = smooth.size();
    const double last = smooth[m - 1] - smooth[m - 2];
    const double before = smooth[m - 2] - smooth[m - 3];
    rep.smoothness_plateau = last <= 0.5 * before;
  }
  return rep;
}

void WaveOpReport::write_csv(std::ostream& os) const {
  os << "t,cauchy_gap,isometry_defect,intertwine_defect,smooth_integral\n";
  for (const WaveOpRow& r : rows)
    os << fmt(r.t) << ',' << (std::isnan(r.cauchy_gap) ? std::string("nan") : fmt(r.cauchy_gap)) << ','
       << fmt(r.isometry_defect) << ',' << fmt(r.intertwine_defect) << ',' << fmt(r.smooth_integral) << '\n';
}

}  // namespace scatter::waveop

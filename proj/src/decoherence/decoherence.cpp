#include "thermodeco/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "thermodeco/constants.hpp"
#include "thermodeco/numerics/roots.hpp"
#include "thermodeco/numerics/special.hpp"
#include "thermodeco/numerics/spline.hpp"

namespace thermodeco {

namespace {

using numerics::QuadratureSpec;

// Nonnegative integrands converge on relative accuracy alone.
QuadratureSpec relative_only(const QuadratureSpec& spec) {
  QuadratureSpec s = spec;
  s.abs_tol = 0.0;
  return s;
}

// Reduced separation b = R * w_mean / c covered by the eta table; beyond the
// upper end eta oscillates faster than the log grid resolves and is computed directly.
constexpr double kEtaTableMin = 1e-4;
constexpr double kEtaTableMax = 30.0;
constexpr int kEtaTablePoints = 1000;

double front_ratio(const BeamGeometry& g) {
  return g.coherence_slit_distance ? *g.coherence_slit_distance / g.flight_distance : 0.0;
}

}  // namespace

// --- BeamGeometry -----------------------------------------------------------

void BeamGeometry::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(slit_separation)) throw std::invalid_argument("geometry: slit_separation must be > 0");
  if (!positive(flight_distance)) throw std::invalid_argument("geometry: flight_distance must be > 0");
  if (!positive(longitudinal_velocity)) {
    throw std::invalid_argument("geometry: longitudinal_velocity must be > 0");
  }
  if (!positive(mass)) throw std::invalid_argument("geometry: mass must be > 0");
  if (coherence_slit_distance && !positive(*coherence_slit_distance)) {
    throw std::invalid_argument("geometry: coherence_slit_distance must be > 0 when present");
  }
}

double BeamGeometry::de_broglie_wavelength() const {
  return 2.0 * constants::pi * constants::hbar / longitudinal_momentum();
}

double BeamGeometry::fringe_period() const {
  return de_broglie_wavelength() * flight_distance / slit_separation;
}

BeamGeometry BeamGeometry::with_time_of_flight(double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("time of flight must be > 0");
  BeamGeometry g = *this;
  g.longitudinal_velocity = flight_distance / tau;
  return g;
}

BeamGeometry BeamGeometry::with_slit_separation(double d) const {
  BeamGeometry g = *this;
  g.slit_separation = d;
  return g;
}

// --- eta --------------------------------------------------------------------

double eta_radiative(const EmissionModel& model, double temperature, double separation,
                     const QuadratureSpec& spec) {
  if (!(separation >= 0.0)) throw std::domain_error("eta: separation must be >= 0");
  const double total = model.total_rate(temperature, spec);
  if (!(total > 0.0)) {
    throw std::domain_error("decoherence function undefined; no emission");
  }
  if (separation == 0.0) return 1.0;
  const double r_over_c = separation / constants::c;
  const double weighted = model.spectral_integral(
      temperature, [&](double omega) { return numerics::sinc(omega * r_over_c); }, spec);
  return std::clamp(weighted / total, -1.0, 1.0);
}

DecoherenceFunction::DecoherenceFunction(Kind kind, std::function<double(double)> eval)
    : kind_(kind), eval_(std::move(eval)) {}

DecoherenceFunction DecoherenceFunction::radiative(const EmissionModel& model, double temperature,
                                                   const QuadratureSpec& spec) {
  const double total = model.total_rate(temperature, spec);
  if (!(total > 0.0)) throw std::domain_error("decoherence function undefined; no emission");
  const double mean_omega =
      model.spectral_integral(temperature, [](double w) { return w; }, spec) / total;
  const double b_per_r = mean_omega / constants::c;

  std::vector<double> log_b(kEtaTablePoints);
  std::vector<double> eta(kEtaTablePoints);
  const double lo = std::log(kEtaTableMin);
  const double hi = std::log(kEtaTableMax);
  for (int i = 0; i < kEtaTablePoints; ++i) {
    log_b[i] = lo + (hi - lo) * i / (kEtaTablePoints - 1);
    eta[i] = eta_radiative(model, temperature, std::exp(log_b[i]) / b_per_r, spec);
  }
  const double curvature = (1.0 - eta.front()) / (kEtaTableMin * kEtaTableMin);
  auto spline = std::make_shared<numerics::CubicSpline>(log_b, eta);
  auto eval = [spline, curvature, b_per_r, model, temperature, spec](double r) {
    const double b = std::abs(r) * b_per_r;
    if (b == 0.0) return 1.0;
    if (b < kEtaTableMin) return 1.0 - curvature * b * b;
    if (b > kEtaTableMax) return eta_radiative(model, temperature, std::abs(r), spec);
    return std::clamp((*spline)(std::log(b)), -1.0, 1.0);
  };
  return DecoherenceFunction(Kind::radiative, std::move(eval));
}

DecoherenceFunction DecoherenceFunction::isotropic_numeric(std::vector<double> separations,
                                                           std::vector<double> values) {
  if (separations.size() < 2 || separations.size() != values.size()) {
    throw std::invalid_argument("isotropic eta: need >= 2 matching samples");
  }
  if (separations.front() != 0.0 || values.front() != 1.0) {
    throw std::invalid_argument("isotropic eta: first sample must be eta(0) = 1");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && !(separations[i] > separations[i - 1])) {
      throw std::invalid_argument("isotropic eta: separations must increase");
    }
    if (!(std::abs(values[i]) <= 1.0)) throw std::invalid_argument("isotropic eta: |eta| must be <= 1");
  }
  auto eval = [r = std::move(separations), v = std::move(values)](double sep) {
    const double x = std::abs(sep);
    if (x >= r.back()) return v.back();
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
    const double s = (x - r[i]) / (r[i + 1] - r[i]);
    return v[i] + s * (v[i + 1] - v[i]);
  };
  return DecoherenceFunction(Kind::isotropic_numeric, std::move(eval));
}

DecoherenceFunction DecoherenceFunction::custom(std::function<double(double)> eta) {
  auto eval = [f = std::move(eta)](double r) { return r == 0.0 ? 1.0 : f(std::abs(r)); };
  return DecoherenceFunction(Kind::custom, std::move(eval));
}

double DecoherenceFunction::operator()(double separation) const { return eval_(separation); }

RadiativeEtaCache::RadiativeEtaCache(EmissionModel model, QuadratureSpec spec)
    : model_(std::move(model)), spec_(spec) {}

std::shared_ptr<const DecoherenceFunction> RadiativeEtaCache::table_for(double temperature) const {
  std::lock_guard lock(mutex_);
  if (!cached_ || std::abs(temperature - cached_temperature_) > 1e-3 * cached_temperature_) {
    cached_ = std::make_shared<const DecoherenceFunction>(
        DecoherenceFunction::radiative(model_, temperature, spec_));
    cached_temperature_ = temperature;
    ++rebuilds_;
  }
  return cached_;
}

double RadiativeEtaCache::operator()(double temperature, double separation) const {
  return (*table_for(temperature))(separation);
}

std::size_t RadiativeEtaCache::rebuild_count() const {
  std::lock_guard lock(mutex_);
  return rebuilds_;
}

// --- Visibilities -------------------------------------------------------------

double visibility_general(const BeamGeometry& geometry, const std::function<double(double)>& rate,
                          const DecoherenceFunction& eta, const QuadratureSpec& spec) {
  geometry.validate();
  const QuadratureSpec s = relative_only(spec);
  auto segment = [&](double tau, double separation) {
    auto integrand = [&](double t) {
      const double g = rate(t);
      if (g < 0.0) throw std::domain_error("visibility_general: negative event rate");
      return g == 0.0 ? 0.0 : g * (1.0 - eta(separation * (1.0 - t / tau)));
    };
    return numerics::integrate(integrand, 0.0, tau, s);
  };
  const double tau = geometry.time_of_flight();
  double exponent = segment(tau, geometry.slit_separation);
  if (geometry.coherence_slit_distance) {
    const double ratio = front_ratio(geometry);
    exponent += ratio == 1.0 ? exponent : segment(tau * ratio, geometry.slit_separation * ratio);
  }
  return std::exp(-exponent);
}

namespace {

// int_0^tau dt S(T(t), sep (1 - t/tau)), S(T, D) = int dw R(w; T) (1 - sinc(w D / c)).
// A cooling history varies on the scale C_V T0 / P(T0), which can be many
// decades below tau, so the time axis is split geometrically down to it.
double segment_exponent(const EmissionModel& model, const CoolingTrajectory& trajectory,
                        double tau, double separation, const QuadratureSpec& spec) {
  if (tau == 0.0 || separation == 0.0 || !model.emits()) return 0.0;
  const QuadratureSpec outer = relative_only(spec);
  const QuadratureSpec inner = outer.tightened(10.0);
  auto over_t = [&](double t) {
    const double temperature = trajectory.temperature(t);
    const double d_over_c = separation * (1.0 - t / tau) / constants::c;
    return model.spectral_integral(
        temperature, [d_over_c](double omega) { return numerics::one_minus_sinc(omega * d_over_c); },
        inner);
  };
  std::vector<double> breaks{0.0};
  if (!trajectory.constant()) {
    const double t0 = trajectory.initial_temperature();
    const double cooling_time =
        model.particle().heat_capacity * t0 / model.energy_loss_rate(t0, inner);
    for (double t = 1e-3 * cooling_time; t < 0.5 * tau; t *= 10.0) breaks.push_back(t);
  }
  breaks.push_back(tau);
  return numerics::integrate_piecewise(over_t, breaks, outer);
}

CoolingTrajectory trajectory_for(const BeamGeometry& geometry, const EmissionModel& model,
                                 bool with_cooling, const QuadratureSpec& spec) {
  double span = geometry.time_of_flight();
  if (geometry.coherence_slit_distance) span = std::max(span, span * front_ratio(geometry));
  const double t0 = model.particle().initial_temperature;
  if (!with_cooling || !model.particle().finite_heat_capacity()) return CoolingTrajectory(t0, span);
  return cool(model, span, spec);
}

}  // namespace

double thermal_exponent_for_separation(const BeamGeometry& geometry, const EmissionModel& model,
                                       const CoolingTrajectory& trajectory, double separation,
                                       const QuadratureSpec& spec) {
  const double tau = geometry.time_of_flight();
  double exponent = segment_exponent(model, trajectory, tau, separation, spec);
  if (geometry.coherence_slit_distance) {
    const double ratio = front_ratio(geometry);
    exponent += ratio == 1.0
                    ? exponent
                    : segment_exponent(model, trajectory, tau * ratio, separation * ratio, spec);
  }
  return exponent;
}

double visibility_exponent_thermal(const BeamGeometry& geometry, const EmissionModel& model,
                                   bool with_cooling, const QuadratureSpec& spec) {
  geometry.validate();
  const CoolingTrajectory trajectory = trajectory_for(geometry, model, with_cooling, spec);
  return thermal_exponent_for_separation(geometry, model, trajectory, geometry.slit_separation,
                                         spec);
}

double visibility_thermal(const BeamGeometry& geometry, const EmissionModel& model,
                          bool with_cooling, const QuadratureSpec& spec) {
  return std::exp(-visibility_exponent_thermal(geometry, model, with_cooling, spec));
}

// --- Decoherence times --------------------------------------------------------

double thermal_separation_ratio(double temperature, double separation) {
  return constants::k_B * temperature * separation / (constants::hbar * constants::c);
}

double decoherence_time_quadrature(const BeamGeometry& geometry, const EmissionModel& model,
                                   double temperature, const QuadratureSpec& spec) {
  geometry.validate();
  const EmissionModel canonical = model.with_heat_capacity_term(false);
  const QuadratureSpec s = relative_only(spec);
  auto rate_for = [&](double d) {
    const double d_over_c = d / constants::c;
    return canonical.spectral_integral(
        temperature,
        [d_over_c](double omega) { return numerics::one_minus_si_ratio(omega * d_over_c); }, s);
  };
  double rate = rate_for(geometry.slit_separation);
  if (geometry.coherence_slit_distance) {
    const double ratio = front_ratio(geometry);
    rate += ratio == 1.0 ? rate : ratio * rate_for(geometry.slit_separation * ratio);
  }
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

double scaling_function(double x) {
  if (!(x >= 0.0)) throw std::domain_error("scaling_function: x must be >= 0");
  if (x < 0.1) {
    // sum_{k>=1} (-1)^(k+1) (2k+2)/(2k+1) x^(2k+3)
    const double x2 = x * x;
    double power = x2 * x2 * x;
    double sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      const double term = ((k % 2 == 1) ? 1.0 : -1.0) * (2.0 * k + 2.0) / (2.0 * k + 1.0) * power;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      power *= x2;
    }
    return sum;
  }
  const double x2 = x * x;
  const double x3 = x2 * x;
  return 2.0 * x3 - x3 / (1.0 + x2) - x2 * std::atan(x);
}

namespace {

double closed_rate(const ParticleModel& particle, double temperature, double d) {
  const double x = thermal_separation_ratio(temperature, d);
  return particle.effective_area * constants::c / (4.0 * constants::pi * constants::pi * d * d * d) *
         scaling_function(x);
}

double smallx_rate(const ParticleModel& particle, double temperature, double d) {
  const double w = constants::k_B * temperature / constants::hbar;
  const double c2 = constants::c * constants::c;
  return particle.effective_area * d * d * std::pow(w, 5) /
         (3.0 * constants::pi * constants::pi * c2 * c2);
}

template <class RateFn>
double time_with_front_segment(const BeamGeometry& geometry, RateFn rate_for) {
  double rate = rate_for(geometry.slit_separation);
  if (geometry.coherence_slit_distance) {
    const double ratio = front_ratio(geometry);
    rate += ratio == 1.0 ? rate : ratio * rate_for(geometry.slit_separation * ratio);
  }
  return 1.0 / rate;
}

void check_closed_inputs(const ParticleModel& particle, double temperature) {
  if (!(temperature > 0.0)) throw std::domain_error("decoherence time: temperature must be > 0");
  if (!(particle.effective_area > 0.0)) {
    throw std::invalid_argument("decoherence time: effective_area must be > 0");
  }
}

}  // namespace

double decoherence_time_closed(const BeamGeometry& geometry, const ParticleModel& particle,
                               double temperature) {
  geometry.validate();
  check_closed_inputs(particle, temperature);
  return time_with_front_segment(
      geometry, [&](double d) { return closed_rate(particle, temperature, d); });
}

double decoherence_time_smallx(const BeamGeometry& geometry, const ParticleModel& particle,
                               double temperature) {
  geometry.validate();
  check_closed_inputs(particle, temperature);
  return time_with_front_segment(
      geometry, [&](double d) { return smallx_rate(particle, temperature, d); });
}

// --- Inversions ---------------------------------------------------------------

double invert_for_temperature(const BeamGeometry& geometry, const EmissionModel& model,
                              double target_tau, bool with_cooling, const QuadratureSpec& spec) {
  if (!(target_tau > 0.0)) throw std::invalid_argument("invert_for_temperature: target_tau must be > 0");
  const BeamGeometry g = geometry.with_time_of_flight(target_tau);
  g.validate();
  auto log_exponent = [&](double temperature) {
    const double e =
        visibility_exponent_thermal(g, model.with_initial_temperature(temperature), with_cooling, spec);
    return std::log(std::max(e, 1e-300));
  };
  constexpr double t_min = 1.0;
  constexpr double t_max = 1e6;
  const numerics::RootBracket bracket =
      numerics::expand_bracket(log_exponent, {100.0, 3000.0}, t_min, t_max, 3.0);
  auto in_log = [&](double y) { return log_exponent(std::exp(y)); };
  const double y = numerics::find_root(in_log, {std::log(bracket.lo), std::log(bracket.hi)}, 1e-9);
  return std::exp(y);
}

DecoherenceTimeResult invert_for_time(const BeamGeometry& geometry, const EmissionModel& model,
                                      bool with_cooling, double max_tau, const QuadratureSpec& spec) {
  geometry.validate();
  const double temperature = model.particle().initial_temperature;
  double guess = decoherence_time_quadrature(geometry, model, temperature, spec);
  if (!std::isfinite(guess)) return {std::numeric_limits<double>::infinity(), false};
  guess = std::min(guess, max_tau);
  auto log_exponent = [&](double tau) {
    const double e = visibility_exponent_thermal(geometry.with_time_of_flight(tau), model,
                                                 with_cooling, spec);
    return std::log(std::max(e, 1e-300));
  };
  if (log_exponent(max_tau) < 0.0) return {std::numeric_limits<double>::infinity(), false};
  const numerics::RootBracket bracket =
      numerics::expand_bracket(log_exponent, {guess / 2.0, std::min(guess * 2.0, max_tau)},
                               guess * 1e-9, max_tau, 4.0);
  auto in_log = [&](double y) { return log_exponent(std::exp(y)); };
  const double y = numerics::find_root(in_log, {std::log(bracket.lo), std::log(bracket.hi)}, 1e-9);
  return {std::exp(y), true};
}

// --- Kernel -------------------------------------------------------------------

DecoherenceKernel::DecoherenceKernel(MomentumGrid grid, std::vector<double> damping)
    : grid_(grid), damping_(std::move(damping)) {
  if (!(grid_.spacing > 0.0) || grid_.half_count < 1) {
    throw std::invalid_argument("kernel: momentum grid needs spacing > 0 and half_count >= 1");
  }
  if (damping_.size() != grid_.half_count + 1) {
    throw std::invalid_argument("kernel: damping must cover q = 0 .. q_max");
  }
  if (damping_.front() != 1.0) throw std::invalid_argument("kernel: damping(0) must be 1");
  for (double v : damping_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("kernel: damping must lie in [0, 1]");
  }
  identity_ = std::all_of(damping_.begin(), damping_.end(), [](double v) { return v == 1.0; });

  const std::size_t n = grid_.size();
  const std::size_t m = grid_.half_count;
  ds_ = 2.0 * constants::pi * constants::hbar / (static_cast<double>(n) * grid_.spacing);
  std::vector<double> cos_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    cos_table[i] = std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  s_.resize(n);
  h_.resize(n);
  const double norm = grid_.spacing / (2.0 * constants::pi * constants::hbar);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const long j = static_cast<long>(jj) - static_cast<long>(m);
    s_[jj] = static_cast<double>(j) * ds_;
    const std::size_t aj = static_cast<std::size_t>(std::labs(j));
    double sum = damping_[0];
    for (std::size_t k = 1; k <= m; ++k) sum += 2.0 * damping_[k] * cos_table[(k * aj) % n];
    h_[jj] = norm * sum;
  }
}

DecoherenceKernel DecoherenceKernel::identity(MomentumGrid grid) {
  return DecoherenceKernel(grid, std::vector<double>(grid.half_count + 1, 1.0));
}

double DecoherenceKernel::damping_at(double q) const {
  const double x = std::abs(q) / grid_.spacing;
  const double m = static_cast<double>(grid_.half_count);
  if (x > m * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "kernel momentum grid ends at " << grid_.max() << " but q = " << std::abs(q)
       << " was requested; extend the q grid";
    throw std::out_of_range(os.str());
  }
  const std::size_t i = std::min(static_cast<std::size_t>(x), grid_.half_count - 1);
  const double s = std::min(x - static_cast<double>(i), 1.0);
  return damping_[i] + s * (damping_[i + 1] - damping_[i]);
}

double DecoherenceKernel::band_limited_damping(double q) const {
  if (identity_) return 1.0;
  if (std::abs(q) > grid_.max() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "kernel momentum grid ends at " << grid_.max() << " but q = " << std::abs(q)
       << " was requested; extend the q grid";
    throw std::out_of_range(os.str());
  }
  const std::size_t m = grid_.half_count;
  double sum = h_[m];
  for (std::size_t j = 1; j <= m; ++j) sum += 2.0 * h_[m + j] * std::cos(q * s_[m + j] / constants::hbar);
  return sum * ds_;
}

double DecoherenceKernel::area() const {
  double a = 0.0;
  for (double v : h_) a += v;
  return a * ds_;
}

double DecoherenceKernel::second_moment() const {
  double m2 = 0.0;
  for (std::size_t i = 0; i < h_.size(); ++i) m2 += h_[i] * s_[i] * s_[i];
  return m2 * ds_;
}

DecoherenceKernel build_kernel(const BeamGeometry& geometry, const EmissionModel& model,
                               bool with_cooling, const MomentumGrid& q_grid,
                               const QuadratureSpec& spec) {
  geometry.validate();
  if (!(q_grid.spacing > 0.0) || q_grid.half_count < 1) {
    throw std::invalid_argument("build_kernel: q grid must be uniform with spacing > 0");
  }
  if (!model.emits()) return DecoherenceKernel::identity(q_grid);
  const CoolingTrajectory trajectory = trajectory_for(geometry, model, with_cooling, spec);
  const double sep_per_q = geometry.flight_distance / geometry.longitudinal_momentum();
  std::vector<double> damping(q_grid.half_count + 1, 1.0);
  for (std::size_t k = 1; k <= q_grid.half_count; ++k) {
    const double q = static_cast<double>(k) * q_grid.spacing;
    damping[k] = std::exp(
        -thermal_exponent_for_separation(geometry, model, trajectory, q * sep_per_q, spec));
    if (std::abs(damping[k] - damping[k - 1]) > 0.2) {
      std::ostringstream os;
      os << "q grid too coarse: damping changes from " << damping[k - 1] << " to " << damping[k]
         << " between q = " << (k - 1) * q_grid.spacing << " and " << q
         << "; reduce the spacing below " << q_grid.spacing / 4.0;
      throw KernelResolutionError(os.str());
    }
  }
  return DecoherenceKernel(q_grid, std::move(damping));
}

}  // namespace thermodeco

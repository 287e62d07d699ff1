#include "thermodeco/emission.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thermodeco {

namespace {

// ln(1e18): depth of the exponential factor at which spectral integrals stop.
const double kTruncationDepth = std::log(1e18);

constexpr double kMinHeatCapacityInkB = 20.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ParticleModel::validate() const {
  if (!(effective_area > 0.0) || !std::isfinite(effective_area)) {
    throw std::invalid_argument("particle: effective_area must be positive and finite");
  }
  if (!(heat_capacity > 0.0)) {
    throw std::invalid_argument("particle: heat_capacity must be positive (or infinite)");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("particle: mass must be positive and finite");
  }
  if (!(initial_temperature > 0.0) || !std::isfinite(initial_temperature)) {
    throw std::invalid_argument("particle: initial_temperature must be positive and finite");
  }
}

std::vector<std::string> ParticleModel::warnings() const {
  std::vector<std::string> out;
  if (finite_heat_capacity() && heat_capacity_in_kB() <= kMinHeatCapacityInkB) {
    std::ostringstream os;
    os << "heat capacity of " << heat_capacity_in_kB()
       << " k_B is too small for the cooling-law expansion F(x) to be meaningful";
    out.push_back(os.str());
  }
  return out;
}

// --- SpectrumTable ----------------------------------------------------------

SpectrumTable::SpectrumTable(std::vector<SpectrumPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("spectrum table needs at least two points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.omega) || p.omega < 0.0) {
      throw std::invalid_argument("spectrum table: frequencies must be finite and >= 0");
    }
    if (!std::isfinite(p.sigma_abs) || p.sigma_abs < 0.0) {
      throw std::invalid_argument("spectrum table: sigma_abs must be finite and >= 0");
    }
    if (i > 0 && !(p.omega > points_[i - 1].omega)) {
      throw std::invalid_argument("spectrum table: frequencies must be strictly increasing");
    }
    max_sigma_ = std::max(max_sigma_, p.sigma_abs);
  }
}

SpectrumTable SpectrumTable::parse(std::istream& in, const std::string& source_name) {
  std::vector<SpectrumPoint> points;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t != "omega_rad_per_s,sigma_abs_m2") {
        throw std::invalid_argument(source_name + ":" + std::to_string(line_no) +
                                    ": expected header 'omega_rad_per_s,sigma_abs_m2'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) +
                                  ": expected two comma-separated columns");
    }
    try {
      std::size_t used = 0;
      const std::string a = trim(t.substr(0, comma));
      const std::string b = trim(t.substr(comma + 1));
      const double omega = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument("trailing characters");
      const double sigma = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument("trailing characters");
      if (!points.empty() && !(omega > points.back().omega)) {
        throw std::invalid_argument("frequencies must be strictly increasing");
      }
      points.push_back({omega, sigma});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) +
                                  ": number out of range");
    }
  }
  if (!header_seen) throw std::invalid_argument(source_name + ": missing header line");
  return SpectrumTable(std::move(points));
}

SpectrumTable SpectrumTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spectrum file " + path.string());
  return parse(in, path.string());
}

double SpectrumTable::sigma_abs(double omega) const {
  if (omega < points_.front().omega || omega > points_.back().omega) return 0.0;
  const auto it = std::upper_bound(points_.begin(), points_.end(), omega,
                                   [](double w, const SpectrumPoint& p) { return w < p.omega; });
  if (it == points_.end()) return points_.back().sigma_abs;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double s = (omega - lo.omega) / (hi.omega - lo.omega);
  return lo.sigma_abs + s * (hi.sigma_abs - lo.sigma_abs);
}

// --- EmissionModel ----------------------------------------------------------

EmissionModel::EmissionModel(EmissionKind kind, ParticleModel particle,
                             std::shared_ptr<const SpectrumTable> table)
    : kind_(kind), particle_(particle), table_(std::move(table)) {}

EmissionModel EmissionModel::greybody(const ParticleModel& particle) {
  particle.validate();
  return EmissionModel(EmissionKind::greybody, particle, nullptr);
}

EmissionModel EmissionModel::tabulated(const ParticleModel& particle, SpectrumTable table) {
  // The area of a tabulated model comes from the table; the particle's
  // effective_area is kept only for reference.
  ParticleModel p = particle;
  if (!(p.effective_area > 0.0)) p.effective_area = 4.0 * std::max(table.max_sigma(), 1e-300);
  p.validate();
  return EmissionModel(EmissionKind::tabulated, p,
                       std::make_shared<const SpectrumTable>(std::move(table)));
}

EmissionModel EmissionModel::with_heat_capacity_term(bool enabled) const {
  EmissionModel m = *this;
  m.heat_capacity_term_ = enabled;
  return m;
}

EmissionModel EmissionModel::with_initial_temperature(double t0) const {
  EmissionModel m = *this;
  m.particle_.initial_temperature = t0;
  m.particle_.validate();
  return m;
}

EmissionModel EmissionModel::with_particle(const ParticleModel& particle) const {
  particle.validate();
  EmissionModel m = *this;
  m.particle_ = particle;
  return m;
}

bool EmissionModel::emits() const {
  return kind_ == EmissionKind::greybody || table_->max_sigma() > 0.0;
}

void EmissionModel::check_temperature(double temperature) const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::domain_error("emission: temperature must be positive and finite");
  }
}

double EmissionModel::statistical_exponent(double u) const {
  double e = u;
  if (heat_capacity_term()) {
    e += 0.5 * u * u / particle_.heat_capacity_in_kB();
  }
  return e;
}

double EmissionModel::effective_area(double omega) const {
  if (kind_ == EmissionKind::greybody) return particle_.effective_area;
  return 4.0 * table_->sigma_abs(omega);
}

double EmissionModel::spectral_rate(double omega, double temperature) const {
  if (!(omega >= 0.0)) throw std::domain_error("emission: frequency must be >= 0");
  check_temperature(temperature);
  const double u = constants::hbar * omega / (constants::k_B * temperature);
  const double two_pi_c = 2.0 * constants::pi * constants::c;
  return effective_area(omega) * omega * omega / (two_pi_c * two_pi_c) *
         std::exp(-statistical_exponent(u));
}

double EmissionModel::log_spectral_rate(double omega, double temperature) const {
  if (!(omega >= 0.0)) throw std::domain_error("emission: frequency must be >= 0");
  check_temperature(temperature);
  const double u = constants::hbar * omega / (constants::k_B * temperature);
  return std::log(effective_area(omega)) + 2.0 * std::log(omega) -
         2.0 * std::log(2.0 * constants::pi * constants::c) - statistical_exponent(u);
}

double EmissionModel::rate_prefactor(double temperature) const {
  const double area = kind_ == EmissionKind::greybody ? particle_.effective_area
                                                      : 4.0 * table_->max_sigma();
  const double two_pi_c = 2.0 * constants::pi * constants::c;
  const double omega_per_u = constants::k_B * temperature / constants::hbar;
  return area / (two_pi_c * two_pi_c) * omega_per_u * omega_per_u * omega_per_u;
}

double EmissionModel::reduced_density(double u, double temperature) const {
  double area_ratio = 1.0;
  if (kind_ == EmissionKind::tabulated) {
    const double omega = u * constants::k_B * temperature / constants::hbar;
    area_ratio = table_->sigma_abs(omega) / table_->max_sigma();
    if (area_ratio == 0.0) return 0.0;
  }
  return area_ratio * u * u * std::exp(-statistical_exponent(u));
}

std::vector<double> EmissionModel::reduced_breakpoints(double temperature) const {
  check_temperature(temperature);
  const double u_per_omega = constants::hbar / (constants::k_B * temperature);
  double u_lo = 0.0;
  double u_table_hi = std::numeric_limits<double>::infinity();
  std::vector<double> interior;
  if (kind_ == EmissionKind::tabulated) {
    const auto& pts = table_->points();
    std::size_t first = 0;
    while (first < pts.size() && pts[first].sigma_abs == 0.0) ++first;
    if (first == pts.size()) return {};
    if (first > 0) --first;
    u_lo = pts[first].omega * u_per_omega;
    u_table_hi = pts.back().omega * u_per_omega;
    for (std::size_t i = first + 1; i + 1 < pts.size(); ++i) {
      interior.push_back(pts[i].omega * u_per_omega);
    }
  } else {
    interior = {2.0, 8.0};
  }
  // Upper cut: exponent(u) - exponent(u_lo) = ln(1e18).
  const double target = statistical_exponent(u_lo) + kTruncationDepth;
  double u_cut = target;
  if (heat_capacity_term()) {
    const double x = particle_.heat_capacity_in_kB();
    u_cut = x * (std::sqrt(1.0 + 2.0 * target / x) - 1.0);
  }
  const double u_hi = std::min(u_cut, u_table_hi);
  std::vector<double> out{u_lo};
  for (double b : interior) {
    if (b > u_lo && b < u_hi) out.push_back(b);
  }
  if (u_hi > u_lo) out.push_back(u_hi);
  return out;
}

double EmissionModel::total_rate(double temperature, const numerics::QuadratureSpec& spec) const {
  return spectral_integral(temperature, [](double) { return 1.0; }, spec);
}

double EmissionModel::energy_loss_rate(double temperature,
                                       const numerics::QuadratureSpec& spec) const {
  return spectral_integral(temperature, [](double omega) { return constants::hbar * omega; },
                           spec);
}

// --- Cooling ----------------------------------------------------------------

CoolingTrajectory::CoolingTrajectory(double t0_temperature, double duration)
    : t0_(t0_temperature), duration_(duration) {}

CoolingTrajectory::CoolingTrajectory(double t0_temperature, double duration,
                                     numerics::OdeSolution solution)
    : t0_(t0_temperature), duration_(duration), solution_(std::move(solution)) {}

double CoolingTrajectory::temperature(double t) const {
  if (!solution_) return t0_;
  return (*solution_)(t);
}

std::vector<double> CoolingTrajectory::sample_times() const {
  if (!solution_) {
    if (duration_ == 0.0) return {0.0};
    return {0.0, duration_};
  }
  const auto t = solution_->times();
  return {t.begin(), t.end()};
}

std::vector<double> CoolingTrajectory::sample_temperatures() const {
  if (!solution_) return std::vector<double>(sample_times().size(), t0_);
  const auto y = solution_->values();
  return {y.begin(), y.end()};
}

CoolingTrajectory cool(const EmissionModel& model, double duration,
                       const numerics::QuadratureSpec& spec) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("cool: duration must be finite and >= 0");
  }
  const ParticleModel& p = model.particle();
  if (!p.finite_heat_capacity() || duration == 0.0 || !model.emits()) {
    return CoolingTrajectory(p.initial_temperature, duration);
  }
  const numerics::QuadratureSpec inner = spec.tightened(10.0);
  const double heat_capacity = p.heat_capacity;
  auto rhs = [&](double, double temperature) {
    // Floor keeps trial stages of a large step inside the model's domain.
    const double T = std::max(temperature, 1e-3);
    return -model.energy_loss_rate(T, inner) / heat_capacity;
  };
  numerics::OdeSolution sol = numerics::integrate_ode(rhs, p.initial_temperature, 0.0, duration, spec);
  return CoolingTrajectory(p.initial_temperature, duration, std::move(sol));
}

double cooling_correction(double x) { return 1.0 - 10.0 / x + 105.0 / (x * x); }

double analytic_cooling(const ParticleModel& particle, double t) {
  if (!particle.finite_heat_capacity()) {
    throw std::invalid_argument(
        "analytic_cooling requires a finite heat capacity; use cool() for the constant case");
  }
  if (!(t >= 0.0)) throw std::domain_error("analytic_cooling: t must be >= 0");
  using namespace constants;
  const double kB2 = k_B * k_B;
  const double inv_t_inf_cubed = 9.0 * kB2 * kB2 * particle.effective_area * t *
                                 cooling_correction(particle.heat_capacity_in_kB()) /
                                 (2.0 * pi * pi * c * c * hbar * hbar * hbar * particle.heat_capacity);
  const double t0 = particle.initial_temperature;
  return t0 * std::cbrt(1.0 / (1.0 + t0 * t0 * t0 * inv_t_inf_cubed));
}

}  // namespace thermodeco

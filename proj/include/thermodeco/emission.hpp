#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thermodeco/constants.hpp"
#include "thermodeco/numerics/ode.hpp"
#include "thermodeco/numerics/quadrature.hpp"

namespace thermodeco {

inline constexpr double kInfiniteHeatCapacity = std::numeric_limits<double>::infinity();

/// A radiating particle. All quantities SI; heat_capacity may be
/// kInfiniteHeatCapacity, which switches off cooling and the C_V term of the
/// emission statistics.
struct ParticleModel {
  double effective_area = 0.0;       // A_eps = emissivity * area [m^2]
  double heat_capacity = kInfiniteHeatCapacity;  // [J/K]
  double mass = 0.0;                 // [kg]
  double initial_temperature = 0.0;  // [K]

  static constexpr double heat_capacity_from_kB(double multiples) {
    return multiples * constants::k_B;
  }

  bool finite_heat_capacity() const { return std::isfinite(heat_capacity); }
  double heat_capacity_in_kB() const { return heat_capacity / constants::k_B; }

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  /// Non-fatal diagnostics, e.g. a heat capacity too small for the cooling expansion.
  std::vector<std::string> warnings() const;

  ParticleModel with_initial_temperature(double t0) const {
    ParticleModel p = *this;
    p.initial_temperature = t0;
    return p;
  }
};

struct SpectrumPoint {
  double omega;      // [rad/s]
  double sigma_abs;  // [m^2]
};

/// Absorption cross section sampled on strictly increasing frequencies.
/// Linear interpolation inside the table, zero outside it.
class SpectrumTable {
 public:
  explicit SpectrumTable(std::vector<SpectrumPoint> points);

  /// Reads the `omega_rad_per_s,sigma_abs_m2` text format; `#` lines are comments.
  static SpectrumTable parse(std::istream& in, const std::string& source_name = "<stream>");
  static SpectrumTable load(const std::filesystem::path& path);

  double sigma_abs(double omega) const;
  const std::vector<SpectrumPoint>& points() const { return points_; }
  double omega_min() const { return points_.front().omega; }
  double omega_max() const { return points_.back().omega; }
  double max_sigma() const { return max_sigma_; }

 private:
  std::vector<SpectrumPoint> points_;
  double max_sigma_ = 0.0;
};

enum class EmissionKind { greybody, tabulated };

/// Spectral photon emission rate
///   R(w; T) = A(w) w^2 / (2 pi c)^2 * exp(-u - (k_B / 2 C_V) u^2),  u = hbar w / k_B T,
/// with A(w) = A_eps (greybody) or 4 sigma_abs(w) (tabulated). The tabulated
/// kind reuses the greybody statistical factor unchanged; only the area
/// prefactor becomes frequency dependent. That is an approximation for
/// molecules with structured spectra.
///
/// Spectral integrals are done in u and truncated where the exponential
/// factor has dropped by 1e-18 from its value at the lower edge of the
/// emitting band.
class EmissionModel {
 public:
  static EmissionModel greybody(const ParticleModel& particle);
  static EmissionModel tabulated(const ParticleModel& particle, SpectrumTable table);

  EmissionKind kind() const { return kind_; }
  const ParticleModel& particle() const { return particle_; }
  const SpectrumTable* table() const { return table_.get(); }

  /// Whether the -(k_B/2C_V) u^2 term enters the statistics (only matters for finite C_V).
  bool heat_capacity_term() const { return heat_capacity_term_ && particle_.finite_heat_capacity(); }
  /// Copy with the C_V term of the statistics switched on or off. Cooling is unaffected.
  EmissionModel with_heat_capacity_term(bool enabled) const;
  EmissionModel with_initial_temperature(double t0) const;
  EmissionModel with_particle(const ParticleModel& particle) const;

  double effective_area(double omega) const;
  double spectral_rate(double omega, double temperature) const;
  /// ln R(w; T), evaluated term by term.
  double log_spectral_rate(double omega, double temperature) const;

  /// Integral over w in [0, inf) of R(w; T) * weight(w).
  template <class Weight>
  double spectral_integral(double temperature, Weight&& weight,
                           const numerics::QuadratureSpec& spec = {}) const;

  /// Same integral as a function of the reduced frequency u = hbar w / k_B T:
  /// returns prefactor * integral of density(u) * weight(u) du; see reduced_density.
  double rate_prefactor(double temperature) const;
  double reduced_density(double u, double temperature) const;
  /// Integration limits and interior breakpoints in u at this temperature.
  std::vector<double> reduced_breakpoints(double temperature) const;

  double total_rate(double temperature, const numerics::QuadratureSpec& spec = {}) const;
  /// Emitted power: integral of hbar w R(w; T) dw [W].
  double energy_loss_rate(double temperature, const numerics::QuadratureSpec& spec = {}) const;

  bool emits() const;

 private:
  EmissionModel(EmissionKind kind, ParticleModel particle, std::shared_ptr<const SpectrumTable> table);
  void check_temperature(double temperature) const;
  double statistical_exponent(double u) const;

  EmissionKind kind_;
  ParticleModel particle_;
  std::shared_ptr<const SpectrumTable> table_;
  bool heat_capacity_term_ = true;
};

/// Temperature history of a cooling particle.
class CoolingTrajectory {
 public:
  /// Constant temperature (infinite heat capacity or zero span).
  CoolingTrajectory(double t0_temperature, double duration);
  CoolingTrajectory(double t0_temperature, double duration, numerics::OdeSolution solution);

  double temperature(double t) const;
  double initial_temperature() const { return t0_; }
  double duration() const { return duration_; }
  bool constant() const { return !solution_.has_value(); }
  std::vector<double> sample_times() const;
  std::vector<double> sample_temperatures() const;

 private:
  double t0_;
  double duration_;
  std::optional<numerics::OdeSolution> solution_;
};

/// Integrates dT/dt = -energy_loss_rate(T) / C_V from the particle's initial temperature.
CoolingTrajectory cool(const EmissionModel& model, double duration,
                       const numerics::QuadratureSpec& spec = {});

/// F(x) = 1 - 10/x + 105/x^2, the heat-capacity correction of the cooling law.
double cooling_correction(double heat_capacity_in_kB);

/// Closed-form greybody cooling law T(t) = T0 [1 + T0^3 / T_inf^3(t)]^(-1/3).
double analytic_cooling(const ParticleModel& particle, double t);

// ---------------------------------------------------------------------------

template <class Weight>
double EmissionModel::spectral_integral(double temperature, Weight&& weight,
                                        const numerics::QuadratureSpec& spec) const {
  check_temperature(temperature);
  if (!emits()) return 0.0;
  const double omega_per_u = constants::k_B * temperature / constants::hbar;
  auto integrand = [&](double u) {
    const double d = reduced_density(u, temperature);
    return d == 0.0 ? 0.0 : d * weight(u * omega_per_u);
  };
  return rate_prefactor(temperature) *
         numerics::integrate_piecewise(integrand, reduced_breakpoints(temperature), spec);
}

}  // namespace thermodeco

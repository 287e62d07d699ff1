#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "thermodeco/emission.hpp"
#include "thermodeco/numerics/quadrature.hpp"

namespace thermodeco {

/// Interferometer layout along the beam.
struct BeamGeometry {
  double slit_separation = 0.0;        // d [m]
  double flight_distance = 0.0;        // L, double slit to screen [m]
  double longitudinal_velocity = 0.0;  // v_z [m/s]
  double mass = 0.0;                   // [kg]
  std::optional<double> coherence_slit_distance;  // coherence slit to double slit [m]

  void validate() const;

  double time_of_flight() const { return flight_distance / longitudinal_velocity; }
  double longitudinal_momentum() const { return mass * longitudinal_velocity; }
  double de_broglie_wavelength() const;
  /// lambda_dB L / d.
  double fringe_period() const;

  /// Same L and d, with v_z chosen so that L / v_z = tau.
  BeamGeometry with_time_of_flight(double tau) const;
  BeamGeometry with_slit_separation(double d) const;
};

/// Isotropic decoherence function eta(|R|) with eta(0) = 1.
class DecoherenceFunction {
 public:
  enum class Kind { radiative, isotropic_numeric, custom };

  /// Rate-weighted average of sinc(w R / c) at temperature T, tabulated on a
  /// log-spaced grid of R and interpolated by a cubic spline in ln R.
  static DecoherenceFunction radiative(const EmissionModel& model, double temperature,
                                       const numerics::QuadratureSpec& spec = {});
  /// Samples (R_i, eta_i) with R_0 = 0 and eta_0 = 1; linear interpolation,
  /// constant beyond the last sample.
  static DecoherenceFunction isotropic_numeric(std::vector<double> separations,
                                               std::vector<double> values);
  static DecoherenceFunction custom(std::function<double(double)> eta);

  double operator()(double separation) const;
  Kind kind() const { return kind_; }

 private:
  DecoherenceFunction(Kind kind, std::function<double(double)> eval);
  Kind kind_;
  std::function<double(double)> eval_;
};

/// eta for heat radiation by direct quadrature (no tabulation).
double eta_radiative(const EmissionModel& model, double temperature, double separation,
                     const numerics::QuadratureSpec& spec = {});

/// Radiative eta at a varying temperature: the tabulated function is rebuilt
/// only when T moves by more than 0.1% from the cached one. Thread safe.
class RadiativeEtaCache {
 public:
  explicit RadiativeEtaCache(EmissionModel model, numerics::QuadratureSpec spec = {});

  double operator()(double temperature, double separation) const;
  std::size_t rebuild_count() const;

 private:
  std::shared_ptr<const DecoherenceFunction> table_for(double temperature) const;

  EmissionModel model_;
  numerics::QuadratureSpec spec_;
  mutable std::mutex mutex_;
  mutable double cached_temperature_ = 0.0;
  mutable std::shared_ptr<const DecoherenceFunction> cached_;
  mutable std::size_t rebuilds_ = 0;
};

/// V = exp[-int_0^tau dt gamma(t) (1 - eta(d (1 - t/tau)))] for a temporal
/// event rate gamma. A coherence slit adds the same structure over its own
/// flight segment with separation d L'/L.
double visibility_general(const BeamGeometry& geometry, const std::function<double(double)>& rate,
                          const DecoherenceFunction& eta, const numerics::QuadratureSpec& spec = {});

/// -ln V for heat radiation, with the particle's initial temperature as T0.
/// The spectral integral is nested inside the time integral, 10x tighter.
double visibility_exponent_thermal(const BeamGeometry& geometry, const EmissionModel& model,
                                   bool with_cooling, const numerics::QuadratureSpec& spec = {});

double visibility_thermal(const BeamGeometry& geometry, const EmissionModel& model,
                          bool with_cooling, const numerics::QuadratureSpec& spec = {});

/// Exponent of the thermal visibility for a given temperature history and an
/// arbitrary path separation at the double slit (d -> |q| L / p_z for kernels).
double thermal_exponent_for_separation(const BeamGeometry& geometry, const EmissionModel& model,
                                       const CoolingTrajectory& trajectory, double separation,
                                       const numerics::QuadratureSpec& spec = {});

/// 1/tau_th = int dw R(w; T) [1 - Si(w d / c) c / (w d)] in the C_V -> infinity
/// statistics. Returns +infinity when nothing is emitted.
double decoherence_time_quadrature(const BeamGeometry& geometry, const EmissionModel& model,
                                   double temperature, const numerics::QuadratureSpec& spec = {});

/// f(x) = 2x^3 - x^3/(1+x^2) - x^2 arctan(x); series below x = 0.1.
double scaling_function(double x);

/// Greybody closed form 1/tau_th = A_eps c / ((2 pi)^2 d^3) f(k_B T d / hbar c).
double decoherence_time_closed(const BeamGeometry& geometry, const ParticleModel& particle,
                               double temperature);

/// Leading small-x behaviour 1/tau_th = A_eps d^2 (k_B T / hbar)^5 / (3 pi^2 c^4).
double decoherence_time_smallx(const BeamGeometry& geometry, const ParticleModel& particle,
                               double temperature);

/// k_B T d / (hbar c).
double thermal_separation_ratio(double temperature, double separation);

/// T0 at which the visibility after a flight of target_tau equals 1/e.
/// Searches [1 K, 1e6 K]; throws numerics::RootError when no such T0 exists.
double invert_for_temperature(const BeamGeometry& geometry, const EmissionModel& model,
                              double target_tau, bool with_cooling,
                              const numerics::QuadratureSpec& spec = {});

struct DecoherenceTimeResult {
  double tau = 0.0;       // time of flight at which V = 1/e; +inf when never reached
  bool reached = false;
};

/// Time of flight at which the visibility at fixed T0 reaches 1/e. With
/// cooling the exponent saturates, so the search stops at max_tau.
DecoherenceTimeResult invert_for_time(const BeamGeometry& geometry, const EmissionModel& model,
                                      bool with_cooling, double max_tau,
                                      const numerics::QuadratureSpec& spec = {});

/// Symmetric uniform grid q_k = k * spacing, k = -half_count .. half_count.
struct MomentumGrid {
  double spacing = 0.0;
  std::size_t half_count = 0;

  std::size_t size() const { return 2 * half_count + 1; }
  double value(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half_count)) * spacing;
  }
  double max() const { return static_cast<double>(half_count) * spacing; }
};

/// Convolution kernel of the decohered pattern. fourier_damping holds the
/// damping factor on the non-negative half of the momentum grid (it is even
/// in q); real_kernel holds h(s) on the conjugate grid s_j = j * 2 pi hbar / (N dq).
class DecoherenceKernel {
 public:
  DecoherenceKernel(MomentumGrid grid, std::vector<double> damping_nonnegative);
  static DecoherenceKernel identity(MomentumGrid grid);

  const MomentumGrid& grid() const { return grid_; }
  std::span<const double> fourier_damping() const { return damping_; }
  std::span<const double> positions() const { return s_; }
  std::span<const double> real_kernel() const { return h_; }
  double position_spacing() const { return ds_; }

  /// Linear interpolation in |q|; throws std::out_of_range beyond the grid.
  double damping_at(double q) const;
  /// Band-limited interpolant sum_j h(s_j) cos(q s_j / hbar) ds; exact on grid nodes.
  double band_limited_damping(double q) const;
  bool is_identity() const { return identity_; }
  double area() const;
  double second_moment() const;

 private:
  MomentumGrid grid_;
  std::vector<double> damping_;
  std::vector<double> s_;
  std::vector<double> h_;
  double ds_ = 0.0;
  bool identity_ = false;
};

class KernelResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damping exp[-E(q)] with E the thermal visibility exponent for d -> |q| L / p_z,
/// followed by the discrete inverse Fourier transform. Throws
/// KernelResolutionError when adjacent damping samples differ by more than 0.2.
DecoherenceKernel build_kernel(const BeamGeometry& geometry, const EmissionModel& model,
                               bool with_cooling, const MomentumGrid& q_grid,
                               const numerics::QuadratureSpec& spec = {});

}  // namespace thermodeco

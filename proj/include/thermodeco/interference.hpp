#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermodeco/decoherence.hpp"

namespace thermodeco {

/// Aperture of a slit grating. The single-slit momentum density defaults to
/// the Fraunhofer profile of a uniform slit of width a,
///   w_s(p) = a / (2 pi hbar) * sinc^2(p a / 2 hbar),
/// and does not depend on p_z.
struct ApertureModel {
  enum class Kind { double_slit, multi_slit };

  Kind kind = Kind::double_slit;
  std::size_t slit_count = 2;
  double slit_separation = 0.0;  // d [m]
  double slit_width = 0.0;       // a [m]
  std::function<double(double)> single_slit_density;  // optional override, unit-normalized

  static ApertureModel double_slit(double d, double a);
  static ApertureModel multi_slit(std::size_t n, double d, double a);

  void validate() const;
  double single_slit(double p) const;
};

/// Transverse momentum density after the grating: the N-slit grating factor
/// |sum_k exp(i k p d / hbar)|^2 / N times the single-slit density.
double momentum_distribution_after_slits(const ApertureModel& aperture, double p);

/// Uniform screen coordinates r_i = (i - half_count) * spacing.
struct ScreenGrid {
  double spacing = 0.0;
  std::size_t half_count = 0;

  std::size_t size() const { return 2 * half_count + 1; }
  double value(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half_count)) * spacing;
  }
  double max() const { return static_cast<double>(half_count) * spacing; }
};

struct PatternMetadata {
  double fringe_period = 0.0;           // [m]
  double longitudinal_momentum = 0.0;   // reference p_z [kg m/s]
  double slit_separation = 0.0;
  double flight_distance = 0.0;
  std::string description;
};

struct IntensityPattern {
  ScreenGrid grid;
  std::vector<double> values;
  PatternMetadata metadata;

  double integral() const;
};

/// Discrete longitudinal momentum distribution: weights sum to 1 and all
/// momenta are positive.
class VelocityDistribution {
 public:
  VelocityDistribution(std::vector<double> momenta, std::vector<double> weights);

  static VelocityDistribution point_mass(double p_z);
  /// Gaussian in p_z of relative width rel_width, sampled on `points` nodes over +-4 sigma.
  static VelocityDistribution gaussian(double mean_p_z, double rel_width, std::size_t points);

  const std::vector<double>& momenta() const { return momenta_; }
  const std::vector<double>& weights() const { return weights_; }
  double mean() const;

 private:
  std::vector<double> momenta_;
  std::vector<double> weights_;
};

class GridResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Far-field pattern w_r(r) = (p_z / L) w_p(p_z r / L) for fixed p_z
/// (one transverse dimension). Needs >= 8 samples per fringe period.
IntensityPattern far_field_pattern(const ApertureModel& aperture, const BeamGeometry& geometry,
                                   const ScreenGrid& grid);

/// Flux-weighted incoherent sum over p_z, normalised by the mean flux so
/// that a point mass reproduces far_field_pattern.
IntensityPattern intensity_with_velocity_spread(const ApertureModel& aperture,
                                                const BeamGeometry& geometry,
                                                const VelocityDistribution& distribution,
                                                const ScreenGrid& grid);

/// Convolution with the decoherence kernel, done as multiplication of the
/// zero-padded pattern spectrum by the kernel's band-limited damping factor.
IntensityPattern apply_decoherence(const IntensityPattern& pattern, const DecoherenceKernel& kernel);

enum class VisibilityMethod {
  local_fit,      // E(r) [1 + V cos(2 pi r / period + phi)], quadratic envelope
  fourier_ratio,  // 2 |I(k_fringe)| / I(0) over whole fringe periods
};

struct ScreenWindow {
  double lo;
  double hi;
};

/// Fringe visibility inside the window (>= 3 fringe periods); period taken from the metadata.
double extract_visibility(const IntensityPattern& pattern, ScreenWindow window,
                          VisibilityMethod method = VisibilityMethod::local_fit);

}  // namespace thermodeco

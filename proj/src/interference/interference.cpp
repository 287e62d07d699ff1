#include "thermodeco/interference.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "thermodeco/constants.hpp"
#include "thermodeco/numerics/special.hpp"

namespace thermodeco {

namespace {

constexpr double kMinSamplesPerFringe = 8.0;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void check_grid(const ScreenGrid& grid) {
  if (!(grid.spacing > 0.0) || grid.half_count < 1) {
    throw std::invalid_argument("screen grid needs spacing > 0 and half_count >= 1");
  }
}

void check_resolution(const ScreenGrid& grid, double period) {
  if (grid.spacing > period / kMinSamplesPerFringe) {
    std::ostringstream os;
    os << "screen grid under-resolves the fringes: spacing " << grid.spacing
       << " m exceeds period/8 = " << period / kMinSamplesPerFringe << " m";
    throw GridResolutionError(os.str());
  }
}

std::vector<double> fixed_momentum_values(const ApertureModel& aperture, double p_z, double length,
                                          const ScreenGrid& grid) {
  std::vector<double> values(grid.size());
  const double jacobian = p_z / length;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = jacobian * momentum_distribution_after_slits(aperture, jacobian * grid.value(i));
  }
  return values;
}

}  // namespace

// --- Aperture -----------------------------------------------------------------

ApertureModel ApertureModel::double_slit(double d, double a) {
  ApertureModel ap;
  ap.kind = Kind::double_slit;
  ap.slit_count = 2;
  ap.slit_separation = d;
  ap.slit_width = a;
  ap.validate();
  return ap;
}

ApertureModel ApertureModel::multi_slit(std::size_t n, double d, double a) {
  ApertureModel ap;
  ap.kind = Kind::multi_slit;
  ap.slit_count = n;
  ap.slit_separation = d;
  ap.slit_width = a;
  ap.validate();
  return ap;
}

void ApertureModel::validate() const {
  if (!(slit_width > 0.0) || !(slit_width < slit_separation)) {
    throw std::invalid_argument("aperture: requires 0 < slit_width < slit_separation");
  }
  if (kind == Kind::multi_slit && slit_count < 2) {
    throw std::invalid_argument("aperture: multi-slit needs at least 2 slits");
  }
}

double ApertureModel::single_slit(double p) const {
  if (single_slit_density) return single_slit_density(p);
  const double s = numerics::sinc(p * slit_width / (2.0 * constants::hbar));
  return slit_width / (2.0 * constants::pi * constants::hbar) * s * s;
}

double momentum_distribution_after_slits(const ApertureModel& aperture, double p) {
  const double phase = p * aperture.slit_separation / constants::hbar;
  double grating;
  if (aperture.kind == ApertureModel::Kind::double_slit) {
    grating = 1.0 + std::cos(phase);
  } else {
    // |sum_k e^{i k phase}|^2 / N = 1 + (2/N) sum_{j=1}^{N-1} (N - j) cos(j phase)
    const std::size_t n = aperture.slit_count;
    double sum = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      sum += static_cast<double>(n - j) * std::cos(static_cast<double>(j) * phase);
    }
    grating = 1.0 + 2.0 * sum / static_cast<double>(n);
  }
  return std::max(grating, 0.0) * aperture.single_slit(p);
}

// --- Patterns -----------------------------------------------------------------

double IntensityPattern::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.spacing;
}

VelocityDistribution::VelocityDistribution(std::vector<double> momenta, std::vector<double> weights)
    : momenta_(std::move(momenta)), weights_(std::move(weights)) {
  if (momenta_.empty() || momenta_.size() != weights_.size()) {
    throw std::invalid_argument("velocity distribution: need matching, non-empty samples");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < momenta_.size(); ++i) {
    if (!(momenta_[i] > 0.0)) throw std::invalid_argument("velocity distribution: p_z must be > 0");
    if (!(weights_[i] >= 0.0)) throw std::invalid_argument("velocity distribution: weights must be >= 0");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("velocity distribution: weights must sum to 1 within 1e-9");
  }
}

VelocityDistribution VelocityDistribution::point_mass(double p_z) { return {{p_z}, {1.0}}; }

VelocityDistribution VelocityDistribution::gaussian(double mean_p_z, double rel_width,
                                                    std::size_t points) {
  if (points < 2 || !(rel_width > 0.0) || !(mean_p_z > 0.0)) {
    throw std::invalid_argument("gaussian velocity distribution: need points >= 2, width > 0");
  }
  const double sigma = rel_width * mean_p_z;
  std::vector<double> p(points);
  std::vector<double> w(points);
  double total = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double z = -4.0 + 8.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    p[i] = mean_p_z + z * sigma;
    w[i] = p[i] > 0.0 ? std::exp(-0.5 * z * z) : 0.0;
    if (p[i] <= 0.0) p[i] = mean_p_z * 1e-12;
    total += w[i];
  }
  for (double& v : w) v /= total;
  return {std::move(p), std::move(w)};
}

double VelocityDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < momenta_.size(); ++i) m += momenta_[i] * weights_[i];
  return m;
}

IntensityPattern far_field_pattern(const ApertureModel& aperture, const BeamGeometry& geometry,
                                   const ScreenGrid& grid) {
  aperture.validate();
  geometry.validate();
  check_grid(grid);
  const double p_z = geometry.longitudinal_momentum();
  const double period =
      2.0 * constants::pi * constants::hbar * geometry.flight_distance / (p_z * aperture.slit_separation);
  check_resolution(grid, period);
  IntensityPattern out;
  out.grid = grid;
  out.values = fixed_momentum_values(aperture, p_z, geometry.flight_distance, grid);
  out.metadata = {period, p_z, aperture.slit_separation, geometry.flight_distance, "far-field"};
  return out;
}

IntensityPattern intensity_with_velocity_spread(const ApertureModel& aperture,
                                                const BeamGeometry& geometry,
                                                const VelocityDistribution& distribution,
                                                const ScreenGrid& grid) {
  aperture.validate();
  geometry.validate();
  check_grid(grid);
  const auto& momenta = distribution.momenta();
  const auto& weights = distribution.weights();
  const double p_max = *std::max_element(momenta.begin(), momenta.end());
  const double two_pi_hbar_l = 2.0 * constants::pi * constants::hbar * geometry.flight_distance;
  check_resolution(grid, two_pi_hbar_l / (p_max * aperture.slit_separation));

  std::vector<double> sum(grid.size(), 0.0);
  double flux = 0.0;
  for (std::size_t k = 0; k < momenta.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const double w = weights[k] * momenta[k] / geometry.mass;
    const auto values = fixed_momentum_values(aperture, momenta[k], geometry.flight_distance, grid);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w * values[i];
    flux += w;
  }
  for (double& v : sum) v /= flux;
  const double p_mean = distribution.mean();
  IntensityPattern out;
  out.grid = grid;
  out.values = std::move(sum);
  out.metadata = {two_pi_hbar_l / (p_mean * aperture.slit_separation), p_mean,
                  aperture.slit_separation, geometry.flight_distance, "velocity-averaged"};
  return out;
}

IntensityPattern apply_decoherence(const IntensityPattern& pattern, const DecoherenceKernel& kernel) {
  check_grid(pattern.grid);
  IntensityPattern out = pattern;
  if (kernel.is_identity()) return out;

  const double nyquist_q = constants::pi * constants::hbar / pattern.grid.spacing;
  if (kernel.grid().max() < nyquist_q * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "kernel q grid (max " << kernel.grid().max() << ") does not cover the pattern band up to "
       << nyquist_q << "; widen the kernel grid or coarsen the screen grid";
    throw std::invalid_argument(os.str());
  }

  const std::size_t n = pattern.values.size();
  std::size_t padded = 1;
  while (padded < 2 * n) padded <<= 1;
  std::vector<double> buffer(padded, 0.0);
  std::copy(pattern.values.begin(), pattern.values.end(), buffer.begin());
  const std::size_t bins = padded / 2 + 1;
  fftw_complex* spectrum = fftw_alloc_complex(bins);
  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(padded), buffer.data(), spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(padded), spectrum, buffer.data(), FFTW_ESTIMATE);
  }
  fftw_execute(forward);
  const double dq = 2.0 * constants::pi * constants::hbar /
                    (static_cast<double>(padded) * pattern.grid.spacing);
  for (std::size_t m = 0; m < bins; ++m) {
    const double d = kernel.band_limited_damping(static_cast<double>(m) * dq);
    spectrum[m][0] *= d;
    spectrum[m][1] *= d;
  }
  fftw_execute(backward);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(spectrum);
  const double scale = 1.0 / static_cast<double>(padded);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = buffer[i] * scale;
  out.metadata.description = pattern.metadata.description + "+decohered";
  return out;
}

// --- Visibility ---------------------------------------------------------------

double extract_visibility(const IntensityPattern& pattern, ScreenWindow window,
                          VisibilityMethod method) {
  const double period = pattern.metadata.fringe_period;
  if (!(period > 0.0)) throw std::invalid_argument("extract_visibility: pattern has no fringe period");
  if (!(window.hi - window.lo >= 3.0 * period * (1.0 - 1e-12))) {
    throw std::invalid_argument("extract_visibility: window must span at least 3 fringe periods");
  }
  const double k = 2.0 * constants::pi / period;
  const double center = 0.5 * (window.lo + window.hi);
  double lo = window.lo;
  double hi = window.hi;
  if (method == VisibilityMethod::fourier_ratio) {
    const double periods = std::floor((window.hi - window.lo) / period);
    lo = center - 0.5 * periods * period;
    hi = center + 0.5 * periods * period;
  }
  std::vector<double> r;
  std::vector<double> y;
  for (std::size_t i = 0; i < pattern.values.size(); ++i) {
    const double x = pattern.grid.value(i);
    if (x >= lo && x < hi) {
      r.push_back(x);
      y.push_back(pattern.values[i]);
    }
  }
  double v;
  if (method == VisibilityMethod::fourier_ratio) {
    if (r.size() < 8) throw std::invalid_argument("extract_visibility: too few samples in window");
    double a0 = 0.0, ac = 0.0, as = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      a0 += y[i];
      ac += y[i] * std::cos(k * r[i]);
      as += y[i] * std::sin(k * r[i]);
    }
    if (!(a0 > 0.0)) throw std::runtime_error("extract_visibility: no intensity in window");
    v = 2.0 * std::hypot(ac, as) / a0;
  } else {
    constexpr int kTerms = 9;
    if (r.size() < 3 * kTerms) throw std::invalid_argument("extract_visibility: too few samples in window");
    const double half = 0.5 * (hi - lo);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(r.size()), kTerms);
    Eigen::VectorXd b(static_cast<Eigen::Index>(r.size()));
    double y_scale = 0.0;
    for (double val : y) y_scale = std::max(y_scale, std::abs(val));
    if (!(y_scale > 0.0)) throw std::runtime_error("extract_visibility: no intensity in window");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double x = (r[i] - center) / half;
      const double c = std::cos(k * r[i]);
      const double s = std::sin(k * r[i]);
      const double poly[3] = {1.0, x, x * x};
      for (int j = 0; j < 3; ++j) {
        a(row, j) = poly[j];
        a(row, 3 + j) = poly[j] * c;
        a(row, 6 + j) = poly[j] * s;
      }
      b(row) = y[i] / y_scale;
    }
    const Eigen::VectorXd coeff = a.colPivHouseholderQr().solve(b);
    if (!coeff.allFinite() || !(coeff(0) > 0.0)) {
      throw std::runtime_error("extract_visibility: envelope fit failed");
    }
    v = std::hypot(coeff(3), coeff(6)) / coeff(0);
  }
  if (!(v >= -0.05 && v <= 1.05)) {
    std::ostringstream os;
    os << "extract_visibility: fitted visibility " << v << " outside [-0.05, 1.05]";
    throw std::runtime_error(os.str());
  }
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace thermodeco

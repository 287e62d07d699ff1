#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "thermodeco/decoherence.hpp"
#include "thermodeco/emission.hpp"
#include "thermodeco/numerics/spline.hpp"

namespace thermodeco {

// Stochastic photon-emission oracle for the thermal visibility.
//
// Emission events form a point process on the flight. Conditioned on the
// events, each photon of frequency w emitted at time t multiplies the
// interference term by sinc(w d (1 - t/tau) / c), the isotropic average of
// its recoil phase. For an inhomogeneous Poisson process with rate gamma(t)
// and frequencies drawn from R(w; T(t)) / R_tot, the expectation of the
// product is exp(-int dt gamma(t) (1 - <sinc>_t)), which is the analytic
// visibility. The simulation shares no code with the nested quadrature in the
// decoherence module apart from the emission model itself.

enum class EmissionMode {
  poisson_cooling,  // rate follows the deterministic cooling trajectory
  microcanonical,   // each photon lowers T by hbar w / C_V
};

struct EmissionEvent {
  double time;   // [s]
  double omega;  // [rad/s]
};

struct TrajectoryResult {
  std::vector<EmissionEvent> events;  // empty unless recording was requested
  std::size_t event_count = 0;
  double fringe_factor = 1.0;
  double final_temperature = 0.0;
  double emitted_energy = 0.0;  // sum of hbar w [J]
};

struct VisibilityEstimate {
  double mean = 1.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  double mean_events = 0.0;
  double event_variance = 0.0;
};

/// Versioned identifier of the random stream: mt19937_64 seeded per trial with
/// std::seed_seq over (seed, trial index); uniforms from the top 53 bits.
inline constexpr const char* kRngAlgorithm = "mt19937_64/seed_seq(seed,trial)/u53/v1";

class MajorantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precomputed tables for one (geometry, model, mode): total-rate interpolant,
/// inverse-CDF frequency tables, the cooling trajectory and majorants.
/// Immutable after construction; simulate() may be called concurrently.
class TrajectorySimulator {
 public:
  TrajectorySimulator(const BeamGeometry& geometry, const EmissionModel& model, EmissionMode mode,
                      const numerics::QuadratureSpec& spec = {});
  ~TrajectorySimulator();
  TrajectorySimulator(TrajectorySimulator&&) noexcept;

  TrajectoryResult simulate(std::uint64_t seed, std::uint64_t trial_index,
                            bool record_events = false) const;

  double initial_total_rate() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TrajectoryResult simulate_trajectory(const BeamGeometry& geometry, const EmissionModel& model,
                                     EmissionMode mode, std::uint64_t seed);

/// Mean and standard error of the fringe factor over independent trials.
/// Results depend only on (seed, trials, inputs), not on the worker count.
VisibilityEstimate estimate_visibility(const BeamGeometry& geometry, const EmissionModel& model,
                                       EmissionMode mode, std::size_t trials, std::uint64_t seed,
                                       std::size_t workers = 1,
                                       const numerics::QuadratureSpec& spec = {});

}  // namespace thermodeco

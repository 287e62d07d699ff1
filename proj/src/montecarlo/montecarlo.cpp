#include "thermodeco/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "thermodeco/constants.hpp"
#include "thermodeco/numerics/special.hpp"

namespace thermodeco {

namespace {

constexpr std::size_t kCdfPoints = 4096;
constexpr std::size_t kRateTablePoints = 256;
constexpr std::size_t kMajorantSegments = 256;
constexpr double kTemperatureStep = 0.01;  // frequency tables are rebuilt per 1% of T
constexpr double kTemperatureFloor = 1.0;

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    engine_.seed(seq);
  }
  // Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 engine_;
};

// Inverse CDF of the reduced spectral density u -> R(u k_B T / hbar; T).
class FrequencyTable {
 public:
  FrequencyTable(const EmissionModel& model, double temperature) {
    const auto breaks = model.reduced_breakpoints(temperature);
    if (breaks.size() < 2) return;
    lo_ = breaks.front();
    hi_ = breaks.back();
    const double h = (hi_ - lo_) / static_cast<double>(kCdfPoints - 1);
    cdf_.resize(kCdfPoints, 0.0);
    for (std::size_t i = 1; i < kCdfPoints; ++i) {
      const double a = lo_ + h * static_cast<double>(i - 1);
      const double b = a + h;
      const double cell = h / 6.0 *
                          (model.reduced_density(a, temperature) +
                           4.0 * model.reduced_density(0.5 * (a + b), temperature) +
                           model.reduced_density(b, temperature));
      cdf_[i] = cdf_[i - 1] + std::max(cell, 0.0);
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) {
      cdf_.clear();
      return;
    }
    for (double& v : cdf_) v /= total;
    step_ = h;
  }

  double sample_u(double uniform) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), uniform);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    i = std::clamp<std::size_t>(i, 1, cdf_.size() - 1);
    const double width = cdf_[i] - cdf_[i - 1];
    const double frac = width > 0.0 ? (uniform - cdf_[i - 1]) / width : 0.5;
    return lo_ + step_ * (static_cast<double>(i - 1) + std::clamp(frac, 0.0, 1.0));
  }

  bool empty() const { return cdf_.empty(); }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cdf_;
};

}  // namespace

struct TrajectorySimulator::Impl {
  struct Segment {
    double duration;
    double separation;
  };

  EmissionModel model;
  EmissionMode mode;
  std::vector<Segment> segments;
  double t0;
  double heat_capacity;
  bool cooling;
  std::optional<CoolingTrajectory> trajectory;

  // ln R_tot against ln T.
  numerics::CubicSpline log_rate;
  double log_t_min = 0.0;
  double rate_at_t0 = 0.0;

  // Frequency tables: one when the reduced density does not depend on T
  // (greybody), otherwise a ladder of 1% temperature steps built on demand.
  bool temperature_independent = false;
  std::size_t level_count = 0;
  mutable std::vector<std::once_flag> level_once;
  mutable std::vector<std::unique_ptr<FrequencyTable>> levels;

  // Piecewise-constant majorants per segment for the poisson_cooling mode.
  std::vector<std::vector<double>> majorants;

  Impl(const BeamGeometry& geometry, const EmissionModel& m, EmissionMode md,
       const numerics::QuadratureSpec& spec)
      : model(m), mode(md) {
    geometry.validate();
    const double tau = geometry.time_of_flight();
    segments.push_back({tau, geometry.slit_separation});
    if (geometry.coherence_slit_distance) {
      const double ratio = *geometry.coherence_slit_distance / geometry.flight_distance;
      segments.insert(segments.begin(), {tau * ratio, geometry.slit_separation * ratio});
    }
    t0 = model.particle().initial_temperature;
    heat_capacity = model.particle().heat_capacity;
    cooling = model.particle().finite_heat_capacity() && model.emits();

    double span = 0.0;
    for (const auto& s : segments) span = std::max(span, s.duration);
    double t_min = t0;
    if (cooling && mode == EmissionMode::poisson_cooling) {
      trajectory = cool(model, span, spec);
      t_min = trajectory->temperature(span);
    } else if (cooling) {
      t_min = kTemperatureFloor;
    }
    build_rate_table(std::min(t_min, t0) * 0.999, spec);

    temperature_independent = model.kind() == EmissionKind::greybody;
    level_count = temperature_independent
                      ? 1
                      : static_cast<std::size_t>(std::ceil(std::log(t0 / (t_min * 0.999)) /
                                                           kTemperatureStep)) + 2;
    level_once = std::vector<std::once_flag>(level_count);
    levels.resize(level_count);

    if (mode == EmissionMode::poisson_cooling) {
      for (const auto& s : segments) {
        std::vector<double> bounds(trajectory ? kMajorantSegments : 1);
        for (std::size_t k = 0; k < bounds.size(); ++k) {
          const double t = s.duration * static_cast<double>(k) / static_cast<double>(bounds.size());
          bounds[k] = rate(temperature_at(t)) * (1.0 + 1e-9);
        }
        majorants.push_back(std::move(bounds));
      }
    }
  }

  void build_rate_table(double t_lo, const numerics::QuadratureSpec& spec) {
    rate_at_t0 = model.total_rate(t0, spec);
    if (!(rate_at_t0 > 0.0)) return;
    log_t_min = std::log(t_lo);
    const double log_t_max = std::log(t0);
    std::vector<double> x(kRateTablePoints);
    std::vector<double> y(kRateTablePoints);
    for (std::size_t i = 0; i < kRateTablePoints; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(kRateTablePoints - 1);
      x[i] = log_t_min + (log_t_max - log_t_min) * f;
      const double r = i + 1 == kRateTablePoints ? rate_at_t0 : model.total_rate(std::exp(x[i]), spec);
      y[i] = std::log(std::max(r, 1e-300));
    }
    if (x.back() > x.front()) log_rate = numerics::CubicSpline(std::move(x), std::move(y));
  }

  double rate(double temperature) const {
    if (!(rate_at_t0 > 0.0)) return 0.0;
    if (temperature >= t0 || log_rate.empty()) return rate_at_t0;
    const double lr = log_rate(std::log(std::max(temperature, std::exp(log_t_min))));
    return lr < -690.0 ? 0.0 : std::exp(lr);
  }

  double temperature_at(double t) const { return trajectory ? trajectory->temperature(t) : t0; }

  const FrequencyTable& table_for(double temperature) const {
    std::size_t level = 0;
    if (!temperature_independent) {
      const double steps = std::log(t0 / temperature) / kTemperatureStep;
      level = std::min(static_cast<std::size_t>(std::max(std::lround(steps), 0L)), level_count - 1);
    }
    std::call_once(level_once[level], [&] {
      const double t_level =
          temperature_independent ? t0 : t0 * std::exp(-kTemperatureStep * static_cast<double>(level));
      levels[level] = std::make_unique<FrequencyTable>(model, t_level);
    });
    return *levels[level];
  }

  double sample_omega(double temperature, Stream& rng) const {
    const FrequencyTable& table = table_for(temperature);
    return table.sample_u(rng.uniform()) * constants::k_B * temperature / constants::hbar;
  }

  void record(TrajectoryResult& out, bool keep, double t, double omega, const Segment& s) const {
    out.fringe_factor *= numerics::sinc(omega * s.separation * (1.0 - t / s.duration) / constants::c);
    out.emitted_energy += constants::hbar * omega;
    ++out.event_count;
    if (keep) out.events.push_back({t, omega});
  }

  void run_poisson(const Segment& s, const std::vector<double>& bounds, Stream& rng,
                   TrajectoryResult& out, bool keep) const {
    const double width = s.duration / static_cast<double>(bounds.size());
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      const double lambda = bounds[k];
      if (!(lambda > 0.0)) continue;
      const double start = width * static_cast<double>(k);
      const double end = k + 1 == bounds.size() ? s.duration : start + width;
      double t = start;
      for (;;) {
        t += rng.exponential() / lambda;
        if (t >= end) break;
        const double temperature = temperature_at(t);
        const double gamma = rate(temperature);
        if (gamma > lambda) {
          std::ostringstream os;
          os << "emission rate " << gamma << " exceeds thinning majorant " << lambda << " at t = " << t;
          throw MajorantViolation(os.str());
        }
        if (rng.uniform() * lambda < gamma) record(out, keep, t, sample_omega(temperature, rng), s);
      }
    }
    out.final_temperature = temperature_at(s.duration);
  }

  void run_microcanonical(const Segment& s, Stream& rng, TrajectoryResult& out, bool keep) const {
    double temperature = t0;
    double t = 0.0;
    for (;;) {
      // The rate only changes at emissions and never grows, so the current
      // rate is an exact majorant until the next event.
      const double gamma = rate(temperature);
      if (!(gamma > 0.0)) break;
      t += rng.exponential() / gamma;
      if (t >= s.duration) break;
      const double omega = sample_omega(temperature, rng);
      record(out, keep, t, omega, s);
      if (cooling) {
        temperature = std::max(temperature - constants::hbar * omega / heat_capacity, kTemperatureFloor);
      }
    }
    out.final_temperature = temperature;
  }
};

TrajectorySimulator::TrajectorySimulator(const BeamGeometry& geometry, const EmissionModel& model,
                                         EmissionMode mode, const numerics::QuadratureSpec& spec)
    : impl_(std::make_unique<Impl>(geometry, model, mode, spec)) {}

TrajectorySimulator::~TrajectorySimulator() = default;
TrajectorySimulator::TrajectorySimulator(TrajectorySimulator&&) noexcept = default;

double TrajectorySimulator::initial_total_rate() const { return impl_->rate_at_t0; }

TrajectoryResult TrajectorySimulator::simulate(std::uint64_t seed, std::uint64_t trial_index,
                                               bool record_events) const {
  Stream rng(seed, trial_index);
  TrajectoryResult out;
  out.final_temperature = impl_->t0;
  for (std::size_t i = 0; i < impl_->segments.size(); ++i) {
    const auto& s = impl_->segments[i];
    if (impl_->mode == EmissionMode::poisson_cooling) {
      impl_->run_poisson(s, impl_->majorants[i], rng, out, record_events);
    } else {
      impl_->run_microcanonical(s, rng, out, record_events);
    }
  }
  return out;
}

TrajectoryResult simulate_trajectory(const BeamGeometry& geometry, const EmissionModel& model,
                                     EmissionMode mode, std::uint64_t seed) {
  return TrajectorySimulator(geometry, model, mode).simulate(seed, 0, true);
}

VisibilityEstimate estimate_visibility(const BeamGeometry& geometry, const EmissionModel& model,
                                       EmissionMode mode, std::size_t trials, std::uint64_t seed,
                                       std::size_t workers, const numerics::QuadratureSpec& spec) {
  if (trials < 100) throw std::invalid_argument("estimate_visibility: needs at least 100 trials");
  const TrajectorySimulator simulator(geometry, model, mode, spec);
  std::vector<double> factors(trials);
  std::vector<double> counts(trials);
  workers = std::clamp<std::size_t>(workers, 1, trials);

  auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < trials; i += workers) {
      const TrajectoryResult r = simulator.simulate(seed, i);
      factors[i] = r.fringe_factor;
      counts[i] = static_cast<double>(r.event_count);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // Reduction in trial order keeps the result independent of scheduling.
  const double n = static_cast<double>(trials);
  double sum = 0.0;
  double sum_counts = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    sum += factors[i];
    sum_counts += counts[i];
  }
  const double mean = sum / n;
  const double mean_counts = sum_counts / n;
  double ss = 0.0;
  double ss_counts = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    ss += (factors[i] - mean) * (factors[i] - mean);
    ss_counts += (counts[i] - mean_counts) * (counts[i] - mean_counts);
  }
  VisibilityEstimate est;
  est.mean = mean;
  est.std_error = std::sqrt(ss / (n - 1.0) / n);
  est.trials = trials;
  est.mean_events = mean_counts;
  est.event_variance = ss_counts / (n - 1.0);
  return est;
}

}  // namespace thermodeco

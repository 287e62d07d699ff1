#include "thermodeco/io/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "thermodeco/decoherence.hpp"
#include "thermodeco/interference.hpp"
#include "thermodeco/montecarlo.hpp"

namespace thermodeco::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Table make_table(const RunConfig& config, const std::string& schema, std::vector<std::string> columns) {
  Table t;
  t.metadata = {{"tool", kToolVersion},
                {"schema", schema + "/1"},
                {"task", config.task},
                {"config_hash", "fnv1a64:" + config.hash}};
  t.columns = std::move(columns);
  return t;
}

std::string format_label(double v, const char* unit) {
  std::ostringstream os;
  os << v << ' ' << unit;
  return os.str();
}

}  // namespace

const Table& TaskResult::table(const std::string& file) const {
  for (const auto& t : tables) {
    if (t.file == file) return t.table;
  }
  throw std::out_of_range("task produced no table " + file);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- tau-sweep ------------------------------------------------------------------

TaskResult run_tau_sweep(const RunConfig& config, const RunOptions& options) {
  const auto& opts = config.task_options<TauSweepOptions>();
  const auto& temps = config.particle.temperatures;
  const auto& seps = config.geometry.separations;
  const std::size_t n = temps.size() * seps.size();

  struct Row {
    double d, t0;
    std::optional<double> cooled, uncooled, closed;
    std::string status;
  };
  std::vector<Row> rows(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    Row& r = rows[i];
    r.d = seps[i / temps.size()];
    r.t0 = temps[i % temps.size()];
    std::vector<std::string> notes;
    try {
      const ParticleModel particle = config.particle.model(r.t0);
      const EmissionModel model = config.emission.model(particle);
      const BeamGeometry geometry = config.geometry.geometry(r.d, particle.mass);
      r.closed = decoherence_time_closed(geometry, particle, r.t0);
      const DecoherenceTimeResult unc = invert_for_time(geometry, model, false, opts.max_time);
      r.uncooled = unc.tau;
      if (!unc.reached) notes.push_back("uncooled:beyond_max_time");
      const DecoherenceTimeResult coo = invert_for_time(geometry, model, true, opts.max_time);
      r.cooled = coo.tau;
      if (!coo.reached) notes.push_back("cooled:no_crossing");
    } catch (const std::exception& e) {
      notes.push_back(std::string("error:") + e.what());
    }
    if (notes.empty()) {
      r.status = "ok";
    } else {
      for (std::size_t k = 0; k < notes.size(); ++k) r.status += (k ? ";" : "") + notes[k];
    }
  });

  Table t = make_table(config, "tau-sweep",
                       {"slit_separation_m", "T0_K", "tau_cooled_s", "tau_uncooled_s", "tau_closed_s",
                        "status"});
  t.metadata.emplace_back("method",
                          "cooled/uncooled: 1/e crossing of the visibility (nested quadrature, "
                          "ODE cooling); closed: greybody scaling function, no cooling");
  t.metadata.emplace_back("max_time_s", format_number(opts.max_time));
  auto cell = [](const std::optional<double>& v) -> Cell {
    if (v) return *v;
    return std::string();
  };
  PlotSpec plot{"Thermal decoherence time", "T0 [K]", "tau_th [s]", true, true, {}};
  for (std::size_t k = 0; k < seps.size(); ++k) {
    PlotSeries cooled{"d = " + format_label(seps[k] * 1e9, "nm"), {}, {}, false};
    PlotSeries closed{"closed form", {}, {}, true};
    for (std::size_t j = 0; j < temps.size(); ++j) {
      const Row& r = rows[k * temps.size() + j];
      t.add_row({r.d, r.t0, cell(r.cooled), cell(r.uncooled), cell(r.closed), r.status});
      cooled.x.push_back(r.t0);
      cooled.y.push_back(r.cooled.value_or(kInf));
      closed.x.push_back(r.t0);
      closed.y.push_back(r.closed.value_or(kInf));
    }
    plot.series.push_back(std::move(cooled));
    plot.series.push_back(std::move(closed));
  }
  return {{{"tau_sweep.csv", std::move(t)}}, {{"tau_sweep.svg", std::move(plot)}}};
}

// --- pattern ------------------------------------------------------------------

namespace {

DecoherenceKernel pattern_kernel(const BeamGeometry& geometry, const EmissionModel& model,
                                 bool cooling, double screen_spacing) {
  const double nyquist = constants::pi * constants::hbar / screen_spacing;
  const double fringe_q =
      geometry.longitudinal_momentum() * geometry.slit_separation / geometry.flight_distance;
  auto half = static_cast<std::size_t>(std::ceil(40.0 * nyquist / fringe_q));
  for (int attempt = 0;; ++attempt) {
    try {
      return build_kernel(geometry, model, cooling, MomentumGrid{nyquist / static_cast<double>(half), half});
    } catch (const KernelResolutionError&) {
      if (attempt == 3) throw;
      half *= 2;
    }
  }
}

Table pattern_table(const RunConfig& config, const IntensityPattern& p, const std::string& role) {
  Table t = make_table(config, "pattern", {"r_m", "intensity"});
  t.metadata.emplace_back("pattern", role);
  t.metadata.emplace_back("fringe_period_m", format_number(p.metadata.fringe_period));
  for (std::size_t i = 0; i < p.values.size(); ++i) t.add_row({p.grid.value(i), p.values[i]});
  return t;
}

}  // namespace

TaskResult run_pattern(const RunConfig& config, const RunOptions&) {
  const auto& opts = config.task_options<PatternOptions>();
  const double t0 = opts.temperature.value_or(config.particle.temperatures.front());
  const double d = config.geometry.separations.front();
  const BeamGeometry geometry = config.geometry.geometry(d, config.particle.mass);
  const ApertureModel aperture = ApertureModel::multi_slit(opts.slit_count, d, opts.slit_width);
  const double period = geometry.fringe_period();
  const ScreenGrid grid{period / static_cast<double>(opts.samples_per_period),
                        static_cast<std::size_t>(std::ceil(opts.screen_periods *
                                                           static_cast<double>(opts.samples_per_period)))};

  IntensityPattern clean = far_field_pattern(aperture, geometry, grid);
  if (opts.velocity_spread) {
    const double p0 = geometry.longitudinal_momentum();
    const auto& spread = *opts.velocity_spread;
    const VelocityDistribution dist =
        spread.relative_width == 0.0 || spread.points == 1
            ? VelocityDistribution::point_mass(p0)
            : VelocityDistribution::gaussian(p0, spread.relative_width, spread.points);
    clean = intensity_with_velocity_spread(aperture, geometry, dist, grid);
  }

  double analytic = 1.0;
  IntensityPattern blurred = clean;
  if (t0 > 0.0) {
    const EmissionModel model = config.emission.model(config.particle.model(t0));
    analytic = visibility_thermal(geometry, model, opts.cooling);
    blurred = apply_decoherence(clean, pattern_kernel(geometry, model, opts.cooling, grid.spacing));
  } else {
    blurred = apply_decoherence(clean, DecoherenceKernel::identity(MomentumGrid{1.0, 1}));
  }

  const ScreenWindow window{-opts.window_periods * period, opts.window_periods * period};
  Table vis = make_table(config, "pattern-visibility",
                         {"method", "V_unperturbed", "V_decohered", "V_analytic", "V_ratio"});
  vis.metadata.emplace_back("T0_K", format_number(t0));
  vis.metadata.emplace_back("cooling", opts.cooling ? "true" : "false");
  for (auto [name, method] : {std::pair{"local_fit", VisibilityMethod::local_fit},
                              std::pair{"fourier_ratio", VisibilityMethod::fourier_ratio}}) {
    const double v0 = extract_visibility(clean, window, method);
    const double v1 = extract_visibility(blurred, window, method);
    vis.add_row({std::string(name), v0, v1, analytic, v1 / (v0 * analytic)});
  }

  PlotSpec plot{"Interference pattern", "r [m]", "intensity [1/m]", false, false, {}};
  PlotSeries a{"unperturbed", {}, clean.values, false};
  PlotSeries b{"decohered", {}, blurred.values, false};
  for (std::size_t i = 0; i < grid.size(); ++i) a.x.push_back(grid.value(i));
  b.x = a.x;
  plot.series = {std::move(a), std::move(b)};

  TaskResult out;
  out.tables.push_back({"pattern_unperturbed.csv", pattern_table(config, clean, "unperturbed")});
  out.tables.push_back({"pattern_decohered.csv", pattern_table(config, blurred, "decohered")});
  out.tables.push_back({"pattern_visibility.csv", std::move(vis)});
  out.plots.push_back({"pattern.svg", std::move(plot)});
  return out;
}

// --- montecarlo ---------------------------------------------------------------

TaskResult run_montecarlo(const RunConfig& config, const RunOptions& options) {
  const auto& opts = config.task_options<MonteCarloOptions>();
  const std::uint64_t seed = options.seed.value_or(opts.seed);
  Table t = make_table(config, "montecarlo",
                       {"T0_K", "slit_separation_m", "time_of_flight_s", "V_analytic", "V_mc",
                        "std_error", "z_score", "trials", "mean_events"});
  t.metadata.emplace_back("rng", kRngAlgorithm);
  t.metadata.emplace_back("seed", std::to_string(seed));
  t.metadata.emplace_back("mode", opts.mode == EmissionMode::poisson_cooling ? "poisson_cooling"
                                                                             : "microcanonical");
  PlotSpec plot{"Monte Carlo vs analytic visibility", "point", "visibility", false, false, {}};
  PlotSeries an{"analytic", {}, {}, true};
  PlotSeries mc{"Monte Carlo", {}, {}, false};
  for (std::size_t i = 0; i < opts.points.size(); ++i) {
    const auto& p = opts.points[i];
    const ParticleModel particle = config.particle.model(p.temperature);
    const EmissionModel model = config.emission.model(particle);
    const BeamGeometry geometry =
        config.geometry.geometry(p.separation, particle.mass).with_time_of_flight(p.time_of_flight);
    const double analytic = visibility_thermal(geometry, model, true);
    const VisibilityEstimate est =
        estimate_visibility(geometry, model, opts.mode, opts.trials, seed, options.workers);
    double z = 0.0;
    if (est.std_error > 0.0) {
      z = (est.mean - analytic) / est.std_error;
    } else if (est.mean != analytic) {
      z = est.mean > analytic ? kInf : -kInf;
    }
    t.add_row({p.temperature, p.separation, p.time_of_flight, analytic, est.mean, est.std_error, z,
               static_cast<double>(est.trials), est.mean_events});
    an.x.push_back(static_cast<double>(i));
    an.y.push_back(analytic);
    mc.x.push_back(static_cast<double>(i));
    mc.y.push_back(est.mean);
  }
  plot.series = {std::move(an), std::move(mc)};
  return {{{"montecarlo.csv", std::move(t)}}, {{"montecarlo.svg", std::move(plot)}}};
}

// --- cooling ------------------------------------------------------------------

TaskResult run_cooling(const RunConfig& config, const RunOptions&) {
  const auto& opts = config.task_options<CoolingOptions>();
  const ParticleModel particle = config.particle.model(config.particle.temperatures.front());
  if (!particle.finite_heat_capacity()) {
    throw std::invalid_argument("cooling undefined at infinite heat capacity");
  }
  const EmissionModel model = config.emission.model(particle);
  const CoolingTrajectory trajectory = cool(model, opts.duration);

  // Linear spacing, or t = 0 followed by six log-spaced decades up to the duration.
  std::vector<double> times(opts.samples, 0.0);
  const std::size_t last = opts.samples - 1;
  for (std::size_t i = 1; i <= last; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(last);
    const double g = last > 1 ? static_cast<double>(i - 1) / static_cast<double>(last - 1) : 1.0;
    times[i] = opts.log_spacing ? opts.duration * std::pow(10.0, -6.0 * (1.0 - g)) : opts.duration * f;
  }
  times.back() = opts.duration;

  Table t = make_table(config, "cooling", {"t_s", "T_numeric_K", "T_analytic_K", "rel_diff"});
  t.metadata.emplace_back("heat_capacity_kB", format_number(particle.heat_capacity_in_kB()));
  PlotSpec plot{"Radiative cooling", "t [s]", "T [K]", opts.log_spacing, false, {}};
  PlotSeries num{"numerical", {}, {}, false};
  PlotSeries ana{"analytic", {}, {}, true};
  for (double time : times) {
    const double tn = trajectory.temperature(time);
    const double ta = analytic_cooling(particle, time);
    t.add_row({time, tn, ta, tn / ta - 1.0});
    num.x.push_back(time);
    num.y.push_back(tn);
    ana.x.push_back(time);
    ana.y.push_back(ta);
  }
  plot.series = {std::move(num), std::move(ana)};
  return {{{"cooling.csv", std::move(t)}}, {{"cooling.svg", std::move(plot)}}};
}

TaskResult run_task(const RunConfig& config, const RunOptions& options) {
  if (config.task == "tau-sweep") return run_tau_sweep(config, options);
  if (config.task == "pattern") return run_pattern(config, options);
  if (config.task == "montecarlo") return run_montecarlo(config, options);
  if (config.task == "cooling") return run_cooling(config, options);
  throw std::invalid_argument("unknown task '" + config.task + "'");
}

std::vector<std::filesystem::path> write_result(const TaskResult& result,
                                                const std::filesystem::path& dir, bool svg) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : result.tables) {
    written.push_back(dir / t.file);
    write_csv_file(written.back(), t.table);
  }
  if (svg) {
    for (const auto& p : result.plots) {
      written.push_back(dir / p.file);
      write_svg(written.back(), p.plot);
    }
  }
  return written;
}

}  // namespace thermodeco::io

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "thermodeco/decoherence.hpp"
#include "thermodeco/emission.hpp"
#include "thermodeco/montecarlo.hpp"

namespace thermodeco::io {

/// Raised for malformed configurations. The message names the offending key
/// (dotted path) and, for type errors, the expected type.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParticleConfig {
  double effective_area = 0.0;
  double heat_capacity = kInfiniteHeatCapacity;
  double mass = 0.0;
  std::vector<double> temperatures;  // ascending; one entry for a single T0

  ParticleModel model(double initial_temperature) const;
};

struct GeometryConfig {
  std::vector<double> separations;  // ascending
  double flight_distance = 0.0;
  double velocity = 0.0;
  std::optional<double> coherence_slit_distance;

  BeamGeometry geometry(double separation, double mass) const;
};

struct EmissionConfig {
  enum class Kind { greybody, spectrum };
  Kind kind = Kind::greybody;
  std::filesystem::path spectrum_file;  // resolved against the config's directory
  std::shared_ptr<const SpectrumTable> table;
  bool heat_capacity_term = true;

  EmissionModel model(const ParticleModel& particle) const;
};

struct TauSweepOptions {
  double max_time = 1e3;  // [s] search limit for the 1/e crossing
};

struct VelocitySpread {
  double relative_width = 0.0;
  std::size_t points = 1;
};

struct PatternOptions {
  std::optional<double> temperature;  // overrides the particle T0; 0 is allowed
  double slit_width = 0.0;
  std::size_t slit_count = 2;
  double screen_periods = 40.0;      // half-width of the screen in fringe periods
  std::size_t samples_per_period = 16;
  double window_periods = 4.0;       // half-width of the visibility window
  bool cooling = true;
  std::optional<VelocitySpread> velocity_spread;
};

struct MonteCarloPoint {
  double temperature;
  double separation;
  double time_of_flight;
};

struct MonteCarloOptions {
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  EmissionMode mode = EmissionMode::poisson_cooling;
  std::vector<MonteCarloPoint> points;
};

struct CoolingOptions {
  double duration = 0.0;
  std::size_t samples = 101;
  bool log_spacing = false;
};

struct OutputConfig {
  std::filesystem::path directory = ".";
  bool svg = true;
};

using TaskOptions = std::variant<TauSweepOptions, PatternOptions, MonteCarloOptions, CoolingOptions>;

struct RunConfig {
  std::string task;  // tau-sweep | pattern | montecarlo | cooling
  ParticleConfig particle;
  GeometryConfig geometry;
  EmissionConfig emission;
  TaskOptions options;
  OutputConfig output;
  std::string canonical;  // compact, key-sorted JSON of the input
  std::string hash;       // FNV-1a 64 of canonical, hex

  template <class T>
  const T& task_options() const {
    return std::get<T>(options);
  }
};

const std::vector<std::string>& task_names();

/// Parses JSON text. `task` selects the task when the file does not name one
/// and must agree with it otherwise. Relative paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::string& task,
                       const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path, const std::string& task);

std::string fnv1a_hex(const std::string& data);

}  // namespace thermodeco::io

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermodeco/io/config.hpp"
#include "thermodeco/io/csv.hpp"
#include "thermodeco/io/svg.hpp"

namespace thermodeco::io {

inline constexpr const char* kToolVersion = "thermodeco 1.0.0";

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides output.directory
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;  // overrides task.seed
};

struct NamedTable {
  std::string file;
  Table table;
};

struct NamedPlot {
  std::string file;
  PlotSpec plot;
};

struct TaskResult {
  std::vector<NamedTable> tables;
  std::vector<NamedPlot> plots;

  const Table& table(const std::string& file) const;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. If any call
/// throws, the exception of the lowest index is rethrown after all finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

// Stable CSV interfaces (schema version 1):
//   tau_sweep.csv            slit_separation_m,T0_K,tau_cooled_s,tau_uncooled_s,tau_closed_s,status
//   pattern_unperturbed.csv  r_m,intensity
//   pattern_decohered.csv    r_m,intensity
//   pattern_visibility.csv   method,V_unperturbed,V_decohered,V_analytic,V_ratio
//   montecarlo.csv           T0_K,slit_separation_m,time_of_flight_s,V_analytic,V_mc,std_error,z_score,trials,mean_events
//   cooling.csv              t_s,T_numeric_K,T_analytic_K,rel_diff
// Unreached 1/e crossings are written as inf; per-row failures leave the
// affected cells empty and describe the failure in the status column.
TaskResult run_tau_sweep(const RunConfig& config, const RunOptions& options = {});
TaskResult run_pattern(const RunConfig& config, const RunOptions& options = {});
TaskResult run_montecarlo(const RunConfig& config, const RunOptions& options = {});
TaskResult run_cooling(const RunConfig& config, const RunOptions& options = {});
TaskResult run_task(const RunConfig& config, const RunOptions& options = {});

/// Writes all tables (and plots when enabled) into dir, creating it if needed.
std::vector<std::filesystem::path> write_result(const TaskResult& result,
                                                const std::filesystem::path& dir, bool svg);

}  // namespace thermodeco::io

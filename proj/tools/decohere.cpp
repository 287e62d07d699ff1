// decohere <task> --config <file> [--out <dir>] [--workers N] [--seed S]

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "thermodeco/io/config.hpp"
#include "thermodeco/io/tasks.hpp"

int main(int argc, char** argv) {
  namespace io = thermodeco::io;

  CLI::App app{"Thermal decoherence in matter-wave interferometry"};
  app.set_version_flag("--version", std::string(io::kToolVersion));

  std::string task;
  std::string config_path;
  std::string out_dir;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  app.add_option("task", task, "tau-sweep | pattern | montecarlo | cooling")
      ->required()
      ->check(CLI::IsMember(io::task_names()));
  app.add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  app.add_option("-w,--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
  auto* seed_opt = app.add_option("-s,--seed", seed, "random seed (overrides task.seed)");

  CLI11_PARSE(app, argc, argv);

  try {
    const io::RunConfig config = io::load_config(config_path, task);
    io::RunOptions options;
    options.workers = workers;
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (*seed_opt) options.seed = seed;

    for (const auto& w : config.particle.model(1.0).warnings()) std::cerr << "warning: " << w << '\n';

    const io::TaskResult result = io::run_task(config, options);
    const auto dir = options.out_dir.value_or(config.output.directory);
    for (const auto& path : io::write_result(result, dir, config.output.svg)) {
      std::cout << path.string() << '\n';
    }
  } catch (const io::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

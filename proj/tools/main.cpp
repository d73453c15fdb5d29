#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bicmppi/environment.hpp"
#include "bicmppi/experiment.hpp"
#include "bicmppi/report.hpp"

namespace fs = std::filesystem;
using namespace bicmppi;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

int gen_maps(int count, std::uint64_t seed, const fs::path& out, const MapSpec& base) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out << ": " << ec.message() << '\n';
    return kExitIo;
  }
  MapSpec spec = base;
  spec.seed = seed;
  for (int i = 0; i < count; ++i) {
    const auto path = out / (generated_map_id(i) + ".map");
    save_map(generate_map(generated_map_spec(spec, i)), path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int run(const fs::path& config_path, const ConfigOverrides& overrides, const fs::path& out) {
  const ExperimentConfig config = load_config(config_path, overrides);
  for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
  const MapSet maps = resolve_maps(config.maps);
  std::cerr << "running " << config.algorithms.size() << " algorithm(s) x " << maps.size()
            << " map(s) x " << config.starts.size() << " start(s)\n";
  const auto records = run_suite(config, maps);
  write_suite_outputs(records, out, config.dump_trajectories);
  write_summary_csv(summarize(records), std::cout);
  return 0;
}

int report(const fs::path& in_dir, const std::string& format) {
  const auto path = in_dir / "trials.jsonl";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << '\n';
    return kExitIo;
  }
  const auto records = read_trials_jsonl(in);
  if (records.empty()) {
    std::cerr << "error: no trial records in " << path << '\n';
    return kExitIo;
  }
  const auto summary = summarize(records);
  if (format == "csv") {
    write_summary_csv(summary, std::cout);
  } else {
    write_summary_jsonl(summary, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiC-MPPI, Cluster-MPPI and MPPI benchmark harness"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-maps", "Generate procedural occupancy maps");
  int count = 0;
  std::uint64_t map_seed = 0;
  fs::path gen_out;
  MapSpec spec;
  gen->add_option("--count", count, "Number of maps")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", map_seed, "Master seed")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--obstacles", spec.obstacle_count, "Obstacles per map")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--resolution", spec.resolution, "Cell size in meters")->capture_default_str();
  gen->add_option("--inflate", spec.inflation_radius, "Inflation radius in meters")
      ->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Run a benchmark suite");
  fs::path config_path;
  std::vector<std::string> algos;
  std::optional<fs::path> maps_dir;
  std::optional<std::uint64_t> seed;
  fs::path run_out = "results";
  run_cmd->add_option("--config", config_path, "Experiment config file")->required();
  run_cmd->add_option("--algo", algos, "Algorithm(s): mppi, cluster-mppi, bic-mppi")
      ->delimiter(',');
  run_cmd->add_option("--maps", maps_dir, "Directory of .map files");
  run_cmd->add_option("--out", run_out, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", seed, "Master seed");

  auto* report_cmd = app.add_subcommand("report", "Summarize trial records");
  fs::path report_in;
  std::string format = "csv";
  report_cmd->add_option("--in", report_in, "Directory holding trials.jsonl")->required();
  report_cmd->add_option("--format", format, "csv or jsonl")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "jsonl"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_maps(count, map_seed, gen_out, spec);
    if (*run_cmd) {
      ConfigOverrides overrides;
      if (!algos.empty()) {
        std::vector<Algorithm> parsed;
        for (const auto& a : algos) parsed.push_back(parse_algorithm(a));
        overrides.algorithms = parsed;
      }
      overrides.maps_dir = maps_dir;
      overrides.seed = seed;
      return run(config_path, overrides, run_out);
    }
    return report(report_in, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MapError& e) {
    std::cerr << "map error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ReportError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

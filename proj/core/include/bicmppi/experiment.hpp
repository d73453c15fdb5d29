#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bicmppi/closed_loop.hpp"
#include "bicmppi/environment.hpp"

namespace bicmppi {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where the maps of a suite come from: a directory of `*.map` files, or
/// `count` procedurally generated maps with seeds derived from spec.seed.
struct MapSource {
  std::filesystem::path directory;
  int count = 0;
  MapSpec spec;
};

struct ExperimentConfig {
  std::vector<Algorithm> algorithms;
  std::string model = "diffdrive";
  std::map<Algorithm, PlannerSettings> planners;

  // Exactly one input set: a box (input_lower/input_upper) or a norm cone.
  std::optional<BoxSet> input_box;
  std::optional<NormConeSet> input_cone;
  std::optional<StateBounds> state_bounds;

  MapSource maps;
  std::vector<StateVector> starts;
  StateVector goal;
  double dt = 0.1;
  int max_iters = 200;
  double err = 0.1;
  int step_retries = 2;
  std::uint64_t seed = 0;
  bool dump_trajectories = false;

  std::vector<std::string> warnings;

  InputConstraint input_constraint() const;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::vector<Algorithm>> algorithms;
  std::optional<std::filesystem::path> maps_dir;
  std::optional<std::uint64_t> seed;
};

/// Parses the flat `key = value` format documented in the README. Unknown
/// keys, malformed values and missing required keys throw ConfigError;
/// keys that no selected algorithm reads are kept as warnings.
ExperimentConfig parse_config(std::istream& in, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigOverrides& overrides = {});

struct MapSet {
  std::vector<std::string> ids;
  std::vector<std::shared_ptr<const OccupancyGrid>> grids;

  int size() const { return static_cast<int>(ids.size()); }
};

/// Id of the i-th generated map, also used as its file stem by gen-maps.
std::string generated_map_id(int index);
MapSpec generated_map_spec(const MapSpec& base, int index);

/// Loads every `*.map` file in the directory (sorted by name, id = stem) or
/// generates the maps. Throws MapError on unreadable or empty input.
MapSet resolve_maps(const MapSource& source);

struct TrialRecord {
  std::string algorithm;
  std::string map_id;
  int start_id = 0;
  TrialResult result;
};

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view map_id, int start_id);

/// One closed-loop trial per (algorithm, map, start), in that nesting order.
/// Trials run in parallel; the records come back in task order.
std::vector<TrialRecord> run_suite(const ExperimentConfig& config, const MapSet& maps);

struct AlgorithmSummary {
  std::string algorithm;
  int trials = 0;
  int failures = 0;
  double success_rate = 0.0;
  double avg_iters = 0.0;      // successes only; NaN without successes
  double avg_iters_all = 0.0;  // every trial, failures at their final count
  double avg_time_s = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Per-algorithm aggregates in order of first appearance.
std::vector<AlgorithmSummary> summarize(const std::vector<TrialRecord>& records);

}  // namespace bicmppi

#include "bicmppi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "bicmppi/rng.hpp"

namespace bicmppi {

InputConstraint ExperimentConfig::input_constraint() const {
  if (input_box) return InputConstraint::box(input_box->lower, input_box->upper);
  if (input_cone) return InputConstraint::norm_cone(input_cone->a_max, input_cone->theta_max);
  throw ConfigError("no input set configured");
}

namespace {

constexpr unsigned kMppiBit = 1U << 0;
constexpr unsigned kClusterBit = 1U << 1;
constexpr unsigned kBicBit = 1U << 2;
constexpr unsigned kAllAlgorithms = kMppiBit | kClusterBit | kBicBit;

unsigned bit_of(Algorithm a) {
  switch (a) {
    case Algorithm::kMppi: return kMppiBit;
    case Algorithm::kClusterMppi: return kClusterBit;
    case Algorithm::kBicMppi: return kBicBit;
  }
  return 0;
}

// Planner keys: which algorithms read them and which must be given.
struct PlannerKey {
  std::string_view name;
  unsigned used_by;
  unsigned required_by;
};

constexpr PlannerKey kPlannerKeys[] = {
    {"sigma_u", kAllAlgorithms, kAllAlgorithms},
    {"gamma_u", kAllAlgorithms, kAllAlgorithms},
    {"t_f", kAllAlgorithms, kAllAlgorithms},
    {"n_f", kAllAlgorithms, kAllAlgorithms},
    {"w_phi", kAllAlgorithms, 0},
    {"stage_input_weight", kAllAlgorithms, 0},
    {"w_stage", kAllAlgorithms, 0},
    {"initial_input", kAllAlgorithms, 0},
    {"min_points", kClusterBit | kBicBit, kClusterBit | kBicBit},
    {"eps_max", kClusterBit | kBicBit, kClusterBit | kBicBit},
    {"cost_weight", kClusterBit | kBicBit, 0},
    {"feature_scheme", kClusterBit | kBicBit, 0},
    {"t_b", kBicBit, kBicBit},
    {"n_b", kBicBit, kBicBit},
    {"n_g", kBicBit, kBicBit},
    {"lambda_x", kBicBit, 0},
    {"lambda_u", kBicBit, 0},
    {"eps_goal", kBicBit, 0},
    {"max_candidates", kBicBit, 0},
};

constexpr std::string_view kGlobalKeys[] = {
    "algorithm",    "model",          "dt",          "seed",          "max_iters",
    "err",          "step_retries",   "input_lower", "input_upper",   "a_max",
    "theta_max_deg", "state_lower",   "state_upper", "start",         "goal",
    "maps_dir",     "map_count",      "map_seed",    "map_obstacles", "map_obstacle_radius",
    "map_inflation", "map_resolution", "map_base_size", "map_extended_size",
    "map_margin_bottom", "map_margin_top", "dump_trajectories",
};

const PlannerKey* find_planner_key(std::string_view name) {
  for (const auto& k : kPlannerKeys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

bool is_global_key(std::string_view name) {
  return std::find(std::begin(kGlobalKeys), std::end(kGlobalKeys), name) != std::end(kGlobalKeys);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const Entry& e, std::string_view key, const std::string& what) {
  throw ConfigError("line " + std::to_string(e.line) + ": " + std::string(key) + ": " + what);
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

double parse_double(const Entry& e, std::string_view key, std::string_view token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || std::isnan(v)) {
    fail(e, key, "expected a number, got '" + std::string(token) + "'");
  }
  return v;
}

double parse_scalar(const Entry& e, std::string_view key) {
  const auto tokens = split_tokens(e.value);
  if (tokens.size() != 1) fail(e, key, "expected one number");
  return parse_double(e, key, tokens[0]);
}

std::int64_t parse_integer(const Entry& e, std::string_view key) {
  const std::string_view v = trim(e.value);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(e, key, "expected an integer");
  return out;
}

std::uint64_t parse_unsigned(const Entry& e, std::string_view key) {
  const std::string_view v = trim(e.value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(e, key, "expected a non-negative integer");
  }
  return out;
}

int parse_count(const Entry& e, std::string_view key, int minimum) {
  const std::int64_t v = parse_integer(e, key);
  if (v < minimum || v > std::numeric_limits<int>::max()) {
    fail(e, key, "must be >= " + std::to_string(minimum));
  }
  return static_cast<int>(v);
}

Eigen::VectorXd parse_vector(const Entry& e, std::string_view key) {
  const auto tokens = split_tokens(e.value);
  if (tokens.empty()) fail(e, key, "expected at least one number");
  Eigen::VectorXd v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_double(e, key, tokens[i]);
  }
  return v;
}

InputVector parse_input_vector(const Entry& e, std::string_view key) {
  Eigen::VectorXd v = parse_vector(e, key);
  if (v.size() > kMaxInputDim) fail(e, key, "too many values");
  return v;
}

bool parse_bool(const Entry& e, std::string_view key) {
  const std::string_view v = trim(e.value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(e, key, "expected true or false");
}

std::vector<Algorithm> parse_algorithms(const Entry& e) {
  std::vector<Algorithm> out;
  for (const auto& t : split_tokens(e.value)) {
    Algorithm a;
    try {
      a = parse_algorithm(t);
    } catch (const std::invalid_argument& ex) {
      fail(e, "algorithm", ex.what());
    }
    if (std::find(out.begin(), out.end(), a) != out.end()) fail(e, "algorithm", "listed twice");
    out.push_back(a);
  }
  if (out.empty()) fail(e, "algorithm", "expected at least one algorithm");
  return out;
}

void apply_planner_key(PlannerSettings& s, std::string_view key, const Entry& e) {
  if (key == "sigma_u") {
    s.noise_variance = parse_input_vector(e, key);
  } else if (key == "gamma_u") {
    s.gamma = parse_scalar(e, key);
  } else if (key == "t_f") {
    s.horizon_forward = parse_count(e, key, 1);
  } else if (key == "n_f") {
    s.samples_forward = parse_count(e, key, 1);
  } else if (key == "w_phi") {
    s.terminal_weight = parse_scalar(e, key);
  } else if (key == "w_stage") {
    s.stage_position_weight = parse_scalar(e, key);
  } else if (key == "stage_input_weight") {
    s.stage_input_weight = parse_input_vector(e, key);
  } else if (key == "initial_input") {
    s.initial_input = parse_input_vector(e, key);
  } else if (key == "min_points") {
    s.dbscan.min_points = parse_count(e, key, 1);
  } else if (key == "eps_max") {
    s.dbscan.eps_max = parse_scalar(e, key);
  } else if (key == "cost_weight") {
    s.dbscan.cost_weight = parse_scalar(e, key);
  } else if (key == "feature_scheme") {
    const std::string_view v = trim(e.value);
    if (v == "time_mean") {
      s.dbscan.scheme = FeatureScheme::kTimeMean;
    } else if (v == "flattened") {
      s.dbscan.scheme = FeatureScheme::kFlattened;
    } else {
      fail(e, key, "expected time_mean or flattened");
    }
  } else if (key == "t_b") {
    s.horizon_backward = parse_count(e, key, 1);
  } else if (key == "n_b") {
    s.samples_backward = parse_count(e, key, 1);
  } else if (key == "n_g") {
    s.samples_guide = parse_count(e, key, 1);
  } else if (key == "lambda_x") {
    s.guide.lambda_x = parse_scalar(e, key);
  } else if (key == "lambda_u") {
    s.guide.lambda_u = parse_scalar(e, key);
  } else if (key == "eps_goal") {
    s.guide.eps_goal = parse_scalar(e, key);
  } else if (key == "max_candidates") {
    s.max_candidates = parse_count(e, key, 0);
  }
}

StateVector to_state(const Entry& e, std::string_view key, const Eigen::VectorXd& v, int dim) {
  if (v.size() != dim) {
    fail(e, key, "expected " + std::to_string(dim) + " values, got " + std::to_string(v.size()));
  }
  return v;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const ConfigOverrides& overrides) {
  std::map<std::string, Entry, std::less<>> global;
  std::vector<Entry> starts;
  // key -> entry, where key is "name" or "algorithm.name"
  std::map<std::string, Entry, std::less<>> planner_entries;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    Entry entry{std::string(trim(line.substr(eq + 1))), line_no};
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (entry.value.empty()) fail(entry, key, "empty value");

    if (key == "start") {
      starts.push_back(std::move(entry));
      continue;
    }
    std::string_view name = key;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      const std::string_view prefix = std::string_view(key).substr(0, dot);
      name = std::string_view(key).substr(dot + 1);
      try {
        parse_algorithm(prefix);
      } catch (const std::invalid_argument&) {
        fail(entry, key, "unknown algorithm prefix '" + std::string(prefix) + "'");
      }
      if (!find_planner_key(name)) fail(entry, key, "unknown planner key");
    } else if (!is_global_key(name) && !find_planner_key(name)) {
      fail(entry, key, "unknown key");
    }
    auto& target = find_planner_key(name) ? planner_entries : global;
    if (!target.emplace(key, std::move(entry)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + key + ": given twice");
    }
  }

  ExperimentConfig cfg;
  const auto get = [&](std::string_view k) -> const Entry* {
    const auto it = global.find(k);
    return it == global.end() ? nullptr : &it->second;
  };
  const auto require = [&](std::string_view k) -> const Entry& {
    const Entry* e = get(k);
    if (!e) throw ConfigError("missing required key '" + std::string(k) + "'");
    return *e;
  };

  if (overrides.algorithms) {
    cfg.algorithms = *overrides.algorithms;
  } else {
    cfg.algorithms = parse_algorithms(require("algorithm"));
  }
  if (cfg.algorithms.empty()) throw ConfigError("no algorithm selected");

  cfg.model = trim(require("model").value);
  std::shared_ptr<const Model> model;
  try {
    model = make_model(cfg.model);
  } catch (const std::invalid_argument& ex) {
    fail(require("model"), "model", ex.what());
  }
  const int n = model->state_dim();
  const int m = model->input_dim();

  if (const Entry* e = get("dt")) cfg.dt = parse_scalar(*e, "dt");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  } else if (const Entry* e = get("seed")) {
    cfg.seed = parse_unsigned(*e, "seed");
  }
  if (const Entry* e = get("max_iters")) cfg.max_iters = parse_count(*e, "max_iters", 1);
  if (const Entry* e = get("err")) cfg.err = parse_scalar(*e, "err");
  if (!(cfg.err > 0.0)) throw ConfigError("err must be positive");
  if (const Entry* e = get("step_retries")) cfg.step_retries = parse_count(*e, "step_retries", 0);
  if (const Entry* e = get("dump_trajectories")) {
    cfg.dump_trajectories = parse_bool(*e, "dump_trajectories");
  }

  // Input set.
  const bool has_box = get("input_lower") || get("input_upper");
  const bool has_cone = get("a_max") || get("theta_max_deg");
  if (has_box == has_cone) {
    throw ConfigError("configure exactly one input set: input_lower/input_upper or a_max/theta_max_deg");
  }
  try {
    if (has_box) {
      const Entry& lo = require("input_lower");
      const Entry& hi = require("input_upper");
      BoxSet box{parse_input_vector(lo, "input_lower"), parse_input_vector(hi, "input_upper")};
      if (box.lower.size() != m || box.upper.size() != m) {
        fail(lo, "input_lower", "input bounds must have " + std::to_string(m) + " values");
      }
      InputConstraint::box(box.lower, box.upper);
      cfg.input_box = box;
    } else {
      NormConeSet cone{parse_scalar(require("a_max"), "a_max"),
                       parse_scalar(require("theta_max_deg"), "theta_max_deg") *
                           std::numbers::pi / 180.0};
      if (m != 3) throw ConfigError("the norm-cone input set needs a 3-dimensional input");
      InputConstraint::norm_cone(cone.a_max, cone.theta_max);
      cfg.input_cone = cone;
    }
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }

  if (get("state_lower") || get("state_upper")) {
    const Entry& lo = require("state_lower");
    const Entry& hi = require("state_upper");
    StateBounds b{to_state(lo, "state_lower", parse_vector(lo, "state_lower"), n),
                  to_state(hi, "state_upper", parse_vector(hi, "state_upper"), n)};
    if (!(b.lower.array() <= b.upper.array()).all()) {
      fail(lo, "state_lower", "must be <= state_upper");
    }
    cfg.state_bounds = b;
  }

  if (starts.empty()) throw ConfigError("missing required key 'start'");
  for (const Entry& e : starts) cfg.starts.push_back(to_state(e, "start", parse_vector(e, "start"), n));
  const Entry& goal = require("goal");
  cfg.goal = to_state(goal, "goal", parse_vector(goal, "goal"), n);

  // Maps.
  if (overrides.maps_dir) {
    cfg.maps.directory = *overrides.maps_dir;
  } else if (const Entry* e = get("maps_dir")) {
    cfg.maps.directory = std::string(trim(e->value));
  }
  for (std::string_view k : {"map_count", "map_seed", "map_obstacles", "map_obstacle_radius",
                             "map_inflation", "map_resolution", "map_base_size",
                             "map_extended_size", "map_margin_bottom", "map_margin_top"}) {
    if (get(k) && !cfg.maps.directory.empty()) {
      cfg.warnings.push_back(std::string(k) + " is ignored because maps are read from a directory");
    }
  }
  if (cfg.maps.directory.empty()) {
    cfg.maps.count = parse_count(require("map_count"), "map_count", 1);
    if (const Entry* e = get("map_seed")) cfg.maps.spec.seed = parse_unsigned(*e, "map_seed");
    if (const Entry* e = get("map_obstacles")) {
      cfg.maps.spec.obstacle_count = parse_count(*e, "map_obstacles", 0);
    }
    if (const Entry* e = get("map_obstacle_radius")) {
      cfg.maps.spec.obstacle_radius = parse_scalar(*e, "map_obstacle_radius");
    }
    if (const Entry* e = get("map_inflation")) {
      cfg.maps.spec.inflation_radius = parse_scalar(*e, "map_inflation");
    }
    if (const Entry* e = get("map_resolution")) {
      cfg.maps.spec.resolution = parse_scalar(*e, "map_resolution");
    }
    const auto size2 = [&](std::string_view k, Eigen::Vector2d& target) {
      if (const Entry* e = get(k)) {
        const Eigen::VectorXd v = parse_vector(*e, k);
        if (v.size() != 2) fail(*e, k, "expected width and height");
        target = v;
      }
    };
    size2("map_base_size", cfg.maps.spec.base_size);
    size2("map_extended_size", cfg.maps.spec.extended_size);
    if (const Entry* e = get("map_margin_bottom")) {
      cfg.maps.spec.margin_bottom = parse_scalar(*e, "map_margin_bottom");
    }
    if (const Entry* e = get("map_margin_top")) {
      cfg.maps.spec.margin_top = parse_scalar(*e, "map_margin_top");
    }
    try {
      cfg.maps.spec.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(ex.what());
    }
  }

  // Planner settings: shared keys first, then algorithm-prefixed overrides.
  unsigned selected = 0;
  for (Algorithm a : cfg.algorithms) selected |= bit_of(a);
  std::vector<std::pair<int, std::string>> unused;
  for (const auto& [key, entry] : planner_entries) {
    const auto dot = key.find('.');
    const PlannerKey* pk = find_planner_key(dot == std::string::npos ? key : key.substr(dot + 1));
    const unsigned scope =
        dot == std::string::npos ? selected : (bit_of(parse_algorithm(key.substr(0, dot))) & selected);
    if ((pk->used_by & scope) == 0) {
      unused.emplace_back(entry.line, "line " + std::to_string(entry.line) + ": " + key +
                                          " is not used by the selected algorithms; ignored");
    }
  }
  std::sort(unused.begin(), unused.end());
  for (auto& [line, message] : unused) cfg.warnings.push_back(std::move(message));
  for (Algorithm a : cfg.algorithms) {
    PlannerSettings s;
    s.algorithm = a;
    const std::string prefix = to_string(a) + ".";
    for (const auto& pk : kPlannerKeys) {
      if ((pk.used_by & bit_of(a)) == 0) continue;
      const auto base = planner_entries.find(pk.name);
      const auto over = planner_entries.find(prefix + std::string(pk.name));
      const Entry* e = over != planner_entries.end()   ? &over->second
                       : base != planner_entries.end() ? &base->second
                                                       : nullptr;
      if (!e) {
        if (pk.required_by & bit_of(a)) {
          throw ConfigError("missing required key '" + std::string(pk.name) + "' for " +
                            to_string(a));
        }
        continue;
      }
      apply_planner_key(s, pk.name, *e);
    }
    if (s.noise_variance.size() != m) {
      throw ConfigError("sigma_u for " + to_string(a) + " must have " + std::to_string(m) +
                        " values");
    }
    try {
      s.validate();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(to_string(a) + ": " + ex.what());
    }
    cfg.planners.emplace(a, std::move(s));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, overrides);
}

std::string generated_map_id(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "map_" + digits;
}

MapSpec generated_map_spec(const MapSpec& base, int index) {
  MapSpec spec = base;
  spec.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(index)});
  return spec;
}

MapSet resolve_maps(const MapSource& source) {
  MapSet set;
  if (!source.directory.empty()) {
    std::error_code ec;
    if (!std::filesystem::is_directory(source.directory, ec)) {
      throw MapError("map directory not found: " + source.directory.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(source.directory)) {
      if (entry.is_regular_file() && entry.path().extension() == ".map") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw MapError("no .map files in " + source.directory.string());
    for (const auto& f : files) {
      set.ids.push_back(f.stem().string());
      set.grids.push_back(std::make_shared<const OccupancyGrid>(load_map(f)));
    }
    return set;
  }
  for (int i = 0; i < source.count; ++i) {
    set.ids.push_back(generated_map_id(i));
    set.grids.push_back(
        std::make_shared<const OccupancyGrid>(generate_map(generated_map_spec(source.spec, i))));
  }
  return set;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view map_id, int start_id) {
  std::string key(map_id);
  key += '/';
  key += std::to_string(start_id);
  return master_seed ^ fnv1a(key);
}

std::vector<TrialRecord> run_suite(const ExperimentConfig& config, const MapSet& maps) {
  if (maps.size() == 0) throw ConfigError("empty map set");
  const auto model = make_model(config.model);
  const InputConstraint input = config.input_constraint();
  for (Algorithm a : config.algorithms) {
    if (!config.planners.count(a)) throw ConfigError("no settings for " + to_string(a));
  }

  const int n_alg = static_cast<int>(config.algorithms.size());
  const int n_start = static_cast<int>(config.starts.size());
  const int tasks = n_alg * maps.size() * n_start;
  std::vector<RolloutProblem> problems;
  problems.reserve(static_cast<std::size_t>(maps.size()));
  for (int i = 0; i < maps.size(); ++i) {
    problems.push_back(RolloutProblem{
        model, input, StateConstraint(maps.grids[static_cast<std::size_t>(i)], config.state_bounds),
        config.dt});
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(tasks));
  std::vector<std::string> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic, 1)
  for (int task = 0; task < tasks; ++task) {
    const int a = task / (maps.size() * n_start);
    const int map = (task / n_start) % maps.size();
    const int start = task % n_start;
    const Algorithm alg = config.algorithms[static_cast<std::size_t>(a)];
    const auto& map_id = maps.ids[static_cast<std::size_t>(map)];

    TrialOptions options;
    options.max_iters = config.max_iters;
    options.err = config.err;
    options.step_retries = config.step_retries;
    options.seed = trial_seed(config.seed, map_id, start);

    auto& rec = records[static_cast<std::size_t>(task)];
    rec.algorithm = to_string(alg);
    rec.map_id = map_id;
    rec.start_id = start;
    try {
      rec.result =
          closed_loop_drive(config.planners.at(alg), problems[static_cast<std::size_t>(map)],
                            config.starts[static_cast<std::size_t>(start)], config.goal, options);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(task)] = ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ConfigError(e);
  }
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AlgorithmSummary> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no trial records");
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.algorithm) == order.end()) {
      order.push_back(r.algorithm);
    }
  }
  std::vector<AlgorithmSummary> out;
  for (const auto& name : order) {
    AlgorithmSummary s;
    s.algorithm = name;
    std::vector<double> errors;
    double iters_success = 0.0;
    double iters_all = 0.0;
    double time = 0.0;
    for (const auto& r : records) {
      if (r.algorithm != name) continue;
      ++s.trials;
      errors.push_back(r.result.terminal_error);
      iters_all += r.result.iterations;
      time += r.result.wall_time_s;
      if (r.result.success) {
        iters_success += r.result.iterations;
      } else {
        ++s.failures;
      }
    }
    const int successes = s.trials - s.failures;
    s.success_rate = static_cast<double>(successes) / s.trials;
    s.avg_iters =
        successes > 0 ? iters_success / successes : std::numeric_limits<double>::quiet_NaN();
    s.avg_iters_all = iters_all / s.trials;
    s.avg_time_s = time / s.trials;
    s.q1 = quantile(errors, 0.25);
    s.q2 = quantile(errors, 0.5);
    s.q3 = quantile(errors, 0.75);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bicmppi

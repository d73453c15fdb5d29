#include "bicmppi/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace bicmppi {

using Json = nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void write_trials_jsonl(const std::vector<TrialRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    Json j;
    j["algorithm"] = r.algorithm;
    j["map_id"] = r.map_id;
    j["start_id"] = r.start_id;
    j["success"] = r.result.success;
    j["iterations"] = r.result.iterations;
    j["wall_time_s"] = r.result.wall_time_s;
    j["terminal_error"] = number_or_null(r.result.terminal_error);
    j["failure_reason"] =
        r.result.failure_reason ? Json(to_string(*r.result.failure_reason)) : Json(nullptr);
    out << j.dump() << '\n';
  }
  if (!out) throw ReportError("failed to write trial records");
}

std::vector<TrialRecord> read_trials_jsonl(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      TrialRecord r;
      r.algorithm = j.at("algorithm").get<std::string>();
      r.map_id = j.at("map_id").get<std::string>();
      r.start_id = j.at("start_id").get<int>();
      r.result.success = j.at("success").get<bool>();
      r.result.iterations = j.at("iterations").get<int>();
      r.result.wall_time_s = j.at("wall_time_s").get<double>();
      const auto& err = j.at("terminal_error");
      r.result.terminal_error =
          err.is_null() ? std::numeric_limits<double>::quiet_NaN() : err.get<double>();
      const auto& reason = j.at("failure_reason");
      if (!reason.is_null()) r.result.failure_reason = parse_failure_reason(reason.get<std::string>());
      records.push_back(std::move(r));
    } catch (const std::exception& ex) {
      throw ReportError("trial record line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return records;
}

void write_summary_csv(const std::vector<AlgorithmSummary>& summary, std::ostream& out) {
  out << "algorithm,trials,failures,success_rate,avg_iters,avg_time_s,q1,q2,q3\n";
  for (const auto& s : summary) {
    out << s.algorithm << ',' << s.trials << ',' << s.failures << ',' << format_double(s.success_rate)
        << ',' << format_double(s.avg_iters) << ',' << format_double(s.avg_time_s) << ','
        << format_double(s.q1) << ',' << format_double(s.q2) << ',' << format_double(s.q3) << '\n';
  }
  if (!out) throw ReportError("failed to write summary");
}

void write_summary_jsonl(const std::vector<AlgorithmSummary>& summary, std::ostream& out) {
  for (const auto& s : summary) {
    Json j;
    j["algorithm"] = s.algorithm;
    j["trials"] = s.trials;
    j["failures"] = s.failures;
    j["success_rate"] = s.success_rate;
    j["avg_iters"] = number_or_null(s.avg_iters);
    j["avg_iters_all"] = s.avg_iters_all;
    j["avg_time_s"] = s.avg_time_s;
    j["q1"] = number_or_null(s.q1);
    j["q2"] = number_or_null(s.q2);
    j["q3"] = number_or_null(s.q3);
    out << j.dump() << '\n';
  }
  if (!out) throw ReportError("failed to write summary");
}

void write_trajectory_csv(const StateTrajectory& trajectory, std::ostream& out) {
  out << "step";
  for (int i = 0; i < trajectory.state_dim(); ++i) out << ",x" << i;
  out << '\n';
  for (int t = 0; t <= trajectory.horizon(); ++t) {
    out << t;
    for (int i = 0; i < trajectory.state_dim(); ++i) out << ',' << format_double(trajectory.states(i, t));
    out << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ReportError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_suite_outputs(const std::vector<TrialRecord>& records,
                         const std::filesystem::path& directory, bool dump_trajectories) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw ReportError("cannot create " + directory.string() + ": " + ec.message());
  {
    auto out = open_output(directory / "trials.jsonl");
    write_trials_jsonl(records, out);
  }
  const auto summary = summarize(records);
  {
    auto out = open_output(directory / "summary.csv");
    write_summary_csv(summary, out);
  }
  {
    auto out = open_output(directory / "summary.jsonl");
    write_summary_jsonl(summary, out);
  }
  if (!dump_trajectories) return;
  const auto traj_dir = directory / "trajectories";
  std::filesystem::create_directories(traj_dir, ec);
  if (ec) throw ReportError("cannot create " + traj_dir.string() + ": " + ec.message());
  for (const auto& r : records) {
    auto out = open_output(traj_dir / (r.algorithm + "_" + r.map_id + "_" +
                                       std::to_string(r.start_id) + ".csv"));
    write_trajectory_csv(r.result.executed, out);
    if (!out) throw ReportError("failed to write trajectory");
  }
}

}  // namespace bicmppi

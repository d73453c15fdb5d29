#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bicmppi/experiment.hpp"

namespace bicmppi {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object per line with the fields algorithm, map_id, start_id,
/// success, iterations, wall_time_s, terminal_error and failure_reason
/// (null on success). Executed trajectories are not part of the record.
void write_trials_jsonl(const std::vector<TrialRecord>& records, std::ostream& out);
std::vector<TrialRecord> read_trials_jsonl(std::istream& in);

/// Header `algorithm,trials,failures,success_rate,avg_iters,avg_time_s,q1,q2,q3`.
void write_summary_csv(const std::vector<AlgorithmSummary>& summary, std::ostream& out);
/// One JSON object per algorithm; adds avg_iters_all.
void write_summary_jsonl(const std::vector<AlgorithmSummary>& summary, std::ostream& out);

/// Header `step,x0,...,x{n-1}`, one row per executed state.
void write_trajectory_csv(const StateTrajectory& trajectory, std::ostream& out);

/// Shortest decimal that reads back to the same double; `nan`/`inf` as such.
std::string format_double(double value);

/// Writes trials.jsonl, summary.csv, summary.jsonl and, when requested,
/// trajectories/<algorithm>_<map>_<start>.csv under `directory`.
void write_suite_outputs(const std::vector<TrialRecord>& records,
                         const std::filesystem::path& directory, bool dump_trajectories);

}  // namespace bicmppi

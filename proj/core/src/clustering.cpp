#include "bicmppi/clustering.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace bicmppi {

void DbscanParams::validate() const {
  if (min_points < 1) throw std::invalid_argument("dbscan: min_points must be >= 1");
  if (!(eps_max > 0.0)) throw std::invalid_argument("dbscan: eps_max must be positive");
  if (!(cost_weight >= 0.0)) throw std::invalid_argument("dbscan: cost_weight must be >= 0");
}

FeatureMatrix build_features(const RolloutBatch& batch, const InputVector& noise_variance,
                             const DbscanParams& params) {
  FeatureMatrix features;
  features.total_samples = batch.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < batch.size(); ++k) {
    const auto& c = batch.costs[static_cast<std::size_t>(k)];
    if (c.collided) continue;
    features.sample_index.push_back(k);
    lo = std::min(lo, c.value);
    hi = std::max(hi, c.value);
  }
  if (features.sample_index.empty()) {
    throw NoValidSampleError("build_features: every sample collided");
  }

  const auto& first = batch.noises[static_cast<std::size_t>(features.sample_index[0])];
  const int m = static_cast<int>(first.rows());
  const int horizon = static_cast<int>(first.cols());
  const int noise_dims = params.scheme == FeatureScheme::kTimeMean ? m : m * horizon;
  const Eigen::VectorXd inv_std = noise_variance.cwiseSqrt().cwiseInverse();
  const double span = hi - lo;

  const int rows = static_cast<int>(features.sample_index.size());
  features.rows.resize(rows, noise_dims + 1);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const auto k = static_cast<std::size_t>(features.sample_index[static_cast<std::size_t>(r)]);
    const Eigen::MatrixXd white = inv_std.asDiagonal() * batch.noises[k];
    if (params.scheme == FeatureScheme::kTimeMean) {
      features.rows.row(r).head(m) = white.rowwise().mean().transpose();
    } else {
      features.rows.row(r).head(noise_dims) =
          Eigen::Map<const Eigen::RowVectorXd>(white.data(), noise_dims);
    }
    const double normalized = span > 0.0 ? (batch.costs[k].value - lo) / span : 0.0;
    features.rows(r, noise_dims) = params.cost_weight * normalized;
  }
  return features;
}

std::vector<int> dbscan_labels(const Eigen::MatrixXd& points, int min_points, double eps) {
  const int n = static_cast<int>(points.rows());
  const double eps2 = eps * eps;
  const Eigen::MatrixXd cols = points.transpose();  // one contiguous column per point
  const auto near = [&](int a, int b) { return (cols.col(a) - cols.col(b)).squaredNorm() <= eps2; };

  std::vector<char> core(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = 0; j < n && count < min_points; ++j) count += near(i, j) ? 1 : 0;
    core[static_cast<std::size_t>(i)] = count >= min_points ? 1 : 0;
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::deque<int> frontier;
  int next_cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] >= 0 || !core[static_cast<std::size_t>(i)]) continue;
    const int cluster = next_cluster++;
    labels[static_cast<std::size_t>(i)] = cluster;
    frontier.assign(1, i);
    while (!frontier.empty()) {
      const int q = frontier.front();
      frontier.pop_front();
      if (!core[static_cast<std::size_t>(q)]) continue;  // border points do not expand
      for (int r = 0; r < n; ++r) {
        if (labels[static_cast<std::size_t>(r)] < 0 && near(q, r)) {
          labels[static_cast<std::size_t>(r)] = cluster;
          frontier.push_back(r);
        }
      }
    }
  }
  return labels;
}

ClusterSet dbscan(const FeatureMatrix& features, const DbscanParams& params) {
  params.validate();
  const std::vector<int> labels =
      dbscan_labels(features.rows, params.min_points, params.eps_max);
  ClusterSet set;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int label = labels[r];
    if (label < 0) continue;
    if (label >= set.size()) set.clusters.resize(static_cast<std::size_t>(label) + 1);
    set.clusters[static_cast<std::size_t>(label)].push_back(features.sample_index[r]);
  }
  if (set.clusters.empty()) {
    std::vector<int> all(static_cast<std::size_t>(features.total_samples));
    for (int k = 0; k < features.total_samples; ++k) all[static_cast<std::size_t>(k)] = k;
    set.clusters.push_back(std::move(all));
    set.fallback = true;
  }
  return set;
}

std::vector<ControlSequence> cluster_controls(const RolloutBatch& batch,
                                              const ClusterSet& clusters, double gamma,
                                              const InputConstraint& clip) {
  std::vector<ControlSequence> out(static_cast<std::size_t>(clusters.size()));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < clusters.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    out[si] = weighted_average(batch, clusters.clusters[si], gamma, clip);
  }
  return out;
}

int argmin_cost(const std::vector<RolloutCost>& costs) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(costs.size()); ++i) {
    const auto& c = costs[static_cast<std::size_t>(i)];
    if (c.collided) continue;
    if (best < 0 || c.value < costs[static_cast<std::size_t>(best)].value) best = i;
  }
  return best;
}

ClusterMppiResult cluster_mppi_step(const RolloutProblem& problem, const ControlSequence& base,
                                    const StateVector& x_init,
                                    const ClusterMppiSettings& settings) {
  const auto& mppi = settings.mppi;
  const RolloutBatch batch = sample_batch(problem, base, mppi.noise, mppi.samples, x_init,
                                          Direction::kForward, mppi.cost);
  const FeatureMatrix features = build_features(batch, mppi.noise.variance, settings.dbscan);
  const ClusterSet clusters = dbscan(features, settings.dbscan);
  std::vector<ControlSequence> controls =
      cluster_controls(batch, clusters, mppi.noise.gamma, problem.input_constraint);

  ClusterMppiResult result;
  result.cluster_count = clusters.size();
  result.cluster_costs.resize(controls.size());
  for (std::size_t i = 0; i < controls.size(); ++i) {
    try {
      const auto traj =
          rollout(*problem.model, x_init, controls[i], Direction::kForward, problem.dt);
      result.cluster_costs[i] = evaluate_cost(*problem.model, traj, controls[i], mppi.cost,
                                              problem.state_constraint, Direction::kForward);
    } catch (const NumericError&) {
      result.cluster_costs[i] = {0.0, true, true};
    }
  }
  const int best = argmin_cost(result.cluster_costs);
  if (best >= 0) {
    result.selected_cluster = best;
    result.control = std::move(controls[static_cast<std::size_t>(best)]);
    return result;
  }
  const int best_sample = argmin_cost(batch.costs);
  if (best_sample < 0) throw NoValidSampleError("cluster_mppi_step: every sample collided");
  result.control = batch.inputs[static_cast<std::size_t>(best_sample)];
  return result;
}

}  // namespace bicmppi

#pragma once

#include <vector>

#include "bicmppi/mppi.hpp"

namespace bicmppi {

enum class FeatureScheme {
  kTimeMean,   // per-channel time mean of whitened noise (m values)
  kFlattened,  // whole whitened noise sequence (m*T values)
};

struct DbscanParams {
  int min_points = 5;
  double eps_max = 0.05;
  double cost_weight = 1.0;  // beta, scale of the normalized-cost feature
  FeatureScheme scheme = FeatureScheme::kTimeMean;

  void validate() const;
};

/// One row per non-collided sample, plus the map back to batch indices.
struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::vector<int> sample_index;
  int total_samples = 0;
};

/// Disjoint index sets over batch samples. `fallback` marks the single
/// all-sample cluster used when DBSCAN finds nothing.
struct ClusterSet {
  std::vector<std::vector<int>> clusters;
  bool fallback = false;

  int size() const { return static_cast<int>(clusters.size()); }
};

FeatureMatrix build_features(const RolloutBatch& batch, const InputVector& noise_variance,
                             const DbscanParams& params);

/// Plain DBSCAN over the rows of `points` (one point per row).
///
/// A point is core when at least `min_points` points, itself included, lie
/// within `eps` (Euclidean, inclusive). Points are scanned in index order, so
/// a border point reachable from several clusters joins the one discovered
/// first. Returns one label per point: cluster id in discovery order, or -1
/// for noise.
std::vector<int> dbscan_labels(const Eigen::MatrixXd& points, int min_points, double eps);

/// DBSCAN on the feature rows, mapped back to sample indices, with the
/// all-sample fallback when no cluster forms.
ClusterSet dbscan(const FeatureMatrix& features, const DbscanParams& params);

/// Per-cluster softmax average, each with its own baseline.
std::vector<ControlSequence> cluster_controls(const RolloutBatch& batch,
                                              const ClusterSet& clusters, double gamma,
                                              const InputConstraint& clip);

struct ClusterMppiSettings {
  MppiSettings mppi;
  DbscanParams dbscan;
};

struct ClusterMppiResult {
  ControlSequence control;
  int cluster_count = 0;
  int selected_cluster = -1;  // -1 when the best single sample was used
  std::vector<RolloutCost> cluster_costs;
};

/// Samples, clusters, averages per cluster and returns the cluster average
/// with the lowest rollout cost (ties to the lowest cluster index).
ClusterMppiResult cluster_mppi_step(const RolloutProblem& problem, const ControlSequence& base,
                                    const StateVector& x_init,
                                    const ClusterMppiSettings& settings);

/// Index of the lowest non-collided cost, ties to the lowest index; -1 if all collided.
int argmin_cost(const std::vector<RolloutCost>& costs);

}  // namespace bicmppi

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coptact/common.hpp"

namespace coptact::probe {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One recorded rollout: per-step latent vectors with aligned targets and
/// a trajectory-level label (e.g. a mass bucket).
struct LatentTrajectory {
    MatrixXd latents;  // T x D
    MatrixXd targets;  // T x K
    std::string label;
};

struct LatentTrajectorySet {
    std::vector<LatentTrajectory> trajectories;

    int dim_latent() const { return trajectories.empty() ? 0 : static_cast<int>(trajectories[0].latents.cols()); }
    int dim_target() const { return trajectories.empty() ? 0 : static_cast<int>(trajectories[0].targets.cols()); }
    void validate() const;
};

/// Ridge least squares with a bias row: returns (D+1) x K weights. With
/// ridge = 0 a rank-deficient design throws SingularDesignError.
MatrixXd linear_probe_fit(const LatentTrajectorySet& train, double ridge);

struct TargetScore {
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when the test column is constant
};

std::vector<TargetScore> probe_score(const MatrixXd& weights, const LatentTrajectorySet& test);

struct PcaResult {
    MatrixXd scores;               // M x k
    MatrixXd components;           // D x k, orthonormal columns
    VectorXd explained_variance_ratio;  // k, non-increasing
};

/// Mean-centered projection onto the top-k principal directions. Uses the
/// covariance eigendecomposition when M > D and the Gram route otherwise.
/// Sign convention: the largest-magnitude loading of each component is
/// positive.
PcaResult pca_project(const MatrixXd& latents, int k);

/// Mean silhouette value over all points, Euclidean metric; points in
/// singleton clusters score zero.
double silhouette_coefficient(const MatrixXd& points, const std::vector<int>& labels);

struct TemporalClusterPoint {
    int time_index = 0;
    double sc_pca = 0.0;   // silhouette on the k-dim PCA scores
    double sc_full = 0.0;  // silhouette on the raw latents
};

/// Per-time cluster separation of the trajectory labels: at each requested
/// step, latents across trajectories are PCA-projected and scored.
std::vector<TemporalClusterPoint> temporal_cluster_report(const LatentTrajectorySet& set,
                                                          const std::vector<int>& times, int k);

}  // namespace coptact::probe

#include "coptact/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace coptact::probe {

void LatentTrajectorySet::validate() const {
    if (trajectories.empty()) throw Error("LatentTrajectorySet: empty set");
    const int d = dim_latent();
    const int k = dim_target();
    for (const auto& t : trajectories) {
        if (t.latents.cols() != d || t.targets.cols() != k) {
            throw Error("LatentTrajectorySet: inconsistent dimensions across trajectories");
        }
        if (t.latents.rows() != t.targets.rows()) {
            throw Error("LatentTrajectorySet: latent/target length mismatch");
        }
        if (!t.latents.allFinite() || !t.targets.allFinite()) {
            throw Error("LatentTrajectorySet: non-finite entries");
        }
    }
}

namespace {

// Stacks every step of every trajectory; appends the bias column.
void stack_design(const LatentTrajectorySet& set, MatrixXd* x, MatrixXd* y) {
    long rows = 0;
    for (const auto& t : set.trajectories) rows += t.latents.rows();
    const int d = set.dim_latent();
    const int k = set.dim_target();
    x->resize(rows, d + 1);
    y->resize(rows, k);
    long at = 0;
    for (const auto& t : set.trajectories) {
        x->block(at, 0, t.latents.rows(), d) = t.latents;
        x->block(at, d, t.latents.rows(), 1).setOnes();
        y->block(at, 0, t.targets.rows(), k) = t.targets;
        at += t.latents.rows();
    }
}

}  // namespace

MatrixXd linear_probe_fit(const LatentTrajectorySet& train, double ridge) {
    train.validate();
    if (ridge < 0.0) throw Error("linear_probe_fit: ridge must be >= 0");
    MatrixXd x, y;
    stack_design(train, &x, &y);

    MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += ridge;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    const VectorXd& ev = eig.eigenvalues();
    const double ev_max = ev(ev.size() - 1);
    if (ridge == 0.0 && (ev(0) <= 0.0 || ev(0) < 1e-10 * std::max(ev_max, 1.0))) {
        throw SingularDesignError("linear_probe_fit: rank-deficient design with ridge = 0");
    }
    // W = Q diag(1/ev) Q^T X^T Y
    MatrixXd rhs = eig.eigenvectors().transpose() * (x.transpose() * y);
    for (long i = 0; i < ev.size(); ++i) {
        rhs.row(i) /= std::max(ev(i), 1e-300);
    }
    return eig.eigenvectors() * rhs;
}

std::vector<TargetScore> probe_score(const MatrixXd& weights, const LatentTrajectorySet& test) {
    test.validate();
    if (weights.rows() != test.dim_latent() + 1 || weights.cols() != test.dim_target()) {
        throw Error("probe_score: weight shape does not match the set");
    }
    MatrixXd x, y;
    stack_design(test, &x, &y);
    const MatrixXd pred = x * weights;
    const long m = y.rows();

    std::vector<TargetScore> out(y.cols());
    for (long c = 0; c < y.cols(); ++c) {
        const double ss_res = (pred.col(c) - y.col(c)).squaredNorm();
        const double mean = y.col(c).mean();
        const double ss_tot = (y.col(c).array() - mean).matrix().squaredNorm();
        TargetScore score;
        score.rmse = std::sqrt(ss_res / static_cast<double>(m));
        if (ss_tot < 1e-18) {
            score.r2_defined = false;
            score.r2 = std::numeric_limits<double>::quiet_NaN();
        } else {
            score.r2 = 1.0 - ss_res / ss_tot;
        }
        out[c] = score;
    }
    return out;
}

PcaResult pca_project(const MatrixXd& latents, int k) {
    const long m = latents.rows();
    const long d = latents.cols();
    if (m < 1 || k < 1 || k > std::min<long>(m, d)) {
        throw Error("pca_project: need M >= k >= 1 and k <= D");
    }
    const MatrixXd centered = latents.rowwise() - latents.colwise().mean();
    const double total_scatter = centered.squaredNorm();

    PcaResult out;
    out.scores.resize(m, k);
    out.components.resize(d, k);
    out.explained_variance_ratio.resize(k);

    if (m > d) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered.transpose() * centered);
        for (int j = 0; j < k; ++j) {
            const long src = d - 1 - j;  // eigenvalues ascend
            out.components.col(j) = eig.eigenvectors().col(src);
            out.explained_variance_ratio(j) =
                total_scatter > 0.0 ? std::max(eig.eigenvalues()(src), 0.0) / total_scatter : 0.0;
        }
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered * centered.transpose());
        for (int j = 0; j < k; ++j) {
            const long src = m - 1 - j;
            const double ev = std::max(eig.eigenvalues()(src), 0.0);
            out.explained_variance_ratio(j) = total_scatter > 0.0 ? ev / total_scatter : 0.0;
            if (ev > 1e-30) {
                out.components.col(j) = centered.transpose() * eig.eigenvectors().col(src) / std::sqrt(ev);
            } else {
                out.components.col(j) = VectorXd::Unit(d, j % d);
            }
        }
    }

    // sign convention: largest-magnitude loading positive
    for (int j = 0; j < k; ++j) {
        long arg = 0;
        out.components.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.components(arg, j) < 0.0) out.components.col(j) = -out.components.col(j);
    }
    out.scores = centered * out.components;
    return out;
}

double silhouette_coefficient(const MatrixXd& points, const std::vector<int>& labels) {
    const long m = points.rows();
    if (static_cast<long>(labels.size()) != m) {
        throw Error("silhouette_coefficient: label count mismatch");
    }
    std::map<int, int> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) {
        throw SingleClusterError("silhouette_coefficient: need at least 2 clusters");
    }

    double acc = 0.0;
    for (long i = 0; i < m; ++i) {
        if (sizes[labels[i]] == 1) continue;  // singleton scores zero
        std::map<int, double> dist_sum;
        for (long j = 0; j < m; ++j) {
            if (j == i) continue;
            dist_sum[labels[j]] += (points.row(i) - points.row(j)).norm();
        }
        const double a = dist_sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, sum] : dist_sum) {
            if (label == labels[i]) continue;
            b = std::min(b, sum / static_cast<double>(sizes[label]));
        }
        const double denom = std::max(a, b);
        acc += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return acc / static_cast<double>(m);
}

std::vector<TemporalClusterPoint> temporal_cluster_report(const LatentTrajectorySet& set,
                                                          const std::vector<int>& times, int k) {
    set.validate();
    std::vector<int> labels;
    std::map<std::string, int> label_ids;
    for (const auto& t : set.trajectories) {
        const auto [it, inserted] = label_ids.try_emplace(t.label, static_cast<int>(label_ids.size()));
        labels.push_back(it->second);
    }
    if (label_ids.size() < 2) {
        throw SingleClusterError("temporal_cluster_report: all trajectory labels identical");
    }

    const long n_traj = static_cast<long>(set.trajectories.size());
    const int d = set.dim_latent();
    std::vector<TemporalClusterPoint> out;
    out.reserve(times.size());
    for (int t : times) {
        MatrixXd step(n_traj, d);
        for (long j = 0; j < n_traj; ++j) {
            if (t < 0 || t >= set.trajectories[j].latents.rows()) {
                throw Error("temporal_cluster_report: time index out of range");
            }
            step.row(j) = set.trajectories[j].latents.row(t);
        }
        TemporalClusterPoint point;
        point.time_index = t;
        point.sc_full = silhouette_coefficient(step, labels);
        const PcaResult pca = pca_project(step, std::min<int>(k, static_cast<int>(std::min<long>(n_traj, d))));
        point.sc_pca = silhouette_coefficient(pca.scores, labels);
        out.push_back(point);
    }
    return out;
}

}  // namespace coptact::probe

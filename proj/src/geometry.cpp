#include "coptact/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace coptact::geom {

bool Rotation::is_valid(const Matrix3d& m, double tol) {
    const double ortho = (m.transpose() * m - Matrix3d::Identity()).norm();
    return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation Rotation::from_matrix(const Matrix3d& m) {
    if (!is_valid(m)) {
        throw Error("Rotation::from_matrix: matrix is not a proper rotation");
    }
    return Rotation(m);
}

Rotation Rotation::from_axis_angle(const Vector3d& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-15) {
        throw Error("Rotation::from_axis_angle: zero axis");
    }
    const Vector3d a = axis / n;
    const Matrix3d k = skew(a);
    // Rodrigues
    Matrix3d m = Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
    return Rotation(m);
}

Svd3 svd3(const Matrix3d& p) {
    Eigen::JacobiSVD<Matrix3d> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Rotation svd_project(const UnconstrainedRotationParam& p) {
    if (!p.allFinite()) {
        throw Error("svd_project: non-finite input");
    }
    const Svd3 s = svd3(p);
    if (s.sigma(2) < kRankDeficientTol) {
        throw RankDeficientError("svd_project: smallest singular value below 1e-12, projection non-unique; re-seed the parameter");
    }
    const double d = (s.u * s.v.transpose()).determinant() >= 0.0 ? 1.0 : -1.0;
    Matrix3d r = s.u * Eigen::DiagonalMatrix<double, 3>(1.0, 1.0, d) * s.v.transpose();
    return Rotation::from_matrix_unchecked(r);
}

Matrix3d svd_project_gradient(const UnconstrainedRotationParam& p, const Matrix3d& upstream) {
    if (!p.allFinite() || !upstream.allFinite()) {
        throw Error("svd_project_gradient: non-finite input");
    }
    const Svd3 s = svd3(p);
    if (s.sigma(2) < kRankDeficientTol) {
        throw RankDeficientError("svd_project_gradient: smallest singular value below 1e-12");
    }
    const double det_uv = (s.u * s.v.transpose()).determinant();
    Vector3d d(1.0, 1.0, det_uv >= 0.0 ? 1.0 : -1.0);
    if (d(2) < 0.0 && s.sigma(1) - s.sigma(2) < kDegenerateSigmaTol) {
        throw DegenerateSingularValuesError("svd_project_gradient: coinciding singular values with det < 0, gradient undefined");
    }

    // R = U D V^T with D constant under perturbation; only the rotational
    // parts of dU, dV contribute. For distinct singular values the first
    // variation gives dL/dP = U W V^T with
    //   W_ij = [G_ij (s_j d_j - s_i d_i) + G_ji (s_i d_j - s_j d_i)] / (s_j^2 - s_i^2)
    // where G = U^T (dL/dR) V. Denominators are clamped at 1e-12.
    const Matrix3d g = s.u.transpose() * upstream * s.v;
    Matrix3d w = Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            double denom = s.sigma(j) * s.sigma(j) - s.sigma(i) * s.sigma(i);
            if (std::abs(denom) < kRankDeficientTol) {
                denom = std::copysign(kRankDeficientTol, denom == 0.0 ? 1.0 : denom);
            }
            const double num = g(i, j) * (s.sigma(j) * d(j) - s.sigma(i) * d(i)) +
                               g(j, i) * (s.sigma(i) * d(j) - s.sigma(j) * d(i));
            w(i, j) = num / denom;
        }
    }
    return s.u * w * s.v.transpose();
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
    const double tr = (a.matrix().transpose() * b.matrix()).trace();
    const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace coptact::geom

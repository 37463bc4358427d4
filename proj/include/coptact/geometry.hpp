#pragma once

#include <Eigen/Dense>

#include "coptact/common.hpp"

namespace coptact::geom {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr double kOrthonormalityTol = 1e-9;
constexpr double kRankDeficientTol = 1e-12;
constexpr double kDegenerateSigmaTol = 1e-9;

/// Proper rotation (orthonormal, det = +1). Checked on construction.
class Rotation {
  public:
    Rotation() : m_(Matrix3d::Identity()) {}

    static Rotation from_matrix(const Matrix3d& m);

    // Skips the orthonormality check; for values produced by trusted code
    // paths (composition, SVD projection).
    static Rotation from_matrix_unchecked(const Matrix3d& m) { return Rotation(m); }

    static Rotation from_axis_angle(const Vector3d& axis, double angle);

    const Matrix3d& matrix() const { return m_; }
    Rotation inverse() const { return Rotation(m_.transpose()); }
    Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
    Vector3d operator*(const Vector3d& v) const { return m_ * v; }

    static bool is_valid(const Matrix3d& m, double tol = kOrthonormalityTol);

  private:
    explicit Rotation(const Matrix3d& m) : m_(m) {}
    Matrix3d m_;
};

/// Frame change: x_parent = rotation * x_child + translation.
struct RigidTransform {
    Rotation rotation;
    Vector3d translation = Vector3d::Zero();

    RigidTransform() = default;
    RigidTransform(const Rotation& r, const Vector3d& t) : rotation(r), translation(t) {}

    Vector3d apply(const Vector3d& p) const { return rotation * p + translation; }

    RigidTransform operator*(const RigidTransform& o) const {
        return {rotation * o.rotation, rotation * o.translation + translation};
    }

    RigidTransform inverse() const {
        Rotation rinv = rotation.inverse();
        return {rinv, -(rinv * translation)};
    }

    static RigidTransform identity() { return {}; }
};

/// Arbitrary 3x3 parameter matrix, projected to SO(3) during evaluation.
using UnconstrainedRotationParam = Matrix3d;

struct Svd3 {
    Matrix3d u;
    Vector3d sigma;  // descending
    Matrix3d v;
};

/// Full 3x3 SVD with U, V orthogonal and singular values sorted descending.
Svd3 svd3(const Matrix3d& p);

/// Nearest rotation in Frobenius norm: R = U diag(1,1,det(UV^T)) V^T.
/// Throws RankDeficientError when sigma_min < 1e-12.
Rotation svd_project(const UnconstrainedRotationParam& p);

/// Reverse-mode derivative of svd_project: given dL/dR, returns dL/dP.
/// Throws DegenerateSingularValuesError when det < 0 and two singular
/// values coincide within 1e-9.
Matrix3d svd_project_gradient(const UnconstrainedRotationParam& p, const Matrix3d& upstream);

/// Angle of the relative rotation a^T b, clamped to [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

inline Matrix3d skew(const Vector3d& w) {
    Matrix3d s;
    s << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return s;
}

}  // namespace coptact::geom

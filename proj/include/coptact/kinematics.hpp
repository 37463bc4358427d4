#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coptact/geometry.hpp"

namespace coptact::kin {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;
using geom::RigidTransform;

/// One revolute joint: fixed parent-to-joint transform followed by a
/// rotation of `angle` about `axis` (unit, joint frame).
struct RevoluteJoint {
    RigidTransform offset;
    Vector3d axis = Vector3d::UnitZ();
};

/// Serial revolute chain from the hand base frame B to the sensor frame S.
struct KinematicChain {
    std::vector<RevoluteJoint> joints;
    RigidTransform sensor_offset;

    int dof() const { return static_cast<int>(joints.size()); }
    void validate() const;
};

struct JointState {
    VectorXd q;
    VectorXd tau;  // optional; empty when not recorded

    void validate(int dof) const;
};

/// Origin and axis of every joint expressed in B, plus the sensor pose.
/// Cached by operations that need both the pose and the Jacobian.
struct FrameChain {
    std::vector<Vector3d> origins;
    std::vector<Vector3d> axes;
    RigidTransform sensor_pose;
};

/// Pose of the sensor frame S in base frame B at joint angles q.
RigidTransform forward_kinematics(const KinematicChain& chain, const VectorXd& q);
RigidTransform forward_kinematics(const KinematicChain& chain, const JointState& state);

FrameChain frame_chain(const KinematicChain& chain, const VectorXd& q);

/// 3xN position Jacobian of a point p (base frame, attached to the last
/// link): column j = axis_j x (p - origin_j).
MatrixXd point_jacobian(const KinematicChain& chain, const VectorXd& q, const Vector3d& p_base);
MatrixXd point_jacobian(const FrameChain& frames, const Vector3d& p_base);

/// Reverse-mode derivative of the Jacobian w.r.t. the point: given
/// dL/dJ, returns dL/dp (d(axis x (p - o))/dp = skew(axis)).
Vector3d point_jacobian_point_vjp(const FrameChain& frames, const MatrixXd& upstream);

/// Static-equilibrium torque tau = -J^T f + g; gravity defaults to zero.
VectorXd equilibrium_torque(const MatrixXd& jacobian, const Vector3d& f);
VectorXd equilibrium_torque(const MatrixXd& jacobian, const Vector3d& f, const VectorXd& gravity);

}  // namespace coptact::kin

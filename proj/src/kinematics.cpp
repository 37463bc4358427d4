#include "coptact/kinematics.hpp"

#include <cmath>

namespace coptact::kin {

void KinematicChain::validate() const {
    for (const auto& j : joints) {
        if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
            throw Error("KinematicChain: joint axis is not a unit vector");
        }
    }
}

FrameChain frame_chain(const KinematicChain& chain, const VectorXd& q) {
    if (q.size() != chain.dof()) {
        throw Error("frame_chain: joint angle dimension does not match chain");
    }
    FrameChain out;
    out.origins.reserve(chain.joints.size());
    out.axes.reserve(chain.joints.size());
    RigidTransform t = RigidTransform::identity();
    for (int j = 0; j < chain.dof(); ++j) {
        t = t * chain.joints[j].offset;
        out.origins.push_back(t.translation);
        out.axes.push_back(t.rotation * chain.joints[j].axis);
        t = t * RigidTransform(geom::Rotation::from_axis_angle(chain.joints[j].axis, q(j)),
                               Vector3d::Zero());
    }
    out.sensor_pose = t * chain.sensor_offset;
    return out;
}

RigidTransform forward_kinematics(const KinematicChain& chain, const VectorXd& q) {
    return frame_chain(chain, q).sensor_pose;
}

void JointState::validate(int dof) const {
    if (q.size() != dof || !q.allFinite()) {
        throw Error("JointState: bad joint angles");
    }
    if (tau.size() != 0 && (tau.size() != dof || !tau.allFinite())) {
        throw Error("JointState: bad joint torques");
    }
}

RigidTransform forward_kinematics(const KinematicChain& chain, const JointState& state) {
    state.validate(chain.dof());
    return frame_chain(chain, state.q).sensor_pose;
}

MatrixXd point_jacobian(const FrameChain& frames, const Vector3d& p_base) {
    const int n = static_cast<int>(frames.axes.size());
    MatrixXd jac(3, n);
    for (int j = 0; j < n; ++j) {
        jac.col(j) = frames.axes[j].cross(p_base - frames.origins[j]);
    }
    return jac;
}

MatrixXd point_jacobian(const KinematicChain& chain, const VectorXd& q, const Vector3d& p_base) {
    return point_jacobian(frame_chain(chain, q), p_base);
}

Vector3d point_jacobian_point_vjp(const FrameChain& frames, const MatrixXd& upstream) {
    Vector3d out = Vector3d::Zero();
    for (int j = 0; j < static_cast<int>(frames.axes.size()); ++j) {
        // column j = skew(axis_j) (p - o_j); transpose of skew is its negative
        out += Vector3d(upstream.col(j)).cross(frames.axes[j]);
    }
    return out;
}

VectorXd equilibrium_torque(const MatrixXd& jacobian, const Vector3d& f) {
    return -jacobian.transpose() * f;
}

VectorXd equilibrium_torque(const MatrixXd& jacobian, const Vector3d& f, const VectorXd& gravity) {
    return -jacobian.transpose() * f + gravity;
}

}  // namespace coptact::kin

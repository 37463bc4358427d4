#pragma once

#include "coptact/kinematics.hpp"
#include "coptact/synthetic.hpp"

namespace coptact::testutil {

// the 4-DOF reference finger (same values as fixtures/finger_4dof.json)
inline kin::KinematicChain reference_finger() {
    using Eigen::Vector3d;
    auto tr = [](double x, double y, double z) {
        return geom::RigidTransform(geom::Rotation(), {x, y, z});
    };
    kin::KinematicChain chain;
    chain.joints.push_back({tr(0, 0, 0), Vector3d::UnitZ()});
    chain.joints.push_back({tr(0, 0, 0.0543), Vector3d::UnitY()});
    chain.joints.push_back({tr(0, 0, 0.0384), Vector3d::UnitY()});
    chain.joints.push_back({tr(0, 0, 0.0437), Vector3d::UnitY()});
    chain.sensor_offset = tr(0, 0, 0.02);
    return chain;
}

inline Eigen::Vector4d nominal_pose() { return {0.1, 0.4, 0.5, 0.4}; }

// calibration benchmark fixture (same values as fixtures/configs/synth_reference.json)
inline synth::CapLayoutSpec benchmark_cap_spec(std::uint64_t seed = 11,
                                               double perturbation_deg = 30.0) {
    synth::CapLayoutSpec spec;
    spec.sigma = 0.00035;
    spec.perturbation = perturbation_deg * M_PI / 180.0;
    spec.seed = seed;
    return spec;
}

inline synth::ContactSpec benchmark_contact_spec(std::uint64_t seed = 12) {
    synth::ContactSpec spec;
    spec.shear_ratio_min = 1.5;
    spec.shear_ratio_max = 3.0;
    spec.seed = seed;
    return spec;
}

}  // namespace coptact::testutil

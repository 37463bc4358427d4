#pragma once

#include <vector>

#include "coptact/kinematics.hpp"
#include "coptact/sensor_model.hpp"
#include "coptact/synthetic.hpp"

namespace coptact::calib {

using Eigen::Matrix3d;
using synth::CalibDataset;
using synth::CalibSample;

/// One unconstrained 3x3 parameter matrix per taxel.
struct RotationParams {
    std::vector<Matrix3d> params;

    static RotationParams from_rotations(const std::vector<geom::Rotation>& rots) {
        RotationParams out;
        out.params.reserve(rots.size());
        for (const auto& r : rots) out.params.push_back(r.matrix());
        return out;
    }

    std::vector<geom::Rotation> project() const {
        std::vector<geom::Rotation> out;
        out.reserve(params.size());
        for (const auto& p : params) out.push_back(geom::svd_project(p));
        return out;
    }
};

struct CalibConfig {
    double learning_rate = 0.1;
    int steps = 100;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    enum class Init { Nominal, Random } init = Init::Nominal;
    int threads = 1;
};

struct CalibReport {
    std::vector<double> loss_history;   // loss at the params entering each step
    double final_loss = 0.0;            // after the last update
    std::vector<geom::Rotation> final_rotations;
    int skipped_count = 0;              // empty-active-set samples per epoch
    std::vector<double> geodesic_errors;  // vs reference, when supplied
};

/// Torque-matching loss for one sample: project params to rotations, map
/// the reading through the taxel->CoP pipeline, transport to the base
/// frame and compare -J^T f against the recorded torques (MSE over the
/// four components). Empty-active-set samples contribute zero.
double calib_loss(const RotationParams& params, const CalibSample& sample,
                  const sensor::TaxelLayout& layout, const kin::KinematicChain& chain);

struct LossGrad {
    double loss = 0.0;
    std::vector<Matrix3d> grad;  // d(mean loss)/dP_i
    int skipped = 0;
};

/// Dataset-mean loss and its gradient with respect to every parameter
/// matrix (reverse mode through the solve, the stress model and the SO(3)
/// projection). Deterministic for any thread count.
LossGrad calib_loss_gradient(const RotationParams& params, const CalibDataset& dataset,
                             const sensor::TaxelLayout& layout, const kin::KinematicChain& chain,
                             int threads = 1);

/// Full-batch Adam on the torque-matching loss.
CalibReport calibrate(const CalibDataset& dataset, const sensor::TaxelLayout& layout,
                      const kin::KinematicChain& chain, const CalibConfig& config,
                      const std::vector<geom::Rotation>* reference = nullptr);

}  // namespace coptact::calib

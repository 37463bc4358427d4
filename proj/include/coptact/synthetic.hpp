#pragma once

#include <vector>

#include "coptact/kinematics.hpp"
#include "coptact/rng.hpp"
#include "coptact/sensor_model.hpp"

namespace coptact::synth {

using Eigen::Vector3d;
using Eigen::Vector4d;

/// Spherical-cap taxel grid: a uniform rows x cols rectangular pad wrapped
/// onto the cap around the +z pole (azimuthal equidistant mapping, so grid
/// pitch is arc length and taxel density is uniform). Desk-scale stand-in
/// for a round fingertip.
struct CapLayoutSpec {
    double radius = 0.010;   // m
    int rows = 4;
    int cols = 6;
    double extent_u = 0.36;  // angular span of the rows direction (rad)
    double extent_v = 0.54;  // angular span of the cols direction (rad)
    double epsilon = 0.005;
    double sigma = 0.0009;
    double lambda = 1e-3;
    bool normal_only = false;

    // true taxel orientations are the nominal ones perturbed by a random
    // axis-angle rotation with angle up to this bound (radians)
    double perturbation = 0.0;
    std::uint64_t seed = 0;
};

struct CapLayout {
    sensor::TaxelLayout layout;                    // nominal orientations
    std::vector<geom::Rotation> true_orientations; // data-generating, possibly perturbed
};

/// Taxels on a spherical cap around the +z pole of the sensor frame, sphere
/// center at the origin; normals point inward (at the cap center).
CapLayout generate_cap_layout(const CapLayoutSpec& spec);

/// Random contacts on the cap: inward normal pressure plus a tangential
/// component, expressed in the sensor frame.
struct ContactSpec {
    double force_min = 0.5;        // total force magnitude range (N)
    double force_max = 3.0;
    double shear_ratio_min = 0.0;  // tangential/normal mixing
    double shear_ratio_max = 0.25;
    double edge_margin = 0.18;     // angular margin inside the pad edges (rad)
    std::uint64_t seed = 0;
};

std::vector<sensor::CopContact> sample_contacts(const CapLayoutSpec& cap, const ContactSpec& spec,
                                                int count);

struct CalibSample {
    sensor::TaxelReading reading;
    Vector4d q;
    Vector4d tau;
};

using CalibDataset = std::vector<CalibSample>;

struct NoiseSpec {
    double force_multiplicative = 0.0;  // reading forces scaled by U(1-a, 1+a)
    double torque_additive = 0.0;       // Gaussian sigma on tau (N*m)
    double q_jitter = 0.0;              // uniform jitter on the nominal joint angles (rad)
    std::uint64_t seed = 0;
};

/// Per contact: taxel forces via the stress model at the true orientations;
/// the stored torque balances the model's own CoP estimate of the noiseless
/// reading, so re-scoring at the true orientations is exact.
CalibDataset synthesize_dataset(const std::vector<sensor::CopContact>& contacts,
                                const sensor::TaxelLayout& true_layout,
                                const kin::KinematicChain& chain, const Vector4d& q_nominal,
                                const NoiseSpec& noise);

}  // namespace coptact::synth

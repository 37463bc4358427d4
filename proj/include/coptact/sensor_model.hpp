#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "coptact/geometry.hpp"

namespace coptact::sensor {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

constexpr double kCoincidenceTol = 1e-9;   // inverse-distance weighting snap
constexpr double kBlendCoincidenceTol = 1e-12;
constexpr double kWeightCutoff = 1e-8;     // taxels below this emit exact zero
constexpr double kIllConditionedThreshold = 1e8;

/// Sensor geometry and stress-model hyperparameters. Immutable after
/// construction; validate() enforces the layout invariants.
struct TaxelLayout {
    std::vector<Vector3d> positions;            // ^S p_i (m)
    std::vector<geom::Rotation> orientations;   // R_i: taxel frame -> sensor frame
    int normal_axis = 2;                        // taxel-frame axis orthogonal to the surface
    double epsilon = 0.05;                      // activity threshold (N)
    double sigma = 0.006;                       // Gaussian spread (m)
    double lambda = 1e-3;                       // ridge parameter (N)
    bool normal_only = false;                   // keep only the surface-normal force component
    bool solve_over_all_taxels = false;         // stack all taxels into the solve, not just active

    int size() const { return static_cast<int>(positions.size()); }

    // n_i = R_i * e_axis
    Vector3d normal(int i) const {
        return orientations[i].matrix().col(normal_axis);
    }

    void validate() const;

    TaxelLayout with_orientations(const std::vector<geom::Rotation>& rot) const {
        TaxelLayout out = *this;
        out.orientations = rot;
        return out;
    }
};

/// Raw per-taxel 3-axis forces, each in its own taxel frame.
struct TaxelReading {
    std::vector<Vector3d> forces;
    double timestamp = 0.0;
};

/// The contact representation: one resultant force applied at one point,
/// both in the sensor frame.
struct CopContact {
    Vector3d force = Vector3d::Zero();      // ^S f_cop (N)
    Vector3d position = Vector3d::Zero();   // ^S p_cop (m)
    int active_count = 0;
};

/// Indices with ||f_i|| strictly above epsilon (frame-independent).
std::vector<int> active_set(const TaxelReading& reading, const TaxelLayout& layout);

/// Force-magnitude weighted mean of active taxel positions.
/// Throws NoContactError on an empty active set.
Vector3d estimate_cop_position(const TaxelReading& reading, const TaxelLayout& layout);

/// Inverse-distance weighting of taxel normals over the given index set;
/// snaps to the coincident taxel's normal when p_cop lies within 1e-9 of
/// it. The estimator pipeline weights over all taxels (the active set
/// restriction applies to the position estimate only).
Vector3d estimate_cop_normal(const Vector3d& p_cop, const TaxelLayout& layout,
                             const std::vector<int>& active);

/// The index set the pipeline uses for the normal estimate: every taxel.
std::vector<int> all_indices(const TaxelLayout& layout);

/// normalize(w_i n_i + (1 - w_i) v_i) with Gaussian radial weight w_i;
/// equals n_i exactly at the contact point.
Vector3d blended_direction(const Vector3d& p_cop, int taxel_index, const Vector3d& n_cop,
                           const TaxelLayout& layout);

/// M_i = w_i (b_i n_cop^T + P_shear), P_shear = I - n_cop n_cop^T.
Matrix3d transfer_matrix(const Vector3d& p_cop, const Vector3d& n_cop, int taxel_index,
                         const TaxelLayout& layout);

/// Distributes a CoP contact into per-taxel forces (taxel frames). In
/// normal_only mode the force is first projected onto the surface normal.
TaxelReading cop_to_taxels(const CopContact& contact, const TaxelLayout& layout);

struct SolveInfo {
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// Ridge least-squares solve for the contact force at a known position.
/// Taxel forces come in taxel frames and are rotated internally.
Vector3d solve_cop_force(const TaxelReading& reading, const Vector3d& p_cop,
                         const TaxelLayout& layout, SolveInfo* info = nullptr);

/// Full taxel -> CoP estimate; nullopt is the explicit no-contact value.
std::optional<CopContact> taxels_to_cop(const TaxelReading& reading, const TaxelLayout& layout,
                                        SolveInfo* info = nullptr);

/// Forward evaluation of the sensor-frame force -> CoP pipeline with all
/// intermediates cached for the reverse-mode passes below. The active-set
/// indicator is treated as locally constant throughout.
struct CopPipeline {
    bool valid = false;             // false when the active set is empty
    std::vector<int> active;        // ascending taxel indices, ||f|| > epsilon
    std::vector<int> solve_idx;     // taxels stacked into A, b
    std::vector<double> norm;       // per active: ||f_i||
    double norm_sum = 0.0;
    Vector3d p_cop = Vector3d::Zero();

    // per-taxel geometry (all N; the normal IDW spans every taxel)
    std::vector<double> dist;
    std::vector<Vector3d> normal;   // layout normal

    // per solve_idx entry
    std::vector<Vector3d> vhat;     // (p_i - p_cop)/dist; unset at coincidence
    std::vector<double> weight;     // Gaussian radial weight
    std::vector<bool> blend_coincident;
    std::vector<Vector3d> cvec;     // pre-normalization blend
    std::vector<Vector3d> bhat;
    std::vector<Matrix3d> transfer;

    int idw_coincident = -1;        // taxel index when the snap rule fired
    Vector3d idw_sum = Vector3d::Zero();
    Vector3d n_cop = Vector3d::Zero();

    MatrixXd a_stack;               // 3|solve| x 3
    VectorXd b_stack;               // 3|solve|
    Matrix3d gram;                  // A^T A + lambda^2 I
    Eigen::SelfAdjointEigenSolver<Matrix3d> gram_eig;
    SolveInfo info;
    Vector3d f_raw = Vector3d::Zero();   // solve output before normal_only
    Vector3d f_cop = Vector3d::Zero();

    std::vector<Vector3d> sensor_forces;  // input copy, all N taxels
};

CopPipeline cop_pipeline_forward(const std::vector<Vector3d>& sensor_forces,
                                 const TaxelLayout& layout);

/// dL/d(sensor-frame forces) for all N taxels given dL/df_cop; includes the
/// position path through the force norms. Inactive taxels get zero.
std::vector<Vector3d> cop_pipeline_vjp_forces(const CopPipeline& fwd, const TaxelLayout& layout,
                                              const Vector3d& upstream);

/// dL/dR_i for all N taxels given dL/df_cop and the taxel-frame forces the
/// sensor forces were produced from. Holds the force norms (and hence
/// p_cop and the radial weights) fixed; exact once composed with the SO(3)
/// projection, which annihilates the norm-direction component.
std::vector<Matrix3d> cop_pipeline_vjp_rotations(const CopPipeline& fwd, const TaxelLayout& layout,
                                                 const std::vector<Vector3d>& taxel_forces,
                                                 const Vector3d& upstream);

/// 3 x 3N Jacobian of the estimated CoP force w.r.t. the sensor-frame taxel
/// forces (three reverse passes over the cached pipeline).
MatrixXd taxels_to_cop_force_jacobian(const std::vector<Vector3d>& sensor_forces,
                                      const TaxelLayout& layout);

}  // namespace coptact::sensor

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coptact/calibration.hpp"
#include "coptact/kinematics.hpp"
#include "coptact/probe.hpp"
#include "coptact/sensor_model.hpp"
#include "coptact/sysid.hpp"

namespace coptact::io {

using nlohmann::json;

/// 17-significant-digit formatting used for all CSV output.
std::string format_double(double v);

/// Throws SchemaError when `obj` holds a key outside `allowed`.
void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context);

json rotation_to_json(const geom::Rotation& r);           // row-major 9-array
geom::Rotation rotation_from_json(const json& j, const std::string& context);
json vector3_to_json(const Eigen::Vector3d& v);
Eigen::Vector3d vector3_from_json(const json& j, const std::string& context);

// ---- layout -------------------------------------------------------------
json layout_to_json(const sensor::TaxelLayout& layout);
sensor::TaxelLayout layout_from_json(const json& j);
void save_layout(const std::string& path, const sensor::TaxelLayout& layout);
sensor::TaxelLayout load_layout(const std::string& path);

// ---- kinematic chain ----------------------------------------------------
json chain_to_json(const kin::KinematicChain& chain);
kin::KinematicChain chain_from_json(const json& j);
void save_chain(const std::string& path, const kin::KinematicChain& chain);
kin::KinematicChain load_chain(const std::string& path);

// ---- reading stream CSV: t, fx_0, fy_0, fz_0, ..., fz_{N-1} --------------
void save_readings_csv(const std::string& path, const std::vector<sensor::TaxelReading>& readings,
                       int n_taxels);
std::vector<sensor::TaxelReading> load_readings_csv(const std::string& path, int n_taxels);

// ---- calibration dataset CSV: t, q0..q3, tau0..tau3, fx_0..fz_{N-1} ------
void save_dataset_csv(const std::string& path, const synth::CalibDataset& dataset, int n_taxels);
synth::CalibDataset load_dataset_csv(const std::string& path, int n_taxels);

// ---- CoP stream CSV: t, fx, fy, fz, px, py, pz, active_count, valid ------
struct CopRow {
    double t = 0.0;
    bool valid = false;
    sensor::CopContact contact;
};
void save_cop_csv(const std::string& path, const std::vector<CopRow>& rows);
std::vector<CopRow> load_cop_csv(const std::string& path);

// ---- synthetic benchmark manifest ----------------------------------------
struct SynthManifest {
    json spec;  // echo of the generating configuration
    std::uint64_t seed = 0;
    std::vector<geom::Rotation> true_orientations;
    std::string timestamp;  // the one field excluded from byte comparisons
};
void save_manifest(const std::string& path, const SynthManifest& manifest);
SynthManifest load_manifest(const std::string& path);

// ---- calibration report ---------------------------------------------------
json calib_report_to_json(const calib::CalibReport& report);
void save_calib_report(const std::string& path, const calib::CalibReport& report);
void save_loss_history_csv(const std::string& path, const std::vector<double>& history);

// ---- actuator trajectories: t, q_target, q_measured -----------------------
void save_trajectory_csv(const std::string& path, const sysid::Trajectory& traj);
sysid::Trajectory load_trajectory_csv(const std::string& path);

// ---- latent trajectories: t, latent_0.., target_0.. -----------------------
void save_latent_trajectory_csv(const std::string& path, const probe::LatentTrajectory& traj);
probe::LatentTrajectory load_latent_trajectory_csv(const std::string& path, int dim_latent,
                                                   int dim_target);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace coptact::io

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coptact/calibration.hpp"
#include "coptact/io.hpp"
#include "coptact/probe.hpp"
#include "coptact/synthetic.hpp"
#include "coptact/sysid.hpp"

namespace py = pybind11;
using namespace coptact;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::Vector4d;

namespace {

sensor::TaxelReading reading_from_array(const MatrixXd& forces) {
    sensor::TaxelReading reading;
    for (long i = 0; i < forces.rows(); ++i) reading.forces.push_back(forces.row(i));
    return reading;
}

MatrixXd reading_to_array(const sensor::TaxelReading& reading) {
    MatrixXd out(reading.forces.size(), 3);
    for (size_t i = 0; i < reading.forces.size(); ++i) out.row(i) = reading.forces[i];
    return out;
}

std::vector<geom::Rotation> rotations_from_array(const std::vector<Matrix3d>& mats) {
    std::vector<geom::Rotation> out;
    out.reserve(mats.size());
    for (const auto& m : mats) out.push_back(geom::Rotation::from_matrix(m));
    return out;
}

}  // namespace

PYBIND11_MODULE(_coptact, m) {
    m.doc() = "center-of-pressure tactile contact toolkit";

    // ---- geometry ----
    m.def("svd_project", [](const Matrix3d& p) { return geom::svd_project(p).matrix(); },
          py::arg("p"), "Nearest rotation to an arbitrary 3x3 matrix (R9+SVD).");
    m.def("svd_project_gradient", &geom::svd_project_gradient, py::arg("p"), py::arg("upstream"));
    m.def("geodesic_angle",
          [](const Matrix3d& a, const Matrix3d& b) {
              return geom::geodesic_angle(geom::Rotation::from_matrix(a),
                                          geom::Rotation::from_matrix(b));
          },
          py::arg("a"), py::arg("b"));

    // ---- sensor model ----
    py::class_<sensor::TaxelLayout>(m, "TaxelLayout")
        .def(py::init([](const MatrixXd& positions, const std::vector<Matrix3d>& orientations,
                         int normal_axis, double epsilon, double sigma, double lambda,
                         bool normal_only) {
                 sensor::TaxelLayout layout;
                 for (long i = 0; i < positions.rows(); ++i) {
                     layout.positions.push_back(positions.row(i));
                 }
                 layout.orientations = rotations_from_array(orientations);
                 layout.normal_axis = normal_axis;
                 layout.epsilon = epsilon;
                 layout.sigma = sigma;
                 layout.lambda = lambda;
                 layout.normal_only = normal_only;
                 layout.validate();
                 return layout;
             }),
             py::arg("positions"), py::arg("orientations"), py::arg("normal_axis") = 2,
             py::arg("epsilon") = 0.005, py::arg("sigma") = 0.0009, py::arg("lambda_") = 1e-3,
             py::arg("normal_only") = false)
        .def_property_readonly("n_taxels", &sensor::TaxelLayout::size)
        .def_property_readonly("positions",
                               [](const sensor::TaxelLayout& l) {
                                   MatrixXd out(l.size(), 3);
                                   for (int i = 0; i < l.size(); ++i) out.row(i) = l.positions[i];
                                   return out;
                               })
        .def_property_readonly("orientations",
                               [](const sensor::TaxelLayout& l) {
                                   std::vector<Matrix3d> out;
                                   for (const auto& r : l.orientations) out.push_back(r.matrix());
                                   return out;
                               })
        .def_readonly("epsilon", &sensor::TaxelLayout::epsilon)
        .def_readonly("sigma", &sensor::TaxelLayout::sigma)
        .def_readonly("normal_only", &sensor::TaxelLayout::normal_only)
        .def("normal", &sensor::TaxelLayout::normal, py::arg("i"));

    m.def("load_layout", &io::load_layout, py::arg("path"));
    m.def("save_layout", &io::save_layout, py::arg("path"), py::arg("layout"));

    m.def("active_set",
          [](const MatrixXd& forces, const sensor::TaxelLayout& layout) {
              return sensor::active_set(reading_from_array(forces), layout);
          },
          py::arg("taxel_forces"), py::arg("layout"));

    m.def("taxels_to_cop",
          [](const MatrixXd& forces, const sensor::TaxelLayout& layout) -> py::object {
              const auto contact = sensor::taxels_to_cop(reading_from_array(forces), layout);
              if (!contact) return py::none();
              return py::make_tuple(contact->force, contact->position, contact->active_count);
          },
          py::arg("taxel_forces"), py::arg("layout"),
          "Returns (force, position, active_count) or None when no taxel is active.");

    m.def("cop_to_taxels",
          [](const Vector3d& force, const Vector3d& position, const sensor::TaxelLayout& layout) {
              sensor::CopContact contact;
              contact.force = force;
              contact.position = position;
              return reading_to_array(sensor::cop_to_taxels(contact, layout));
          },
          py::arg("force"), py::arg("position"), py::arg("layout"));

    m.def("solve_cop_force",
          [](const MatrixXd& forces, const Vector3d& p_cop, const sensor::TaxelLayout& layout) {
              return sensor::solve_cop_force(reading_from_array(forces), p_cop, layout);
          },
          py::arg("taxel_forces"), py::arg("p_cop"), py::arg("layout"));

    m.def("taxels_to_cop_force_jacobian",
          [](const MatrixXd& sensor_forces, const sensor::TaxelLayout& layout) {
              std::vector<Vector3d> forces;
              for (long i = 0; i < sensor_forces.rows(); ++i) forces.push_back(sensor_forces.row(i));
              return sensor::taxels_to_cop_force_jacobian(forces, layout);
          },
          py::arg("sensor_forces"), py::arg("layout"));

    // ---- kinematics ----
    py::class_<kin::KinematicChain>(m, "KinematicChain")
        .def_property_readonly("dof", &kin::KinematicChain::dof);
    m.def("load_chain", &io::load_chain, py::arg("path"));
    m.def("forward_kinematics",
          [](const kin::KinematicChain& chain, const Eigen::VectorXd& q) {
              const auto pose = kin::forward_kinematics(chain, q);
              return py::make_tuple(pose.rotation.matrix(), pose.translation);
          },
          py::arg("chain"), py::arg("q"), "Returns (rotation, translation) of S in B.");
    m.def("point_jacobian",
          [](const kin::KinematicChain& chain, const Eigen::VectorXd& q, const Vector3d& p) {
              return kin::point_jacobian(chain, q, p);
          },
          py::arg("chain"), py::arg("q"), py::arg("p_base"));
    m.def("equilibrium_torque",
          [](const MatrixXd& jacobian, const Vector3d& f) {
              return kin::equilibrium_torque(jacobian, f);
          },
          py::arg("jacobian"), py::arg("force"));

    // ---- synthetic ----
    py::class_<synth::CapLayoutSpec>(m, "CapLayoutSpec")
        .def(py::init<>())
        .def_readwrite("radius", &synth::CapLayoutSpec::radius)
        .def_readwrite("rows", &synth::CapLayoutSpec::rows)
        .def_readwrite("cols", &synth::CapLayoutSpec::cols)
        .def_readwrite("extent_u", &synth::CapLayoutSpec::extent_u)
        .def_readwrite("extent_v", &synth::CapLayoutSpec::extent_v)
        .def_readwrite("epsilon", &synth::CapLayoutSpec::epsilon)
        .def_readwrite("sigma", &synth::CapLayoutSpec::sigma)
        .def_readwrite("lambda_", &synth::CapLayoutSpec::lambda)
        .def_readwrite("normal_only", &synth::CapLayoutSpec::normal_only)
        .def_readwrite("perturbation", &synth::CapLayoutSpec::perturbation)
        .def_readwrite("seed", &synth::CapLayoutSpec::seed);

    m.def("generate_cap_layout",
          [](const synth::CapLayoutSpec& spec) {
              const auto cap = synth::generate_cap_layout(spec);
              std::vector<Matrix3d> truth;
              for (const auto& r : cap.true_orientations) truth.push_back(r.matrix());
              return py::make_tuple(cap.layout, truth);
          },
          py::arg("spec"), "Returns (layout, true_orientations).");

    py::class_<synth::ContactSpec>(m, "ContactSpec")
        .def(py::init<>())
        .def_readwrite("force_min", &synth::ContactSpec::force_min)
        .def_readwrite("force_max", &synth::ContactSpec::force_max)
        .def_readwrite("shear_ratio_min", &synth::ContactSpec::shear_ratio_min)
        .def_readwrite("shear_ratio_max", &synth::ContactSpec::shear_ratio_max)
        .def_readwrite("edge_margin", &synth::ContactSpec::edge_margin)
        .def_readwrite("seed", &synth::ContactSpec::seed);

    m.def("sample_contacts",
          [](const synth::CapLayoutSpec& cap, const synth::ContactSpec& spec, int count) {
              const auto contacts = synth::sample_contacts(cap, spec, count);
              MatrixXd forces(contacts.size(), 3), positions(contacts.size(), 3);
              for (size_t i = 0; i < contacts.size(); ++i) {
                  forces.row(i) = contacts[i].force;
                  positions.row(i) = contacts[i].position;
              }
              return py::make_tuple(forces, positions);
          },
          py::arg("cap_spec"), py::arg("contact_spec"), py::arg("count"),
          "Returns (forces, positions) arrays.");

    m.def("synthesize_dataset",
          [](const MatrixXd& forces, const MatrixXd& positions,
             const sensor::TaxelLayout& true_layout, const kin::KinematicChain& chain,
             const Vector4d& q_nominal, double force_noise, double torque_noise,
             double q_jitter, std::uint64_t seed) {
              std::vector<sensor::CopContact> contacts;
              for (long i = 0; i < forces.rows(); ++i) {
                  sensor::CopContact c;
                  c.force = forces.row(i);
                  c.position = positions.row(i);
                  contacts.push_back(c);
              }
              synth::NoiseSpec noise;
              noise.force_multiplicative = force_noise;
              noise.torque_additive = torque_noise;
              noise.q_jitter = q_jitter;
              noise.seed = seed;
              const auto dataset =
                  synth::synthesize_dataset(contacts, true_layout, chain, q_nominal, noise);
              py::list out;
              for (const auto& s : dataset) {
                  py::dict d;
                  d["forces"] = reading_to_array(s.reading);
                  d["q"] = s.q;
                  d["tau"] = s.tau;
                  out.append(d);
              }
              return out;
          },
          py::arg("contact_forces"), py::arg("contact_positions"), py::arg("true_layout"),
          py::arg("chain"), py::arg("q_nominal"), py::arg("force_noise") = 0.0,
          py::arg("torque_noise") = 0.0, py::arg("q_jitter") = 0.0, py::arg("seed") = 0);

    // ---- calibration ----
    m.def("calibrate",
          [](const py::list& dataset, const sensor::TaxelLayout& layout,
             const kin::KinematicChain& chain, double learning_rate, int steps, int threads,
             const std::optional<std::vector<Matrix3d>>& reference) {
              synth::CalibDataset samples;
              for (const auto& item : dataset) {
                  const py::dict d = item.cast<py::dict>();
                  synth::CalibSample s;
                  s.reading = reading_from_array(d["forces"].cast<MatrixXd>());
                  s.q = d["q"].cast<Vector4d>();
                  s.tau = d["tau"].cast<Vector4d>();
                  samples.push_back(std::move(s));
              }
              calib::CalibConfig cfg;
              cfg.learning_rate = learning_rate;
              cfg.steps = steps;
              cfg.threads = threads;
              std::vector<geom::Rotation> ref;
              if (reference) ref = rotations_from_array(*reference);
              const auto report = calib::calibrate(samples, layout, chain, cfg,
                                                   reference ? &ref : nullptr);
              py::dict out;
              out["loss_history"] = report.loss_history;
              out["final_loss"] = report.final_loss;
              out["skipped_count"] = report.skipped_count;
              std::vector<Matrix3d> rotations;
              for (const auto& r : report.final_rotations) rotations.push_back(r.matrix());
              out["rotations"] = rotations;
              if (!report.geodesic_errors.empty()) out["geodesic_errors"] = report.geodesic_errors;
              return out;
          },
          py::arg("dataset"), py::arg("layout"), py::arg("chain"),
          py::arg("learning_rate") = 0.1, py::arg("steps") = 100, py::arg("threads") = 1,
          py::arg("reference") = std::nullopt);

    // ---- sysid ----
    m.def("simulate_actuator",
          [](double stiffness, double damping, double coulomb, double viscous, double inertia,
             const std::string& kind, double duration, double amplitude, double sample_rate,
             double chirp_f0, double chirp_f1, double dt) {
              sysid::ActuatorParams p;
              p.stiffness = stiffness;
              p.damping = damping;
              p.coulomb_friction = coulomb;
              p.viscous_friction = viscous;
              p.inertia = inertia;
              sysid::ProbeSequence probe;
              if (kind == "step") probe.kind = sysid::ProbeSequence::Kind::Step;
              else if (kind == "ramp") probe.kind = sysid::ProbeSequence::Kind::Ramp;
              else if (kind == "chirp") probe.kind = sysid::ProbeSequence::Kind::Chirp;
              else throw Error("unknown probe kind: " + kind);
              probe.duration = duration;
              probe.amplitude = amplitude;
              probe.sample_rate = sample_rate;
              probe.chirp_f0 = chirp_f0;
              probe.chirp_f1 = chirp_f1;
              const auto t = sysid::simulate_actuator(p, probe, dt);
              return py::make_tuple(t.times, t.target, t.measured);
          },
          py::arg("stiffness"), py::arg("damping"), py::arg("coulomb_friction"),
          py::arg("viscous_friction"), py::arg("inertia"), py::arg("kind") = "step",
          py::arg("duration") = 2.0, py::arg("amplitude") = 0.5, py::arg("sample_rate") = 100.0,
          py::arg("chirp_f0") = 0.5, py::arg("chirp_f1") = 8.0, py::arg("dt") = 1e-3,
          "Returns (times, target, measured).");

    // ---- probe ----
    m.def("linear_probe_fit",
          [](const std::vector<MatrixXd>& latents, const std::vector<MatrixXd>& targets,
             double ridge) {
              probe::LatentTrajectorySet set;
              for (size_t i = 0; i < latents.size(); ++i) {
                  probe::LatentTrajectory t;
                  t.latents = latents[i];
                  t.targets = targets[i];
                  set.trajectories.push_back(std::move(t));
              }
              return probe::linear_probe_fit(set, ridge);
          },
          py::arg("latents"), py::arg("targets"), py::arg("ridge") = 1e-6);

    m.def("probe_score",
          [](const MatrixXd& weights, const std::vector<MatrixXd>& latents,
             const std::vector<MatrixXd>& targets) {
              probe::LatentTrajectorySet set;
              for (size_t i = 0; i < latents.size(); ++i) {
                  probe::LatentTrajectory t;
                  t.latents = latents[i];
                  t.targets = targets[i];
                  set.trajectories.push_back(std::move(t));
              }
              py::list out;
              for (const auto& s : probe::probe_score(weights, set)) {
                  py::dict d;
                  d["rmse"] = s.rmse;
                  d["r2"] = s.r2_defined ? py::cast(s.r2) : py::none();
                  out.append(d);
              }
              return out;
          },
          py::arg("weights"), py::arg("latents"), py::arg("targets"));

    m.def("pca_project",
          [](const MatrixXd& latents, int k) {
              const auto pca = probe::pca_project(latents, k);
              return py::make_tuple(pca.scores, pca.components, pca.explained_variance_ratio);
          },
          py::arg("latents"), py::arg("k"),
          "Returns (scores, components, explained_variance_ratio).");

    m.def("silhouette_coefficient", &probe::silhouette_coefficient, py::arg("points"),
          py::arg("labels"));
}

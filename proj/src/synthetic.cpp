#include "coptact/synthetic.hpp"

#include <cmath>

namespace coptact::synth {

namespace {

geom::Rotation nominal_orientation(const Vector3d& inward_normal) {
    // deterministic tangent convention: project global x onto the tangent
    // plane, fall back to global y near alignment
    Vector3d t1 = Vector3d::UnitX() - Vector3d::UnitX().dot(inward_normal) * inward_normal;
    if (t1.norm() < 1e-6) {
        t1 = Vector3d::UnitY() - Vector3d::UnitY().dot(inward_normal) * inward_normal;
    }
    t1.normalize();
    const Vector3d t2 = inward_normal.cross(t1);
    Eigen::Matrix3d m;
    m.col(0) = t1;
    m.col(1) = t2;
    m.col(2) = inward_normal;
    return geom::Rotation::from_matrix(m);
}

// azimuthal equidistant mapping of pad coordinates (u, v in radians of arc)
// onto the sphere around the +z pole
Vector3d cap_point(double radius, double u, double v) {
    const double theta = std::hypot(u, v);
    if (theta < 1e-15) return {0.0, 0.0, radius};
    const double s = std::sin(theta) / theta;
    return {radius * s * u, radius * s * v, radius * std::cos(theta)};
}

}  // namespace

CapLayout generate_cap_layout(const CapLayoutSpec& spec) {
    if (!(spec.radius > 0.0) || spec.rows < 1 || spec.cols < 1 || !(spec.extent_u > 0.0) ||
        !(spec.extent_v > 0.0)) {
        throw Error("generate_cap_layout: invalid spec");
    }
    CapLayout out;
    sensor::TaxelLayout& layout = out.layout;
    layout.normal_axis = 2;
    layout.epsilon = spec.epsilon;
    layout.sigma = spec.sigma;
    layout.lambda = spec.lambda;
    layout.normal_only = spec.normal_only;

    for (int r = 0; r < spec.rows; ++r) {
        const double u = spec.extent_u * ((r + 0.5) / spec.rows - 0.5);
        for (int c = 0; c < spec.cols; ++c) {
            const double v = spec.extent_v * ((c + 0.5) / spec.cols - 0.5);
            layout.positions.push_back(cap_point(spec.radius, u, v));
        }
    }
    for (const Vector3d& p : layout.positions) {
        layout.orientations.push_back(nominal_orientation(-p.normalized()));
    }

    out.true_orientations = layout.orientations;
    if (spec.perturbation > 0.0) {
        Rng rng(spec.seed);
        for (auto& r : out.true_orientations) {
            const Vector3d axis = rng.unit_vector();
            const double angle = rng.uniform(0.0, spec.perturbation);
            r = geom::Rotation::from_axis_angle(axis, angle) * r;
        }
    }
    layout.validate();
    return out;
}

std::vector<sensor::CopContact> sample_contacts(const CapLayoutSpec& cap, const ContactSpec& spec,
                                                int count) {
    if (count < 0) throw Error("sample_contacts: negative count");
    Rng rng(spec.seed);
    std::vector<sensor::CopContact> out;
    out.reserve(count);
    const double u_hi = std::max(cap.extent_u / 2.0 - spec.edge_margin, 0.0);
    const double v_hi = std::max(cap.extent_v / 2.0 - spec.edge_margin, 0.0);
    for (int k = 0; k < count; ++k) {
        const double u = rng.uniform(-u_hi, u_hi);
        const double v = rng.uniform(-v_hi, v_hi);
        const Vector3d p = cap_point(cap.radius, u, v);
        const Vector3d inward = -p.normalized();

        // tangential direction orthogonal to the local normal
        Vector3d t = rng.unit_vector();
        t -= t.dot(inward) * inward;
        if (t.norm() < 1e-9) t = inward.unitOrthogonal();
        t.normalize();

        const double shear = rng.uniform(spec.shear_ratio_min, spec.shear_ratio_max);
        const double mag = rng.uniform(spec.force_min, spec.force_max);
        sensor::CopContact c;
        c.position = p;
        c.force = mag * (inward + shear * t).normalized();
        out.push_back(c);
    }
    return out;
}

CalibDataset synthesize_dataset(const std::vector<sensor::CopContact>& contacts,
                                const sensor::TaxelLayout& true_layout,
                                const kin::KinematicChain& chain, const Vector4d& q_nominal,
                                const NoiseSpec& noise) {
    if (chain.dof() != 4) throw Error("synthesize_dataset: expected a 4-DOF chain");
    Rng rng(noise.seed);
    CalibDataset out;
    out.reserve(contacts.size());
    double t = 0.0;
    for (const auto& contact : contacts) {
        CalibSample sample;
        sample.q = q_nominal;
        if (noise.q_jitter > 0.0) {
            for (int j = 0; j < 4; ++j) sample.q(j) += rng.uniform(-noise.q_jitter, noise.q_jitter);
        }

        sample.reading = sensor::cop_to_taxels(contact, true_layout);
        sample.reading.timestamp = t;
        t += 0.05;  // 20 Hz

        // torque from the model's own estimate of the noiseless reading, so
        // the dataset is exactly consistent with the true orientations
        const auto estimate = sensor::taxels_to_cop(sample.reading, true_layout);
        if (estimate) {
            const kin::FrameChain frames = kin::frame_chain(chain, sample.q);
            const Vector3d p_base = frames.sensor_pose.apply(estimate->position);
            const Vector3d f_base = frames.sensor_pose.rotation * estimate->force;
            const Eigen::MatrixXd jac = kin::point_jacobian(frames, p_base);
            sample.tau = kin::equilibrium_torque(jac, f_base);
        } else {
            sample.tau = Vector4d::Zero();
        }

        if (noise.force_multiplicative > 0.0) {
            for (auto& f : sample.reading.forces) {
                f *= rng.uniform(1.0 - noise.force_multiplicative, 1.0 + noise.force_multiplicative);
            }
        }
        if (noise.torque_additive > 0.0) {
            for (int j = 0; j < 4; ++j) sample.tau(j) += noise.torque_additive * rng.gaussian();
        }
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace coptact::synth

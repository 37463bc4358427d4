#include "coptact/calibration.hpp"

#include <cmath>

#include "coptact/threading.hpp"

namespace coptact::calib {

namespace {

using Eigen::Vector3d;
using Eigen::Vector4d;
using Eigen::VectorXd;

struct SampleEval {
    double loss = 0.0;
    bool skipped = false;
    std::vector<Matrix3d> rotation_grad;  // dL_sample / dR_i, set when requested
};

// Forward (and optionally reverse) pass for one sample at fixed projected
// rotations. The loss is the MSE over the four torque components.
SampleEval eval_sample(const std::vector<geom::Rotation>& rotations, const CalibSample& sample,
                       const sensor::TaxelLayout& nominal_layout, const kin::KinematicChain& chain,
                       bool want_gradient) {
    SampleEval out;
    const sensor::TaxelLayout layout = nominal_layout.with_orientations(rotations);
    const int n = layout.size();
    if (static_cast<int>(sample.reading.forces.size()) != n) {
        throw Error("calib_loss: sample reading does not match layout");
    }

    std::vector<Vector3d> sensor_forces(n);
    for (int i = 0; i < n; ++i) {
        sensor_forces[i] = rotations[i].matrix() * sample.reading.forces[i];
    }
    sensor::CopPipeline fwd;
    try {
        fwd = sensor::cop_pipeline_forward(sensor_forces, layout);
    } catch (const DegenerateNormalError&) {
        out.skipped = true;
        return out;
    } catch (const DegenerateBlendError&) {
        out.skipped = true;
        return out;
    }
    if (!fwd.valid) {
        out.skipped = true;
        return out;
    }

    const kin::FrameChain frames = kin::frame_chain(chain, sample.q);
    const Vector3d p_base = frames.sensor_pose.apply(fwd.p_cop);
    const Vector3d f_base = frames.sensor_pose.rotation * fwd.f_cop;
    const Eigen::MatrixXd jac = kin::point_jacobian(frames, p_base);
    const Vector4d tau_hat = kin::equilibrium_torque(jac, f_base);

    const Vector4d residual = tau_hat - sample.tau;
    out.loss = residual.squaredNorm() / 4.0;

    if (want_gradient) {
        const Vector4d dtau = residual / 2.0;           // d(mse)/dtau_hat
        const Vector3d df_base = -(jac * dtau);          // tau_hat = -J^T f_base
        const Vector3d df_cop = frames.sensor_pose.rotation.matrix().transpose() * df_base;
        out.rotation_grad =
            sensor::cop_pipeline_vjp_rotations(fwd, layout, sample.reading.forces, df_cop);
    }
    return out;
}

}  // namespace

double calib_loss(const RotationParams& params, const CalibSample& sample,
                  const sensor::TaxelLayout& layout, const kin::KinematicChain& chain) {
    return eval_sample(params.project(), sample, layout, chain, false).loss;
}

LossGrad calib_loss_gradient(const RotationParams& params, const CalibDataset& dataset,
                             const sensor::TaxelLayout& layout, const kin::KinematicChain& chain,
                             int threads) {
    if (dataset.empty()) throw EmptyDatasetError("calib_loss_gradient: empty dataset");
    const int n_taxels = layout.size();
    const int n_samples = static_cast<int>(dataset.size());
    const std::vector<geom::Rotation> rotations = params.project();

    struct Partial {
        double loss = 0.0;
        int skipped = 0;
        std::vector<Matrix3d> grad;
    };
    constexpr int kChunk = 64;
    const int n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<Partial> partials(n_chunks);

    parallel_chunks(n_samples, kChunk, threads, [&](int begin, int end, int chunk) {
        Partial part;
        part.grad.assign(n_taxels, Matrix3d::Zero());
        for (int s = begin; s < end; ++s) {
            const SampleEval ev = eval_sample(rotations, dataset[s], layout, chain, true);
            if (ev.skipped) {
                ++part.skipped;
                continue;
            }
            part.loss += ev.loss;
            for (int i = 0; i < n_taxels; ++i) part.grad[i] += ev.rotation_grad[i];
        }
        partials[chunk] = std::move(part);
    });

    LossGrad out;
    std::vector<Matrix3d> rot_grad(n_taxels, Matrix3d::Zero());
    for (const Partial& part : partials) {
        out.loss += part.loss;
        out.skipped += part.skipped;
        for (int i = 0; i < n_taxels; ++i) rot_grad[i] += part.grad[i];
    }
    out.loss /= static_cast<double>(n_samples);

    out.grad.resize(n_taxels);
    for (int i = 0; i < n_taxels; ++i) {
        rot_grad[i] /= static_cast<double>(n_samples);
        out.grad[i] = geom::svd_project_gradient(params.params[i], rot_grad[i]);
    }
    return out;
}

CalibReport calibrate(const CalibDataset& dataset, const sensor::TaxelLayout& layout,
                      const kin::KinematicChain& chain, const CalibConfig& config,
                      const std::vector<geom::Rotation>* reference) {
    if (dataset.empty()) throw EmptyDatasetError("calibrate: empty dataset");
    if (!(config.learning_rate > 0.0) || config.steps < 1) {
        throw Error("calibrate: learning_rate must be > 0 and steps >= 1");
    }
    const int n_taxels = layout.size();

    RotationParams params;
    if (config.init == CalibConfig::Init::Nominal) {
        params = RotationParams::from_rotations(layout.orientations);
    } else {
        Rng rng(config.seed);
        params.params.resize(n_taxels);
        for (auto& p : params.params) {
            // re-draw on (measure-zero) rank deficiency
            while (true) {
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) p(r, c) = rng.gaussian();
                if (geom::svd3(p).sigma(2) >= geom::kRankDeficientTol) break;
            }
        }
    }

    std::vector<Matrix3d> adam_m(n_taxels, Matrix3d::Zero());
    std::vector<Matrix3d> adam_v(n_taxels, Matrix3d::Zero());

    CalibReport report;
    report.loss_history.reserve(config.steps);
    for (int step = 0; step < config.steps; ++step) {
        const LossGrad lg =
            calib_loss_gradient(params, dataset, layout, chain, config.threads);
        if (step == 0) {
            report.skipped_count = lg.skipped;
            if (lg.skipped == static_cast<int>(dataset.size())) {
                throw AllSamplesSkippedError("calibrate: every sample has an empty active set");
            }
        }
        report.loss_history.push_back(lg.loss);

        const double t = static_cast<double>(step + 1);
        const double bc1 = 1.0 - std::pow(config.adam_beta1, t);
        const double bc2 = 1.0 - std::pow(config.adam_beta2, t);
        for (int i = 0; i < n_taxels; ++i) {
            adam_m[i] = config.adam_beta1 * adam_m[i] + (1.0 - config.adam_beta1) * lg.grad[i];
            adam_v[i] = config.adam_beta2 * adam_v[i].eval() +
                        (1.0 - config.adam_beta2) * lg.grad[i].cwiseProduct(lg.grad[i]);
            const Matrix3d m_hat = adam_m[i] / bc1;
            const Matrix3d v_hat = adam_v[i] / bc2;
            params.params[i] -=
                config.learning_rate *
                (m_hat.array() / (v_hat.array().sqrt() + config.adam_eps)).matrix();
        }
    }

    // score the final parameters
    double final_loss = 0.0;
    const std::vector<geom::Rotation> final_rot = params.project();
    for (const auto& sample : dataset) {
        final_loss += eval_sample(final_rot, sample, layout, chain, false).loss;
    }
    report.final_loss = final_loss / static_cast<double>(dataset.size());
    report.final_rotations = final_rot;

    if (reference) {
        if (static_cast<int>(reference->size()) != n_taxels) {
            throw Error("calibrate: reference rotation count mismatch");
        }
        report.geodesic_errors.reserve(n_taxels);
        for (int i = 0; i < n_taxels; ++i) {
            report.geodesic_errors.push_back(
                geom::geodesic_angle(report.final_rotations[i], (*reference)[i]));
        }
    }
    return report;
}

}  // namespace coptact::calib

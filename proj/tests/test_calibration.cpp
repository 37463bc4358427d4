#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "coptact/calibration.hpp"
#include "support/fixtures.hpp"
#include "support/test_utils.hpp"

using namespace coptact;
using namespace coptact::calib;
using Eigen::Matrix3d;
using Eigen::Vector3d;
using Eigen::Vector4d;

namespace {

struct Bench {
    synth::CapLayout cap;
    sensor::TaxelLayout true_layout;
    kin::KinematicChain chain;
    synth::CalibDataset dataset;
};

Bench make_bench(int samples, double noise = 0.0, std::uint64_t seed = 11,
                 double perturbation_deg = 30.0) {
    Bench b;
    const synth::CapLayoutSpec spec = testutil::benchmark_cap_spec(seed, perturbation_deg);
    b.cap = synth::generate_cap_layout(spec);
    b.true_layout = b.cap.layout.with_orientations(b.cap.true_orientations);
    b.chain = testutil::reference_finger();
    const auto contacts =
        synth::sample_contacts(spec, testutil::benchmark_contact_spec(seed + 1), samples);
    synth::NoiseSpec ns;
    ns.force_multiplicative = noise;
    ns.seed = seed + 2;
    b.dataset = synth::synthesize_dataset(contacts, b.true_layout, b.chain,
                                          testutil::nominal_pose(), ns);
    return b;
}

}  // namespace

TEST_CASE("calib_loss: exact zero at the true orientations on noiseless data") {
    const Bench b = make_bench(50);
    const RotationParams truth = RotationParams::from_rotations(b.cap.true_orientations);
    for (const auto& s : b.dataset) {
        CHECK(calib_loss(truth, s, b.cap.layout, b.chain) < 1e-10);
    }
}

TEST_CASE("calib_loss: zero torque and zero reading give zero loss") {
    const Bench b = make_bench(1);
    synth::CalibSample empty;
    empty.reading.forces.assign(b.cap.layout.size(), Vector3d::Zero());
    empty.q = testutil::nominal_pose();
    empty.tau = Vector4d::Zero();
    const RotationParams params = RotationParams::from_rotations(b.cap.layout.orientations);
    CHECK(calib_loss(params, empty, b.cap.layout, b.chain) == 0.0);
}

TEST_CASE("calib_loss: positive at perturbed parameters, matches an independent re-evaluation") {
    const Bench b = make_bench(5, 0.0, 21, 20.0);
    const RotationParams nominal = RotationParams::from_rotations(b.cap.layout.orientations);
    for (const auto& s : b.dataset) {
        const double loss = calib_loss(nominal, s, b.cap.layout, b.chain);
        CHECK(loss > 0.0);

        // independent pipeline re-evaluation
        const auto rots = nominal.project();
        const auto layout = b.cap.layout.with_orientations(rots);
        const auto est = sensor::taxels_to_cop(s.reading, layout);
        REQUIRE(est.has_value());
        const kin::FrameChain frames = kin::frame_chain(b.chain, s.q);
        const Vector3d p_base = frames.sensor_pose.apply(est->position);
        const Vector3d f_base = frames.sensor_pose.rotation * est->force;
        const Vector4d tau = kin::equilibrium_torque(kin::point_jacobian(frames, p_base), f_base);
        const double expected = (tau - s.tau).squaredNorm() / 4.0;
        CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("calib_loss_gradient: stationary at the truth on noiseless data") {
    const Bench b = make_bench(40);
    const RotationParams truth = RotationParams::from_rotations(b.cap.true_orientations);
    const LossGrad lg = calib_loss_gradient(truth, b.dataset, b.cap.layout, b.chain);
    double gnorm = 0.0;
    for (const auto& g : lg.grad) gnorm += g.squaredNorm();
    CHECK(std::sqrt(gnorm) < 1e-6);
}

TEST_CASE("calib_loss_gradient: matches central finite differences") {
    const Bench b = make_bench(4, 0.0, 33);
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        RotationParams params = RotationParams::from_rotations(b.cap.layout.orientations);
        for (auto& p : params.params) p += 0.15 * testutil::random_matrix3(rng);
        const LossGrad lg = calib_loss_gradient(params, b.dataset, b.cap.layout, b.chain);

        const double h = 1e-6;
        double worst = 0.0;
        for (int probe = 0; probe < 6; ++probe) {
            const int i = static_cast<int>(rng.integer(b.cap.layout.size()));
            const int r = static_cast<int>(rng.integer(3));
            const int c = static_cast<int>(rng.integer(3));
            RotationParams pp = params, pm = params;
            pp.params[i](r, c) += h;
            pm.params[i](r, c) -= h;
            double lp = 0.0, lm = 0.0;
            for (const auto& s : b.dataset) {
                lp += calib_loss(pp, s, b.cap.layout, b.chain);
                lm += calib_loss(pm, s, b.cap.layout, b.chain);
            }
            lp /= b.dataset.size();
            lm /= b.dataset.size();
            const double fd = (lp - lm) / (2.0 * h);
            worst = std::max(worst,
                             std::abs(lg.grad[i](r, c) - fd) / std::max(std::abs(fd), 1e-10));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("calib_loss_gradient: full-batch gradient is the mean of per-sample gradients") {
    const Bench b = make_bench(6, 0.0, 42);
    RotationParams params = RotationParams::from_rotations(b.cap.layout.orientations);
    Rng rng(8);
    for (auto& p : params.params) p += 0.1 * testutil::random_matrix3(rng);

    const LossGrad full = calib_loss_gradient(params, b.dataset, b.cap.layout, b.chain);
    std::vector<Matrix3d> mean(b.cap.layout.size(), Matrix3d::Zero());
    double mean_loss = 0.0;
    for (const auto& s : b.dataset) {
        const LossGrad single = calib_loss_gradient(params, {s}, b.cap.layout, b.chain);
        mean_loss += single.loss;
        for (int i = 0; i < b.cap.layout.size(); ++i) mean[i] += single.grad[i];
    }
    mean_loss /= static_cast<double>(b.dataset.size());
    CHECK(std::abs(full.loss - mean_loss) < 1e-12);
    for (int i = 0; i < b.cap.layout.size(); ++i) {
        mean[i] /= static_cast<double>(b.dataset.size());
        CHECK((full.grad[i] - mean[i]).norm() < 1e-12);
    }
}

TEST_CASE("calibrate: loss stays tiny when data comes from the init rotations") {
    Bench b = make_bench(30, 0.0, 5, 0.0);  // no perturbation: truth == nominal init
    CalibConfig cfg;
    cfg.steps = 10;
    const CalibReport report = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    for (double loss : report.loss_history) CHECK(loss < 1e-10);
    CHECK(report.final_loss < 1e-10);
}

TEST_CASE("calibrate: reference noiseless benchmark converges by 1e4x") {
    const Bench b = make_bench(2400);
    CalibConfig cfg;
    cfg.threads = 2;
    const CalibReport report =
        calibrate(b.dataset, b.cap.layout, b.chain, cfg, &b.cap.true_orientations);
    CHECK(static_cast<int>(report.loss_history.size()) == cfg.steps);
    CHECK(report.final_loss <= 1e-4 * report.loss_history[0]);
    CHECK(report.skipped_count == 0);
    for (const auto& r : report.final_rotations) {
        CHECK(geom::Rotation::is_valid(r.matrix()));
    }
}

TEST_CASE("calibrate: 2 percent force noise still improves the median geodesic error") {
    const Bench b = make_bench(2400, 0.02);
    CalibConfig cfg;
    cfg.threads = 2;
    const CalibReport report =
        calibrate(b.dataset, b.cap.layout, b.chain, cfg, &b.cap.true_orientations);
    std::vector<double> init_err, final_err = report.geodesic_errors;
    for (int i = 0; i < b.cap.layout.size(); ++i) {
        init_err.push_back(
            geom::geodesic_angle(b.cap.layout.orientations[i], b.cap.true_orientations[i]));
    }
    std::sort(init_err.begin(), init_err.end());
    std::sort(final_err.begin(), final_err.end());
    CHECK(final_err[final_err.size() / 2] < init_err[init_err.size() / 2]);
}

TEST_CASE("calibrate: deterministic loss history across runs and thread counts") {
    const Bench b = make_bench(96, 0.02, 77);
    CalibConfig cfg;
    cfg.steps = 5;
    const CalibReport r1 = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    const CalibReport r2 = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    cfg.threads = 3;
    const CalibReport r3 = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    for (int s = 0; s < cfg.steps; ++s) {
        CHECK(r1.loss_history[s] == r2.loss_history[s]);
        CHECK(r1.loss_history[s] == r3.loss_history[s]);
    }
    CHECK(r1.final_loss == r3.final_loss);
}

TEST_CASE("calibrate: empty dataset and all-skipped datasets are reported") {
    const Bench b = make_bench(1);
    CalibConfig cfg;
    CHECK_THROWS_AS(calibrate({}, b.cap.layout, b.chain, cfg), EmptyDatasetError);

    synth::CalibSample empty;
    empty.reading.forces.assign(b.cap.layout.size(), Vector3d::Zero());
    empty.q = testutil::nominal_pose();
    empty.tau = Vector4d::Zero();
    CHECK_THROWS_AS(calibrate({empty, empty}, b.cap.layout, b.chain, cfg),
                    AllSamplesSkippedError);
}

TEST_CASE("degenerate sensor geometry skips the sample instead of failing") {
    // two taxels with exactly opposite normals, contact equidistant: the
    // weighted normals cancel
    sensor::TaxelLayout pair;
    pair.positions = {Vector3d(-0.003, 0.0, 0.0), Vector3d(0.003, 0.0, 0.0)};
    pair.orientations = {geom::Rotation(),
                         geom::Rotation::from_axis_angle(Vector3d::UnitX(), M_PI)};
    pair.sigma = 0.004;
    pair.epsilon = 0.01;
    pair.validate();

    synth::CalibSample sample;
    sample.reading.forces = {Vector3d(0.0, 0.0, 0.5), Vector3d(0.0, 0.0, 0.5)};
    sample.q = testutil::nominal_pose();
    sample.tau = Vector4d::Zero();
    const auto chain = testutil::reference_finger();
    const RotationParams params = RotationParams::from_rotations(pair.orientations);

    CHECK(calib_loss(params, sample, pair, chain) == 0.0);  // skipped, zero contribution
    const LossGrad lg = calib_loss_gradient(params, {sample}, pair, chain);
    CHECK(lg.skipped == 1);
    for (const auto& g : lg.grad) CHECK(g.norm() == 0.0);
}

TEST_CASE("calibrate: random init is seeded and produces valid rotations") {
    const Bench b = make_bench(40, 0.0, 3);
    CalibConfig cfg;
    cfg.steps = 3;
    cfg.init = CalibConfig::Init::Random;
    cfg.seed = 123;
    const CalibReport r1 = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    const CalibReport r2 = calibrate(b.dataset, b.cap.layout, b.chain, cfg);
    CHECK(r1.loss_history[0] == r2.loss_history[0]);
    for (const auto& r : r1.final_rotations) CHECK(geom::Rotation::is_valid(r.matrix()));
}

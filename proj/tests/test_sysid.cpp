#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "coptact/sysid.hpp"
#include "support/test_utils.hpp"

using namespace coptact;
using namespace coptact::sysid;

namespace {

ActuatorParams hidden_plant() {
    ActuatorParams p;
    p.stiffness = 12.0;
    p.damping = 0.35;
    p.coulomb_friction = 0.03;
    p.viscous_friction = 0.12;
    p.inertia = 0.012;
    return p;
}

std::vector<ProbeSequence> reference_probes() {
    ProbeSequence step;
    step.kind = ProbeSequence::Kind::Step;
    step.duration = 2.0;
    step.amplitude = 0.5;
    ProbeSequence ramp;
    ramp.kind = ProbeSequence::Kind::Ramp;
    ramp.duration = 2.0;
    ramp.amplitude = 0.8;
    ProbeSequence chirp;
    chirp.kind = ProbeSequence::Kind::Chirp;
    chirp.duration = 4.0;
    chirp.amplitude = 0.3;
    chirp.chirp_f0 = 0.5;
    chirp.chirp_f1 = 6.0;
    return {step, ramp, chirp};
}

ParamBounds reference_bounds() {
    ParamBounds b;
    b.lo = ActuatorParams::from_vector((Eigen::VectorXd(5) << 1.0, 0.01, 0.0, 0.0, 0.002).finished());
    b.hi = ActuatorParams::from_vector((Eigen::VectorXd(5) << 40.0, 2.0, 0.2, 0.5, 0.05).finished());
    return b;
}

}  // namespace

TEST_CASE("simulate_actuator: equilibrium start stays put") {
    ActuatorParams p = hidden_plant();
    ProbeSequence probe;
    probe.kind = ProbeSequence::Kind::Step;
    probe.amplitude = 0.0;  // target equals the initial state
    probe.duration = 1.0;
    const Trajectory t = simulate_actuator(p, probe, 1e-3);
    for (double q : t.measured) CHECK(q == 0.0);
}

TEST_CASE("simulate_actuator: frictionless step oscillates at sqrt(Kp/I)/2pi") {
    ActuatorParams p;
    p.stiffness = 8.0;
    p.damping = 0.0;
    p.coulomb_friction = 0.0;
    p.viscous_friction = 0.0;
    p.inertia = 0.02;
    ProbeSequence probe;
    probe.kind = ProbeSequence::Kind::Step;
    probe.amplitude = 0.4;
    probe.duration = 10.0;
    probe.sample_rate = 500.0;
    const Trajectory t = simulate_actuator(p, probe, 2e-4);

    // count crossings of the target level
    int crossings = 0;
    double first = -1.0, last = -1.0;
    for (size_t i = 1; i < t.measured.size(); ++i) {
        const double a = t.measured[i - 1] - probe.amplitude;
        const double b = t.measured[i] - probe.amplitude;
        if (a < 0.0 && b >= 0.0) {
            ++crossings;
            if (first < 0.0) first = t.times[i];
            last = t.times[i];
        }
    }
    REQUIRE(crossings >= 3);
    const double period = (last - first) / (crossings - 1);
    const double expected = 1.0 / (std::sqrt(p.stiffness / p.inertia) / (2.0 * M_PI));
    CHECK(std::abs(period - expected) / expected < 0.02);
}

TEST_CASE("simulate_actuator: heavy damping approaches the step monotonically") {
    ActuatorParams p;
    p.stiffness = 4.0;
    p.damping = 3.0;
    p.inertia = 0.01;
    ProbeSequence probe;
    probe.kind = ProbeSequence::Kind::Step;
    probe.amplitude = 0.5;
    probe.duration = 3.0;
    const Trajectory t = simulate_actuator(p, probe, 1e-3);
    for (size_t i = 1; i < t.measured.size(); ++i) {
        CHECK(t.measured[i] >= t.measured[i - 1] - 1e-12);
        CHECK(t.measured[i] <= probe.amplitude + 1e-9);
    }
    CHECK(t.measured.back() > 0.45);
}

TEST_CASE("simulate_actuator: rejects too-coarse integration steps") {
    ProbeSequence probe;
    probe.sample_rate = 100.0;
    CHECK_THROWS_AS(simulate_actuator(hidden_plant(), probe, 0.01), Error);
}

TEST_CASE("trajectory_mse: zero, constant offset, random oracle") {
    const Trajectory t = simulate_actuator(hidden_plant(), reference_probes()[0], 1e-3);
    CHECK(trajectory_mse(t, t) == 0.0);

    Trajectory shifted = t;
    for (double& q : shifted.measured) q += 0.125;
    CHECK(trajectory_mse(t, shifted) == doctest::Approx(0.125 * 0.125).epsilon(1e-12));

    Rng rng(5);
    Trajectory noisy = t;
    double acc = 0.0;
    for (double& q : noisy.measured) {
        const double d = rng.gaussian() * 0.01;
        q += d;
        acc += d * d;
    }
    CHECK(trajectory_mse(t, noisy) ==
          doctest::Approx(acc / t.measured.size()).epsilon(1e-12));
}

TEST_CASE("trajectory_mse: mismatched grids are rejected") {
    const Trajectory t = simulate_actuator(hidden_plant(), reference_probes()[0], 1e-3);
    Trajectory short_t = t;
    short_t.times.pop_back();
    short_t.measured.pop_back();
    short_t.target.pop_back();
    CHECK_THROWS_AS(trajectory_mse(t, short_t), GridMismatchError);
}

TEST_CASE("gaussian process interpolates its training points") {
    Rng rng(17);
    const int n = 25;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform();
        y(i) = std::sin(3.0 * x(i, 0)) + x(i, 1) * x(i, 2);
    }
    GaussianProcess gp(0.3, 1.0, 1e-8);
    gp.fit(x, y);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0, var = 0.0;
        gp.posterior(x.row(i), &mean, &var);
        CHECK(std::abs(mean - y(i)) < 1e-6);
        CHECK(var >= 0.0);
    }
}

TEST_CASE("bayes_opt_identify: collapsed bounds return that point with its true objective") {
    const auto probes = reference_probes();
    const ActuatorParams truth = hidden_plant();
    std::vector<Trajectory> reference;
    for (const auto& p : probes) reference.push_back(simulate_actuator(truth, p, 1e-3));

    ParamBounds collapsed;
    collapsed.lo = truth;
    collapsed.hi = truth;
    BoConfig cfg;
    cfg.budget = 12;
    const BoResult res = bayes_opt_identify(reference, probes, collapsed, cfg);
    CHECK(res.best_mse == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((res.best.to_vector() - truth.to_vector()).norm() < 1e-12);
}

TEST_CASE("bayes_opt_identify: budget equal to the initial design returns the best initial sample") {
    const auto probes = reference_probes();
    std::vector<Trajectory> reference;
    for (const auto& p : probes) reference.push_back(simulate_actuator(hidden_plant(), p, 1e-3));
    BoConfig cfg;
    cfg.budget = 10;
    cfg.initial_points = 10;
    cfg.seed = 2;
    const BoResult res = bayes_opt_identify(reference, probes, reference_bounds(), cfg);
    CHECK(res.history.size() == 10);
    double best = res.history[0].mse;
    for (const auto& h : res.history) best = std::min(best, h.mse);
    CHECK(res.best_mse == best);
}

TEST_CASE("bayes_opt_identify: history invariants and determinism") {
    const auto probes = reference_probes();
    std::vector<Trajectory> reference;
    for (const auto& p : probes) reference.push_back(simulate_actuator(hidden_plant(), p, 1e-3));
    BoConfig cfg;
    cfg.budget = 30;
    cfg.candidates = 256;
    cfg.seed = 9;
    const BoResult a = bayes_opt_identify(reference, probes, reference_bounds(), cfg);
    const BoResult b = bayes_opt_identify(reference, probes, reference_bounds(), cfg);
    REQUIRE(a.history.size() == 30);
    const Eigen::VectorXd lo = reference_bounds().lo.to_vector();
    const Eigen::VectorXd hi = reference_bounds().hi.to_vector();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.history.size(); ++i) {
        best = std::min(best, a.history[i].mse);
        CHECK(a.history[i].best_so_far == best);  // non-increasing best
        const Eigen::VectorXd v = a.history[i].params.to_vector();
        for (int d = 0; d < 5; ++d) {
            CHECK(v(d) >= lo(d) - 1e-12);
            CHECK(v(d) <= hi(d) + 1e-12);
        }
        CHECK(a.history[i].mse == b.history[i].mse);  // seeded determinism
    }
}

TEST_CASE("bayes_opt_identify: beats the random-search median by 10x on hidden plants") {
    const auto probes = reference_probes();
    const ActuatorParams truth = hidden_plant();
    std::vector<Trajectory> reference;
    for (const auto& p : probes) reference.push_back(simulate_actuator(truth, p, 1e-3));

    BoConfig cfg;
    cfg.budget = 100;
    cfg.seed = 3;
    const BoResult res = bayes_opt_identify(reference, probes, reference_bounds(), cfg);

    // per-probe comparison against 100 uniform random samples
    Rng rng(1234);
    const Eigen::VectorXd lo = reference_bounds().lo.to_vector();
    const Eigen::VectorXd span = reference_bounds().hi.to_vector() - lo;
    std::vector<std::vector<double>> random_per_probe(probes.size());
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd u(5);
        for (int d = 0; d < 5; ++d) u(d) = rng.uniform();
        const ActuatorParams cand = ActuatorParams::from_vector(lo + span.cwiseProduct(u));
        for (size_t p = 0; p < probes.size(); ++p) {
            try {
                random_per_probe[p].push_back(
                    trajectory_mse(simulate_actuator(cand, probes[p], 1e-3), reference[p]));
            } catch (const UnstableError&) {
                random_per_probe[p].push_back(kUnstablePenalty);
            }
        }
    }
    for (size_t p = 0; p < probes.size(); ++p) {
        std::sort(random_per_probe[p].begin(), random_per_probe[p].end());
        const double median = random_per_probe[p][50];
        const double best_probe =
            trajectory_mse(simulate_actuator(res.best, probes[p], 1e-3), reference[p]);
        CHECK(best_probe <= 0.1 * median);
    }
}

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coptact/common.hpp"
#include "coptact/rng.hpp"

namespace coptact::sysid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// PD-driven joint with friction; the configurable simulator parameters.
struct ActuatorParams {
    double stiffness = 10.0;         // Kp (N*m/rad)
    double damping = 0.5;            // Kd (N*m*s/rad)
    double coulomb_friction = 0.0;   // N*m
    double viscous_friction = 0.0;   // N*m*s/rad
    double inertia = 0.01;           // kg*m^2

    static constexpr int kDim = 5;

    VectorXd to_vector() const;
    static ActuatorParams from_vector(const VectorXd& v);
    void validate() const;
};

struct ProbeSequence {
    enum class Kind { Step, Ramp, Chirp } kind = Kind::Step;
    double duration = 2.0;       // s
    double amplitude = 0.5;      // rad
    double chirp_f0 = 0.5;       // Hz, chirp band
    double chirp_f1 = 8.0;
    double sample_rate = 100.0;  // Hz

    double target(double t) const;
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> target;    // q*
    std::vector<double> measured;  // q
};

/// Semi-implicit Euler integration of
///   I q'' = Kp (q* - q) - Kd q' - viscous q' - coulomb tanh(q'/1e-3).
/// Samples land exactly on the probe's sample grid; throws UnstableError
/// when |q| exceeds 10x the probe amplitude.
Trajectory simulate_actuator(const ActuatorParams& params, const ProbeSequence& probe, double dt);

/// Mean squared difference of measured positions on identical time grids.
double trajectory_mse(const Trajectory& a, const Trajectory& b);

/// Zero-mean GP with a Matern-5/2 kernel on inputs normalized to [0,1]^d;
/// targets are standardized internally.
class GaussianProcess {
  public:
    GaussianProcess(double length_scale = 0.3, double signal_variance = 1.0,
                    double noise_variance = 1e-6)
        : length_scale_(length_scale), signal_variance_(signal_variance),
          noise_variance_(noise_variance) {}

    void fit(const MatrixXd& x, const VectorXd& y);
    void posterior(const VectorXd& x, double* mean, double* variance) const;

  private:
    double kernel(const VectorXd& a, const VectorXd& b) const;
    double length_scale_;
    double signal_variance_;
    double noise_variance_;
    MatrixXd x_train_;
    VectorXd alpha_;
    Eigen::LLT<MatrixXd> chol_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
};

struct ParamBounds {
    ActuatorParams lo;
    ActuatorParams hi;
    void validate() const;
};

struct BoConfig {
    int budget = 100;
    int initial_points = 2 * ActuatorParams::kDim;
    int candidates = 2048;      // EI maximized over this many seeded draws
    double ei_xi = 0.01;
    double gp_length_scale = 0.3;
    double gp_noise = 1e-6;
    std::uint64_t seed = 0;
    bool random_search_only = false;  // comparison baseline
    double dt = 1e-3;
};

struct BoHistoryEntry {
    ActuatorParams params;
    double mse = 0.0;
    double best_so_far = 0.0;
    bool unstable = false;
};

struct BoResult {
    ActuatorParams best;
    double best_mse = 0.0;
    std::vector<BoHistoryEntry> history;
};

constexpr double kUnstablePenalty = 1e6;

/// Objective for one parameter set: probe-averaged trajectory MSE against
/// the references; diverging simulations score the fixed penalty.
double sysid_objective(const ActuatorParams& params, const std::vector<Trajectory>& reference,
                       const std::vector<ProbeSequence>& probes, double dt, bool* unstable = nullptr);

/// GP + expected-improvement search over box-bounded actuator parameters.
BoResult bayes_opt_identify(const std::vector<Trajectory>& reference,
                            const std::vector<ProbeSequence>& probes, const ParamBounds& bounds,
                            const BoConfig& config);

}  // namespace coptact::sysid

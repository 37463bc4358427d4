#include "coptact/sysid.hpp"

#include <algorithm>
#include <cmath>

namespace coptact::sysid {

VectorXd ActuatorParams::to_vector() const {
    VectorXd v(kDim);
    v << stiffness, damping, coulomb_friction, viscous_friction, inertia;
    return v;
}

ActuatorParams ActuatorParams::from_vector(const VectorXd& v) {
    if (v.size() != kDim) throw Error("ActuatorParams: expected 5 entries");
    ActuatorParams p;
    p.stiffness = v(0);
    p.damping = v(1);
    p.coulomb_friction = v(2);
    p.viscous_friction = v(3);
    p.inertia = v(4);
    return p;
}

void ActuatorParams::validate() const {
    if (stiffness < 0.0 || damping < 0.0 || coulomb_friction < 0.0 || viscous_friction < 0.0) {
        throw Error("ActuatorParams: negative parameter");
    }
    if (!(inertia > 0.0)) throw Error("ActuatorParams: inertia must be > 0");
}

void ProbeSequence::validate() const {
    if (!(duration > 0.0)) throw Error("ProbeSequence: duration must be > 0");
    if (!(sample_rate > 0.0)) throw Error("ProbeSequence: sample_rate must be > 0");
    if (kind == Kind::Chirp && !(chirp_f1 >= chirp_f0 && chirp_f0 > 0.0)) {
        throw Error("ProbeSequence: invalid chirp band");
    }
}

double ProbeSequence::target(double t) const {
    switch (kind) {
        case Kind::Step:
            return amplitude;
        case Kind::Ramp:
            return amplitude * t / duration;
        case Kind::Chirp: {
            const double phase = chirp_f0 * t + (chirp_f1 - chirp_f0) * t * t / (2.0 * duration);
            return amplitude * std::sin(2.0 * M_PI * phase);
        }
    }
    return 0.0;
}

Trajectory simulate_actuator(const ActuatorParams& params, const ProbeSequence& probe, double dt) {
    params.validate();
    probe.validate();
    if (!(dt > 0.0) || dt > 1.0 / (2.0 * probe.sample_rate)) {
        throw Error("simulate_actuator: dt must satisfy dt <= 1/(2*sample_rate)");
    }
    const double sample_dt = 1.0 / probe.sample_rate;
    const int substeps = static_cast<int>(std::ceil(sample_dt / dt - 1e-12));
    const double h = sample_dt / substeps;
    const int n_samples = static_cast<int>(std::floor(probe.duration * probe.sample_rate)) + 1;
    const double blow_up = 10.0 * std::max(std::abs(probe.amplitude), 1e-6);

    Trajectory traj;
    traj.times.reserve(n_samples);
    traj.target.reserve(n_samples);
    traj.measured.reserve(n_samples);

    double q = 0.0, v = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double tk = static_cast<double>(k) * sample_dt;
        traj.times.push_back(tk);
        traj.target.push_back(probe.target(tk));
        traj.measured.push_back(q);
        if (k + 1 == n_samples) break;
        for (int s = 0; s < substeps; ++s) {
            const double t = tk + s * h;
            const double q_star = probe.target(t);
            const double torque = params.stiffness * (q_star - q) - params.damping * v -
                                  params.viscous_friction * v -
                                  params.coulomb_friction * std::tanh(v / 1e-3);
            v += h * torque / params.inertia;
            q += h * v;
            if (std::abs(q) > blow_up || !std::isfinite(q)) {
                throw UnstableError("simulate_actuator: diverging integration");
            }
        }
    }
    return traj;
}

double trajectory_mse(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size()) {
        throw GridMismatchError("trajectory_mse: different sample counts");
    }
    double acc = 0.0;
    for (size_t i = 0; i < a.times.size(); ++i) {
        if (std::abs(a.times[i] - b.times[i]) > 1e-9) {
            throw GridMismatchError("trajectory_mse: time grids differ");
        }
        const double d = a.measured[i] - b.measured[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.times.size());
}

double GaussianProcess::kernel(const VectorXd& a, const VectorXd& b) const {
    const double r = (a - b).norm() / length_scale_;
    const double s5r = std::sqrt(5.0) * r;
    return signal_variance_ * (1.0 + s5r + 5.0 * r * r / 3.0) * std::exp(-s5r);
}

void GaussianProcess::fit(const MatrixXd& x, const VectorXd& y) {
    const int n = static_cast<int>(x.rows());
    if (n == 0) throw Error("GaussianProcess::fit: no data");
    x_train_ = x;
    y_mean_ = y.mean();
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (y(i) - y_mean_) * (y(i) - y_mean_);
    y_scale_ = n > 1 ? std::sqrt(var / (n - 1)) : 1.0;
    if (y_scale_ < 1e-12) y_scale_ = 1.0;

    MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            k(i, j) = kernel(x.row(i), x.row(j));
            k(j, i) = k(i, j);
        }
        k(i, i) += noise_variance_;
    }
    chol_.compute(k);
    if (chol_.info() != Eigen::Success) {
        throw Error("GaussianProcess::fit: kernel matrix not positive definite");
    }
    VectorXd y_std = (y.array() - y_mean_) / y_scale_;
    alpha_ = chol_.solve(y_std);
}

void GaussianProcess::posterior(const VectorXd& x, double* mean, double* variance) const {
    const int n = static_cast<int>(x_train_.rows());
    VectorXd k_star(n);
    for (int i = 0; i < n; ++i) k_star(i) = kernel(x_train_.row(i), x);
    const double mu = k_star.dot(alpha_);
    if (mean) *mean = y_mean_ + y_scale_ * mu;
    if (variance) {
        const VectorXd v = chol_.solve(k_star);
        const double var = kernel(x, x) - k_star.dot(v);
        *variance = std::max(var, 0.0) * y_scale_ * y_scale_;
    }
}

void ParamBounds::validate() const {
    lo.validate();
    const VectorXd l = lo.to_vector(), h = hi.to_vector();
    for (int i = 0; i < ActuatorParams::kDim; ++i) {
        if (!(l(i) <= h(i))) throw Error("ParamBounds: lower bound exceeds upper bound");
    }
    hi.validate();
}

double sysid_objective(const ActuatorParams& params, const std::vector<Trajectory>& reference,
                       const std::vector<ProbeSequence>& probes, double dt, bool* unstable) {
    if (reference.size() != probes.size()) {
        throw Error("sysid_objective: reference/probe count mismatch");
    }
    if (unstable) *unstable = false;
    double acc = 0.0;
    for (size_t p = 0; p < probes.size(); ++p) {
        try {
            acc += trajectory_mse(simulate_actuator(params, probes[p], dt), reference[p]);
        } catch (const UnstableError&) {
            if (unstable) *unstable = true;
            return kUnstablePenalty;
        }
    }
    return acc / static_cast<double>(probes.size());
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// expected improvement for minimization
double expected_improvement(double mean, double variance, double best, double xi) {
    const double sd = std::sqrt(std::max(variance, 1e-18));
    const double z = (best - mean - xi) / sd;
    return (best - mean - xi) * normal_cdf(z) + sd * normal_pdf(z);
}

}  // namespace

BoResult bayes_opt_identify(const std::vector<Trajectory>& reference,
                            const std::vector<ProbeSequence>& probes, const ParamBounds& bounds,
                            const BoConfig& config) {
    bounds.validate();
    if (config.initial_points < 2 * ActuatorParams::kDim) {
        throw Error("bayes_opt_identify: need at least 2*dim initial points");
    }
    if (config.budget < config.initial_points) {
        throw Error("bayes_opt_identify: budget smaller than the initial design");
    }
    const VectorXd lo = bounds.lo.to_vector();
    const VectorXd span = bounds.hi.to_vector() - lo;

    Rng rng(config.seed);
    auto draw_unit = [&]() {
        VectorXd u(ActuatorParams::kDim);
        for (int i = 0; i < ActuatorParams::kDim; ++i) u(i) = rng.uniform();
        return u;
    };
    auto to_params = [&](const VectorXd& u) {
        return ActuatorParams::from_vector(lo + span.cwiseProduct(u));
    };

    BoResult result;
    MatrixXd x_obs(config.budget, ActuatorParams::kDim);
    VectorXd y_log(config.budget);
    double best = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const VectorXd& u, int idx) {
        const ActuatorParams p = to_params(u);
        bool unstable = false;
        const double mse = sysid_objective(p, reference, probes, config.dt, &unstable);
        x_obs.row(idx) = u;
        y_log(idx) = std::log(mse + 1e-12);
        if (mse < best) {
            best = mse;
            result.best = p;
            result.best_mse = mse;
        }
        result.history.push_back({p, mse, best, unstable});
    };

    int n_eval = 0;
    for (; n_eval < config.initial_points; ++n_eval) {
        evaluate(draw_unit(), n_eval);
    }

    GaussianProcess gp(config.gp_length_scale, 1.0, config.gp_noise);
    for (; n_eval < config.budget; ++n_eval) {
        VectorXd chosen;
        if (config.random_search_only) {
            chosen = draw_unit();
        } else {
            gp.fit(x_obs.topRows(n_eval), y_log.head(n_eval));
            const double best_log = y_log.head(n_eval).minCoeff();
            double best_ei = -1.0;
            for (int c = 0; c < config.candidates; ++c) {
                const VectorXd u = draw_unit();
                double mean = 0.0, var = 0.0;
                gp.posterior(u, &mean, &var);
                const double ei = expected_improvement(mean, var, best_log, config.ei_xi);
                if (ei > best_ei) {
                    best_ei = ei;
                    chosen = u;
                }
            }
        }
        evaluate(chosen, n_eval);
    }

    bool all_unstable = true;
    for (const auto& h : result.history) all_unstable = all_unstable && h.unstable;
    if (all_unstable) {
        throw UnstableError("bayes_opt_identify: every evaluation diverged");
    }
    return result;
}

}  // namespace coptact::sysid

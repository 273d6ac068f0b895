#include "platoon/sim.hpp"

#include <cmath>
#include <sstream>

namespace platoon {

LeaderProfile LeaderProfile::constant(double velocity, double initial_position) {
    LeaderProfile profile;
    profile.initial_position = initial_position;
    profile.segments.push_back({0.0, velocity, 0.0});
    return profile;
}

LeaderProfile LeaderProfile::eq39() {
    LeaderProfile profile;
    profile.segments.push_back({0.0, 10.0, 0.0});
    profile.segments.push_back({3.0, 10.0, 1.0});
    profile.segments.push_back({15.0, 22.0, 0.0});
    return profile;
}

LeaderProfile LeaderProfile::eq40() {
    LeaderProfile profile;
    profile.segments.push_back({0.0, 10.0, 0.0});
    profile.segments.push_back({3.0, 10.0, 1.0});
    return profile;
}

void validate(const LeaderProfile& profile) {
    if (profile.segments.empty()) {
        throw std::invalid_argument("leader profile needs at least one segment");
    }
    if (profile.segments.front().start != 0.0) {
        throw std::invalid_argument("first leader segment must start at t = 0");
    }
    for (std::size_t i = 1; i < profile.segments.size(); ++i) {
        const auto& prev = profile.segments[i - 1];
        const auto& seg = profile.segments[i];
        if (!(seg.start > prev.start)) {
            throw std::invalid_argument("leader segment start times must be strictly increasing");
        }
        const double v_end = prev.v_base + prev.slope * (seg.start - prev.start);
        if (std::abs(v_end - seg.v_base) > 1e-9) {
            std::ostringstream msg;
            msg << "leader velocity jumps at t = " << seg.start << " (" << v_end
                << " -> " << seg.v_base << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

LeaderState leader_state(const LeaderProfile& profile, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("leader time must be nonnegative");
    }
    double position = profile.initial_position;
    for (std::size_t i = 0; i < profile.segments.size(); ++i) {
        const auto& seg = profile.segments[i];
        const bool last = i + 1 == profile.segments.size();
        const double end = last ? t : std::min(t, profile.segments[i + 1].start);
        const double span = end - seg.start;
        if (t <= end || last) {
            const double local = t - seg.start;
            return {position + seg.v_base * local + 0.5 * seg.slope * local * local,
                    seg.v_base + seg.slope * local, seg.slope};
        }
        position += seg.v_base * span + 0.5 * seg.slope * span * span;
    }
    throw std::logic_error("unreachable");
}

void validate(const Scenario& s) {
    const int n = s.followers();
    if (static_cast<int>(s.vehicles.size()) != n) {
        throw std::invalid_argument("vehicle list length must equal follower count");
    }
    for (const auto& vehicle : s.vehicles) {
        validate(vehicle);
    }
    if (s.gains.has_value() == s.recipe.has_value()) {
        throw std::invalid_argument("exactly one of gains or synthesis recipe is required");
    }
    if (s.gains && s.gains->size() != n) {
        throw std::invalid_argument("gain list length must equal follower count");
    }
    if (!(s.spacing > 0.0)) {
        throw std::invalid_argument("desired spacing must be positive");
    }
    if (!(s.dt > 0.0) || !(s.horizon > s.dt)) {
        throw std::invalid_argument("need dt > 0 and horizon > dt");
    }
    validate(s.leader);
    for (const auto& p : s.perturbations) {
        if (p.vehicle < 1 || p.vehicle > n) {
            throw std::invalid_argument("perturbation vehicle index out of range");
        }
    }
    if (s.plant == PlantModel::Nonlinear) {
        for (const auto& vehicle : s.vehicles) {
            if (!vehicle.plant || !vehicle.estimate || !vehicle.tau_estimate) {
                throw std::invalid_argument(
                    "nonlinear plant requires true and estimated parameters for every vehicle");
            }
        }
    }
    if (s.robust) {
        if (s.plant != PlantModel::Nonlinear) {
            throw std::invalid_argument("the robust layer applies to the nonlinear plant only");
        }
        if (s.sliding_gain < 0.0) {
            throw std::invalid_argument("sliding-mode gain must be nonnegative");
        }
    }
}

GainSet resolve_gains(const Scenario& s) {
    if (s.gains) {
        GainSet gains = *s.gains;
        gains.mask = s.mask;
        return gains;
    }
    std::vector<double> taus;
    taus.reserve(s.vehicles.size());
    for (const auto& vehicle : s.vehicles) taus.push_back(vehicle.tau);
    if (!(s.mask == OutputMask{1, 1, 1})) {
        throw std::invalid_argument("gain synthesis requires all states measurable");
    }
    return synthesize_gains(taus, s.topology, *s.recipe);
}

namespace {

// Tracking errors of all followers, one column each, relative to the actual
// leader state.
Eigen::Matrix3Xd tracking_errors(const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& a, const LeaderState& leader,
                                 double spacing) {
    const int n = static_cast<int>(p.size());
    Eigen::Matrix3Xd errors(3, n);
    for (int i = 0; i < n; ++i) {
        errors(0, i) = p(i) - leader.position + (i + 1) * spacing;
        errors(1, i) = v(i) - leader.velocity;
        errors(2, i) = a(i) - leader.acceleration;
    }
    return errors;
}

struct StepperContext {
    const Scenario& scenario;
    const GainSet& gains;
};

// Linear plant state layout: [p_1..p_N, v_1..v_N, a_1..a_N].
Eigen::VectorXd linear_derivative(const StepperContext& ctx, double t,
                                  const Eigen::VectorXd& y) {
    const int n = ctx.scenario.followers();
    const LeaderState leader = leader_state(ctx.scenario.leader, t);
    const auto p = y.segment(0, n);
    const auto v = y.segment(n, n);
    const auto a = y.segment(2 * n, n);
    const Eigen::Matrix3Xd errors = tracking_errors(p, v, a, leader, ctx.scenario.spacing);
    const Eigen::VectorXd u = control_inputs(errors, ctx.gains, ctx.scenario.topology);

    Eigen::VectorXd dy(3 * n);
    dy.segment(0, n) = v;
    dy.segment(n, n) = a;
    for (int i = 0; i < n; ++i) {
        dy(2 * n + i) = (u(i) - a(i)) / ctx.scenario.vehicles[i].tau;
    }
    return dy;
}

// Nonlinear plant state layout: [p, v, torque, s] blocks of N.
Eigen::VectorXd nonlinear_derivative_vec(const StepperContext& ctx, double t,
                                         const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& sign_frozen) {
    const int n = ctx.scenario.followers();
    const LeaderState leader = leader_state(ctx.scenario.leader, t);
    const auto p = y.segment(0, n);
    const auto v = y.segment(n, n);
    const auto torque = y.segment(2 * n, n);

    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) {
        a(i) = vehicle_acceleration({p(i), v(i), torque(i)}, *ctx.scenario.vehicles[i].plant);
    }
    const Eigen::Matrix3Xd errors = tracking_errors(p, v, a, leader, ctx.scenario.spacing);
    const Eigen::VectorXd u = control_inputs(errors, ctx.gains, ctx.scenario.topology);

    Eigen::VectorXd dy(4 * n);
    dy.segment(0, n) = v;
    dy.segment(n, n) = a;
    for (int i = 0; i < n; ++i) {
        const auto& vehicle = ctx.scenario.vehicles[i];
        const double u_applied =
            ctx.scenario.robust ? u(i) - ctx.scenario.sliding_gain * sign_frozen(i) : u(i);
        const double torque_command = feedback_linearization(
            u_applied, v(i), a(i), *vehicle.estimate, *vehicle.tau_estimate);
        const double d_torque = (torque_command - torque(i)) / vehicle.tau;
        dy(2 * n + i) = d_torque;
        if (ctx.scenario.robust) {
            // a_dot by the chain rule along the plant dynamics.
            const auto& plant = *vehicle.plant;
            const double a_dot = (plant.eta / plant.wheel_radius * d_torque -
                                  2.0 * plant.drag_coeff * v(i) * a(i)) / plant.mass;
            dy(3 * n + i) = *vehicle.tau_estimate * a_dot + a(i) - u(i);
        } else {
            dy(3 * n + i) = 0.0;
        }
    }
    return dy;
}

}  // namespace

Trajectory simulate(const Scenario& s) {
    validate(s);
    const int n = s.followers();
    const GainSet gains = resolve_gains(s);
    const StepperContext ctx{s, gains};
    const bool nonlinear = s.plant == PlantModel::Nonlinear;

    const int steps = static_cast<int>(std::round(s.horizon / s.dt));
    const LeaderState leader0 = leader_state(s.leader, 0.0);

    // Exact-formation start, then explicit perturbations.
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nonlinear ? 4 * n : 3 * n);
    for (int i = 0; i < n; ++i) {
        y(i) = leader0.position - (i + 1) * s.spacing;
        y(n + i) = leader0.velocity;
        if (nonlinear) {
            // a_i(0) = 0: torque balancing drag and rolling resistance.
            const auto& plant = *s.vehicles[i].plant;
            y(2 * n + i) = plant.wheel_radius / plant.eta *
                           (plant.drag_coeff * leader0.velocity * leader0.velocity +
                            plant.mass * kGravity * plant.rolling_coeff);
        }
    }
    for (const auto& perturbation : s.perturbations) {
        const int i = perturbation.vehicle - 1;
        y(i) += perturbation.dp;
        y(n + i) += perturbation.dv;
        y(2 * n + i) += perturbation.da;
    }

    Trajectory traj;
    traj.time.resize(steps + 1);
    traj.position.resize(steps + 1, n + 1);
    traj.velocity.resize(steps + 1, n + 1);
    traj.acceleration.resize(steps + 1, n + 1);
    traj.err_position.resize(steps + 1, n);
    traj.err_velocity.resize(steps + 1, n);
    traj.err_acceleration.resize(steps + 1, n);
    traj.control.resize(steps + 1, n);

    auto record = [&](int k, double t, const Eigen::VectorXd& state) {
        const LeaderState leader = leader_state(s.leader, t);
        traj.time(k) = t;
        traj.position(k, 0) = leader.position;
        traj.velocity(k, 0) = leader.velocity;
        traj.acceleration(k, 0) = leader.acceleration;
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) {
            a(i) = nonlinear ? vehicle_acceleration(
                                   {state(i), state(n + i), state(2 * n + i)},
                                   *s.vehicles[i].plant)
                             : state(2 * n + i);
            traj.position(k, i + 1) = state(i);
            traj.velocity(k, i + 1) = state(n + i);
            traj.acceleration(k, i + 1) = a(i);
        }
        const Eigen::Matrix3Xd errors = tracking_errors(
            state.segment(0, n), state.segment(n, n), a, leader, s.spacing);
        traj.err_position.row(k) = errors.row(0);
        traj.err_velocity.row(k) = errors.row(1);
        traj.err_acceleration.row(k) = errors.row(2);
        traj.control.row(k) = control_inputs(errors, gains, s.topology).transpose();
    };

    record(0, 0.0, y);
    for (int k = 0; k < steps; ++k) {
        const double t = k * s.dt;
        const double h = s.dt;
        Eigen::VectorXd sign_frozen = Eigen::VectorXd::Zero(n);
        if (nonlinear && s.robust) {
            for (int i = 0; i < n; ++i) {
                const double sliding = y(3 * n + i);
                sign_frozen(i) = sliding > 0.0 ? 1.0 : (sliding < 0.0 ? -1.0 : 0.0);
            }
        }
        auto f = [&](double time, const Eigen::VectorXd& state) {
            return nonlinear ? nonlinear_derivative_vec(ctx, time, state, sign_frozen)
                             : linear_derivative(ctx, time, state);
        };
        if (s.method == IntegratorMethod::RK4) {
            const Eigen::VectorXd k1 = f(t, y);
            const Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
            const Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
            const Eigen::VectorXd k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            y += h * f(t, y);
        }
        const double t_next = (k + 1) * s.dt;
        if (!y.allFinite()) {
            std::ostringstream msg;
            msg << "simulation produced a non-finite state at t = " << t_next;
            throw SimulationDivergedError(msg.str(), t_next);
        }
        record(k + 1, t_next, y);
    }
    return traj;
}

std::optional<double> convergence_time(const Trajectory& traj, double delta) {
    const int steps = traj.steps();
    int last_violation = -1;
    for (int k = 0; k < steps; ++k) {
        if (traj.err_position.row(k).cwiseAbs().maxCoeff() >= delta) {
            last_violation = k;
        }
    }
    if (last_violation < 0) {
        return 0.0;
    }
    if (last_violation == steps - 1) {
        return std::nullopt;
    }
    return traj.time(last_violation);
}

double max_spacing_error(const Trajectory& traj, int follower) {
    if (follower < 0 || follower >= traj.followers()) {
        throw std::out_of_range("follower index out of range");
    }
    return traj.err_position.col(follower).cwiseAbs().maxCoeff();
}

}  // namespace platoon

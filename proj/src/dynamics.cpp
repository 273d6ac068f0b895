#include "platoon/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace platoon {

namespace {

void validate_nonlinear(const NonlinearParams& p, const char* which) {
    if (p.mass <= 0.0 || p.eta <= 0.0 || p.eta > 1.0 || p.drag_coeff <= 0.0 ||
        p.wheel_radius <= 0.0 || p.rolling_coeff <= 0.0) {
        throw std::invalid_argument(std::string(which) +
                                    " nonlinear parameters must be strictly positive "
                                    "with eta in (0, 1]");
    }
}

}  // namespace

void validate(const VehicleParams& p) {
    if (!(p.tau > 0.0)) {
        throw std::invalid_argument("inertial time lag tau must be positive");
    }
    if (p.plant) validate_nonlinear(*p.plant, "true");
    if (p.estimate) validate_nonlinear(*p.estimate, "estimated");
    if (p.tau_estimate && !(*p.tau_estimate > 0.0)) {
        throw std::invalid_argument("estimated tau must be positive");
    }
}

std::pair<Eigen::Matrix3d, Eigen::Vector3d> linear_matrices(double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("inertial time lag tau must be positive");
    }
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    a(0, 1) = 1.0;
    a(1, 2) = 1.0;
    a(2, 2) = -1.0 / tau;
    Eigen::Vector3d b(0.0, 0.0, 1.0 / tau);
    return {a, b};
}

Eigen::MatrixXd closed_loop_matrix(const std::vector<double>& taus,
                                   const GainSet& gains, const Topology& t) {
    const int n = t.size();
    if (static_cast<int>(taus.size()) != n || gains.size() != n) {
        throw std::invalid_argument("taus, gains, and topology sizes must agree");
    }
    for (double tau : taus) {
        if (!(tau > 0.0)) {
            throw std::invalid_argument("all inertial time lags must be positive");
        }
    }

    const Eigen::MatrixXd g = grounded_matrix(t);
    Eigen::VectorXd inv_tau(n), t_p(n), t_v(n), t_a(n);
    for (int i = 0; i < n; ++i) {
        inv_tau(i) = 1.0 / taus[i];
        t_p(i) = gains.k_p(i) * gains.mask.c_p / taus[i];
        t_v(i) = gains.k_v(i) * gains.mask.c_v / taus[i];
        t_a(i) = gains.k_a(i) * gains.mask.c_a / taus[i];
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.block(0, n, n, n).setIdentity();
    m.block(n, 2 * n, n, n).setIdentity();
    m.block(2 * n, 0, n, n) = -(t_p.asDiagonal() * g);
    m.block(2 * n, n, n, n) = -(t_v.asDiagonal() * g);
    m.block(2 * n, 2 * n, n, n) = -(t_a.asDiagonal() * g);
    m.block(2 * n, 2 * n, n, n).diagonal() -= inv_tau;
    return m;
}

double vehicle_acceleration(const NonlinearState& s, const NonlinearParams& p) {
    return (p.eta / p.wheel_radius * s.torque -
            p.drag_coeff * s.velocity * s.velocity -
            p.mass * kGravity * p.rolling_coeff) / p.mass;
}

NonlinearState nonlinear_derivative(const NonlinearState& s, double torque_command,
                                    const VehicleParams& p) {
    if (!p.plant) {
        throw std::invalid_argument("nonlinear plant parameters are missing");
    }
    NonlinearState d;
    d.position = s.velocity;
    d.velocity = vehicle_acceleration(s, *p.plant);
    d.torque = (torque_command - s.torque) / p.tau;
    return d;
}

double feedback_linearization(double u_command, double velocity, double acceleration,
                              const NonlinearParams& estimate, double tau_estimate) {
    return estimate.wheel_radius / estimate.eta *
           (estimate.mass * u_command +
            estimate.mass * estimate.rolling_coeff * kGravity +
            2.0 * estimate.drag_coeff * tau_estimate * velocity * acceleration +
            estimate.drag_coeff * velocity * velocity);
}

double sliding_mode_augment(double u, double sliding_var, double k_s) {
    if (k_s < 0.0) {
        throw std::invalid_argument("sliding-mode gain must be nonnegative");
    }
    const double sign = sliding_var > 0.0 ? 1.0 : (sliding_var < 0.0 ? -1.0 : 0.0);
    return u - k_s * sign;
}

}  // namespace platoon

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "platoon/graph.hpp"
#include "platoon/types.hpp"

namespace platoon {

inline constexpr double kGravity = 9.81;  // m/s^2

/// Physical parameters of the nonlinear longitudinal plant.
struct NonlinearParams {
    double mass;           // kg
    double eta;            // driveline efficiency, (0, 1]
    double drag_coeff;     // aerodynamic drag, kg/m
    double wheel_radius;   // m
    double rolling_coeff;  // dimensionless
};

/// Per-vehicle parameters. `plant` holds the true nonlinear parameters and
/// `estimate` the copies used by the feedback-linearization law; both are
/// absent for the linear model.
struct VehicleParams {
    double tau;  // inertial time lag, s
    std::optional<NonlinearParams> plant;
    std::optional<NonlinearParams> estimate;
    std::optional<double> tau_estimate;  // s, paired with `estimate`

    static VehicleParams linear(double tau) { return VehicleParams{tau, {}, {}, {}}; }
};

void validate(const VehicleParams& p);

/// State-space matrices of the linear third-order longitudinal model,
/// A = [0 1 0; 0 0 1; 0 0 -1/tau], B = [0; 0; 1/tau].
std::pair<Eigen::Matrix3d, Eigen::Vector3d> linear_matrices(double tau);

/// Closed-loop 3N x 3N platoon matrix over the stacked tracking-error state
/// (p_1..p_N, v_1..v_N, a_1..a_N):
///
///   [ 0      I      0          ]
///   [ 0      0      I          ]
///   [ -T_p G  -T_v G  -D - T_a G ]
///
/// with D = diag(1/tau_i), T_# = diag(k_i# c_# / tau_i), G = L + P.
Eigen::MatrixXd closed_loop_matrix(const std::vector<double>& taus,
                                   const GainSet& gains, const Topology& t);

/// State of one vehicle under the nonlinear plant; the actual driving torque
/// replaces acceleration as the third state.
struct NonlinearState {
    double position;  // m
    double velocity;  // m/s
    double torque;    // N*m
};

/// Acceleration v_dot implied by the nonlinear plant at the given state.
double vehicle_acceleration(const NonlinearState& s, const NonlinearParams& p);

/// Time derivative of the nonlinear state for a commanded desired torque.
NonlinearState nonlinear_derivative(const NonlinearState& s, double torque_command,
                                    const VehicleParams& p);

/// Feedback-linearization law mapping a desired acceleration to a desired
/// torque, evaluated with the estimated parameter copies.
double feedback_linearization(double u_command, double velocity, double acceleration,
                              const NonlinearParams& estimate, double tau_estimate);

/// Robust layer: u - k_s * sign(s), with sign(0) = 0.
double sliding_mode_augment(double u, double sliding_var, double k_s);

}  // namespace platoon

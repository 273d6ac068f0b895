#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "platoon/graph.hpp"
#include "platoon/types.hpp"

namespace platoon {

/// One follower's evaluation of the stability-region inequalities.
struct StabilityRow {
    bool connected = false;             // d_ii + p_ii > 0
    bool position_gain_ok = false;      // k_p > 0
    bool accel_gain_ok = false;         // k_a c_a > -1/(d_ii + p_ii)
    bool velocity_gain_ok = false;      // k_v above its lower bound
    double velocity_gain_bound = 0.0;   // tau k_p / (1 + k_a c_a (d_ii + p_ii))

    bool pass() const {
        return connected && position_gain_ok && accel_gain_ok && velocity_gain_ok;
    }
};

/// Full platoon verdict: mask requirement, per-follower rows, and their
/// conjunction.
struct StabilityVerdict {
    bool mask_ok = false;  // c_p == 1 and c_v == 1
    std::vector<StabilityRow> rows;
    bool overall = false;
};

/// Evaluates the stability-region inequalities for a single follower.
StabilityRow stability_region_check(double tau, const Eigen::Vector3d& gains,
                                    double degree_plus_pin, const OutputMask& mask);

/// Evaluates the full necessary-and-sufficient platoon stability test
/// (mask, connectivity, and the per-follower gain inequalities).
StabilityVerdict platoon_stability_check(const std::vector<double>& taus,
                                         const GainSet& gains, const Topology& t);

/// Internal-model feasibility report: the followers can track the leader's
/// position and velocity iff the (S, R) pair is observable, which requires
/// the position output to be measured.
struct FeasibilityReport {
    int observability_rank = 0;
    bool feasible = false;                     // rank == 2, i.e. c_p == 1
    double max_state_residual = 0.0;           // max_i |A_i Pi - Pi S|
    double max_output_residual = 0.0;          // |C Pi - R|
    Eigen::Matrix<double, 6, 2> observability; // [R; RS; RS^2] stacked
};

FeasibilityReport tracking_feasibility(const OutputMask& mask,
                                       const std::vector<double>& taus);

/// Thrown when the Riccati iteration fails to reach the residual target.
class NoConvergenceError : public std::runtime_error {
public:
    NoConvergenceError(std::string message, double residual)
        : std::runtime_error(std::move(message)), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

/// Stabilizing solution of P A + A^T P - P B B^T P + epsilon I = 0 by
/// Newton-Kleinman iteration on Lyapunov equations. The result is symmetric,
/// positive definite, and A - B B^T P is Hurwitz; the residual Frobenius norm
/// is at most 1e-10 * (1 + |P|).
Eigen::Matrix3d solve_care(const Eigen::Matrix3d& A, const Eigen::Vector3d& B,
                           double epsilon);

/// Per-follower Riccati weights and coupling scales. An absent alpha means
/// "auto": alpha_i = 1 / (2 (d_ii + p_ii)) + 1.
struct SynthesisRecipe {
    Eigen::VectorXd epsilon;
    std::optional<Eigen::VectorXd> alpha;

    static SynthesisRecipe uniform(double epsilon_value, int n);
};

/// Riccati-based gain design: k_i^T = alpha_i B_i^T P_i. Requires the full
/// output mask and every follower connected; the result always lies inside
/// the stability region.
GainSet synthesize_gains(const std::vector<double>& taus, const Topology& t,
                         const SynthesisRecipe& recipe);

/// Distributed control input for follower i from the tracking-error states
/// (one column per follower): u_i = -k_i^T [sum_j a_ij C (e_i - e_j) + p_ii C e_i].
double control_input(int i, const Eigen::Matrix3Xd& error_states,
                     const GainSet& gains, const Topology& t);

/// All follower control inputs at once.
Eigen::VectorXd control_inputs(const Eigen::Matrix3Xd& error_states,
                               const GainSet& gains, const Topology& t);

}  // namespace platoon

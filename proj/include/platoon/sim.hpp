#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "platoon/control.hpp"
#include "platoon/dynamics.hpp"
#include "platoon/graph.hpp"
#include "platoon/types.hpp"

namespace platoon {

/// One piece of a piecewise-linear leader velocity profile:
/// v(t) = v_base + slope * (t - start) for t in [start, next segment start).
struct LeaderSegment {
    double start = 0.0;
    double v_base = 0.0;
    double slope = 0.0;
};

/// Leader trajectory: initial position plus velocity segments with strictly
/// increasing start times beginning at 0. Position is integrated in closed
/// form per segment.
struct LeaderProfile {
    double initial_position = 0.0;
    std::vector<LeaderSegment> segments;

    static LeaderProfile constant(double velocity, double initial_position = 0.0);
    /// Step-and-hold profile: 10 m/s, ramp at 1 m/s^2 from t=3 s to 22 m/s, hold.
    static LeaderProfile eq39();
    /// Unbounded ramp: 10 m/s, then accelerate at 1 m/s^2 forever from t=3 s.
    static LeaderProfile eq40();
};

void validate(const LeaderProfile& profile);

struct LeaderState {
    double position;
    double velocity;
    double acceleration;
};

/// Exact leader state at time t >= 0.
LeaderState leader_state(const LeaderProfile& profile, double t);

enum class PlantModel { Linear, Nonlinear };
enum class IntegratorMethod { RK4, Euler };

/// Additive initial-state offset for one follower (1-based vehicle index).
/// For the nonlinear plant `da` perturbs the torque state (N*m).
struct InitialPerturbation {
    int vehicle = 1;
    double dp = 0.0;
    double dv = 0.0;
    double da = 0.0;
};

/// Full experiment description.
struct Scenario {
    std::vector<VehicleParams> vehicles;
    Topology topology;
    std::optional<GainSet> gains;
    std::optional<SynthesisRecipe> recipe;
    OutputMask mask;
    double spacing = 20.0;  // d0, m
    LeaderProfile leader = LeaderProfile::eq39();
    std::vector<InitialPerturbation> perturbations;
    PlantModel plant = PlantModel::Linear;
    bool robust = false;
    double sliding_gain = 0.3;  // k_s
    IntegratorMethod method = IntegratorMethod::RK4;
    double dt = 0.01;      // s
    double horizon = 60.0; // s

    int followers() const { return topology.size(); }
};

void validate(const Scenario& s);

/// Gains from the scenario, running the Riccati synthesis when a recipe is
/// given instead of explicit gains.
GainSet resolve_gains(const Scenario& s);

/// Time-indexed result of one run. State matrices have one row per grid point;
/// columns 0..N with column 0 the leader. Error/control matrices have N
/// columns (follower i-1 in column i-1). For the nonlinear plant the
/// `acceleration` columns hold the realized acceleration v_dot.
struct Trajectory {
    Eigen::VectorXd time;
    Eigen::MatrixXd position;
    Eigen::MatrixXd velocity;
    Eigen::MatrixXd acceleration;
    Eigen::MatrixXd err_position;
    Eigen::MatrixXd err_velocity;
    Eigen::MatrixXd err_acceleration;
    Eigen::MatrixXd control;

    int followers() const { return static_cast<int>(err_position.cols()); }
    int steps() const { return static_cast<int>(time.size()); }
};

/// Thrown when the integration produces a non-finite state.
class SimulationDivergedError : public std::runtime_error {
public:
    SimulationDivergedError(std::string message, double time)
        : std::runtime_error(std::move(message)), time_(time) {}

    double time() const { return time_; }

private:
    double time_;
};

/// Fixed-step integration of the closed-loop platoon. The leader is an
/// exogenous signal sampled exactly at stage times; the control input is
/// recomputed at every stage. With the robust layer on, the sliding variables
/// are integrated alongside and the sign term is frozen over each step.
Trajectory simulate(const Scenario& s);

/// Earliest grid time T1 such that every follower keeps |err_position| < delta
/// for all t > T1; nullopt when the condition never holds within the horizon.
std::optional<double> convergence_time(const Trajectory& traj, double delta);

/// Max over time of |err_position| for one follower (0-based index).
double max_spacing_error(const Trajectory& traj, int follower);

}  // namespace platoon

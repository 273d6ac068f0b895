#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "platoon/sim.hpp"

namespace platoon {

/// Thrown on any schema or value error in a scenario document.
class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses a scenario document. Unknown keys are rejected; every value is
/// validated before any computation.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Serializes a scenario back to the document form accepted by parse_scenario.
nlohmann::json scenario_to_json(const Scenario& s);

/// Summary of one completed run.
struct RunSummary {
    nlohmann::json scenario_echo;
    StabilityVerdict stability;
    FeasibilityReport feasibility;
    GainSet gains;
    std::optional<double> convergence_time;
    std::vector<double> max_spacing_errors;
    std::vector<std::complex<double>> closed_loop_eigenvalues;
    double elapsed_seconds = 0.0;
};

nlohmann::json summary_to_json(const RunSummary& summary);

/// Fixed 12-significant-digit decimal formatting used in all CSV output.
std::string format_number(double value);

/// Trajectory CSV: t, per-vehicle p/v/a (leader first), then per-follower
/// tracking errors and control input.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Long-format spacing-error CSV (t, vehicle, spacing_error) for plotting.
void write_spacing_error_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace platoon

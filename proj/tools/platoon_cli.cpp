#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "platoon/analysis.hpp"
#include "platoon/scenario.hpp"
#include "platoon/sim.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::optional<double> dt;
    std::optional<double> horizon;
    double delta = 0.1;
    std::string out = ".";
};

std::vector<double> tau_list(const platoon::Scenario& s) {
    std::vector<double> taus;
    taus.reserve(s.vehicles.size());
    for (const auto& vehicle : s.vehicles) taus.push_back(vehicle.tau);
    return taus;
}

platoon::Scenario load_with_overrides(const std::string& path, const CommonOptions& options) {
    platoon::Scenario s = platoon::load_scenario(path);
    if (options.dt) s.dt = *options.dt;
    if (options.horizon) s.horizon = *options.horizon;
    platoon::validate(s);
    return s;
}

int run_command(const std::string& path, const CommonOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const platoon::Scenario scenario = load_with_overrides(path, options);
    const std::filesystem::path out_dir(options.out);
    std::filesystem::create_directories(out_dir);

    platoon::RunSummary summary;
    summary.scenario_echo = platoon::scenario_to_json(scenario);
    summary.gains = platoon::resolve_gains(scenario);
    const auto taus = tau_list(scenario);
    summary.stability = platoon::platoon_stability_check(taus, summary.gains, scenario.topology);
    summary.feasibility = platoon::tracking_feasibility(summary.gains.mask, taus);

    const Eigen::MatrixXd closed_loop =
        platoon::closed_loop_matrix(taus, summary.gains, scenario.topology);
    const auto eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(closed_loop, false).eigenvalues();
    for (int i = 0; i < eigenvalues.size(); ++i) {
        summary.closed_loop_eigenvalues.push_back(eigenvalues(i));
    }

    const platoon::Trajectory traj = platoon::simulate(scenario);
    summary.convergence_time = platoon::convergence_time(traj, options.delta);
    for (int i = 0; i < traj.followers(); ++i) {
        summary.max_spacing_errors.push_back(platoon::max_spacing_error(traj, i));
    }
    summary.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    platoon::write_trajectory_csv(traj, out_dir / "trajectory.csv");
    platoon::write_spacing_error_csv(traj, out_dir / "spacing_errors.csv");
    std::ofstream summary_out(out_dir / "summary.json");
    summary_out << platoon::summary_to_json(summary).dump(2) << "\n";

    std::cout << "wrote " << (out_dir / "trajectory.csv").string() << ", "
              << (out_dir / "spacing_errors.csv").string() << ", "
              << (out_dir / "summary.json").string() << "\n";
    if (summary.convergence_time) {
        std::cout << "convergence time (delta=" << options.delta
                  << "): " << *summary.convergence_time << " s\n";
    } else {
        std::cout << "convergence time (delta=" << options.delta << "): not converged\n";
    }
    return 0;
}

int check_command(const std::string& path, const CommonOptions& options) {
    const platoon::Scenario scenario = load_with_overrides(path, options);
    const platoon::GainSet gains = platoon::resolve_gains(scenario);
    const auto taus = tau_list(scenario);
    const auto verdict = platoon::platoon_stability_check(taus, gains, scenario.topology);
    const auto feasibility = platoon::tracking_feasibility(gains.mask, taus);

    std::cout << "mask (cp=cv=1): " << (verdict.mask_ok ? "ok" : "FAIL") << "\n";
    for (std::size_t i = 0; i < verdict.rows.size(); ++i) {
        const auto& row = verdict.rows[i];
        std::cout << "vehicle " << i + 1 << ": ";
        if (!row.connected) {
            std::cout << "FAIL (no neighbor or leader link)\n";
            continue;
        }
        std::cout << (row.pass() ? "pass" : "FAIL");
        if (!row.position_gain_ok) std::cout << " [kp <= 0]";
        if (!row.accel_gain_ok) std::cout << " [ka below -1/(d+p)]";
        if (row.accel_gain_ok) {
            std::cout << " (kv margin " << gains.k_v(static_cast<int>(i)) - row.velocity_gain_bound
                      << ", bound " << row.velocity_gain_bound << ")";
        }
        std::cout << "\n";
    }
    std::cout << "tracking feasibility: rank(Qo) = " << feasibility.observability_rank << ", "
              << (feasibility.feasible ? "feasible" : "infeasible (position output required)")
              << "\n";
    std::cout << "overall: " << (verdict.overall ? "stable" : "NOT stable") << "\n";
    return 0;
}

int synth_command(const std::string& path, const CommonOptions& options) {
    const platoon::Scenario scenario = load_with_overrides(path, options);
    const platoon::GainSet gains = platoon::resolve_gains(scenario);
    std::cout << "vehicle,kp,kv,ka\n";
    for (int i = 0; i < gains.size(); ++i) {
        std::cout << i + 1 << ',' << platoon::format_number(gains.k_p(i)) << ','
                  << platoon::format_number(gains.k_v(i)) << ','
                  << platoon::format_number(gains.k_a(i)) << "\n";
    }
    return 0;
}

int sweep_command(const std::string& path, const CommonOptions& options,
                  std::vector<double> epsilons, std::vector<std::string> kinds) {
    const platoon::Scenario base = load_with_overrides(path, options);
    if (!base.recipe) {
        throw platoon::ScenarioError("sweep requires a scenario with a synthesis recipe");
    }
    if (epsilons.empty()) epsilons = {1.0, 3.0, 5.0, 7.0};
    if (kinds.empty()) kinds = {"PF", "PLF", "TPF", "TPLF"};

    const int n = base.followers();
    auto cell = [&](double epsilon, const std::string& kind) -> std::string {
        platoon::Scenario scenario = base;
        scenario.topology =
            platoon::standard_topology(platoon::topology_kind_from_string(kind), n);
        scenario.recipe->epsilon = Eigen::VectorXd::Constant(n, epsilon);
        try {
            const auto traj = platoon::simulate(scenario);
            const auto tc = platoon::convergence_time(traj, options.delta);
            return tc ? platoon::format_number(*tc) : std::string("NotConverged");
        } catch (const platoon::SimulationDivergedError&) {
            return "Diverged";
        }
    };

    std::vector<std::vector<std::future<std::string>>> grid;
    for (double epsilon : epsilons) {
        auto& row = grid.emplace_back();
        for (const auto& kind : kinds) {
            row.push_back(std::async(std::launch::async, cell, epsilon, kind));
        }
    }

    const std::filesystem::path out_dir(options.out);
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "sweep.csv");
    out << "epsilon";
    for (const auto& kind : kinds) out << ',' << kind;
    out << "\n";
    for (std::size_t r = 0; r < epsilons.size(); ++r) {
        out << platoon::format_number(epsilons[r]);
        std::string line = platoon::format_number(epsilons[r]);
        for (auto& future : grid[r]) {
            const std::string value = future.get();
            out << ',' << value;
            line += "  " + value;
        }
        out << "\n";
        std::cout << line << "\n";
    }
    std::cout << "wrote " << (out_dir / "sweep.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous platoon analysis, synthesis, and simulation workbench"};
    app.require_subcommand(1);

    CommonOptions options;
    std::string scenario_path;
    std::vector<double> epsilons;
    std::vector<std::string> kinds;

    auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
        cmd->add_option("--dt", options.dt, "Override integrator step (s)");
        cmd->add_option("--horizon", options.horizon, "Override simulation horizon (s)");
        cmd->add_option("--delta", options.delta,
                        "Spacing-error threshold for convergence time (m)");
        if (with_out) {
            cmd->add_option("--out", options.out, "Output directory");
        }
    };

    auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV/JSON outputs");
    add_common(run, true);
    auto* check = app.add_subcommand("check", "Stability and feasibility checks, no simulation");
    add_common(check, false);
    auto* synth = app.add_subcommand("synth", "Print synthesized gains only");
    add_common(synth, false);
    auto* sweep = app.add_subcommand("sweep", "Convergence-time table over epsilon x topology");
    add_common(sweep, true);
    sweep->add_option("--epsilon", epsilons, "Riccati weights to sweep");
    sweep->add_option("--topology", kinds, "Topology kinds to sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(scenario_path, options);
        if (check->parsed()) return check_command(scenario_path, options);
        if (synth->parsed()) return synth_command(scenario_path, options);
        return sweep_command(scenario_path, options, epsilons, kinds);
    } catch (const platoon::ScenarioError& error) {
        std::cerr << "scenario error: " << error.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& error) {
        std::cerr << "validation error: " << error.what() << "\n";
        return kExitValidation;
    } catch (const platoon::SimulationDivergedError& error) {
        std::cerr << "numerical failure: " << error.what() << "\n";
        return kExitNumerical;
    } catch (const platoon::NoConvergenceError& error) {
        std::cerr << "numerical failure: " << error.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}

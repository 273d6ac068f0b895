#include "platoon/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace platoon {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!object.is_object()) {
        throw ScenarioError(where + " must be an object");
    }
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (!allowed.contains(key)) {
            throw ScenarioError("unknown key '" + key + "' in " + where);
        }
    }
}

double require_number(const json& object, const std::string& key, const std::string& where) {
    if (!object.contains(key) || !object[key].is_number()) {
        throw ScenarioError(where + " requires numeric field '" + key + "'");
    }
    return object[key].get<double>();
}

Eigen::VectorXd number_list(const json& value, const std::string& where) {
    if (!value.is_array() || value.empty()) {
        throw ScenarioError(where + " must be a nonempty array of numbers");
    }
    Eigen::VectorXd result(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number()) {
            throw ScenarioError(where + " must contain numbers only");
        }
        result(static_cast<Eigen::Index>(i)) = value[i].get<double>();
    }
    return result;
}

NonlinearParams table3_true(int vehicle) {
    return NonlinearParams{1500.0 + 100.0 * vehicle, 0.80 + 0.01 * vehicle,
                           0.40 + 0.01 * vehicle, 0.250 + 0.005 * vehicle,
                           0.015 + 0.001 * vehicle};
}

constexpr NonlinearParams kTable3Estimate{1700.0, 0.82, 0.42, 0.26, 0.017};
constexpr double kTable3TauEstimate = 0.34;

std::vector<VehicleParams> parse_vehicles(const json& doc, PlantModel& plant) {
    reject_unknown_keys(doc, {"tau", "table3"}, "vehicles");
    if (doc.contains("tau") == doc.contains("table3")) {
        throw ScenarioError("vehicles requires exactly one of 'tau' or 'table3'");
    }
    std::vector<VehicleParams> vehicles;
    if (doc.contains("tau")) {
        const Eigen::VectorXd taus = number_list(doc["tau"], "vehicles.tau");
        for (Eigen::Index i = 0; i < taus.size(); ++i) {
            vehicles.push_back(VehicleParams::linear(taus(i)));
        }
    } else {
        reject_unknown_keys(doc["table3"], {"count"}, "vehicles.table3");
        const int count = static_cast<int>(require_number(doc["table3"], "count", "vehicles.table3"));
        if (count < 1) {
            throw ScenarioError("vehicles.table3.count must be at least 1");
        }
        for (int i = 1; i <= count; ++i) {
            VehicleParams vehicle;
            vehicle.tau = 0.30 + 0.02 * i;
            vehicle.plant = table3_true(i);
            vehicle.estimate = kTable3Estimate;
            vehicle.tau_estimate = kTable3TauEstimate;
            vehicles.push_back(vehicle);
        }
        plant = PlantModel::Nonlinear;
    }
    return vehicles;
}

Topology parse_topology(const json& doc) {
    reject_unknown_keys(doc, {"kind", "n", "adjacency", "pinning"}, "topology");
    if (doc.contains("kind")) {
        if (doc.contains("adjacency") || doc.contains("pinning")) {
            throw ScenarioError("topology takes either kind+n or adjacency+pinning");
        }
        if (!doc["kind"].is_string()) {
            throw ScenarioError("topology.kind must be a string");
        }
        const int n = static_cast<int>(require_number(doc, "n", "topology"));
        return standard_topology(topology_kind_from_string(doc["kind"].get<std::string>()), n);
    }
    if (!doc.contains("adjacency") || !doc.contains("pinning")) {
        throw ScenarioError("topology requires kind+n or adjacency+pinning");
    }
    const json& rows = doc["adjacency"];
    if (!rows.is_array() || rows.empty()) {
        throw ScenarioError("topology.adjacency must be a nonempty array of rows");
    }
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXi adjacency(n, n);
    for (int i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
            throw ScenarioError("topology.adjacency rows must all have length n");
        }
        for (int j = 0; j < n; ++j) {
            if (!rows[i][j].is_number_integer()) {
                throw ScenarioError("topology.adjacency entries must be integers");
            }
            adjacency(i, j) = rows[i][j].get<int>();
        }
    }
    const Eigen::VectorXd pinning = number_list(doc["pinning"], "topology.pinning");
    if (pinning.size() != n) {
        throw ScenarioError("topology.pinning length must equal adjacency size");
    }
    try {
        return Topology::make(adjacency, pinning.cast<int>());
    } catch (const std::invalid_argument& error) {
        throw ScenarioError(error.what());
    }
}

OutputMask parse_mask(const json& doc) {
    reject_unknown_keys(doc, {"cp", "cv", "ca"}, "mask");
    OutputMask mask;
    auto flag = [&](const char* key, int fallback) {
        if (!doc.contains(key)) return fallback;
        if (!doc[key].is_number_integer() ||
            (doc[key].get<int>() != 0 && doc[key].get<int>() != 1)) {
            throw ScenarioError(std::string("mask.") + key + " must be 0 or 1");
        }
        return doc[key].get<int>();
    };
    mask.c_p = flag("cp", 1);
    mask.c_v = flag("cv", 1);
    mask.c_a = flag("ca", 1);
    return mask;
}

void parse_controller(const json& doc, int n, Scenario& s) {
    reject_unknown_keys(doc, {"gains", "synthesis"}, "controller");
    if (doc.contains("gains") == doc.contains("synthesis")) {
        throw ScenarioError("controller requires exactly one of 'gains' or 'synthesis'");
    }
    if (doc.contains("gains")) {
        const json& g = doc["gains"];
        reject_unknown_keys(g, {"kp", "kv", "ka"}, "controller.gains");
        GainSet gains;
        gains.k_p = number_list(g.value("kp", json::array()), "controller.gains.kp");
        gains.k_v = number_list(g.value("kv", json::array()), "controller.gains.kv");
        gains.k_a = number_list(g.value("ka", json::array()), "controller.gains.ka");
        if (gains.k_p.size() != n || gains.k_v.size() != n || gains.k_a.size() != n) {
            throw ScenarioError("controller gain lists must have one entry per follower");
        }
        s.gains = std::move(gains);
    } else {
        const json& synth = doc["synthesis"];
        reject_unknown_keys(synth, {"epsilon", "alpha"}, "controller.synthesis");
        SynthesisRecipe recipe;
        if (!synth.contains("epsilon")) {
            throw ScenarioError("controller.synthesis requires 'epsilon'");
        }
        if (synth["epsilon"].is_number()) {
            recipe.epsilon = Eigen::VectorXd::Constant(n, synth["epsilon"].get<double>());
        } else {
            recipe.epsilon = number_list(synth["epsilon"], "controller.synthesis.epsilon");
            if (recipe.epsilon.size() != n) {
                throw ScenarioError("controller.synthesis.epsilon list must have one entry per follower");
            }
        }
        if (synth.contains("alpha") && synth["alpha"] != json("auto")) {
            if (synth["alpha"].is_number()) {
                recipe.alpha = Eigen::VectorXd::Constant(n, synth["alpha"].get<double>());
            } else {
                recipe.alpha = number_list(synth["alpha"], "controller.synthesis.alpha");
                if (recipe.alpha->size() != n) {
                    throw ScenarioError("controller.synthesis.alpha list must have one entry per follower");
                }
            }
        }
        s.recipe = std::move(recipe);
    }
}

LeaderProfile parse_leader(const json& doc) {
    if (doc.is_string()) {
        const std::string name = doc.get<std::string>();
        if (name == "eq39") return LeaderProfile::eq39();
        if (name == "eq40") return LeaderProfile::eq40();
        throw ScenarioError("unknown leader profile name: " + name);
    }
    reject_unknown_keys(doc, {"initial_position", "segments"}, "leader");
    LeaderProfile profile;
    if (doc.contains("initial_position")) {
        profile.initial_position = require_number(doc, "initial_position", "leader");
    }
    if (!doc.contains("segments") || !doc["segments"].is_array() || doc["segments"].empty()) {
        throw ScenarioError("leader requires a nonempty 'segments' array");
    }
    for (const json& seg : doc["segments"]) {
        reject_unknown_keys(seg, {"start", "velocity", "slope"}, "leader.segments[]");
        LeaderSegment segment;
        segment.start = require_number(seg, "start", "leader segment");
        segment.v_base = require_number(seg, "velocity", "leader segment");
        segment.slope = seg.contains("slope") ? require_number(seg, "slope", "leader segment") : 0.0;
        profile.segments.push_back(segment);
    }
    return profile;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    reject_unknown_keys(doc,
                        {"vehicles", "topology", "mask", "controller", "robust", "plant",
                         "leader", "spacing", "integrator", "initial_perturbations"},
                        "scenario");
    Scenario s;
    if (!doc.contains("vehicles") || !doc.contains("topology") || !doc.contains("controller")) {
        throw ScenarioError("scenario requires 'vehicles', 'topology', and 'controller'");
    }
    s.vehicles = parse_vehicles(doc["vehicles"], s.plant);
    s.topology = parse_topology(doc["topology"]);
    if (doc.contains("mask")) {
        s.mask = parse_mask(doc["mask"]);
    }
    parse_controller(doc["controller"], s.followers(), s);
    if (doc.contains("plant")) {
        const std::string plant = doc["plant"].is_string() ? doc["plant"].get<std::string>() : "";
        if (plant == "linear") {
            s.plant = PlantModel::Linear;
        } else if (plant == "nonlinear") {
            s.plant = PlantModel::Nonlinear;
        } else {
            throw ScenarioError("plant must be 'linear' or 'nonlinear'");
        }
    }
    if (doc.contains("robust")) {
        reject_unknown_keys(doc["robust"], {"ks"}, "robust");
        s.robust = true;
        s.sliding_gain = require_number(doc["robust"], "ks", "robust");
    }
    if (doc.contains("leader")) {
        s.leader = parse_leader(doc["leader"]);
    }
    if (doc.contains("spacing")) {
        if (!doc["spacing"].is_number()) {
            throw ScenarioError("spacing must be a number");
        }
        s.spacing = doc["spacing"].get<double>();
    }
    if (doc.contains("integrator")) {
        const json& integ = doc["integrator"];
        reject_unknown_keys(integ, {"dt", "horizon", "method"}, "integrator");
        if (integ.contains("dt")) s.dt = require_number(integ, "dt", "integrator");
        if (integ.contains("horizon")) s.horizon = require_number(integ, "horizon", "integrator");
        if (integ.contains("method")) {
            const std::string method =
                integ["method"].is_string() ? integ["method"].get<std::string>() : "";
            if (method == "rk4") {
                s.method = IntegratorMethod::RK4;
            } else if (method == "euler") {
                s.method = IntegratorMethod::Euler;
            } else {
                throw ScenarioError("integrator.method must be 'rk4' or 'euler'");
            }
        }
    }
    if (doc.contains("initial_perturbations")) {
        if (!doc["initial_perturbations"].is_array()) {
            throw ScenarioError("initial_perturbations must be an array");
        }
        for (const json& entry : doc["initial_perturbations"]) {
            reject_unknown_keys(entry, {"vehicle", "dp", "dv", "da"}, "initial_perturbations[]");
            InitialPerturbation p;
            p.vehicle = static_cast<int>(require_number(entry, "vehicle", "perturbation"));
            p.dp = entry.contains("dp") ? require_number(entry, "dp", "perturbation") : 0.0;
            p.dv = entry.contains("dv") ? require_number(entry, "dv", "perturbation") : 0.0;
            p.da = entry.contains("da") ? require_number(entry, "da", "perturbation") : 0.0;
            s.perturbations.push_back(p);
        }
    }
    try {
        validate(s);
    } catch (const std::invalid_argument& error) {
        throw ScenarioError(error.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot read scenario file: " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& error) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + error.what());
    }
    return parse_scenario(doc);
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json result = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) result.push_back(v(i));
    return result;
}

bool is_table3(const std::vector<VehicleParams>& vehicles) {
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        const int vehicle = static_cast<int>(i) + 1;
        if (!vehicles[i].plant || !vehicles[i].estimate || !vehicles[i].tau_estimate) {
            return false;
        }
        const NonlinearParams expected = table3_true(vehicle);
        const NonlinearParams& actual = *vehicles[i].plant;
        if (actual.mass != expected.mass || actual.eta != expected.eta ||
            actual.drag_coeff != expected.drag_coeff ||
            actual.wheel_radius != expected.wheel_radius ||
            actual.rolling_coeff != expected.rolling_coeff ||
            vehicles[i].tau != 0.30 + 0.02 * vehicle) {
            return false;
        }
    }
    return true;
}

}  // namespace

json scenario_to_json(const Scenario& s) {
    json doc;
    if (s.plant == PlantModel::Nonlinear && is_table3(s.vehicles)) {
        doc["vehicles"] = {{"table3", {{"count", static_cast<int>(s.vehicles.size())}}}};
    } else {
        json taus = json::array();
        for (const auto& vehicle : s.vehicles) taus.push_back(vehicle.tau);
        doc["vehicles"] = {{"tau", taus}};
    }

    json topology;
    json rows = json::array();
    for (int i = 0; i < s.topology.size(); ++i) {
        json row = json::array();
        for (int j = 0; j < s.topology.size(); ++j) row.push_back(s.topology.adjacency(i, j));
        rows.push_back(row);
    }
    topology["adjacency"] = rows;
    json pinning = json::array();
    for (int i = 0; i < s.topology.size(); ++i) pinning.push_back(s.topology.pinning(i));
    topology["pinning"] = pinning;
    doc["topology"] = topology;

    doc["mask"] = {{"cp", s.mask.c_p}, {"cv", s.mask.c_v}, {"ca", s.mask.c_a}};

    if (s.gains) {
        doc["controller"] = {{"gains",
                              {{"kp", vector_to_json(s.gains->k_p)},
                               {"kv", vector_to_json(s.gains->k_v)},
                               {"ka", vector_to_json(s.gains->k_a)}}}};
    } else {
        json synth = {{"epsilon", vector_to_json(s.recipe->epsilon)}};
        if (s.recipe->alpha) {
            synth["alpha"] = vector_to_json(*s.recipe->alpha);
        } else {
            synth["alpha"] = "auto";
        }
        doc["controller"] = {{"synthesis", synth}};
    }

    if (s.robust) {
        doc["robust"] = {{"ks", s.sliding_gain}};
    }
    doc["plant"] = s.plant == PlantModel::Linear ? "linear" : "nonlinear";

    json segments = json::array();
    for (const auto& segment : s.leader.segments) {
        segments.push_back({{"start", segment.start},
                            {"velocity", segment.v_base},
                            {"slope", segment.slope}});
    }
    doc["leader"] = {{"initial_position", s.leader.initial_position}, {"segments", segments}};
    doc["spacing"] = s.spacing;
    doc["integrator"] = {{"dt", s.dt},
                         {"horizon", s.horizon},
                         {"method", s.method == IntegratorMethod::RK4 ? "rk4" : "euler"}};
    if (!s.perturbations.empty()) {
        json perturbations = json::array();
        for (const auto& p : s.perturbations) {
            perturbations.push_back(
                {{"vehicle", p.vehicle}, {"dp", p.dp}, {"dv", p.dv}, {"da", p.da}});
        }
        doc["initial_perturbations"] = perturbations;
    }
    return doc;
}

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

json summary_to_json(const RunSummary& summary) {
    json doc;
    doc["scenario"] = summary.scenario_echo;

    json rows = json::array();
    for (const auto& row : summary.stability.rows) {
        rows.push_back({{"connected", row.connected},
                        {"position_gain_ok", row.position_gain_ok},
                        {"velocity_gain_ok", row.velocity_gain_ok},
                        {"accel_gain_ok", row.accel_gain_ok},
                        {"velocity_gain_bound", row.velocity_gain_bound},
                        {"pass", row.pass()}});
    }
    doc["stability"] = {{"mask_ok", summary.stability.mask_ok},
                        {"rows", rows},
                        {"overall", summary.stability.overall}};

    doc["feasibility"] = {{"observability_rank", summary.feasibility.observability_rank},
                          {"feasible", summary.feasibility.feasible},
                          {"max_state_residual", summary.feasibility.max_state_residual},
                          {"max_output_residual", summary.feasibility.max_output_residual}};

    doc["gains"] = {{"kp", vector_to_json(summary.gains.k_p)},
                    {"kv", vector_to_json(summary.gains.k_v)},
                    {"ka", vector_to_json(summary.gains.k_a)}};

    if (summary.convergence_time) {
        doc["convergence_time"] = *summary.convergence_time;
    } else {
        doc["convergence_time"] = nullptr;
    }
    doc["max_spacing_errors"] = summary.max_spacing_errors;

    json eigenvalues = json::array();
    for (const auto& value : summary.closed_loop_eigenvalues) {
        eigenvalues.push_back({{"re", value.real()}, {"im", value.imag()}});
    }
    doc["closed_loop_eigenvalues"] = eigenvalues;
    doc["elapsed_seconds"] = summary.elapsed_seconds;
    return doc;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    const int n = traj.followers();
    out << "t";
    for (int i = 0; i <= n; ++i) {
        out << ",p" << i << ",v" << i << ",a" << i;
    }
    for (int i = 1; i <= n; ++i) {
        out << ",ep" << i << ",ev" << i << ",ea" << i << ",u" << i;
    }
    out << "\n";
    for (int k = 0; k < traj.steps(); ++k) {
        out << format_number(traj.time(k));
        for (int i = 0; i <= n; ++i) {
            out << ',' << format_number(traj.position(k, i)) << ','
                << format_number(traj.velocity(k, i)) << ','
                << format_number(traj.acceleration(k, i));
        }
        for (int i = 0; i < n; ++i) {
            out << ',' << format_number(traj.err_position(k, i)) << ','
                << format_number(traj.err_velocity(k, i)) << ','
                << format_number(traj.err_acceleration(k, i)) << ','
                << format_number(traj.control(k, i));
        }
        out << "\n";
    }
}

void write_spacing_error_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "t,vehicle,spacing_error\n";
    for (int k = 0; k < traj.steps(); ++k) {
        for (int i = 0; i < traj.followers(); ++i) {
            out << format_number(traj.time(k)) << ',' << i + 1 << ','
                << format_number(traj.err_position(k, i)) << "\n";
        }
    }
}

}  // namespace platoon

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "platoon/scenario.hpp"

using namespace platoon;
using nlohmann::json;

namespace {

json minimal_doc() {
    return json{
        {"vehicles", {{"tau", {0.4, 0.5}}}},
        {"topology", {{"kind", "PF"}, {"n", 2}}},
        {"controller",
         {{"gains", {{"kp", {2.0, 2.0}}, {"kv", {2.5, 2.5}}, {"ka", {1.0, 1.0}}}}}},
    };
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
    const Scenario s = parse_scenario(minimal_doc());
    CHECK(s.followers() == 2);
    CHECK(s.vehicles[0].tau == 0.4);
    CHECK(s.gains.has_value());
    CHECK_FALSE(s.recipe.has_value());
    CHECK(s.mask == OutputMask{1, 1, 1});
    CHECK(s.spacing == 20.0);
    CHECK(s.dt == 0.01);
    CHECK(s.horizon == 60.0);
    CHECK(s.method == IntegratorMethod::RK4);
    CHECK(s.plant == PlantModel::Linear);
    CHECK_FALSE(s.robust);
    CHECK(s.leader.segments.size() == 3);  // the step-and-ramp default
}

TEST_CASE("synthesis controller and options parse") {
    json doc = minimal_doc();
    doc["controller"] = {{"synthesis", {{"epsilon", 3.0}, {"alpha", "auto"}}}};
    doc["mask"] = {{"cp", 1}, {"cv", 1}, {"ca", 1}};
    doc["leader"] = "eq40";
    doc["spacing"] = 15.0;
    doc["integrator"] = {{"dt", 0.005}, {"horizon", 30.0}, {"method", "euler"}};
    doc["initial_perturbations"] = json::array({{{"vehicle", 2}, {"dp", 0.5}}});

    const Scenario s = parse_scenario(doc);
    REQUIRE(s.recipe.has_value());
    CHECK(s.recipe->epsilon == Eigen::VectorXd::Constant(2, 3.0));
    CHECK_FALSE(s.recipe->alpha.has_value());
    CHECK(s.leader.segments.size() == 2);
    CHECK(s.spacing == 15.0);
    CHECK(s.dt == 0.005);
    CHECK(s.method == IntegratorMethod::Euler);
    REQUIRE(s.perturbations.size() == 1);
    CHECK(s.perturbations[0].vehicle == 2);
    CHECK(s.perturbations[0].dp == 0.5);
    CHECK(s.perturbations[0].dv == 0.0);
}

TEST_CASE("table3 vehicle generator") {
    json doc = minimal_doc();
    doc["vehicles"] = {{"table3", {{"count", 7}}}};
    doc["topology"] = {{"kind", "TPF"}, {"n", 7}};
    doc["controller"] = {{"synthesis", {{"epsilon", 3.0}}}};
    const Scenario s = parse_scenario(doc);
    CHECK(s.plant == PlantModel::Nonlinear);
    REQUIRE(s.vehicles.size() == 7);
    CHECK(s.vehicles[0].tau == doctest::Approx(0.32));
    CHECK(s.vehicles[6].tau == doctest::Approx(0.44));
    REQUIRE(s.vehicles[2].plant.has_value());
    CHECK(s.vehicles[2].plant->mass == doctest::Approx(1800.0));
    CHECK(s.vehicles[2].plant->eta == doctest::Approx(0.83));
    CHECK(s.vehicles[2].plant->drag_coeff == doctest::Approx(0.43));
    CHECK(s.vehicles[2].plant->wheel_radius == doctest::Approx(0.265));
    CHECK(s.vehicles[2].plant->rolling_coeff == doctest::Approx(0.018));
    REQUIRE(s.vehicles[2].estimate.has_value());
    CHECK(s.vehicles[2].estimate->mass == 1700.0);
    CHECK(s.vehicles[2].tau_estimate == doctest::Approx(0.34));
}

TEST_CASE("explicit topology and leader segments") {
    json doc = minimal_doc();
    doc["topology"] = {{"adjacency", {{0, 0}, {1, 0}}}, {"pinning", {1, 1}}};
    doc["leader"] = {{"initial_position", 5.0},
                     {"segments",
                      json::array({{{"start", 0.0}, {"velocity", 8.0}},
                                   {{"start", 2.0}, {"velocity", 8.0}, {"slope", 0.5}}})}};
    const Scenario s = parse_scenario(doc);
    CHECK(s.topology.adjacency(1, 0) == 1);
    CHECK(s.topology.pinning(1) == 1);
    CHECK(s.leader.initial_position == 5.0);
    CHECK(s.leader.segments[1].slope == 0.5);
}

TEST_CASE("schema violations are rejected") {
    CHECK_THROWS_AS(parse_scenario(json::array()), ScenarioError);

    json doc = minimal_doc();
    SUBCASE("unknown top-level key") {
        doc["extra"] = 1;
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("unknown nested key") {
        doc["controller"]["gains"]["kq"] = json::array({1.0, 1.0});
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("missing required section") {
        doc.erase("controller");
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("both gains and synthesis") {
        doc["controller"]["synthesis"] = {{"epsilon", 1.0}};
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("gain length mismatch") {
        doc["controller"]["gains"]["kp"] = json::array({2.0});
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("bad mask value") {
        doc["mask"] = {{"cp", 2}};
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("bad plant name") {
        doc["plant"] = "hybrid";
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("robust with linear plant fails validation") {
        doc["robust"] = {{"ks", 0.3}};
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("discontinuous leader profile") {
        doc["leader"] = {{"segments",
                          json::array({{{"start", 0.0}, {"velocity", 10.0}},
                                       {{"start", 3.0}, {"velocity", 13.0}}})}};
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
    SUBCASE("adjacency with a cycle passes parsing but fails DAG-only operations") {
        doc["topology"] = {{"adjacency", {{0, 1}, {1, 0}}}, {"pinning", {1, 0}}};
        // Construction succeeds: cyclic graphs are valid topologies; only
        // DAG-dependent analysis rejects them.
        CHECK_NOTHROW(parse_scenario(doc));
    }
    SUBCASE("non-binary adjacency entry") {
        doc["topology"] = {{"adjacency", {{0, 0}, {3, 0}}}, {"pinning", {1, 0}}};
        CHECK_THROWS_AS(parse_scenario(doc), ScenarioError);
    }
}

TEST_CASE("scenario round-trips through its JSON form") {
    SUBCASE("explicit gains") {
        const Scenario s = parse_scenario(minimal_doc());
        const Scenario back = parse_scenario(scenario_to_json(s));
        CHECK(back.vehicles.size() == s.vehicles.size());
        CHECK(back.gains->k_p == s.gains->k_p);
        CHECK(back.topology.adjacency == s.topology.adjacency);
        CHECK(back.topology.pinning == s.topology.pinning);
        CHECK(back.spacing == s.spacing);
        CHECK(scenario_to_json(back) == scenario_to_json(s));
    }
    SUBCASE("table3 compresses back to the generator form") {
        json doc = minimal_doc();
        doc["vehicles"] = {{"table3", {{"count", 5}}}};
        doc["topology"] = {{"kind", "PLF"}, {"n", 5}};
        doc["controller"] = {{"synthesis", {{"epsilon", 1.0}}}};
        doc["robust"] = {{"ks", 0.3}};
        const Scenario s = parse_scenario(doc);
        const json echoed = scenario_to_json(s);
        CHECK(echoed["vehicles"] == json{{"table3", {{"count", 5}}}});
        const Scenario back = parse_scenario(echoed);
        CHECK(back.vehicles[4].plant->mass == s.vehicles[4].plant->mass);
        CHECK(back.robust);
        CHECK(back.sliding_gain == 0.3);
    }
}

TEST_CASE("file loading") {
    const auto dir = std::filesystem::temp_directory_path() / "platoon_scenario_test";
    std::filesystem::create_directories(dir);

    SUBCASE("valid file") {
        const auto path = dir / "ok.json";
        std::ofstream(path) << minimal_doc().dump();
        CHECK(load_scenario(path).followers() == 2);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_scenario(dir / "nope.json"), ScenarioError);
    }
    SUBCASE("malformed JSON") {
        const auto path = dir / "broken.json";
        std::ofstream(path) << "{ not json";
        CHECK_THROWS_AS(load_scenario(path), ScenarioError);
    }
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(-3.25) == "-3.25");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-12) == "1e-12");
}

TEST_CASE("CSV writers") {
    Trajectory traj;
    traj.time = Eigen::VectorXd{{0.0, 0.5}};
    traj.position = Eigen::MatrixXd{{0.0, -20.0}, {5.0, -15.0}};
    traj.velocity = Eigen::MatrixXd{{10.0, 10.0}, {10.0, 10.0}};
    traj.acceleration = Eigen::MatrixXd{{0.0, 0.0}, {0.0, 0.0}};
    traj.err_position = Eigen::MatrixXd{{0.25}, {-0.5}};
    traj.err_velocity = Eigen::MatrixXd{{0.0}, {0.0}};
    traj.err_acceleration = Eigen::MatrixXd{{0.0}, {0.0}};
    traj.control = Eigen::MatrixXd{{-0.75}, {1.5}};

    const auto dir = std::filesystem::temp_directory_path() / "platoon_csv_test";
    std::filesystem::create_directories(dir);

    SUBCASE("trajectory layout") {
        const auto path = dir / "trajectory.csv";
        write_trajectory_csv(traj, path);
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        CHECK(line == "t,p0,v0,a0,p1,v1,a1,ep1,ev1,ea1,u1");
        std::getline(in, line);
        CHECK(line == "0,0,10,0,-20,10,0,0.25,0,0,-0.75");
        std::getline(in, line);
        CHECK(line == "0.5,5,10,0,-15,10,0,-0.5,0,0,1.5");
        CHECK_FALSE(std::getline(in, line));
    }
    SUBCASE("spacing errors in long format") {
        const auto path = dir / "errors.csv";
        write_spacing_error_csv(traj, path);
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        CHECK(line == "t,vehicle,spacing_error");
        std::getline(in, line);
        CHECK(line == "0,1,0.25");
        std::getline(in, line);
        CHECK(line == "0.5,1,-0.5");
    }
}

TEST_CASE("run summary serialization") {
    RunSummary summary;
    summary.scenario_echo = minimal_doc();
    summary.gains.k_p = Eigen::VectorXd{{2.0}};
    summary.gains.k_v = Eigen::VectorXd{{2.5}};
    summary.gains.k_a = Eigen::VectorXd{{1.0}};
    summary.stability.mask_ok = true;
    summary.stability.overall = true;
    summary.stability.rows.push_back({true, true, true, true, 0.32});
    summary.feasibility.observability_rank = 2;
    summary.feasibility.feasible = true;
    summary.convergence_time = 12.5;
    summary.max_spacing_errors = {0.8};
    summary.closed_loop_eigenvalues = {{-1.0, 0.5}};

    const json doc = summary_to_json(summary);
    CHECK(doc["stability"]["overall"] == true);
    CHECK(doc["stability"]["rows"][0]["pass"] == true);
    CHECK(doc["convergence_time"] == 12.5);
    CHECK(doc["gains"]["kp"][0] == 2.0);
    CHECK(doc["closed_loop_eigenvalues"][0]["re"] == -1.0);
    CHECK(doc["closed_loop_eigenvalues"][0]["im"] == 0.5);

    summary.convergence_time.reset();
    CHECK(summary_to_json(summary)["convergence_time"].is_null());
}

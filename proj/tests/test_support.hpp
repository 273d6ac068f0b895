#pragma once

// Shared helpers for the test binaries: reference data sets, random problem
// generators, and independent numerical oracles used to cross-check the
// library implementations.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "platoon/graph.hpp"
#include "platoon/types.hpp"

namespace testing {

// Reference seven-vehicle heterogeneous platoon used throughout.
inline std::vector<double> reference_taus() {
    return {0.40, 0.55, 0.32, 0.44, 0.38, 0.51, 0.29};
}

inline platoon::GainSet reference_gains() {
    platoon::GainSet gains;
    gains.k_p = Eigen::VectorXd{{3.00, 1.30, 2.31, 1.65, 3.83, 2.42, 2.91}};
    gains.k_v = Eigen::VectorXd{{3.40, 3.55, 3.32, 3.44, 3.38, 3.51, 3.29}};
    gains.k_a = Eigen::VectorXd{{2.00, 2.62, 2.87, 2.97, 3.07, 3.70, 2.79}};
    return gains;
}

// The deliberately small velocity gains that violate the per-vehicle lower
// bound and destabilize the reference platoon.
inline platoon::GainSet reference_gains_unstable() {
    platoon::GainSet gains = reference_gains();
    gains.k_v = Eigen::VectorXd{{0.06, 0.09, 0.10, 0.08, 0.07, 0.05, 0.04}};
    return gains;
}

// Random DAG on n followers. Edges are generated against a hidden random
// vertex order, so every output is acyclic by construction; when
// `ensure_connected` every follower hears at least one node (leader pin
// added where needed).
inline platoon::Topology random_dag(std::mt19937& rng, int n, double edge_prob,
                                    bool ensure_connected = true) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::bernoulli_distribution edge(edge_prob);
    std::bernoulli_distribution pin(0.3);
    Eigen::MatrixXi adjacency = Eigen::MatrixXi::Zero(n, n);
    Eigen::VectorXi pinning = Eigen::VectorXi::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            if (edge(rng)) adjacency(order[i], order[j]) = 1;
        }
        if (pin(rng)) pinning(order[i]) = 1;
    }
    if (ensure_connected) {
        for (int i = 0; i < n; ++i) {
            if (adjacency.row(i).sum() == 0 && pinning(i) == 0) pinning(i) = 1;
        }
    }
    return platoon::Topology::make(adjacency, pinning);
}

// Gains drawn strictly inside the stability region for the given platoon
// (full output mask assumed).
inline platoon::GainSet random_stable_gains(std::mt19937& rng,
                                            const std::vector<double>& taus,
                                            const platoon::Topology& t) {
    const int n = t.size();
    const Eigen::VectorXd d = platoon::degree_plus_pinning(t);
    std::uniform_real_distribution<double> kp_dist(0.5, 4.0);
    std::uniform_real_distribution<double> ka_dist(0.0, 4.0);
    std::uniform_real_distribution<double> margin(1.2, 4.0);
    platoon::GainSet gains;
    gains.k_p.resize(n);
    gains.k_v.resize(n);
    gains.k_a.resize(n);
    for (int i = 0; i < n; ++i) {
        gains.k_p(i) = kp_dist(rng);
        gains.k_a(i) = ka_dist(rng);
        const double bound = taus[i] * gains.k_p(i) / (1.0 + gains.k_a(i) * d(i));
        gains.k_v(i) = bound * margin(rng);
    }
    return gains;
}

// Independent oracle for the stabilizing Riccati solution: integrate the
// matrix Riccati ODE dP/dt = A'P + PA - PBB'P + eps*I forward from P(0) = 0
// with RK4 until the state stops moving. The stationary point it settles at
// is the stabilizing solution.
inline Eigen::Matrix3d riccati_ode_oracle(const Eigen::Matrix3d& a,
                                          const Eigen::Vector3d& b, double epsilon) {
    const Eigen::Matrix3d bbt = b * b.transpose();
    auto f = [&](const Eigen::Matrix3d& p) -> Eigen::Matrix3d {
        return a.transpose() * p + p * a - p * bbt * p +
               epsilon * Eigen::Matrix3d::Identity();
    };
    Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
    const double dt = 1e-3;
    for (int step = 0; step < 4'000'000; ++step) {
        const Eigen::Matrix3d k1 = f(p);
        const Eigen::Matrix3d k2 = f(p + 0.5 * dt * k1);
        const Eigen::Matrix3d k3 = f(p + 0.5 * dt * k2);
        const Eigen::Matrix3d k4 = f(p + dt * k3);
        const Eigen::Matrix3d next = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((next - p).norm() < 1e-14 * (1.0 + next.norm())) {
            return next;
        }
        p = next;
    }
    return p;
}

// Exact propagator of an LTI system x' = M x over time t.
inline Eigen::MatrixXd expm_oracle(const Eigen::MatrixXd& m, double t) {
    return (m * t).exp();
}

}  // namespace testing

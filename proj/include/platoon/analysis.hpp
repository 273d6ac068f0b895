#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "platoon/graph.hpp"
#include "platoon/types.hpp"

namespace platoon {

/// Monic cubic lambda^3 + c2 lambda^2 + c1 lambda + c0 of one follower's
/// decoupled closed-loop factor.
struct CharacteristicCubic {
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
};

/// Per-follower characteristic cubics of the closed loop. Valid only for a
/// DAG topology; throws CyclicGraphError otherwise.
///
/// c2 = 1/tau_i + t_ia (d_ii + p_ii), c1 = t_iv (d_ii + p_ii),
/// c0 = t_ip (d_ii + p_ii), with t_i# = k_i# c_# / tau_i.
std::vector<CharacteristicCubic> characteristic_cubics(const std::vector<double>& taus,
                                                       const GainSet& gains,
                                                       const Topology& t);

/// Routh table outcome for a monic cubic. `degenerate` flags a (near) zero
/// pivot, reported as not asymptotically stable.
struct RouthResult {
    std::array<double, 4> first_column{};  // 1, c2, c1 - c0/c2, c0
    bool degenerate = false;
    bool stable = false;
};

RouthResult routh_verdict(const CharacteristicCubic& c);

/// Roots by the companion-matrix eigenvalue method.
std::array<std::complex<double>, 3> cubic_roots(const CharacteristicCubic& c);

/// Comparison of the full closed-loop spectrum against the multiset union of
/// the per-follower cubic roots (greedy nearest-neighbor pairing).
struct FactorizationReport {
    double max_pairing_distance = 0.0;
    bool ok = false;
    std::vector<std::complex<double>> matrix_eigenvalues;
    std::vector<std::complex<double>> cubic_root_union;
};

FactorizationReport spectrum_factorization_check(const std::vector<double>& taus,
                                                 const GainSet& gains,
                                                 const Topology& t, double tol);

/// Equivalent per-follower 3x3 subsystem A - (d_ii + p_ii) B (C k)^T and its
/// Hurwitz flag.
struct SubsystemResult {
    Eigen::Matrix3d matrix;
    bool hurwitz = false;
    std::array<std::complex<double>, 3> eigenvalues{};
};

SubsystemResult equivalent_subsystem(double tau, const Eigen::Vector3d& gains,
                                     double degree_plus_pin,
                                     const OutputMask& mask = OutputMask{});

}  // namespace platoon

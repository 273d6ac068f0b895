#include "platoon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "platoon/dynamics.hpp"

namespace platoon {

std::vector<CharacteristicCubic> characteristic_cubics(const std::vector<double>& taus,
                                                       const GainSet& gains,
                                                       const Topology& t) {
    const int n = t.size();
    if (static_cast<int>(taus.size()) != n || gains.size() != n) {
        throw std::invalid_argument("taus, gains, and topology sizes must agree");
    }
    topological_order(t);  // factorization is valid only for DAGs

    const Eigen::VectorXd d = degree_plus_pinning(t);
    std::vector<CharacteristicCubic> cubics(n);
    for (int i = 0; i < n; ++i) {
        const double t_p = gains.k_p(i) * gains.mask.c_p / taus[i];
        const double t_v = gains.k_v(i) * gains.mask.c_v / taus[i];
        const double t_a = gains.k_a(i) * gains.mask.c_a / taus[i];
        cubics[i].c2 = 1.0 / taus[i] + t_a * d(i);
        cubics[i].c1 = t_v * d(i);
        cubics[i].c0 = t_p * d(i);
    }
    return cubics;
}

RouthResult routh_verdict(const CharacteristicCubic& c) {
    RouthResult result;
    result.first_column[0] = 1.0;
    result.first_column[1] = c.c2;
    result.first_column[3] = c.c0;
    if (std::abs(c.c2) < 1e-300) {
        // Zero pivot; the table cannot be completed and the cubic is at best
        // marginal.
        result.degenerate = true;
        result.first_column[2] = std::numeric_limits<double>::quiet_NaN();
        result.stable = false;
        return result;
    }
    result.first_column[2] = c.c1 - c.c0 / c.c2;
    result.stable = c.c2 > 0.0 && result.first_column[2] > 0.0 && c.c0 > 0.0;
    return result;
}

std::array<std::complex<double>, 3> cubic_roots(const CharacteristicCubic& c) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 1) = 1.0;
    companion(1, 2) = 1.0;
    companion(2, 0) = -c.c0;
    companion(2, 1) = -c.c1;
    companion(2, 2) = -c.c2;
    const auto values = Eigen::EigenSolver<Eigen::Matrix3d>(companion, false).eigenvalues();
    return {values(0), values(1), values(2)};
}

FactorizationReport spectrum_factorization_check(const std::vector<double>& taus,
                                                 const GainSet& gains,
                                                 const Topology& t, double tol) {
    FactorizationReport report;
    const Eigen::MatrixXd closed_loop = closed_loop_matrix(taus, gains, t);
    const auto matrix_values =
        Eigen::EigenSolver<Eigen::MatrixXd>(closed_loop, false).eigenvalues();
    for (int i = 0; i < matrix_values.size(); ++i) {
        report.matrix_eigenvalues.push_back(matrix_values(i));
    }
    for (const auto& cubic : characteristic_cubics(taus, gains, t)) {
        for (const auto& root : cubic_roots(cubic)) {
            report.cubic_root_union.push_back(root);
        }
    }

    // Greedy nearest-neighbor pairing of the two multisets.
    std::vector<std::complex<double>> pool = report.cubic_root_union;
    double max_distance = 0.0;
    for (const auto& value : report.matrix_eigenvalues) {
        std::size_t best = 0;
        double best_distance = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pool.size(); ++j) {
            const double distance = std::abs(value - pool[j]);
            if (distance < best_distance) {
                best_distance = distance;
                best = j;
            }
        }
        max_distance = std::max(max_distance, best_distance);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    report.max_pairing_distance = max_distance;
    report.ok = max_distance <= tol;
    return report;
}

SubsystemResult equivalent_subsystem(double tau, const Eigen::Vector3d& gains,
                                     double degree_plus_pin, const OutputMask& mask) {
    const auto [a, b] = linear_matrices(tau);
    SubsystemResult result;
    result.matrix =
        a - degree_plus_pin * b * (gains.transpose() * mask.as_matrix());
    const auto values =
        Eigen::EigenSolver<Eigen::Matrix3d>(result.matrix, false).eigenvalues();
    result.hurwitz = true;
    for (int i = 0; i < 3; ++i) {
        result.eigenvalues[i] = values(i);
        result.hurwitz = result.hurwitz && values(i).real() < 0.0;
    }
    return result;
}

}  // namespace platoon

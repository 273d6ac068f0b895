#include "platoon/control.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "platoon/dynamics.hpp"

namespace platoon {

StabilityRow stability_region_check(double tau, const Eigen::Vector3d& gains,
                                    double degree_plus_pin, const OutputMask& mask) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("inertial time lag tau must be positive");
    }
    StabilityRow row;
    row.connected = degree_plus_pin > 0.0;
    if (!row.connected) {
        return row;
    }
    const double k_p = gains(0);
    const double k_v = gains(1);
    const double k_a_c = gains(2) * mask.c_a;

    row.position_gain_ok = k_p > 0.0;
    row.accel_gain_ok = k_a_c > -1.0 / degree_plus_pin;
    if (row.accel_gain_ok) {
        row.velocity_gain_bound = tau * k_p / (1.0 + k_a_c * degree_plus_pin);
        row.velocity_gain_ok = k_v > row.velocity_gain_bound;
    }
    return row;
}

StabilityVerdict platoon_stability_check(const std::vector<double>& taus,
                                         const GainSet& gains, const Topology& t) {
    const int n = t.size();
    if (static_cast<int>(taus.size()) != n || gains.size() != n) {
        throw std::invalid_argument("taus, gains, and topology sizes must agree");
    }
    StabilityVerdict verdict;
    verdict.mask_ok = gains.mask.c_p == 1 && gains.mask.c_v == 1;
    const Eigen::VectorXd d = degree_plus_pinning(t);
    verdict.rows.reserve(n);
    bool all_rows = true;
    for (int i = 0; i < n; ++i) {
        verdict.rows.push_back(
            stability_region_check(taus[i], gains.gains_for(i), d(i), gains.mask));
        all_rows = all_rows && verdict.rows.back().pass();
    }
    verdict.overall = verdict.mask_ok && all_rows;
    return verdict;
}

FeasibilityReport tracking_feasibility(const OutputMask& mask,
                                       const std::vector<double>& taus) {
    // Exosystem of a constant-speed leader and the follower embedding of it.
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    s(0, 1) = 1.0;
    Eigen::Matrix<double, 3, 2> pi = Eigen::Matrix<double, 3, 2>::Zero();
    pi(0, 0) = 1.0;
    pi(1, 1) = 1.0;
    Eigen::Matrix<double, 3, 2> r = Eigen::Matrix<double, 3, 2>::Zero();
    r(0, 0) = mask.c_p;
    r(1, 1) = mask.c_v;

    FeasibilityReport report;
    report.observability.topRows<3>() = r;
    report.observability.bottomRows<3>() = r * s;
    report.observability_rank = static_cast<int>(
        Eigen::FullPivLU<Eigen::MatrixXd>(report.observability).rank());
    report.feasible = report.observability_rank == 2;

    const Eigen::Matrix3d c = mask.as_matrix();
    report.max_output_residual = (c * pi - r).norm();
    for (double tau : taus) {
        const auto [a, b] = linear_matrices(tau);
        (void)b;
        report.max_state_residual =
            std::max(report.max_state_residual, (a * pi - pi * s).norm());
    }
    return report;
}

namespace {

// Direct solve of X M + M^T X = -Q over the 9 entries of X.
Eigen::Matrix3d solve_lyapunov(const Eigen::Matrix3d& m, const Eigen::Matrix3d& q) {
    const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
    // vec(X M) = (M^T (x) I) vec(X), vec(M^T X) = (I (x) M^T) vec(X)
    Eigen::Matrix<double, 9, 9> lhs =
        Eigen::kroneckerProduct(m.transpose(), i3) + Eigen::kroneckerProduct(i3, m.transpose());
    Eigen::Matrix<double, 9, 1> rhs = -Eigen::Map<const Eigen::Matrix<double, 9, 1>>(q.data());
    Eigen::Matrix<double, 9, 1> x = lhs.fullPivLu().solve(rhs);
    Eigen::Matrix3d result = Eigen::Map<Eigen::Matrix3d>(x.data());
    return 0.5 * (result + result.transpose());
}

bool is_hurwitz(const Eigen::Matrix3d& m) {
    const auto eigenvalues = Eigen::EigenSolver<Eigen::Matrix3d>(m, false).eigenvalues();
    for (int i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i).real() >= 0.0) return false;
    }
    return true;
}

Eigen::Matrix3d care_residual(const Eigen::Matrix3d& p, const Eigen::Matrix3d& a,
                              const Eigen::Vector3d& b, double epsilon) {
    return p * a + a.transpose() * p - p * b * b.transpose() * p +
           epsilon * Eigen::Matrix3d::Identity();
}

}  // namespace

Eigen::Matrix3d solve_care(const Eigen::Matrix3d& a, const Eigen::Vector3d& b,
                           double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("Riccati weight epsilon must be positive");
    }

    // Stabilizing start from a point inside the gain region: k_p = 1, k_v = 2 tau,
    // k_a = 0 mapped through u = -k^T x. The A(2,2) entry carries -1/tau.
    const double tau = -1.0 / a(2, 2);
    Eigen::RowVector3d k0(1.0, 2.0 * tau, 0.0);
    Eigen::Matrix3d a_cl = a - b * k0;

    constexpr int kMaxIterations = 60;
    constexpr double kTolScale = 1e-12;
    Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const Eigen::RowVector3d k =
            iter == 0 ? k0 : Eigen::RowVector3d(b.transpose() * p);
        a_cl = a - b * k;
        const Eigen::Matrix3d q =
            epsilon * Eigen::Matrix3d::Identity() + k.transpose() * k;
        const Eigen::Matrix3d next = solve_lyapunov(a_cl, q);
        const double change = (next - p).norm();
        p = next;
        if (change <= kTolScale * (1.0 + p.norm())) {
            break;
        }
    }

    const double residual = care_residual(p, a, b, epsilon).norm();
    if (residual > 1e-10 * (1.0 + p.norm())) {
        std::ostringstream msg;
        msg << "Riccati iteration did not converge; residual " << residual;
        throw NoConvergenceError(msg.str(), residual);
    }
    if (!is_hurwitz(a - b * b.transpose() * p)) {
        throw NoConvergenceError("Riccati solution is not stabilizing", residual);
    }
    return p;
}

SynthesisRecipe SynthesisRecipe::uniform(double epsilon_value, int n) {
    SynthesisRecipe recipe;
    recipe.epsilon = Eigen::VectorXd::Constant(n, epsilon_value);
    return recipe;
}

GainSet synthesize_gains(const std::vector<double>& taus, const Topology& t,
                         const SynthesisRecipe& recipe) {
    const int n = t.size();
    if (static_cast<int>(taus.size()) != n || recipe.epsilon.size() != n) {
        throw std::invalid_argument("taus, recipe, and topology sizes must agree");
    }
    const Eigen::VectorXd d = degree_plus_pinning(t);
    for (int i = 0; i < n; ++i) {
        if (!(d(i) > 0.0)) {
            throw std::invalid_argument(
                "synthesis requires every follower to hear at least one node");
        }
        if (!(recipe.epsilon(i) > 0.0)) {
            throw std::invalid_argument("Riccati weights must be positive");
        }
    }
    if (recipe.alpha && recipe.alpha->size() != n) {
        throw std::invalid_argument("alpha list length must equal follower count");
    }

    GainSet gains;
    gains.mask = OutputMask{1, 1, 1};
    gains.k_p.resize(n);
    gains.k_v.resize(n);
    gains.k_a.resize(n);
    for (int i = 0; i < n; ++i) {
        const double bound = 1.0 / (2.0 * d(i));
        const double alpha = recipe.alpha ? (*recipe.alpha)(i) : bound + 1.0;
        if (alpha < bound) {
            std::ostringstream msg;
            msg << "alpha for follower " << i + 1 << " is below the bound " << bound;
            throw std::invalid_argument(msg.str());
        }
        const auto [a, b] = linear_matrices(taus[i]);
        const Eigen::Matrix3d p = solve_care(a, b, recipe.epsilon(i));
        const Eigen::RowVector3d k = alpha * b.transpose() * p;
        gains.k_p(i) = k(0);
        gains.k_v(i) = k(1);
        gains.k_a(i) = k(2);
    }
    return gains;
}

double control_input(int i, const Eigen::Matrix3Xd& error_states,
                     const GainSet& gains, const Topology& t) {
    const int n = t.size();
    if (i < 0 || i >= n) {
        throw std::out_of_range("follower index out of range");
    }
    if (error_states.cols() != n || gains.size() != n) {
        throw std::invalid_argument("error states and gains must cover all followers");
    }
    const Eigen::Matrix3d c = gains.mask.as_matrix();
    Eigen::Vector3d lumped = Eigen::Vector3d::Zero();
    for (int j = 0; j < n; ++j) {
        if (t.adjacency(i, j) == 1) {
            lumped += c * (error_states.col(i) - error_states.col(j));
        }
    }
    lumped += t.pinning(i) * c * error_states.col(i);
    return -gains.gains_for(i).dot(lumped);
}

Eigen::VectorXd control_inputs(const Eigen::Matrix3Xd& error_states,
                               const GainSet& gains, const Topology& t) {
    Eigen::VectorXd u(t.size());
    for (int i = 0; i < t.size(); ++i) {
        u(i) = control_input(i, error_states, gains, t);
    }
    return u;
}

}  // namespace platoon

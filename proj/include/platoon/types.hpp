#pragma once

#include <Eigen/Dense>

namespace platoon {

/// Output mask of Eq-style measurement selection: each entry is 0 or 1 and
/// flags whether the corresponding state (position, velocity, acceleration)
/// is available for feedback.
struct OutputMask {
    int c_p = 1;
    int c_v = 1;
    int c_a = 1;

    Eigen::Matrix3d as_matrix() const {
        Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
        c(0, 0) = c_p;
        c(1, 1) = c_v;
        c(2, 2) = c_a;
        return c;
    }

    bool operator==(const OutputMask&) const = default;
};

/// Per-follower feedback gains (k_p, k_v, k_a) plus the shared output mask.
struct GainSet {
    Eigen::VectorXd k_p;
    Eigen::VectorXd k_v;
    Eigen::VectorXd k_a;
    OutputMask mask;

    int size() const { return static_cast<int>(k_p.size()); }

    Eigen::Vector3d gains_for(int i) const {
        return Eigen::Vector3d(k_p(i), k_v(i), k_a(i));
    }
};

}  // namespace platoon

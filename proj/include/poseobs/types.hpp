#pragma once

#include <Eigen/Dense>

namespace poseobs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat9x3 = Eigen::Matrix<double, 9, 3>;
using Mat3x9 = Eigen::Matrix<double, 3, 9>;

namespace tol {

/// Orthogonality tolerance for rotations produced by our own constructions.
inline constexpr double orth_constructed = 1e-9;
/// Orthogonality tolerance for rotations reconstructed from measured data.
inline constexpr double orth_measured = 1e-6;
/// Skew-symmetry tolerance accepted by vee().
inline constexpr double skew = 1e-9;
/// Symmetry tolerance accepted by eig_bounds().
inline constexpr double symmetric = 1e-9;
/// Smallest admissible singular value for the rotation block in project_se3().
inline constexpr double singular_block = 1e-12;
/// Sensor-log rotations: warn above this orthogonality defect.
inline constexpr double log_orth_warn = 1e-3;
/// Sensor-log rotations: reject above this orthogonality defect.
inline constexpr double log_orth_reject = 1e-1;

}  // namespace tol

}  // namespace poseobs

#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "poseobs/errors.hpp"
#include "poseobs/types.hpp"

namespace poseobs {

/// Matrix representation of the cross product: hat(v) * w == v x w.
inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat(). Requires the input to be skew-symmetric within tol::skew.
inline Vec3 vee(const Mat3& a) {
  if (((a + a.transpose()) / 2).norm() > tol::skew) {
    throw NotSkew("vee: symmetric part exceeds tolerance");
  }
  return {a(2, 1), a(0, 2), a(1, 0)};
}

/// Orthogonal projection onto skew-symmetric matrices: (A - A^T)/2.
inline Mat3 project_skew(const Mat3& a) { return (a - a.transpose()) / 2; }

inline bool is_rotation(const Mat3& r, double tolerance) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tolerance &&
         r.determinant() > 0.0;
}

/// Rodrigues formula, with a series fallback for small angles.
inline Mat3 exp_so3(const Vec3& v) {
  const double theta = v.norm();
  const Mat3 k = hat(v);
  if (theta < 1e-8) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * k + c * k * k;
}

/// Nearest rotation in Frobenius norm: special-orthogonal polar factor
/// R = U diag(1, 1, det(U V^T)) V^T.
inline Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < tol::singular_block) {
    throw SingularBlock("nearest_rotation: smallest singular value below 1e-12");
  }
  const Mat3 uvt = svd.matrixU() * svd.matrixV().transpose();
  return svd.matrixU() *
         Vec3(1.0, 1.0, uvt.determinant()).asDiagonal() *
         svd.matrixV().transpose();
}

/// Projection of a 4x4 matrix onto SE(3): nearest rotation for the upper-left
/// block, translation passed through unchanged.
inline std::pair<Mat3, Vec3> project_se3(const Mat4& a) {
  return {nearest_rotation(a.topLeftCorner<3, 3>()), a.topRightCorner<3, 1>()};
}

/// Moore-Penrose pseudo-inverse with an absolute singular-value cutoff.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double cutoff = 1e-12) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline Eigen::Index numerical_rank(const Eigen::MatrixXd& m,
                                   double cutoff = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return (svd.singularValues().array() > cutoff * svd.singularValues()(0))
      .count();
}

/// Landmark positions as homogeneous columns: rows 1-3 hold coordinates,
/// row 4 is identically one. At least four landmarks, full rank 4.
class HomogeneousPointSet {
 public:
  static HomogeneousPointSet from_points(const Eigen::Matrix3Xd& points) {
    Eigen::Matrix4Xd h(4, points.cols());
    h.topRows<3>() = points;
    h.row(3).setOnes();
    return HomogeneousPointSet(h);
  }

  static HomogeneousPointSet from_homogeneous(const Eigen::Matrix4Xd& h) {
    return HomogeneousPointSet(h);
  }

  const Eigen::Matrix4Xd& matrix() const { return h_; }
  Eigen::Index count() const { return h_.cols(); }
  Vec3 point(Eigen::Index i) const { return h_.col(i).head<3>(); }

 private:
  explicit HomogeneousPointSet(Eigen::Matrix4Xd h) : h_(std::move(h)) {
    if (h_.cols() < 4) {
      throw RankDeficient("HomogeneousPointSet: fewer than 4 landmarks");
    }
    if ((h_.row(3).array() != 1.0).any()) {
      throw RankDeficient("HomogeneousPointSet: last row must be exactly 1");
    }
    if (numerical_rank(h_) < 4) {
      throw RankDeficient("HomogeneousPointSet: landmark matrix rank below 4");
    }
  }

  Eigen::Matrix4Xd h_;
};

/// Pseudo-inverse of the landmark matrix (l x 4), used by pose reconstruction.
inline Eigen::MatrixXd pseudo_inverse(const HomogeneousPointSet& b) {
  return pinv(b.matrix());
}

/// Extreme eigenvalues of a symmetric matrix.
inline std::pair<double, double> eig_bounds(const Eigen::MatrixXd& s) {
  if ((s - s.transpose()).norm() > tol::symmetric) {
    throw NotSymmetric("eig_bounds: input not symmetric within 1e-9");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

}  // namespace poseobs

#pragma once

#include <cstdint>
#include <tuple>
#include <utility>

#include "poseobs/geometry.hpp"
#include "poseobs/random.hpp"
#include "poseobs/signals.hpp"

namespace poseobs {

/// Exact rigid-body state: rotation on SO(3), position, velocity.
struct TruthState {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Sensor models: constant inertial biases, per-component Gaussian noise,
/// landmark set used for pose measurements.
struct SensorSpec {
  Vec3 bias_gyro = Vec3::Zero();
  Vec3 bias_accel = Vec3::Zero();
  double noise_amplitude = 0.0;
  HomogeneousPointSet landmarks = default_landmarks();
  std::uint64_t rng_seed = 0;

  static HomogeneousPointSet default_landmarks() {
    // The eight vertices of [-1,1]^3; rank 4 and well conditioned.
    Eigen::Matrix3Xd pts(3, 8);
    int c = 0;
    for (double x : {-1.0, 1.0})
      for (double y : {-1.0, 1.0})
        for (double z : {-1.0, 1.0}) pts.col(c++) = Vec3(x, y, z);
    return HomogeneousPointSet::from_points(pts);
  }
};

/// One timestamped measurement sample fed to the observers.
struct MeasurementFrame {
  double t = 0.0;
  Mat3 R_m = Mat3::Identity();
  Vec3 p_m = Vec3::Zero();
  Vec3 omega_m = Vec3::Zero();
  Vec3 accel_m = Vec3::Zero();
};

/// One RK4 step of Rdot = R hat(omega), pdot = v, vdot = g + R a. The rotation
/// is re-projected to SO(3) afterwards; the accuracy contract assumes
/// dt <= 0.01 s.
inline TruthState step_truth(const TruthState& s, const SignalSpec& sig,
                             const Vec3& g, double t, double dt) {
  struct Deriv {
    Mat3 dR;
    Vec3 dp, dv;
  };
  const auto f = [&](const Mat3& R, const Vec3& /*p*/, const Vec3& v,
                     double tau) -> Deriv {
    return {R * hat(sig.angular_velocity(tau)), v,
            g + R * sig.body_acceleration(tau)};
  };
  const Deriv k1 = f(s.R, s.p, s.v, t);
  const Deriv k2 = f(s.R + 0.5 * dt * k1.dR, s.p + 0.5 * dt * k1.dp,
                     s.v + 0.5 * dt * k1.dv, t + 0.5 * dt);
  const Deriv k3 = f(s.R + 0.5 * dt * k2.dR, s.p + 0.5 * dt * k2.dp,
                     s.v + 0.5 * dt * k2.dv, t + 0.5 * dt);
  const Deriv k4 = f(s.R + dt * k3.dR, s.p + dt * k3.dp, s.v + dt * k3.dv,
                     t + dt);
  TruthState out;
  out.R = nearest_rotation(
      s.R + dt / 6.0 * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR));
  out.p = s.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  out.v = s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  return out;
}

/// Body-frame landmark observations: column i is (R^T (p_i - p) + noise, 1).
inline Eigen::Matrix4Xd synth_landmark_body(const TruthState& s,
                                            const HomogeneousPointSet& landmarks,
                                            double noise, NormalStream& rng) {
  const auto l = landmarks.count();
  Eigen::Matrix4Xd r(4, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    Vec3 body = s.R.transpose() * (landmarks.point(i) - s.p);
    if (noise > 0.0) body += noise * rng.next_vec3();
    r.col(i).head<3>() = body;
    r(3, i) = 1.0;
  }
  return r;
}

/// World-frame pose recovered from body-frame landmark observations.
///
/// r ~ T b with T encoding (R^T, -R^T p), so the SE(3) projection of r b+
/// yields the body-to-world inverse; the result is converted back to (R, p).
inline std::pair<Mat3, Vec3> reconstruct_pose(const Eigen::Matrix4Xd& r,
                                              const HomogeneousPointSet& b) {
  const Mat4 t_inv = r * pseudo_inverse(b);
  const auto [f, tau] = project_se3(t_inv);
  const Mat3 r_m = f.transpose();
  return {r_m, -r_m * tau};
}

/// Biased, optionally noisy inertial measurements.
inline std::pair<Vec3, Vec3> corrupt_inertial(const Vec3& omega, const Vec3& accel,
                                              const SensorSpec& spec,
                                              NormalStream& gyro_rng,
                                              NormalStream& accel_rng) {
  Vec3 omega_m = omega + spec.bias_gyro;
  Vec3 accel_m = accel + spec.bias_accel;
  if (spec.noise_amplitude > 0.0) {
    omega_m += spec.noise_amplitude * gyro_rng.next_vec3();
    accel_m += spec.noise_amplitude * accel_rng.next_vec3();
  }
  return {omega_m, accel_m};
}

/// Full measurement pipeline at time t: landmark-based pose plus biased
/// inertial channels. Draw order per step: landmarks, gyro, accel.
inline MeasurementFrame make_measurement(const TruthState& s,
                                         const SignalSpec& sig,
                                         const SensorSpec& spec, double t,
                                         NormalStream& landmark_rng,
                                         NormalStream& gyro_rng,
                                         NormalStream& accel_rng) {
  MeasurementFrame m;
  m.t = t;
  const Eigen::Matrix4Xd r =
      synth_landmark_body(s, spec.landmarks, spec.noise_amplitude, landmark_rng);
  std::tie(m.R_m, m.p_m) = reconstruct_pose(r, spec.landmarks);
  std::tie(m.omega_m, m.accel_m) = corrupt_inertial(
      sig.angular_velocity(t), sig.body_acceleration(t), spec, gyro_rng,
      accel_rng);
  return m;
}

}  // namespace poseobs

#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "poseobs/dynamics.hpp"
#include "poseobs/geometry.hpp"

namespace poseobs {

/// Observer estimate. The rotation estimate lives in ambient R^{3x3} and is
/// deliberately never projected back to SO(3).
struct ObserverState {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 bias_gyro = Vec3::Zero();
  Vec3 bias_accel = Vec3::Zero();
};

/// Scalar gains of the constant-gain observer, plus the angular-velocity
/// bound c used when certifying (k3, k4, k5).
struct ConstGains {
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 1.0;
  double k4 = 1.0;
  double k5 = 1.0;
  double c = 1.0;
};

/// Outcome of the gain feasibility check. in_K reports membership in the
/// sufficient set K(c); the Y/Z eigenvalues let callers accept gains that
/// satisfy the matrix inequalities directly even when outside K(c).
struct FeasibilityReport {
  bool in_K = false;
  double Y_min_eig = 0.0;
  double Z_min_eig = 0.0;
  std::vector<std::string> violated_conditions;

  bool matrix_inequalities_hold() const {
    return Y_min_eig > 0.0 && Z_min_eig > 0.0;
  }
};

inline Mat3 build_Y(double k3, double k4, double k5, double c) {
  Mat3 y;
  y << 2 * k3 * k3 - 2 * k4 - k5 * k5, k3 * k4 - k3 * k5 * k5, -k3 * k5,
      k3 * k4 - k3 * k5 * k5, 2 * k4 * k4 - 2 * k3 * k5 - k3 * k3 * k5 * k5,
      -k4 * k5,
      -k3 * k5, -k4 * k5, 2 * k5 * k5 - c * c;
  return y;
}

inline Mat3 build_Z(double k3, double k4, double k5) {
  Mat3 z;
  z << k3, k4, -k5,
      k4, k3 * k4 - k5, -k3 * k5,
      -k5, -k3 * k5, k4 * k5;
  return z;
}

/// Evaluates the six K(c) inequalities plus the positive-definiteness of Y
/// and Z. c must be positive.
inline FeasibilityReport check_gains(double k3, double k4, double k5, double c) {
  FeasibilityReport rep;
  const struct {
    const char* name;
    double value;
  } conditions[] = {
      {"k5 > c", k5 - c},
      {"k3 > 0", k3},
      {"k4^2 - 2 k3 k5 - 2 k3^2 k5^2 > 0",
       k4 * k4 - 2 * k3 * k5 - 2 * k3 * k3 * k5 * k5},
      {"k3^2 k4 - k3 k5 - k4^2 > 0", k3 * k3 * k4 - k3 * k5 - k4 * k4},
      {"k3^2 k4^2 - k3^3 k5 - k4^3 > 0",
       k3 * k3 * k4 * k4 - k3 * k3 * k3 * k5 - k4 * k4 * k4},
      {"k3^2 - 2 k4 - 2 k5^2 > 0", k3 * k3 - 2 * k4 - 2 * k5 * k5},
  };
  rep.in_K = true;
  for (const auto& cond : conditions) {
    if (!(cond.value > 0.0)) {
      rep.in_K = false;
      rep.violated_conditions.emplace_back(cond.name);
    }
  }
  rep.Y_min_eig = eig_bounds(build_Y(k3, k4, k5, c)).first;
  rep.Z_min_eig = eig_bounds(build_Z(k3, k4, k5)).first;
  return rep;
}

/// Lifts a K(1)-feasible triple to K(c) via (s k3', s^2 k4', s k5') with
/// s = max(c, 1); for c <= 1 the base triple already qualifies.
inline std::tuple<double, double, double> scale_gains(double k3, double k4,
                                                      double k5, double c) {
  if (!check_gains(k3, k4, k5, 1.0).in_K) {
    throw BaseGainsInfeasible("scale_gains: base triple not in K(1)");
  }
  if (!(c > 0.0)) {
    throw BaseGainsInfeasible("scale_gains: c must be positive");
  }
  const double s = std::max(c, 1.0);
  return {s * k3, s * s * k4, s * k5};
}

namespace detail {

struct ObserverDeriv {
  Mat3 dR;
  Vec3 dp, dv, dbg, dba;
};

inline ObserverDeriv const_observer_rhs(const ObserverState& o,
                                        const MeasurementFrame& m,
                                        const Vec3& g, const ConstGains& k) {
  ObserverDeriv d;
  d.dR = m.R_m * hat(m.omega_m - o.bias_gyro) + k.k1 * (m.R_m - o.R);
  d.dbg = k.k2 * vee(project_skew(m.R_m.transpose() * o.R));
  d.dp = o.v + k.k3 * (m.p_m - o.p);
  d.dv = g + m.R_m * (m.accel_m - o.bias_accel) + k.k4 * (m.p_m - o.p);
  d.dba = -k.k5 * (m.R_m.transpose() * (m.p_m - o.p));
  return d;
}

inline ObserverState axpy(const ObserverState& o, double h,
                          const ObserverDeriv& d) {
  ObserverState out;
  out.R = o.R + h * d.dR;
  out.p = o.p + h * d.dp;
  out.v = o.v + h * d.dv;
  out.bias_gyro = o.bias_gyro + h * d.dbg;
  out.bias_accel = o.bias_accel + h * d.dba;
  return out;
}

inline ObserverState rk4_combine(const ObserverState& o, double dt,
                                 const ObserverDeriv& k1, const ObserverDeriv& k2,
                                 const ObserverDeriv& k3, const ObserverDeriv& k4) {
  ObserverState out;
  out.R = o.R + dt / 6.0 * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR);
  out.p = o.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  out.v = o.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.bias_gyro =
      o.bias_gyro + dt / 6.0 * (k1.dbg + 2.0 * k2.dbg + 2.0 * k3.dbg + k4.dbg);
  out.bias_accel =
      o.bias_accel + dt / 6.0 * (k1.dba + 2.0 * k2.dba + 2.0 * k3.dba + k4.dba);
  return out;
}

}  // namespace detail

/// One RK4 step of the constant-gain observer with the measurement held
/// constant over the step (zero-order hold). dt <= 0.01 s.
inline ObserverState step_observer_const(const ObserverState& o,
                                         const MeasurementFrame& m, const Vec3& g,
                                         const ConstGains& gains, double dt) {
  using detail::axpy;
  using detail::const_observer_rhs;
  const auto k1 = const_observer_rhs(o, m, g, gains);
  const auto k2 = const_observer_rhs(axpy(o, 0.5 * dt, k1), m, g, gains);
  const auto k3 = const_observer_rhs(axpy(o, 0.5 * dt, k2), m, g, gains);
  const auto k4 = const_observer_rhs(axpy(o, dt, k3), m, g, gains);
  return detail::rk4_combine(o, dt, k1, k2, k3, k4);
}

/// The 9x9 matrix pairing the translational error vector (e_p, e_v, e_a) with
/// its Lyapunov form x^T P^{-1} x for constant gains; shares eigenvalues
/// with kron(Z, I3).
inline Mat9 const_gain_P(const ConstGains& k, const Mat3& R) {
  Mat9 p = Mat9::Zero();
  const Mat3 i3 = Mat3::Identity();
  p.block<3, 3>(0, 0) = k.k3 * i3;
  p.block<3, 3>(0, 3) = k.k4 * i3;
  p.block<3, 3>(0, 6) = -k.k5 * R;
  p.block<3, 3>(3, 0) = k.k4 * i3;
  p.block<3, 3>(3, 3) = (k.k3 * k.k4 - k.k5) * i3;
  p.block<3, 3>(3, 6) = -k.k3 * k.k5 * R;
  p.block<3, 3>(6, 0) = -k.k5 * R.transpose();
  p.block<3, 3>(6, 3) = -k.k3 * k.k5 * R.transpose();
  p.block<3, 3>(6, 6) = k.k4 * k.k5 * i3;
  return p;
}

}  // namespace poseobs

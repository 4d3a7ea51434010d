#pragma once

#include <utility>

#include "poseobs/observer_const.hpp"

namespace poseobs {

/// State of the continuous Riccati equation driving the variable-gain
/// observer. P is kept symmetric positive definite; Q and V are constant.
struct RiccatiState {
  Mat9 P = Mat9::Identity();
  Mat3 Q = Mat3::Identity();
  Mat9 V = 0.1 * Mat9::Identity();
  double k1 = 1.0;
  double k2 = 1.0;
};

struct GainTriple {
  Mat3 K3 = Mat3::Zero();
  Mat3 K4 = Mat3::Zero();
  Mat3 K5 = Mat3::Zero();
};

/// System matrix of the translational error dynamics:
/// blocks (1,2) = I3, (2,3) = -R, zero elsewhere.
inline Mat9 build_A(const Mat3& R) {
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(0, 3) = Mat3::Identity();
  a.block<3, 3>(3, 6) = -R;
  return a;
}

/// M M^T for M = [M0 M1 M2] with M0 = C^T and M_{i+1} = A^T M_i (the time
/// derivatives vanish for this A, C). Equals I9 exactly when R is a rotation.
inline Mat9 observability_certificate(const Mat3& R) {
  const Mat9 a_t = build_A(R).transpose();
  Mat9x3 m0 = Mat9x3::Zero();
  m0.topRows<3>() = Mat3::Identity();
  const Mat9x3 m1 = a_t * m0;
  const Mat9x3 m2 = a_t * m1;
  Mat9 m;
  m << m0, m1, m2;
  return m * m.transpose();
}

/// Right-hand side of the continuous Riccati equation
/// Pdot = A P + P A^T - P C^T Q C P + V. Symmetric for symmetric P.
inline Mat9 cre_rhs(const Mat9& P, const Mat3& R, const Mat3& Q, const Mat9& V) {
  const Mat9 a = build_A(R);
  // C^T Q C only touches the leading 3x3 block.
  Mat9 ctqc = Mat9::Zero();
  ctqc.block<3, 3>(0, 0) = Q;
  return a * P + P * a.transpose() - P * ctqc * P + V;
}

inline double min_eig_symmetric(const Mat9& s) {
  Eigen::SelfAdjointEigenSolver<Mat9> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// One RK4 step of the CRE with R held over the step. The result is
/// explicitly symmetrized and checked for positive definiteness.
inline RiccatiState step_riccati(const RiccatiState& rs, const Mat3& R,
                                 double dt) {
  const Mat9 k1 = cre_rhs(rs.P, R, rs.Q, rs.V);
  const Mat9 k2 = cre_rhs(rs.P + 0.5 * dt * k1, R, rs.Q, rs.V);
  const Mat9 k3 = cre_rhs(rs.P + 0.5 * dt * k2, R, rs.Q, rs.V);
  const Mat9 k4 = cre_rhs(rs.P + dt * k3, R, rs.Q, rs.V);
  RiccatiState out = rs;
  out.P = rs.P + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.P = ((out.P + out.P.transpose()) / 2.0).eval();
  if (min_eig_symmetric(out.P) <= 0.0) {
    throw LostPositivity("step_riccati: P lost positive definiteness");
  }
  return out;
}

/// Gain blocks [K3; K4; K5] = P C^T Q.
inline GainTriple extract_gains(const Mat9& P, const Mat3& Q) {
  GainTriple k;
  k.K3 = P.block<3, 3>(0, 0) * Q;
  k.K4 = P.block<3, 3>(3, 0) * Q;
  k.K5 = P.block<3, 3>(6, 0) * Q;
  return k;
}

inline GainTriple extract_gains(const RiccatiState& rs) {
  return extract_gains(rs.P, rs.Q);
}

namespace detail {

inline ObserverDeriv var_observer_rhs(const ObserverState& o, const Mat9& P,
                                      const MeasurementFrame& m, const Vec3& g,
                                      const RiccatiState& rs) {
  const GainTriple k = extract_gains(P, rs.Q);
  ObserverDeriv d;
  d.dR = m.R_m * hat(m.omega_m - o.bias_gyro) + rs.k1 * (m.R_m - o.R);
  d.dbg = rs.k2 * vee(project_skew(m.R_m.transpose() * o.R));
  const Vec3 innovation = m.p_m - o.p;
  d.dp = o.v + k.K3 * innovation;
  d.dv = g + m.R_m * (m.accel_m - o.bias_accel) + k.K4 * innovation;
  d.dba = k.K5 * innovation;
  return d;
}

}  // namespace detail

/// Joint RK4 step of the variable-gain observer and the CRE, with gains
/// re-extracted from the stage value of P at every stage. Measurements are
/// held over the step.
inline std::pair<ObserverState, RiccatiState> step_observer_var(
    const ObserverState& o, const MeasurementFrame& m, const Vec3& g,
    const RiccatiState& rs, double dt) {
  using detail::axpy;
  using detail::var_observer_rhs;
  const Mat3& R = m.R_m;

  const auto ko1 = var_observer_rhs(o, rs.P, m, g, rs);
  const Mat9 kp1 = cre_rhs(rs.P, R, rs.Q, rs.V);

  const auto ko2 = var_observer_rhs(axpy(o, 0.5 * dt, ko1), rs.P + 0.5 * dt * kp1,
                                    m, g, rs);
  const Mat9 kp2 = cre_rhs(rs.P + 0.5 * dt * kp1, R, rs.Q, rs.V);

  const auto ko3 = var_observer_rhs(axpy(o, 0.5 * dt, ko2), rs.P + 0.5 * dt * kp2,
                                    m, g, rs);
  const Mat9 kp3 = cre_rhs(rs.P + 0.5 * dt * kp2, R, rs.Q, rs.V);

  const auto ko4 = var_observer_rhs(axpy(o, dt, ko3), rs.P + dt * kp3, m, g, rs);
  const Mat9 kp4 = cre_rhs(rs.P + dt * kp3, R, rs.Q, rs.V);

  RiccatiState rs_out = rs;
  rs_out.P = rs.P + dt / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
  rs_out.P = ((rs_out.P + rs_out.P.transpose()) / 2.0).eval();
  if (min_eig_symmetric(rs_out.P) <= 0.0) {
    throw LostPositivity("step_observer_var: P lost positive definiteness");
  }
  return {detail::rk4_combine(o, dt, ko1, ko2, ko3, ko4), rs_out};
}

}  // namespace poseobs

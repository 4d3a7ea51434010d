#pragma once

#include <array>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "poseobs/diagnostics.hpp"

namespace poseobs {

enum class MeasurementMode {
  /// Measurements evaluated continuously at the integrator stages; the
  /// estimation errors are integrated directly (noise-free runs only).
  ideal,
  /// Measurements synthesized once per step from the sensor models and held
  /// over the step, exactly as in log replay.
  sampled,
};

struct SimOptions {
  double dt = 1e-3;
  double t_end = 15.0;
  Vec3 gravity{0.0, 0.0, -9.81};
  MeasurementMode mode = MeasurementMode::ideal;
  bool record_v2_const = false;
  TruthState truth0;
  ObserverState observer0;
};

struct TraceRow {
  double t = 0.0;
  TruthState truth;
  MeasurementFrame meas;
  ObserverState est;
  ErrorRecord err;
  // Riccati runs only.
  std::optional<double> p_min_eig;
  std::optional<double> p_max_eig;
};

struct SimResult {
  std::vector<TraceRow> rows;
  TruthState final_truth;
  ObserverState final_observer;
  ErrorRecord final_errors;
  std::optional<RiccatiState> final_riccati;
};

namespace detail {

/// Estimation errors relative to the truth. Integrating these directly keeps
/// the error trajectories independent of gravity and free of cancellation
/// against the growing truth states.
struct ErrorState {
  Mat3 E_R = Mat3::Zero();
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  Vec3 e_omega = Vec3::Zero();
  Vec3 e_accel = Vec3::Zero();
};

inline ErrorState errors_between(const TruthState& truth, const SensorSpec& sensor,
                                 const ObserverState& obs) {
  ErrorState e;
  e.E_R = truth.R - obs.R;
  e.e_p = truth.p - obs.p;
  e.e_v = truth.v - obs.v;
  e.e_omega = sensor.bias_gyro - obs.bias_gyro;
  e.e_accel = sensor.bias_accel - obs.bias_accel;
  return e;
}

inline ObserverState observer_from_errors(const TruthState& truth,
                                          const SensorSpec& sensor,
                                          const ErrorState& e) {
  ObserverState o;
  o.R = truth.R - e.E_R;
  o.p = truth.p - e.e_p;
  o.v = truth.v - e.e_v;
  o.bias_gyro = sensor.bias_gyro - e.e_omega;
  o.bias_accel = sensor.bias_accel - e.e_accel;
  return o;
}

/// Error record taken from the integrated error state itself.
inline ErrorRecord record_from_errors(double t, const ErrorState& e, double k2,
                                      const Mat9* P = nullptr) {
  ErrorRecord r;
  r.t = t;
  r.norm_E_R = e.E_R.norm();
  r.norm_e_p = e.e_p.norm();
  r.norm_e_v = e.e_v.norm();
  r.norm_e_omega = e.e_omega.norm();
  r.norm_e_accel = e.e_accel.norm();
  r.V1 = lyapunov_v1(e.E_R, e.e_omega, k2);
  if (P != nullptr) r.V2 = lyapunov_v2(e.e_p, e.e_v, e.e_accel, *P);
  return r;
}

struct IdealState {
  Mat3 R;
  Vec3 p, v;
  ErrorState err;
  Mat9 P;  // Riccati runs only.
};

struct IdealDeriv {
  Mat3 dR;
  Vec3 dp, dv;
  Mat3 dE;
  Vec3 dep, dev, dew, dea;
  Mat9 dP;
};

template <typename GainFn>
IdealDeriv ideal_rhs(const IdealState& s, double t, const SignalSpec& sig,
                     const Vec3& g, double k1, double k2, GainFn&& gains,
                     bool with_riccati, const Mat3& Q, const Mat9& V) {
  IdealDeriv d;
  d.dR = s.R * hat(sig.angular_velocity(t));
  d.dp = s.v;
  d.dv = g + s.R * sig.body_acceleration(t);
  d.dE = -s.R * hat(s.err.e_omega) - k1 * s.err.E_R;
  d.dew = k2 * vee(project_skew(s.R.transpose() * s.err.E_R));
  const auto [K3, K4, K5] = gains(s);
  d.dep = s.err.e_v - K3 * s.err.e_p;
  d.dev = -s.R * s.err.e_accel - K4 * s.err.e_p;
  d.dea = K5 * s.err.e_p;
  if (with_riccati) {
    d.dP = cre_rhs(s.P, s.R, Q, V);
  } else {
    d.dP.setZero();
  }
  return d;
}

inline IdealState ideal_axpy(const IdealState& s, double h, const IdealDeriv& d,
                             bool with_riccati) {
  IdealState out;
  out.R = s.R + h * d.dR;
  out.p = s.p + h * d.dp;
  out.v = s.v + h * d.dv;
  out.err.E_R = s.err.E_R + h * d.dE;
  out.err.e_p = s.err.e_p + h * d.dep;
  out.err.e_v = s.err.e_v + h * d.dev;
  out.err.e_omega = s.err.e_omega + h * d.dew;
  out.err.e_accel = s.err.e_accel + h * d.dea;
  out.P = with_riccati ? (s.P + h * d.dP).eval() : s.P;
  return out;
}

template <typename GainFn>
void ideal_step(IdealState& s, double t, double dt, const SignalSpec& sig,
                const Vec3& g, double k1, double k2, GainFn&& gains,
                bool with_riccati, const Mat3& Q, const Mat9& V) {
  const IdealDeriv d1 = ideal_rhs(s, t, sig, g, k1, k2, gains, with_riccati, Q, V);
  const IdealDeriv d2 = ideal_rhs(ideal_axpy(s, 0.5 * dt, d1, with_riccati),
                                  t + 0.5 * dt, sig, g, k1, k2, gains,
                                  with_riccati, Q, V);
  const IdealDeriv d3 = ideal_rhs(ideal_axpy(s, 0.5 * dt, d2, with_riccati),
                                  t + 0.5 * dt, sig, g, k1, k2, gains,
                                  with_riccati, Q, V);
  const IdealDeriv d4 = ideal_rhs(ideal_axpy(s, dt, d3, with_riccati), t + dt,
                                  sig, g, k1, k2, gains, with_riccati, Q, V);
  IdealState n;
  n.R = s.R + dt / 6.0 * (d1.dR + 2.0 * d2.dR + 2.0 * d3.dR + d4.dR);
  n.p = s.p + dt / 6.0 * (d1.dp + 2.0 * d2.dp + 2.0 * d3.dp + d4.dp);
  n.v = s.v + dt / 6.0 * (d1.dv + 2.0 * d2.dv + 2.0 * d3.dv + d4.dv);
  n.err.E_R =
      s.err.E_R + dt / 6.0 * (d1.dE + 2.0 * d2.dE + 2.0 * d3.dE + d4.dE);
  n.err.e_p =
      s.err.e_p + dt / 6.0 * (d1.dep + 2.0 * d2.dep + 2.0 * d3.dep + d4.dep);
  n.err.e_v =
      s.err.e_v + dt / 6.0 * (d1.dev + 2.0 * d2.dev + 2.0 * d3.dev + d4.dev);
  n.err.e_omega =
      s.err.e_omega + dt / 6.0 * (d1.dew + 2.0 * d2.dew + 2.0 * d3.dew + d4.dew);
  n.err.e_accel =
      s.err.e_accel + dt / 6.0 * (d1.dea + 2.0 * d2.dea + 2.0 * d3.dea + d4.dea);
  if (with_riccati) {
    n.P = s.P + dt / 6.0 * (d1.dP + 2.0 * d2.dP + 2.0 * d3.dP + d4.dP);
    n.P = ((n.P + n.P.transpose()) / 2.0).eval();
    if (min_eig_symmetric(n.P) <= 0.0) {
      throw LostPositivity("simulate: P lost positive definiteness at t=" +
                           std::to_string(t));
    }
  } else {
    n.P = s.P;
  }
  // The truth rotation is re-projected each step; shift E_R by the same
  // delta so E_R == R - R_est stays exact.
  const Mat3 r_proj = nearest_rotation(n.R);
  n.err.E_R += r_proj - n.R;
  n.R = r_proj;
  s = n;
}

/// Noise-free measurement columns for trace output in ideal mode.
inline MeasurementFrame ideal_measurement(const TruthState& truth,
                                          const SignalSpec& sig,
                                          const SensorSpec& sensor, double t) {
  MeasurementFrame m;
  m.t = t;
  m.R_m = truth.R;
  m.p_m = truth.p;
  m.omega_m = sig.angular_velocity(t) + sensor.bias_gyro;
  m.accel_m = sig.body_acceleration(t) + sensor.bias_accel;
  return m;
}

}  // namespace detail

/// Simulates truth and the constant-gain observer over [0, t_end).
/// One trace row per integration step, taken at the step start.
inline SimResult simulate_constant(const SignalSpec& sig, const SensorSpec& sensor,
                                   const ConstGains& gains,
                                   const SimOptions& opt) {
  if (opt.mode == MeasurementMode::ideal && sensor.noise_amplitude != 0.0) {
    throw ConfigInvalid("ideal measurement mode requires zero noise");
  }
  const auto n = static_cast<long>(std::llround(opt.t_end / opt.dt));
  SimResult result;
  result.rows.reserve(n);

  const auto record = [&](double t, const TruthState& truth,
                          const MeasurementFrame& m, const ObserverState& est,
                          const ErrorRecord& err) {
    TraceRow row;
    row.t = t;
    row.truth = truth;
    row.meas = m;
    row.est = est;
    row.err = err;
    result.rows.push_back(std::move(row));
  };
  const auto const_errors = [&](double t, const detail::ErrorState& e,
                                const Mat3& R) {
    if (!opt.record_v2_const) return detail::record_from_errors(t, e, gains.k2);
    const Mat9 p = const_gain_P(gains, R);
    return detail::record_from_errors(t, e, gains.k2, &p);
  };

  if (opt.mode == MeasurementMode::ideal) {
    detail::IdealState s;
    s.R = opt.truth0.R;
    s.p = opt.truth0.p;
    s.v = opt.truth0.v;
    s.err = detail::errors_between(opt.truth0, sensor, opt.observer0);
    s.P.setZero();
    const auto const_gain_fn = [&](const detail::IdealState& st) {
      return std::array<Mat3, 3>{gains.k3 * Mat3::Identity(),
                                 gains.k4 * Mat3::Identity(),
                                 gains.k5 * st.R.transpose()};
    };
    double t = 0.0;
    for (long i = 0; i < n; ++i) {
      const TruthState truth{s.R, s.p, s.v};
      record(t, truth, detail::ideal_measurement(truth, sig, sensor, t),
             detail::observer_from_errors(truth, sensor, s.err),
             const_errors(t, s.err, s.R));
      detail::ideal_step(s, t, opt.dt, sig, opt.gravity, gains.k1, gains.k2,
                         const_gain_fn, false, Mat3::Identity(), Mat9::Zero());
      t = (i + 1) * opt.dt;
    }
    result.final_truth = TruthState{s.R, s.p, s.v};
    result.final_observer =
        detail::observer_from_errors(result.final_truth, sensor, s.err);
    result.final_errors = const_errors(t, s.err, s.R);
  } else {
    NormalStream landmark_rng(sensor.rng_seed, rng_stream::landmarks);
    NormalStream gyro_rng(sensor.rng_seed, rng_stream::gyro);
    NormalStream accel_rng(sensor.rng_seed, rng_stream::accel);
    TruthState truth = opt.truth0;
    ObserverState est = opt.observer0;
    double t = 0.0;
    for (long i = 0; i < n; ++i) {
      const MeasurementFrame m = make_measurement(truth, sig, sensor, t,
                                                  landmark_rng, gyro_rng,
                                                  accel_rng);
      record(t, truth, m, est,
             const_errors(t, detail::errors_between(truth, sensor, est),
                          truth.R));
      est = step_observer_const(est, m, opt.gravity, gains, opt.dt);
      truth = step_truth(truth, sig, opt.gravity, t, opt.dt);
      t = (i + 1) * opt.dt;
    }
    result.final_truth = truth;
    result.final_observer = est;
    result.final_errors = compute_errors(t, truth, sensor.bias_gyro,
                                         sensor.bias_accel, est, gains.k2);
  }
  return result;
}

/// Simulates truth and the Riccati variable-gain observer over [0, t_end).
inline SimResult simulate_riccati(const SignalSpec& sig, const SensorSpec& sensor,
                                  const RiccatiState& riccati0,
                                  const SimOptions& opt) {
  if (opt.mode == MeasurementMode::ideal && sensor.noise_amplitude != 0.0) {
    throw ConfigInvalid("ideal measurement mode requires zero noise");
  }
  const auto n = static_cast<long>(std::llround(opt.t_end / opt.dt));
  SimResult result;
  result.rows.reserve(n);

  const auto record = [&](double t, const TruthState& truth,
                          const MeasurementFrame& m, const ObserverState& est,
                          const ErrorRecord& err, const Mat9& P) {
    TraceRow row;
    row.t = t;
    row.truth = truth;
    row.meas = m;
    row.est = est;
    row.err = err;
    Eigen::SelfAdjointEigenSolver<Mat9> es(P, Eigen::EigenvaluesOnly);
    row.p_min_eig = es.eigenvalues()(0);
    row.p_max_eig = es.eigenvalues()(8);
    result.rows.push_back(std::move(row));
  };

  if (opt.mode == MeasurementMode::ideal) {
    detail::IdealState s;
    s.R = opt.truth0.R;
    s.p = opt.truth0.p;
    s.v = opt.truth0.v;
    s.err = detail::errors_between(opt.truth0, sensor, opt.observer0);
    s.P = riccati0.P;
    const auto riccati_gain_fn = [&](const detail::IdealState& st) {
      const GainTriple k = extract_gains(st.P, riccati0.Q);
      return std::array<Mat3, 3>{k.K3, k.K4, -k.K5};
    };
    double t = 0.0;
    for (long i = 0; i < n; ++i) {
      const TruthState truth{s.R, s.p, s.v};
      record(t, truth, detail::ideal_measurement(truth, sig, sensor, t),
             detail::observer_from_errors(truth, sensor, s.err),
             detail::record_from_errors(t, s.err, riccati0.k2, &s.P), s.P);
      detail::ideal_step(s, t, opt.dt, sig, opt.gravity, riccati0.k1,
                         riccati0.k2, riccati_gain_fn, true, riccati0.Q,
                         riccati0.V);
      t = (i + 1) * opt.dt;
    }
    result.final_truth = TruthState{s.R, s.p, s.v};
    result.final_observer =
        detail::observer_from_errors(result.final_truth, sensor, s.err);
    result.final_errors =
        detail::record_from_errors(t, s.err, riccati0.k2, &s.P);
    RiccatiState rs = riccati0;
    rs.P = s.P;
    result.final_riccati = rs;
  } else {
    NormalStream landmark_rng(sensor.rng_seed, rng_stream::landmarks);
    NormalStream gyro_rng(sensor.rng_seed, rng_stream::gyro);
    NormalStream accel_rng(sensor.rng_seed, rng_stream::accel);
    TruthState truth = opt.truth0;
    ObserverState est = opt.observer0;
    RiccatiState rs = riccati0;
    double t = 0.0;
    for (long i = 0; i < n; ++i) {
      const MeasurementFrame m = make_measurement(truth, sig, sensor, t,
                                                  landmark_rng, gyro_rng,
                                                  accel_rng);
      record(t, truth, m, est,
             compute_errors(t, truth, sensor.bias_gyro, sensor.bias_accel, est,
                            riccati0.k2, &rs.P),
             rs.P);
      try {
        std::tie(est, rs) = step_observer_var(est, m, opt.gravity, rs, opt.dt);
      } catch (const LostPositivity& e) {
        throw LostPositivity(std::string(e.what()) + " at t=" +
                             std::to_string(t));
      }
      truth = step_truth(truth, sig, opt.gravity, t, opt.dt);
      t = (i + 1) * opt.dt;
    }
    result.final_truth = truth;
    result.final_observer = est;
    result.final_errors = compute_errors(t, truth, sensor.bias_gyro,
                                         sensor.bias_accel, est, riccati0.k2,
                                         &rs.P);
    result.final_riccati = rs;
  }
  return result;
}

}  // namespace poseobs

#include "poseobs/simulate.hpp"

#include <cstring>
#include <gtest/gtest.h>

#include "poseobs/trace.hpp"

using namespace poseobs;

namespace {

SensorSpec reference_sensor(double noise, std::uint64_t seed) {
  SensorSpec s;
  s.bias_gyro = Vec3(-1, 1, 5);
  s.bias_accel = Vec3(1, -5, 1);
  s.noise_amplitude = noise;
  s.rng_seed = seed;
  return s;
}

SimOptions reference_options() {
  SimOptions opt;
  opt.truth0.R = exp_so3(Vec3(0, 0, -M_PI / 3));
  return opt;
}

ConstGains reference_gains() { return {1.0, 1.0, 3.4, 5.5, 1.3, std::sqrt(1.36)}; }

// ---------------------------------------------------------------------------
// Independent oracle: the error systems integrated directly, as one RK4 flow
// over a flat state vector. Written against the error equations themselves;
// shares no stepping code with the library.
// ---------------------------------------------------------------------------

Eigen::Map<Mat3> mat3_at(Eigen::VectorXd& v, int off) {
  return Eigen::Map<Mat3>(v.data() + off);
}
Eigen::Map<const Mat3> mat3_at(const Eigen::VectorXd& v, int off) {
  return Eigen::Map<const Mat3>(v.data() + off);
}
Eigen::Map<Vec3> vec3_at(Eigen::VectorXd& v, int off) {
  return Eigen::Map<Vec3>(v.data() + off);
}
Eigen::Map<const Vec3> vec3_at(const Eigen::VectorXd& v, int off) {
  return Eigen::Map<const Vec3>(v.data() + off);
}

struct OracleRow {
  Mat3 E;
  Vec3 ep, ev, ew, ea;
};

// Offsets: R 0..8, E 9..17, ew 18..20, ep 21..23, ev 24..26, ea 27..29,
// P 30..110 (riccati only).
std::vector<OracleRow> integrate_error_oracle(bool riccati, double t_end,
                                              double dt) {
  const SignalSpec sig = reference_signals();
  const double k1 = 1.0, k2 = 1.0;
  const double k3 = 3.4, k4 = 5.5, k5 = 1.3;
  const Mat3 Q = Mat3::Identity();
  const Mat9 V = 0.1 * Mat9::Identity();

  const int dim = riccati ? 111 : 30;
  Eigen::VectorXd y(dim);
  y.setZero();
  const Mat3 r0 = exp_so3(Vec3(0, 0, -M_PI / 3));
  mat3_at(y, 0) = r0;
  mat3_at(y, 9) = r0 - Mat3::Identity();
  vec3_at(y, 18) = Vec3(-1, 1, 5);
  vec3_at(y, 27) = Vec3(1, -5, 1);
  if (riccati) Eigen::Map<Mat9>(y.data() + 30) = Mat9::Identity();

  const auto rhs = [&](const Eigen::VectorXd& s, double t) {
    Eigen::VectorXd d(dim);
    d.setZero();
    const Mat3 R = mat3_at(s, 0);
    const Mat3 E = mat3_at(s, 9);
    const Vec3 ew = vec3_at(s, 18);
    const Vec3 ep = vec3_at(s, 21);
    const Vec3 ev = vec3_at(s, 24);
    const Vec3 ea = vec3_at(s, 27);
    mat3_at(d, 0) = R * hat(sig.angular_velocity(t));
    mat3_at(d, 9) = -R * hat(ew) - k1 * E;
    vec3_at(d, 18) = k2 * vee(project_skew(R.transpose() * E));
    if (!riccati) {
      vec3_at(d, 21) = ev - k3 * ep;
      vec3_at(d, 24) = -R * ea - k4 * ep;
      vec3_at(d, 27) = k5 * (R.transpose() * ep);
    } else {
      const Mat9 P = Eigen::Map<const Mat9>(s.data() + 30);
      const Mat3 K3 = P.block<3, 3>(0, 0) * Q;
      const Mat3 K4 = P.block<3, 3>(3, 0) * Q;
      const Mat3 K5 = P.block<3, 3>(6, 0) * Q;
      vec3_at(d, 21) = ev - K3 * ep;
      vec3_at(d, 24) = -R * ea - K4 * ep;
      vec3_at(d, 27) = -K5 * ep;
      Mat9 A = Mat9::Zero();
      A.block<3, 3>(0, 3) = Mat3::Identity();
      A.block<3, 3>(3, 6) = -R;
      Mat9 ctqc = Mat9::Zero();
      ctqc.block<3, 3>(0, 0) = Q;
      Eigen::Map<Mat9>(d.data() + 30) =
          A * P + P * A.transpose() - P * ctqc * P + V;
    }
    return d;
  };

  std::vector<OracleRow> rows;
  const auto n = static_cast<long>(std::llround(t_end / dt));
  rows.reserve(n);
  double t = 0.0;
  for (long i = 0; i < n; ++i) {
    rows.push_back({mat3_at(y, 9), vec3_at(y, 21), vec3_at(y, 24),
                    vec3_at(y, 18), vec3_at(y, 27)});
    const Eigen::VectorXd a = rhs(y, t);
    const Eigen::VectorXd b = rhs(y + 0.5 * dt * a, t + 0.5 * dt);
    const Eigen::VectorXd c = rhs(y + 0.5 * dt * b, t + 0.5 * dt);
    const Eigen::VectorXd e = rhs(y + dt * c, t + dt);
    y += dt / 6.0 * (a + 2.0 * b + 2.0 * c + e);
    // Mirror the run semantics: truth rotation lives on SO(3), so project it
    // and keep E consistent; P stays symmetric.
    const Mat3 r_raw = mat3_at(y, 0);
    const Mat3 r_proj = nearest_rotation(r_raw);
    mat3_at(y, 9) = (mat3_at(y, 9) + (r_proj - r_raw)).eval();
    mat3_at(y, 0) = r_proj;
    if (riccati) {
      const Mat9 P = Eigen::Map<const Mat9>(y.data() + 30);
      Eigen::Map<Mat9>(y.data() + 30) = ((P + P.transpose()) / 2.0).eval();
    }
    t = (i + 1) * dt;
  }
  return rows;
}

double sup_error_difference(const std::vector<TraceRow>& rows,
                            const std::vector<OracleRow>& oracle,
                            const Vec3& bg, const Vec3& ba) {
  EXPECT_EQ(rows.size(), oracle.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // truth minus observer, from the public trace columns
    const Mat3 E = rows[i].truth.R - rows[i].est.R;
    const Vec3 ep = rows[i].truth.p - rows[i].est.p;
    const Vec3 ev = rows[i].truth.v - rows[i].est.v;
    const Vec3 ew = bg - rows[i].est.bias_gyro;
    const Vec3 ea = ba - rows[i].est.bias_accel;
    sup = std::max(sup, (E - oracle[i].E).norm());
    sup = std::max(sup, (ep - oracle[i].ep).norm());
    sup = std::max(sup, (ev - oracle[i].ev).norm());
    sup = std::max(sup, (ew - oracle[i].ew).norm());
    sup = std::max(sup, (ea - oracle[i].ea).norm());
  }
  return sup;
}

}  // namespace

TEST(SimulateIdeal, MatchesErrorSystemOracleConstant) {
  const SimResult res = simulate_constant(
      reference_signals(), reference_sensor(0.0, 1), reference_gains(),
      reference_options());
  const auto oracle = integrate_error_oracle(false, 15.0, 1e-3);
  EXPECT_LT(sup_error_difference(res.rows, oracle, Vec3(-1, 1, 5),
                                 Vec3(1, -5, 1)),
            1e-8);
}

TEST(SimulateIdeal, MatchesErrorSystemOracleRiccati) {
  const SimResult res =
      simulate_riccati(reference_signals(), reference_sensor(0.0, 1),
                       RiccatiState{}, reference_options());
  const auto oracle = integrate_error_oracle(true, 15.0, 1e-3);
  EXPECT_LT(sup_error_difference(res.rows, oracle, Vec3(-1, 1, 5),
                                 Vec3(1, -5, 1)),
            1e-8);
}

// Frozen reference values for the noise-free benchmark run, computed with two
// independent integrators (fixed-step RK4 and an adaptive RK8 cross-check)
// during bring-up.
TEST(SimulateIdeal, FrozenFinalErrorNorms) {
  const SimResult constant = simulate_constant(
      reference_signals(), reference_sensor(0.0, 1), reference_gains(),
      reference_options());
  const auto& c = constant.final_errors;
  EXPECT_NEAR(c.norm_E_R, 0.00201946, 1e-5);
  EXPECT_NEAR(c.norm_e_p, 0.02122783, 1e-5);
  EXPECT_NEAR(c.norm_e_v, 0.06638099, 1e-5);
  EXPECT_NEAR(c.norm_e_omega, 0.00302377, 1e-5);
  EXPECT_NEAR(c.norm_e_accel, 0.09904911, 1e-5);

  const SimResult riccati =
      simulate_riccati(reference_signals(), reference_sensor(0.0, 1),
                       RiccatiState{}, reference_options());
  const auto& r = riccati.final_errors;
  EXPECT_NEAR(r.norm_E_R, 0.00201946, 1e-5);
  EXPECT_NEAR(r.norm_e_p, 0.00974363, 1e-5);
  EXPECT_NEAR(r.norm_e_v, 0.01252093, 1e-5);
  EXPECT_NEAR(r.norm_e_omega, 0.00302377, 1e-5);
  EXPECT_NEAR(r.norm_e_accel, 0.00422318, 1e-5);
}

// An observer started at the true state with the true biases stays there.
TEST(SimulateIdeal, TruthIsEquilibrium) {
  SimOptions opt = reference_options();
  opt.t_end = 1.0;
  const SensorSpec sensor = reference_sensor(0.0, 1);
  opt.observer0.R = opt.truth0.R;
  opt.observer0.p = opt.truth0.p;
  opt.observer0.v = opt.truth0.v;
  opt.observer0.bias_gyro = sensor.bias_gyro;
  opt.observer0.bias_accel = sensor.bias_accel;

  const SimResult c =
      simulate_constant(reference_signals(), sensor, reference_gains(), opt);
  const SimResult r =
      simulate_riccati(reference_signals(), sensor, RiccatiState{}, opt);
  for (const auto& res : {c, r}) {
    for (const auto& row : res.rows) {
      EXPECT_LT(row.err.total_norm(), 1e-8);
    }
    EXPECT_LT(res.final_errors.total_norm(), 1e-8);
  }
}

// Gravity cancels in the error dynamics: the recorded error norms are
// bit-identical between g = 0 and g = (0,0,-9.81).
TEST(SimulateIdeal, GravityInvarianceBitwise) {
  for (const bool riccati : {false, true}) {
    SimOptions with_g = reference_options();
    SimOptions no_g = reference_options();
    no_g.gravity = Vec3::Zero();
    const SensorSpec sensor = reference_sensor(0.0, 7);
    const auto run = [&](const SimOptions& opt) {
      return riccati ? simulate_riccati(reference_signals(), sensor,
                                        RiccatiState{}, opt)
                     : simulate_constant(reference_signals(), sensor,
                                         reference_gains(), opt);
    };
    const SimResult a = run(with_g);
    const SimResult b = run(no_g);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      EXPECT_EQ(a.rows[i].err.norm_E_R, b.rows[i].err.norm_E_R);
      EXPECT_EQ(a.rows[i].err.norm_e_p, b.rows[i].err.norm_e_p);
      EXPECT_EQ(a.rows[i].err.norm_e_v, b.rows[i].err.norm_e_v);
      EXPECT_EQ(a.rows[i].err.norm_e_omega, b.rows[i].err.norm_e_omega);
      EXPECT_EQ(a.rows[i].err.norm_e_accel, b.rows[i].err.norm_e_accel);
      EXPECT_EQ(a.rows[i].err.V1, b.rows[i].err.V1);
    }
  }
}

TEST(SimulateSampled, DeterministicPerSeed) {
  SimOptions opt = reference_options();
  opt.t_end = 1.0;
  opt.mode = MeasurementMode::sampled;
  const SimResult a = simulate_constant(reference_signals(),
                                        reference_sensor(0.01, 5),
                                        reference_gains(), opt);
  const SimResult b = simulate_constant(reference_signals(),
                                        reference_sensor(0.01, 5),
                                        reference_gains(), opt);
  const SimResult c = simulate_constant(reference_signals(),
                                        reference_sensor(0.01, 6),
                                        reference_gains(), opt);
  EXPECT_EQ(trace_to_csv(a.rows), trace_to_csv(b.rows));
  EXPECT_NE(trace_to_csv(a.rows), trace_to_csv(c.rows));
}

// The sampled (zero-order-hold) path is a first-order-accurate discretization
// of the same dynamics; at dt = 1e-3 it stays close to the ideal path.
TEST(SimulateSampled, ConsistentWithIdealPath) {
  SimOptions ideal = reference_options();
  SimOptions sampled = reference_options();
  sampled.mode = MeasurementMode::sampled;
  const SensorSpec sensor = reference_sensor(0.0, 1);
  const SimResult a =
      simulate_constant(reference_signals(), sensor, reference_gains(), ideal);
  const SimResult b = simulate_constant(reference_signals(), sensor,
                                        reference_gains(), sampled);
  EXPECT_LT(std::abs(a.final_errors.norm_e_accel - b.final_errors.norm_e_accel),
            5e-3);
  EXPECT_LT(std::abs(a.final_errors.norm_E_R - b.final_errors.norm_E_R), 5e-3);
}

TEST(SimulateIdeal, RiccatiStepHalvingOnP) {
  SimOptions coarse = reference_options();
  SimOptions fine = reference_options();
  fine.dt = 5e-4;
  const SensorSpec sensor = reference_sensor(0.0, 1);
  const SimResult a =
      simulate_riccati(reference_signals(), sensor, RiccatiState{}, coarse);
  const SimResult b =
      simulate_riccati(reference_signals(), sensor, RiccatiState{}, fine);
  EXPECT_LT((a.final_riccati->P - b.final_riccati->P).norm(), 1e-6);
}

// With gains certified in K(c) and a maneuver whose angular velocity stays
// below c, the total error decays exponentially: log-linear fit with negative
// slope and high R^2.
TEST(SimulateIdeal, CertifiedGainsConvergeExponentially) {
  SignalSpec sig;
  sig.angular_velocity = [](double t) -> Vec3 {
    return 0.8 * Vec3(-std::sin(t), std::cos(t), 0.6 * std::sin(0.5 * t));
  };
  sig.body_acceleration = [](double t) -> Vec3 {
    return Vec3(std::cos(0.5 * t), std::sin(0.5 * t), std::cos(t));
  };
  sig.omega_bound_c = 0.8 * std::sqrt(1.36);
  ASSERT_LE(sig.omega_bound_c, 1.0);
  const ConstGains gains{1.0, 1.0, 10.0, 40.0, 2.0, 1.0};
  ASSERT_TRUE(check_gains(gains.k3, gains.k4, gains.k5, gains.c).in_K);

  const SimResult res = simulate_constant(sig, reference_sensor(0.0, 1), gains,
                                          reference_options());
  std::vector<std::pair<double, double>> series;
  for (const auto& row : res.rows)
    series.emplace_back(row.t, row.err.total_norm());
  const RateFit fit = fit_exponential_rate(series, {5.0, 15.0});
  EXPECT_LT(fit.slope, 0.0);
  EXPECT_GE(fit.r2, 0.9);
}

TEST(SimulateIdeal, RejectsNoiseInIdealMode) {
  EXPECT_THROW(simulate_constant(reference_signals(), reference_sensor(0.01, 1),
                                 reference_gains(), reference_options()),
               ConfigInvalid);
}

TEST(SimulateRiccati, LostPositivityCarriesTimestamp) {
  SimOptions opt = reference_options();
  opt.dt = 0.01;
  opt.t_end = 1.0;
  RiccatiState rs;
  rs.Q = 1e6 * Mat3::Identity();
  rs.V = Mat9::Zero();
  try {
    simulate_riccati(reference_signals(), reference_sensor(0.0, 1), rs, opt);
    FAIL() << "expected LostPositivity";
  } catch (const LostPositivity& e) {
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
  }
}

TEST(SimulateIdeal, RowTimingAndV2Recording) {
  SimOptions opt = reference_options();
  opt.t_end = 0.5;
  opt.record_v2_const = true;
  const SimResult res = simulate_constant(
      reference_signals(), reference_sensor(0.0, 1), reference_gains(), opt);
  ASSERT_EQ(res.rows.size(), 500u);
  EXPECT_EQ(res.rows.front().t, 0.0);
  EXPECT_NEAR(res.rows.back().t, 0.499, 1e-12);
  for (const auto& row : res.rows) {
    ASSERT_TRUE(row.err.V2.has_value());
    EXPECT_GT(*row.err.V2, 0.0);
    EXPECT_TRUE(std::isfinite(*row.err.V2));
  }
}

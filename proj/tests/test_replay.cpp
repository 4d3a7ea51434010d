#include "poseobs/replay.hpp"

#include <filesystem>
#include <gtest/gtest.h>

#include "poseobs/simulate.hpp"
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

ConstGains reference_gains() { return {1.0, 1.0, 3.4, 5.5, 1.3, std::sqrt(1.36)}; }

std::vector<SensorLogRow> make_log(double noise, std::uint64_t seed,
                                   double t_end, double dt) {
  SimOptions opt;
  opt.t_end = t_end;
  opt.dt = dt;
  opt.mode = MeasurementMode::sampled;
  opt.truth0.R = exp_so3(Vec3(0, 0, -M_PI / 3));
  const SimResult res = simulate_constant(
      reference_signals(), reference_sensor(noise, seed), reference_gains(), opt);
  return trace_measurements(res.rows);
}

}  // namespace

TEST(Replay, ValidationErrors) {
  const ConstGains gains = reference_gains();
  EXPECT_THROW(replay_constant({}, gains), EmptyLog);

  std::vector<SensorLogRow> log(2);
  log[0].t = 0.0;
  log[1].t = 0.0;
  EXPECT_THROW(replay_constant(log, gains), NonMonotoneTime);

  log[1].t = 0.6;
  EXPECT_THROW(replay_constant(log, gains), GapTooLarge);
}

TEST(Replay, SubSteppingMatchesManualIntegration) {
  std::vector<SensorLogRow> log(2);
  log[0].t = 0.0;
  log[0].R_m = exp_so3(Vec3(0.1, 0.2, 0.3));
  log[0].p_m = Vec3(1, 0, -1);
  log[0].omega_m = Vec3(0.5, 0, 0);
  log[0].accel_m = Vec3(0, 0.5, 0);
  log[1] = log[0];
  log[1].t = 0.05;  // five sub-steps of 0.01

  const ConstGains gains = reference_gains();
  ReplayOptions opt;
  const ReplayResult res = replay_constant(log, gains, opt);
  ASSERT_EQ(res.rows.size(), 2u);

  ObserverState manual;
  for (int i = 0; i < 5; ++i) {
    manual = step_observer_const(manual, log[0].frame(), opt.gravity, gains, 0.01);
  }
  EXPECT_EQ(res.rows[1].est.R, manual.R);
  EXPECT_EQ(res.rows[1].est.bias_accel, manual.bias_accel);
}

// Closed loop: a log generated by the noise-free simulator feeds back through
// replay and recovers the injected biases.
TEST(Replay, RecoversInjectedBiases) {
  const auto log = make_log(0.0, 1, 40.0, 0.01);
  ReplayOptions opt;
  {
    const ReplayResult res = replay_constant(log, reference_gains(), opt);
    EXPECT_LT((res.gyro.mean - Vec3(-1, 1, 5)).cwiseAbs().maxCoeff(), 0.01);
    EXPECT_LT((res.accel.mean - Vec3(1, -5, 1)).cwiseAbs().maxCoeff(), 0.01);
    EXPECT_TRUE(res.converged_gyro);
  }
  {
    const ReplayResult res = replay_riccati(log, RiccatiState{}, opt);
    EXPECT_LT((res.gyro.mean - Vec3(-1, 1, 5)).cwiseAbs().maxCoeff(), 0.01);
    EXPECT_LT((res.accel.mean - Vec3(1, -5, 1)).cwiseAbs().maxCoeff(), 0.01);
  }
}

// Adding a constant to both inertial channels shifts the converged bias
// estimates by exactly that constant, and leaves the rest of the tail alone.
TEST(Replay, AddedBiasShiftsEstimates) {
  const auto log = make_log(0.0, 1, 40.0, 0.01);
  ReplayOptions plain;
  ReplayOptions shifted;
  shifted.add_bias = Vec3(10, 10, 10);
  const ReplayResult a = replay_riccati(log, RiccatiState{}, plain);
  const ReplayResult b = replay_riccati(log, RiccatiState{}, shifted);
  EXPECT_LT(((b.gyro.mean - a.gyro.mean) - Vec3(10, 10, 10)).cwiseAbs().maxCoeff(),
            0.05);
  EXPECT_LT(((b.accel.mean - a.accel.mean) - Vec3(10, 10, 10))
                .cwiseAbs()
                .maxCoeff(),
            0.05);
  // Pose estimates in the tail are unaffected by the shift.
  const auto& ra = a.rows.back().est;
  const auto& rb = b.rows.back().est;
  EXPECT_LT((ra.R - rb.R).norm(), 0.05);
  EXPECT_LT((ra.p - rb.p).norm(), 0.05);
}

// Re-ingesting a trace's measurement columns reproduces the simulated
// observer trajectory.
TEST(Replay, ClosureWithSampledSimulation) {
  SimOptions opt;
  opt.t_end = 2.0;
  opt.mode = MeasurementMode::sampled;
  opt.truth0.R = exp_so3(Vec3(0, 0, -M_PI / 3));
  const SensorSpec sensor = reference_sensor(0.01, 11);

  const auto dir = std::filesystem::temp_directory_path() / "poseobs_replay";
  std::filesystem::create_directories(dir);
  const std::string trace_path = (dir / "trace.csv").string();
  const std::string log_path = (dir / "log.csv").string();

  for (const bool riccati : {false, true}) {
    const SimResult sim =
        riccati ? simulate_riccati(reference_signals(), sensor, RiccatiState{},
                                   opt)
                : simulate_constant(reference_signals(), sensor,
                                    reference_gains(), opt);
    // Through the files, as a user would.
    write_trace(trace_path, sim.rows);
    write_sensor_log(log_path, trace_measurements(read_trace(trace_path)));
    const SensorLog log = read_sensor_log(log_path);

    ReplayOptions ropt;
    const ReplayResult rep =
        riccati ? replay_riccati(log.rows, RiccatiState{}, ropt)
                : replay_constant(log.rows, reference_gains(), ropt);
    ASSERT_EQ(rep.rows.size(), sim.rows.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      sup = std::max(sup, (rep.rows[i].est.R - sim.rows[i].est.R).norm());
      sup = std::max(sup, (rep.rows[i].est.p - sim.rows[i].est.p).norm());
      sup = std::max(sup, (rep.rows[i].est.v - sim.rows[i].est.v).norm());
      sup = std::max(
          sup, (rep.rows[i].est.bias_gyro - sim.rows[i].est.bias_gyro).norm());
      sup = std::max(sup, (rep.rows[i].est.bias_accel -
                           sim.rows[i].est.bias_accel)
                              .norm());
    }
    EXPECT_LT(sup, 1e-9);
  }
}

TEST(Replay, SummaryFitFieldsPopulated) {
  const auto log = make_log(0.0, 1, 20.0, 0.01);
  const ReplayResult res = replay_constant(log, reference_gains(), {});
  EXPECT_LT(res.summary.fitted_rate, 0.0);
  EXPECT_GT(res.summary.fit_r2, 0.5);
  EXPECT_NEAR(res.summary.window.first, 10.0, 0.01);
}

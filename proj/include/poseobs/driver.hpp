#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "poseobs/config.hpp"
#include "poseobs/replay.hpp"
#include "poseobs/trace.hpp"

namespace poseobs {

inline SignalSpec make_signal(const RunConfig& c) {
  if (!c.signal_preset.empty()) {
    if (c.signal_preset != "paper-sec4") {
      throw ConfigInvalid("unknown signal preset '" + c.signal_preset + "'");
    }
    return reference_signals();
  }
  SignalSpec sig;
  sig.angular_velocity = sinusoid_signal(c.omega_x, c.omega_y, c.omega_z);
  sig.body_acceleration = sinusoid_signal(c.accel_x, c.accel_y, c.accel_z);
  sig.omega_bound_c =
      estimate_omega_bound(sig.angular_velocity, c.t_end, c.dt);
  return sig;
}

inline HomogeneousPointSet make_landmarks(const RunConfig& c) {
  if (c.landmarks == "cube") return SensorSpec::default_landmarks();
  std::vector<Vec3> pts;
  std::stringstream ss(c.landmarks);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    pts.push_back(detail::parse_vec3(tok, "sensor.landmarks"));
  }
  if (pts.size() < 4) {
    throw ConfigInvalid("sensor.landmarks: need at least 4 points");
  }
  Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    m.col(static_cast<Eigen::Index>(i)) = pts[i];
  return HomogeneousPointSet::from_points(m);
}

inline SensorSpec make_sensor(const RunConfig& c) {
  SensorSpec s{c.bias_gyro, c.bias_accel, c.sensor_noise, make_landmarks(c),
               c.seed};
  return s;
}

inline ConstGains make_const_gains(const RunConfig& c, const SignalSpec& sig) {
  ConstGains g{c.k1, c.k2, c.k3, c.k4, c.k5,
               c.omega_bound > 0.0 ? c.omega_bound : sig.omega_bound_c};
  return g;
}

/// Replay variant: no simulated signal, so the bound must come from the
/// config (it only affects feasibility reporting, not the dynamics).
inline ConstGains make_const_gains(const RunConfig& c) {
  ConstGains g{c.k1, c.k2, c.k3, c.k4, c.k5,
               c.omega_bound > 0.0 ? c.omega_bound : 1.0};
  return g;
}

inline RiccatiState make_riccati(const RunConfig& c) {
  RiccatiState rs;
  rs.P = c.p0_scale * Mat9::Identity();
  rs.Q = c.q_scale * Mat3::Identity();
  rs.V = c.v_scale * Mat9::Identity();
  rs.k1 = c.riccati_k1;
  rs.k2 = c.riccati_k2;
  return rs;
}

inline SimOptions make_sim_options(const RunConfig& c) {
  SimOptions opt;
  opt.dt = c.dt;
  opt.t_end = c.t_end;
  opt.gravity = c.gravity;
  opt.record_v2_const = c.record_v2_const;
  if (c.measurements == "ideal") {
    opt.mode = MeasurementMode::ideal;
  } else if (c.measurements == "sampled") {
    opt.mode = MeasurementMode::sampled;
  } else {
    opt.mode = c.sensor_noise == 0.0 ? MeasurementMode::ideal
                                     : MeasurementMode::sampled;
  }
  opt.truth0.R = exp_so3(c.truth_rotvec0);
  opt.truth0.p = c.truth_p0;
  opt.truth0.v = c.truth_v0;
  return opt;
}

inline nlohmann::json feasibility_to_json(const FeasibilityReport& rep,
                                          double k3, double k4, double k5,
                                          double c) {
  nlohmann::json j;
  j["k3"] = k3;
  j["k4"] = k4;
  j["k5"] = k5;
  j["c"] = c;
  j["in_K"] = rep.in_K;
  j["Y_min_eig"] = rep.Y_min_eig;
  j["Z_min_eig"] = rep.Z_min_eig;
  j["matrix_inequalities_hold"] = rep.matrix_inequalities_hold();
  j["violated_conditions"] = rep.violated_conditions;
  return j;
}

inline std::string feasibility_to_text(const FeasibilityReport& rep, double k3,
                                       double k4, double k5, double c) {
  std::ostringstream out;
  out << "gains (k3, k4, k5) = (" << k3 << ", " << k4 << ", " << k5
      << "), omega bound c = " << c << "\n";
  out << "  in K(c):                 " << (rep.in_K ? "yes" : "no") << "\n";
  out << "  lambda_min(Y):           " << rep.Y_min_eig << "\n";
  out << "  lambda_min(Z):           " << rep.Z_min_eig << "\n";
  out << "  matrix inequalities Y>0, Z>0: "
      << (rep.matrix_inequalities_hold() ? "hold" : "violated") << "\n";
  if (!rep.violated_conditions.empty()) {
    out << "  violated K(c) conditions:\n";
    for (const auto& v : rep.violated_conditions) out << "    - " << v << "\n";
  }
  return out.str();
}

/// check-gains mode: evaluate feasibility of the configured gain triple.
inline FeasibilityReport run_check_gains(const RunConfig& cfg) {
  validate_config(cfg);
  const SignalSpec sig = make_signal(cfg);
  const ConstGains g = make_const_gains(cfg, sig);
  return check_gains(g.k3, g.k4, g.k5, g.c);
}

struct ObserverRunOutput {
  std::string name;
  std::string trace_path;
  ConvergenceSummary summary;
  BiasSummary gyro;
  BiasSummary accel;
};

struct SimulationOutput {
  std::vector<ObserverRunOutput> runs;
  std::string log_path;  // empty unless emit_log
};

namespace detail {

inline ObserverRunOutput summarize_run(const std::string& name,
                                       const std::string& trace_path,
                                       const SimResult& res,
                                       double tail_fraction) {
  ObserverRunOutput out;
  out.name = name;
  out.trace_path = trace_path;
  std::vector<Vec3> gyro_series, accel_series;
  std::vector<std::pair<double, double>> err_series;
  for (const auto& r : res.rows) {
    gyro_series.push_back(r.est.bias_gyro);
    accel_series.push_back(r.est.bias_accel);
    err_series.emplace_back(r.t, r.err.total_norm());
  }
  out.gyro = summarize_bias(gyro_series, tail_fraction);
  out.accel = summarize_bias(accel_series, tail_fraction);
  out.summary.final_bias_gyro = out.gyro.mean;
  out.summary.final_bias_accel = out.accel.mean;
  const double t1 = res.rows.back().t;
  out.summary.window = {0.5 * t1, t1};
  try {
    const RateFit fit = fit_exponential_rate(err_series, out.summary.window);
    out.summary.fitted_rate = fit.slope;
    out.summary.fit_r2 = fit.r2;
  } catch (const InsufficientData&) {
  }
  return out;
}

inline nlohmann::json summary_to_json(const ObserverRunOutput& run) {
  nlohmann::json j;
  j["observer"] = run.name;
  j["trace"] = run.trace_path;
  j["fitted_rate"] = run.summary.fitted_rate;
  j["fit_r2"] = run.summary.fit_r2;
  j["window"] = {run.summary.window.first, run.summary.window.second};
  j["bias_gyro_tail_mean"] = {run.gyro.mean.x(), run.gyro.mean.y(),
                              run.gyro.mean.z()};
  j["bias_gyro_max_deviation"] = run.gyro.max_deviation;
  j["bias_accel_tail_mean"] = {run.accel.mean.x(), run.accel.mean.y(),
                               run.accel.mean.z()};
  j["bias_accel_max_deviation"] = run.accel.max_deviation;
  return j;
}

}  // namespace detail

/// simulate mode: run the configured observers, write per-step traces and
/// JSON summaries into the output directory.
inline SimulationOutput run_simulation(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.mode != "simulate") throw ConfigInvalid("run_simulation: mode mismatch");
  const SignalSpec sig = make_signal(cfg);
  const SensorSpec sensor = make_sensor(cfg);
  const SimOptions opt = make_sim_options(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  SimulationOutput output;
  std::vector<TraceRow> log_source;
  const auto handle = [&](const std::string& name, SimResult res) {
    const std::string path = cfg.out_dir + "/trace_" + name + ".csv";
    write_trace(path, res.rows);
    auto run = detail::summarize_run(name, path, res, cfg.tail_fraction);
    write_text(cfg.out_dir + "/summary_" + name + ".json",
               detail::summary_to_json(run).dump() + "\n");
    output.runs.push_back(std::move(run));
    if (log_source.empty()) log_source = std::move(res.rows);
  };

  if (cfg.observer == "constant" || cfg.observer == "both") {
    handle("constant",
           simulate_constant(sig, sensor, make_const_gains(cfg, sig), opt));
  }
  if (cfg.observer == "riccati" || cfg.observer == "both") {
    handle("riccati", simulate_riccati(sig, sensor, make_riccati(cfg), opt));
  }
  if (cfg.emit_log && !log_source.empty()) {
    output.log_path = cfg.out_dir + "/sensor_log.csv";
    write_sensor_log(output.log_path, trace_measurements(log_source));
  }
  return output;
}

struct ReplayOutput {
  std::vector<std::pair<std::string, ReplayResult>> runs;
  std::vector<std::string> warnings;
};

/// replay mode: drive the configured observers across a recorded log.
inline ReplayOutput run_replay(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.mode != "replay") throw ConfigInvalid("run_replay: mode mismatch");
  if (cfg.replay_log.empty() || !std::filesystem::exists(cfg.replay_log)) {
    throw ConfigInvalid("replay.log does not exist: " + cfg.replay_log);
  }
  SensorLog log = read_sensor_log(cfg.replay_log);
  std::filesystem::create_directories(cfg.out_dir);

  ReplayOptions opt;
  opt.gravity = cfg.gravity;
  opt.add_bias = cfg.add_bias;
  opt.tail_fraction = cfg.tail_fraction;

  ReplayOutput output;
  output.warnings = log.warnings;
  const auto handle = [&](const std::string& name, ReplayResult res) {
    std::string text =
        "t,est_r11,est_r12,est_r13,est_r21,est_r22,est_r23,est_r31,est_r32,"
        "est_r33,est_px,est_py,est_pz,est_vx,est_vy,est_vz,est_bwx,est_bwy,"
        "est_bwz,est_bax,est_bay,est_baz\n";
    for (const auto& row : res.rows) {
      std::vector<std::string> f;
      f.push_back(format_double(row.t));
      detail::push_mat(f, row.est.R);
      detail::push_vec(f, row.est.p);
      detail::push_vec(f, row.est.v);
      detail::push_vec(f, row.est.bias_gyro);
      detail::push_vec(f, row.est.bias_accel);
      text += join_csv(f);
      text += '\n';
    }
    write_text(cfg.out_dir + "/replay_" + name + ".csv", text);

    nlohmann::json j;
    j["observer"] = name;
    j["rows"] = res.rows.size();
    j["fitted_rate"] = res.summary.fitted_rate;
    j["fit_r2"] = res.summary.fit_r2;
    j["bias_gyro_tail_mean"] = {res.gyro.mean.x(), res.gyro.mean.y(),
                                res.gyro.mean.z()};
    j["bias_gyro_max_deviation"] = res.gyro.max_deviation;
    j["bias_gyro_converged"] = res.converged_gyro;
    j["bias_accel_tail_mean"] = {res.accel.mean.x(), res.accel.mean.y(),
                                 res.accel.mean.z()};
    j["bias_accel_max_deviation"] = res.accel.max_deviation;
    j["bias_accel_converged"] = res.converged_accel;
    write_text(cfg.out_dir + "/replay_summary_" + name + ".json",
               j.dump() + "\n");
    output.runs.emplace_back(name, std::move(res));
  };

  if (cfg.observer == "constant" || cfg.observer == "both") {
    handle("constant", replay_constant(log.rows, make_const_gains(cfg), opt));
  }
  if (cfg.observer == "riccati" || cfg.observer == "both") {
    handle("riccati", replay_riccati(log.rows, make_riccati(cfg), opt));
  }
  return output;
}

}  // namespace poseobs

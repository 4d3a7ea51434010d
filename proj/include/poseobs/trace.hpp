#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "poseobs/io.hpp"
#include "poseobs/sensor_log.hpp"
#include "poseobs/simulate.hpp"

namespace poseobs {

inline std::string trace_header() {
  std::vector<std::string> cols{"t"};
  const auto mat = [&](const std::string& pre) {
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        cols.push_back(pre + std::to_string(i) + std::to_string(j));
  };
  const auto vec = [&](const std::string& pre) {
    for (const char* ax : {"x", "y", "z"}) cols.push_back(pre + ax);
  };
  mat("true_r");
  vec("true_p");
  vec("true_v");
  mat("meas_r");
  vec("meas_p");
  vec("meas_w");
  vec("meas_a");
  mat("est_r");
  vec("est_p");
  vec("est_v");
  vec("est_bw");
  vec("est_ba");
  for (const char* c : {"err_rot", "err_pos", "err_vel", "err_bw", "err_ba",
                        "v1", "v2", "p_min_eig", "p_max_eig"}) {
    cols.emplace_back(c);
  }
  return join_csv(cols);
}

namespace detail {

inline void push_mat(std::vector<std::string>& f, const Mat3& m) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.push_back(format_double(m(i, j)));
}
inline void push_vec(std::vector<std::string>& f, const Vec3& v) {
  for (int i = 0; i < 3; ++i) f.push_back(format_double(v(i)));
}

}  // namespace detail

inline std::string trace_to_csv(const std::vector<TraceRow>& rows) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string text = trace_header();
  text += '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f;
    f.reserve(64);
    f.push_back(format_double(r.t));
    detail::push_mat(f, r.truth.R);
    detail::push_vec(f, r.truth.p);
    detail::push_vec(f, r.truth.v);
    detail::push_mat(f, r.meas.R_m);
    detail::push_vec(f, r.meas.p_m);
    detail::push_vec(f, r.meas.omega_m);
    detail::push_vec(f, r.meas.accel_m);
    detail::push_mat(f, r.est.R);
    detail::push_vec(f, r.est.p);
    detail::push_vec(f, r.est.v);
    detail::push_vec(f, r.est.bias_gyro);
    detail::push_vec(f, r.est.bias_accel);
    f.push_back(format_double(r.err.norm_E_R));
    f.push_back(format_double(r.err.norm_e_p));
    f.push_back(format_double(r.err.norm_e_v));
    f.push_back(format_double(r.err.norm_e_omega));
    f.push_back(format_double(r.err.norm_e_accel));
    f.push_back(format_double(r.err.V1));
    f.push_back(format_double(r.err.V2.value_or(nan)));
    f.push_back(format_double(r.p_min_eig.value_or(nan)));
    f.push_back(format_double(r.p_max_eig.value_or(nan)));
    text += join_csv(f);
    text += '\n';
  }
  return text;
}

inline void write_trace(const std::string& path,
                        const std::vector<TraceRow>& rows) {
  write_text(path, trace_to_csv(rows));
}

inline std::vector<TraceRow> read_trace(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != trace_header()) {
    throw BadLogRow("trace header mismatch in " + path);
  }
  std::vector<TraceRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = split_csv_line(lines[n]);
    if (f.size() != 64) {
      throw BadLogRow("trace row " + std::to_string(n) + ": expected 64 fields");
    }
    TraceRow r;
    std::size_t k = 0;
    const auto mat = [&](Mat3& m) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = parse_double(f[k++]);
    };
    const auto vec = [&](Vec3& v) {
      for (int i = 0; i < 3; ++i) v(i) = parse_double(f[k++]);
    };
    r.t = parse_double(f[k++]);
    mat(r.truth.R);
    vec(r.truth.p);
    vec(r.truth.v);
    mat(r.meas.R_m);
    vec(r.meas.p_m);
    vec(r.meas.omega_m);
    vec(r.meas.accel_m);
    r.meas.t = r.t;
    mat(r.est.R);
    vec(r.est.p);
    vec(r.est.v);
    vec(r.est.bias_gyro);
    vec(r.est.bias_accel);
    r.err.t = r.t;
    r.err.norm_E_R = parse_double(f[k++]);
    r.err.norm_e_p = parse_double(f[k++]);
    r.err.norm_e_v = parse_double(f[k++]);
    r.err.norm_e_omega = parse_double(f[k++]);
    r.err.norm_e_accel = parse_double(f[k++]);
    r.err.V1 = parse_double(f[k++]);
    const double v2 = parse_double(f[k++]);
    if (!std::isnan(v2)) r.err.V2 = v2;
    const double pmin = parse_double(f[k++]);
    if (!std::isnan(pmin)) r.p_min_eig = pmin;
    const double pmax = parse_double(f[k++]);
    if (!std::isnan(pmax)) r.p_max_eig = pmax;
    rows.push_back(std::move(r));
  }
  return rows;
}

/// The measurement columns of a trace, in sensor-log form.
inline std::vector<SensorLogRow> trace_measurements(
    const std::vector<TraceRow>& rows) {
  std::vector<SensorLogRow> log;
  log.reserve(rows.size());
  for (const auto& r : rows) {
    log.push_back({r.t, r.meas.R_m, r.meas.p_m, r.meas.omega_m, r.meas.accel_m});
  }
  return log;
}

}  // namespace poseobs

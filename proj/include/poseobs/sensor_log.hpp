#pragma once

#include <string>
#include <vector>

#include "poseobs/dynamics.hpp"
#include "poseobs/io.hpp"

namespace poseobs {

/// One pose + inertial sample of a recorded sensor log.
struct SensorLogRow {
  double t = 0.0;
  Mat3 R_m = Mat3::Identity();
  Vec3 p_m = Vec3::Zero();
  Vec3 omega_m = Vec3::Zero();
  Vec3 accel_m = Vec3::Zero();

  MeasurementFrame frame() const { return {t, R_m, p_m, omega_m, accel_m}; }
};

inline constexpr const char* kSensorLogHeader =
    "t,r11,r12,r13,r21,r22,r23,r31,r32,r33,px,py,pz,wx,wy,wz,ax,ay,az";

inline void write_sensor_log(const std::string& path,
                             const std::vector<SensorLogRow>& rows) {
  std::string text(kSensorLogHeader);
  text += '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f;
    f.reserve(19);
    f.push_back(format_double(r.t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f.push_back(format_double(r.R_m(i, j)));
    for (int i = 0; i < 3; ++i) f.push_back(format_double(r.p_m(i)));
    for (int i = 0; i < 3; ++i) f.push_back(format_double(r.omega_m(i)));
    for (int i = 0; i < 3; ++i) f.push_back(format_double(r.accel_m(i)));
    text += join_csv(f);
    text += '\n';
  }
  write_text(path, text);
}

struct SensorLog {
  std::vector<SensorLogRow> rows;
  std::vector<std::string> warnings;
};

/// Reads and validates a sensor log: exact header, strictly increasing time,
/// rotation blocks orthogonal within the measured-data tolerances (warning
/// above 1e-3, rejection above 1e-1).
inline SensorLog read_sensor_log(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kSensorLogHeader) {
    throw BadLogRow("sensor log header mismatch in " + path);
  }
  SensorLog log;
  double prev_t = 0.0;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = split_csv_line(lines[n]);
    if (f.size() != 19) {
      throw BadLogRow("sensor log row " + std::to_string(n) +
                      ": expected 19 fields, got " + std::to_string(f.size()));
    }
    SensorLogRow r;
    std::size_t k = 0;
    r.t = parse_double(f[k++]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.R_m(i, j) = parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) r.p_m(i) = parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) r.omega_m(i) = parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) r.accel_m(i) = parse_double(f[k++]);

    const double defect =
        (r.R_m.transpose() * r.R_m - Mat3::Identity()).norm();
    if (defect > tol::log_orth_reject) {
      throw BadLogRow("sensor log row " + std::to_string(n) +
                      ": rotation defect " + format_double(defect));
    }
    if (defect > tol::log_orth_warn) {
      log.warnings.push_back("row " + std::to_string(n) +
                             ": rotation orthogonality defect " +
                             format_double(defect));
    }
    if (!log.rows.empty() && !(r.t > prev_t)) {
      throw NonMonotoneTime("sensor log row " + std::to_string(n) +
                            ": time not strictly increasing");
    }
    prev_t = r.t;
    log.rows.push_back(r);
  }
  if (log.rows.empty()) throw EmptyLog("sensor log has no rows: " + path);
  return log;
}

}  // namespace poseobs
